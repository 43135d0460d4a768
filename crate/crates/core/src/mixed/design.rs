use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::measurement::{cone_axes, Axis, QuorumSpec};
use crate::spin::{rng_from_seed, SpinValue};

use super::map::build_map;

/// Grid size for the cone opening-angle sweep.
pub const CONE_GRID_POINTS: usize = 89;

/// Opening angle used when no design is requested.
pub const DEFAULT_CONE_THETA: f64 = 1.0;

const REFINE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignStrategy {
    /// Sweep the opening angle of a `K`-axis cone.
    ConeScan,
    /// Best of `frames` seeded uniformly random axis sets.
    RandomFrames { frames: usize, seed: u64 },
}

impl FromStr for DesignStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cone-scan" => Ok(DesignStrategy::ConeScan),
            "random-frames" => Ok(DesignStrategy::RandomFrames { frames: 256, seed: 0 }),
            other => Err(Error::InvalidParameter(format!("unknown design strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Design {
    pub quorum: QuorumSpec,
    pub condition_number: f64,
    /// Opening angle for cone designs.
    pub theta: Option<f64>,
    pub candidates: usize,
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axes {}", self.quorum.len())?;
        if let Some(theta) = self.theta {
            writeln!(f, "theta {theta:.12}")?;
        }
        writeln!(f, "condition {:.6e}", self.condition_number)?;
        writeln!(f, "candidates {}", self.candidates)
    }
}

fn cone_condition(spin: SpinValue, count: usize, theta: f64) -> Result<f64> {
    Ok(build_map(spin, &cone_axes(count, theta)?)?.condition_number())
}

/// Grid angles `θ_i = (i+1)/N · π/2`, `i = 0..N`.
pub fn cone_grid() -> impl Iterator<Item = f64> {
    (1..=CONE_GRID_POINTS).map(|i| i as f64 / CONE_GRID_POINTS as f64 * FRAC_PI_2)
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`; keeps
/// `fallback` unless a strictly better point is found.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, fallback: (f64, f64)) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > REFINE_TOL {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    let (x, fx) = if fa <= fb { (a, fa) } else { (b, fb) };
    if fx < fallback.1 {
        (x, fx)
    } else {
        fallback
    }
}

fn cone_scan(spin: SpinValue, count: usize) -> Result<Design> {
    let grid: Vec<f64> = cone_grid().collect();
    let conds = grid.iter().map(|&t| cone_condition(spin, count, t)).collect::<Result<Vec<_>>>()?;
    // strict `<` keeps the smallest θ among ties
    let mut best: Option<usize> = None;
    for (i, &c) in conds.iter().enumerate() {
        if c.is_finite() && best.is_none_or(|b| c < conds[b]) {
            best = Some(i);
        }
    }
    let i = best.ok_or(Error::NoInjectiveConfiguration { candidates: grid.len() })?;
    let lo = if i == 0 { grid[0] / 2.0 } else { grid[i - 1] };
    let hi = grid.get(i + 1).copied().unwrap_or(grid[i]);
    let objective = |t: f64| cone_condition(spin, count, t).unwrap_or(f64::INFINITY);
    let (theta, condition_number) = golden_section(objective, lo, hi, (grid[i], conds[i]));
    Ok(Design { quorum: cone_axes(count, theta)?, condition_number, theta: Some(theta), candidates: grid.len() })
}

fn random_axis<R: Rng>(rng: &mut R) -> Result<Axis> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    Axis::new(z.acos(), phi)
}

fn lexicographic_key(q: &QuorumSpec) -> Vec<(f64, f64)> {
    q.axes().iter().map(|a| (a.theta(), a.phi())).collect()
}

fn random_frames(spin: SpinValue, count: usize, frames: usize, seed: u64) -> Result<Design> {
    if frames == 0 {
        return Err(Error::InvalidParameter("frames must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut best: Option<(f64, QuorumSpec)> = None;
    for _ in 0..frames {
        let axes = (0..count).map(|_| random_axis(&mut rng)).collect::<Result<Vec<_>>>()?;
        let q = QuorumSpec::explicit(axes)?;
        let c = build_map(spin, &q)?.condition_number();
        if !c.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bc, bq)) => c < *bc || (c == *bc && lexicographic_key(&q) < lexicographic_key(bq)),
        };
        if better {
            best = Some((c, q));
        }
    }
    let (condition_number, quorum) = best.ok_or(Error::NoInjectiveConfiguration { candidates: frames })?;
    Ok(Design { quorum, condition_number, theta: None, candidates: frames })
}

/// Searches for a `count`-axis quorum with the smallest condition number on
/// the trace-one slice.
pub fn design_axes(spin: SpinValue, count: usize, strategy: DesignStrategy) -> Result<Design> {
    if count == 0 {
        return Err(Error::InvalidParameter("at least one axis is required".into()));
    }
    match strategy {
        DesignStrategy::ConeScan => cone_scan(spin, count),
        DesignStrategy::RandomFrames { frames, seed } => random_frames(spin, count, frames, seed),
    }
}

/// Cone at the default opening angle.
pub fn default_cone(count: usize) -> Result<QuorumSpec> {
    cone_axes(count, DEFAULT_CONE_THETA)
}

/// Smallest cone size (up to `max_axes`) whose scan finds an injective
/// configuration.
pub fn minimal_injective_axes(spin: SpinValue, max_axes: usize) -> Option<(usize, Design)> {
    (1..=max_axes).find_map(|k| cone_scan(spin, k).ok().map(|d| (k, d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::default_tripod;

    #[test]
    fn spin_half_three_axes_beats_orthogonal_frame() {
        let tripod = build_map(SpinValue::HALF, &default_tripod()).unwrap().condition_number();
        let d = design_axes(SpinValue::HALF, 3, DesignStrategy::ConeScan).unwrap();
        assert!(d.condition_number <= tripod + 1e-9, "{} vs {tripod}", d.condition_number);
        // the optimal three-axis cone is an orthogonal frame: cos²θ = 1/3
        assert!((d.theta.unwrap() - (1.0f64 / 3.0).sqrt().acos()).abs() < 1e-6);
    }

    #[test]
    fn spin_one_two_axes_never_injective() {
        for strategy in [DesignStrategy::ConeScan, DesignStrategy::RandomFrames { frames: 32, seed: 1 }] {
            assert!(matches!(
                design_axes(SpinValue::ONE, 2, strategy),
                Err(Error::NoInjectiveConfiguration { .. })
            ));
        }
    }

    #[test]
    fn spin_one_four_axes_rank_deficient_everywhere() {
        // rank is capped at 8 < 9 for any four axes
        assert!(matches!(
            design_axes(SpinValue::ONE, 4, DesignStrategy::ConeScan),
            Err(Error::NoInjectiveConfiguration { candidates: CONE_GRID_POINTS })
        ));
    }

    #[test]
    fn cone_scan_is_deterministic() {
        let a = design_axes(SpinValue::ONE, 5, DesignStrategy::ConeScan).unwrap();
        let b = design_axes(SpinValue::ONE, 5, DesignStrategy::ConeScan).unwrap();
        assert_eq!(a.quorum, b.quorum);
        assert_eq!(a.condition_number, b.condition_number);
        assert!(a.condition_number.is_finite());
        let grid_best = cone_grid()
            .map(|t| cone_condition(SpinValue::ONE, 5, t).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(a.condition_number <= grid_best);
    }

    #[test]
    fn random_frames_seeded() {
        let s = DesignStrategy::RandomFrames { frames: 40, seed: 7 };
        let a = design_axes(SpinValue::ONE, 6, s).unwrap();
        let b = design_axes(SpinValue::ONE, 6, s).unwrap();
        assert_eq!(a.quorum, b.quorum);
        assert!(a.condition_number.is_finite());
    }

    #[test]
    fn minimal_cone_size_is_four_s_plus_one() {
        for two_s in 1..=3u32 {
            let (k, _) = minimal_injective_axes(SpinValue::from_two_s(two_s), 10).unwrap();
            assert_eq!(k, 2 * two_s as usize + 1);
        }
    }
}

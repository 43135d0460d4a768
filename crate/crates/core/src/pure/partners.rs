use crate::error::{Error, Result};
use crate::linalg::{c, CVector};
use crate::measurement::{sg_probabilities_pure, Axis, IntensityTable};
use crate::spin::PureState;

use super::{PhaseVector, SAME_RAY_FIDELITY};

/// Amplitudes at or below this modulus make a state non-generic.
pub const ZERO_AMPLITUDE_TOL: f64 = 1e-9;

/// Azimuth of the infinitesimal tilt of `z`. Tilting toward `x` is a
/// rotation about `y`, whose first-order effect on the `z` intensities
/// depends only on `Re(a*_m a_{m+1})`.
pub const NEARBY_TILT_PHI: f64 = 0.0;

/// Candidates sharing the `z` intensities and their first-order response to
/// a tilt of `z` toward `x`.
#[derive(Debug, Clone)]
pub struct PartnerSet {
    pub candidates: Vec<PureState>,
    /// Bit `j` set means the phase difference between indices `j` and
    /// `j + 1` was reversed.
    pub signs: Vec<u32>,
    pub selected: Option<usize>,
}

impl PartnerSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Sign pattern written `+`/`−` per consecutive pair, lowest index first.
    pub fn pattern_string(&self, i: usize) -> String {
        let bits = self.candidates[i].spin().two_s();
        (0..bits).map(|j| if self.signs[i] >> j & 1 == 1 { '-' } else { '+' }).collect()
    }
}

fn check_generic(psi: &PureState) -> Result<()> {
    for (j, a) in psi.amplitudes().iter().enumerate() {
        if a.norm() <= ZERO_AMPLITUDE_TOL {
            return Err(Error::ZeroAmplitude { two_m: psi.spin().two_m(j) });
        }
    }
    Ok(())
}

/// All states with the moduli of `psi` whose consecutive phase differences
/// are `±` those of `psi`, deduplicated up to global phase. Pattern 0 is
/// `psi` itself (gauge-normalized).
pub fn partners_nearby_axes(psi: &PureState) -> Result<PartnerSet> {
    check_generic(psi)?;
    let spin = psi.spin();
    let psi = psi.gauge_normal();
    let moduli: Vec<f64> = psi.amplitudes().iter().map(|z| z.norm()).collect();
    let deltas = PhaseVector::of(&psi).differences();
    let mut candidates: Vec<PureState> = Vec::new();
    let mut signs = Vec::new();
    for pattern in 0..(1u32 << spin.two_s()) {
        let mut chi = 0.0;
        let mut amps = CVector::zeros(spin.dim());
        amps[0] = c(moduli[0], 0.0);
        for (j, &delta) in deltas.iter().enumerate() {
            chi += if pattern >> j & 1 == 1 { -delta } else { delta };
            amps[j + 1] = c(moduli[j + 1] * chi.cos(), moduli[j + 1] * chi.sin());
        }
        let cand = PureState::normalized(spin, amps)?;
        if candidates.iter().all(|other| other.fidelity(&cand) <= SAME_RAY_FIDELITY) {
            candidates.push(cand);
            signs.push(pattern);
        }
    }
    Ok(PartnerSet { candidates, signs, selected: None })
}

/// Central difference `dp_m/dε` of the intensities along `z` tilted by `ε`
/// toward `x`.
pub fn first_order_response(psi: &PureState, eps: f64) -> Result<Vec<f64>> {
    let plus = sg_probabilities_pure(psi, &Axis::new(eps, NEARBY_TILT_PHI)?)?;
    let minus = sg_probabilities_pure(psi, &Axis::new(eps, NEARBY_TILT_PHI + std::f64::consts::PI)?)?;
    Ok(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * eps)).collect())
}

/// Keeps the unique candidate whose intensities on every axis of `table`
/// match within `tol`.
pub fn select_by_third_axis(partners: &PartnerSet, table: &IntensityTable, tol: f64) -> Result<(usize, PureState)> {
    if partners.is_empty() {
        return Err(Error::InvalidParameter("empty partner set".into()));
    }
    let mut matches = Vec::new();
    let mut best = f64::INFINITY;
    for (i, cand) in partners.candidates.iter().enumerate() {
        if cand.spin() != table.spin() {
            return Err(Error::DimensionMismatch { expected: table.spin().dim(), found: cand.spin().dim() });
        }
        let mut gap: f64 = 0.0;
        for (k, axis) in table.axes().iter().enumerate() {
            let p = sg_probabilities_pure(cand, axis)?;
            gap = p.iter().zip(table.probabilities(k)).map(|(a, b)| (a - b).abs()).fold(gap, f64::max);
        }
        best = best.min(gap);
        if gap <= tol {
            matches.push(i);
        }
    }
    match matches.as_slice() {
        [] => Err(Error::NoMatch { best }),
        [i] => Ok((*i, partners.candidates[*i].clone())),
        _ => Err(Error::Ambiguous { count: matches.len() }),
    }
}

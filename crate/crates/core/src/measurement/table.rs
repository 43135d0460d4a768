use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, parse_m, ParseCtx};
use crate::spin::{format_m, SpinValue};

use super::Axis;

const EXACT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Sampled { seed: u64, shots: u64 },
}

/// Outcome probabilities `p_m^{(k)}` (or counts) per axis `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTable {
    spin: SpinValue,
    axes: Vec<Axis>,
    probabilities: Vec<Vec<f64>>,
    counts: Option<Vec<Vec<u64>>>,
    provenance: Provenance,
}

impl IntensityTable {
    /// Exact probabilities; every row must be a probability vector summing to
    /// one within `1e−12`.
    pub fn exact(spin: SpinValue, axes: Vec<Axis>, probabilities: Vec<Vec<f64>>) -> Result<Self> {
        check_shape(spin, &axes, &probabilities)?;
        for (k, row) in probabilities.iter().enumerate() {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidProbabilities(format!("axis {k}: value outside [0, 1]")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > EXACT_SUM_TOL {
                return Err(Error::InvalidProbabilities(format!("axis {k}: probabilities sum to {total}")));
            }
        }
        Ok(IntensityTable { spin, axes, probabilities, counts: None, provenance: Provenance::Exact })
    }

    /// Shot-sampled counts; every row must sum to `shots`.
    pub fn sampled(spin: SpinValue, axes: Vec<Axis>, counts: Vec<Vec<u64>>, shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        for (k, row) in counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total != shots {
                return Err(Error::InvalidProbabilities(format!("axis {k}: counts sum to {total}, expected {shots}")));
            }
        }
        let probabilities: Vec<Vec<f64>> = counts
            .iter()
            .map(|row| row.iter().map(|&n| n as f64 / shots as f64).collect())
            .collect();
        check_shape(spin, &axes, &probabilities)?;
        Ok(IntensityTable {
            spin,
            axes,
            probabilities,
            counts: Some(counts),
            provenance: Provenance::Sampled { seed, shots },
        })
    }

    /// Table of arbitrary frequencies; only the shape is checked. Used for
    /// externally supplied or deliberately perturbed data.
    pub fn from_raw(spin: SpinValue, axes: Vec<Axis>, probabilities: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        check_shape(spin, &axes, &probabilities)?;
        Ok(IntensityTable { spin, axes, probabilities, counts: None, provenance })
    }

    pub fn spin(&self) -> SpinValue {
        self.spin
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn num_axes(&self) -> usize {
        self.axes.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_exact(&self) -> bool {
        self.provenance == Provenance::Exact
    }

    /// Shots per axis for sampled tables.
    pub fn shots(&self) -> Option<u64> {
        match self.provenance {
            Provenance::Sampled { shots, .. } => Some(shots),
            Provenance::Exact => None,
        }
    }

    pub fn probabilities(&self, k: usize) -> &[f64] {
        &self.probabilities[k]
    }

    pub fn all_probabilities(&self) -> &[Vec<f64>] {
        &self.probabilities
    }

    pub fn counts(&self) -> Option<&[Vec<u64>]> {
        self.counts.as_deref()
    }

    /// Probabilities stacked axis-major into a single vector.
    pub fn stacked(&self) -> Vec<f64> {
        self.probabilities.iter().flatten().copied().collect()
    }

    /// Rows `(k, 2m, p)`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, i32, f64)> + '_ {
        let spin = self.spin;
        self.probabilities
            .iter()
            .enumerate()
            .flat_map(move |(k, row)| row.iter().enumerate().map(move |(j, &p)| (k, spin.two_m(j), p)))
    }

    /// Sub-table with the given axes, in the given order.
    pub fn select(&self, indices: &[usize]) -> IntensityTable {
        IntensityTable {
            spin: self.spin,
            axes: indices.iter().map(|&k| self.axes[k]).collect(),
            probabilities: indices.iter().map(|&k| self.probabilities[k].clone()).collect(),
            counts: self.counts.as_ref().map(|c| indices.iter().map(|&k| c[k].clone()).collect()),
            provenance: self.provenance,
        }
    }

    /// Number of independent values carried by the table: every axis row
    /// minus its normalization.
    pub fn independent_values(&self) -> usize {
        self.axes.len() * (self.spin.dim() - 1)
    }

    /// Text serialization (see crate docs for the layout).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "spin {}", self.spin.two_s()).unwrap();
        match self.provenance {
            Provenance::Exact => writeln!(out, "mode exact").unwrap(),
            Provenance::Sampled { seed, shots } => {
                writeln!(out, "mode sampled").unwrap();
                writeln!(out, "shots {shots} seed {seed}").unwrap();
            }
        }
        writeln!(out, "# axes").unwrap();
        for (k, a) in self.axes.iter().enumerate() {
            writeln!(out, "# {k} {} {}", fmt_f64(a.theta()), fmt_f64(a.phi())).unwrap();
        }
        for (k, a) in self.axes.iter().enumerate() {
            for j in 0..self.spin.dim() {
                let value = match &self.counts {
                    Some(c) => c[k][j].to_string(),
                    None => fmt_f64(self.probabilities[k][j]),
                };
                writeln!(
                    out,
                    "{k} {} {} {}/2 {value}",
                    fmt_f64(a.theta()),
                    fmt_f64(a.phi()),
                    self.spin.two_m(j)
                )
                .unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut spin = None;
        let mut sampled = false;
        let mut shots_seed = None;
        let mut rows: Vec<(usize, f64, f64, i32, String, usize)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let ctx = ParseCtx::new(lineno + 1);
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "spin" => spin = Some(SpinValue::from_two_s(ctx.field(&tokens, 1)?)),
                "mode" => {
                    sampled = match tokens.get(1).copied() {
                        Some("exact") => false,
                        Some("sampled") => true,
                        _ => return Err(ctx.err("mode must be exact or sampled")),
                    }
                }
                "shots" => {
                    let shots: u64 = ctx.field(&tokens, 1)?;
                    if tokens.get(2) != Some(&"seed") {
                        return Err(ctx.err("expected `shots <N> seed <S>`"));
                    }
                    let seed: u64 = ctx.field(&tokens, 3)?;
                    shots_seed = Some((shots, seed));
                }
                _ => {
                    if tokens.len() != 5 {
                        return Err(ctx.err("expected `k theta phi m value`"));
                    }
                    let k: usize = ctx.field(&tokens, 0)?;
                    let theta: f64 = ctx.field(&tokens, 1)?;
                    let phi: f64 = ctx.field(&tokens, 2)?;
                    let two_m = parse_m(tokens[3]).ok_or_else(|| ctx.err("bad m value"))?;
                    rows.push((k, theta, phi, two_m, tokens[4].to_string(), lineno + 1));
                }
            }
        }
        let spin = spin.ok_or(Error::Parse { line: 1, msg: "missing `spin` header".into() })?;
        let num_axes = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        if num_axes == 0 {
            return Err(Error::Parse { line: 1, msg: "table has no rows".into() });
        }
        let d = spin.dim();
        let mut axes: Vec<Option<Axis>> = vec![None; num_axes];
        let mut values: Vec<Vec<Option<String>>> = vec![vec![None; d]; num_axes];
        for (k, theta, phi, two_m, value, line) in rows {
            let ctx = ParseCtx::new(line);
            let axis = Axis::new(theta, phi).map_err(|e| ctx.err(&e.to_string()))?;
            match axes[k] {
                None => axes[k] = Some(axis),
                Some(prev) if prev.angle_to(&axis) > 1e-12 => return Err(ctx.err("axis angles differ between rows")),
                _ => {}
            }
            let j = spin.index_of_two_m(two_m).ok_or_else(|| ctx.err("m out of range"))?;
            values[k][j] = Some(value);
        }
        let axes: Vec<Axis> = axes
            .into_iter()
            .enumerate()
            .map(|(k, a)| a.ok_or(Error::Parse { line: 0, msg: format!("axis {k} missing") }))
            .collect::<Result<_>>()?;
        let mut grid: Vec<Vec<String>> = Vec::with_capacity(num_axes);
        for (k, row) in values.into_iter().enumerate() {
            let row: Vec<String> = row
                .into_iter()
                .enumerate()
                .map(|(j, v)| {
                    v.ok_or(Error::Parse { line: 0, msg: format!("axis {k}: missing m = {}", format_m(spin.two_m(j))) })
                })
                .collect::<Result<_>>()?;
            grid.push(row);
        }
        if sampled {
            let (shots, seed) = shots_seed.ok_or(Error::Parse { line: 0, msg: "sampled table needs `shots`".into() })?;
            let counts = grid
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| v.parse::<u64>().map_err(|_| Error::Parse { line: 0, msg: format!("bad count `{v}`") }))
                        .collect::<Result<Vec<u64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            IntensityTable::sampled(spin, axes, counts, shots, seed)
        } else {
            let probs = grid
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| v.parse::<f64>().map_err(|_| Error::Parse { line: 0, msg: format!("bad probability `{v}`") }))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            IntensityTable::exact(spin, axes, probs)
        }
    }
}

fn check_shape(spin: SpinValue, axes: &[Axis], probabilities: &[Vec<f64>]) -> Result<()> {
    if axes.is_empty() {
        return Err(Error::EmptyQuorum);
    }
    if axes.len() != probabilities.len() {
        return Err(Error::DimensionMismatch { expected: axes.len(), found: probabilities.len() });
    }
    for row in probabilities {
        if row.len() != spin.dim() {
            return Err(Error::DimensionMismatch { expected: spin.dim(), found: row.len() });
        }
    }
    Ok(())
}

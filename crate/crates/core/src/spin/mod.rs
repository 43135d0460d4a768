//! Finite-dimensional spin algebra.
//!
//! All matrices are written in the `Ŝz` eigenbasis with the magnetic quantum
//! number running downward: index 0 is `m = s`, index `2s` is `m = −s`.
//! Units have `ħ = 1`.

mod random;
mod rotation;
mod state;

pub use random::{random_density, random_operator, random_pure, rng_from_seed};
pub use rotation::{rotation_about, rotation_to_axis, rotation_to_vector};
pub use state::{expectation, DensityMatrix, GenericOperator, PureState};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, I};

/// Spin quantum number `s`, stored as the integer `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinValue {
    two_s: u32,
}

impl SpinValue {
    pub const HALF: SpinValue = SpinValue { two_s: 1 };
    pub const ONE: SpinValue = SpinValue { two_s: 2 };

    pub fn from_two_s(two_s: u32) -> Self {
        SpinValue { two_s }
    }

    pub fn two_s(self) -> u32 {
        self.two_s
    }

    pub fn s(self) -> f64 {
        f64::from(self.two_s) / 2.0
    }

    /// Hilbert-space dimension `2s + 1`.
    pub fn dim(self) -> usize {
        self.two_s as usize + 1
    }

    /// `2m` for basis index `j`.
    pub fn two_m(self, index: usize) -> i32 {
        self.two_s as i32 - 2 * index as i32
    }

    /// Magnetic quantum number of basis index `j`.
    pub fn m(self, index: usize) -> f64 {
        f64::from(self.two_m(index)) / 2.0
    }

    /// Basis index of `2m`, if it is a valid projection.
    pub fn index_of_two_m(self, two_m: i32) -> Option<usize> {
        let two_s = self.two_s as i32;
        if two_m.abs() > two_s || (two_s - two_m) % 2 != 0 {
            return None;
        }
        Some(((two_s - two_m) / 2) as usize)
    }

    /// All spins from `1/2` up to and including `self`.
    pub fn up_to(self) -> impl Iterator<Item = SpinValue> {
        (1..=self.two_s).map(SpinValue::from_two_s)
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_s.is_multiple_of(2) {
            write!(f, "{}", self.two_s / 2)
        } else {
            write!(f, "{}/2", self.two_s)
        }
    }
}

impl FromStr for SpinValue {
    type Err = Error;

    /// Accepts `"3/2"`, `"1"` or `"1.5"`.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::InvalidSpin(text.to_string());
        if let Some((num, den)) = text.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            let den: u32 = den.trim().parse().map_err(|_| bad())?;
            return match den {
                1 => Ok(SpinValue::from_two_s(2 * num)),
                2 => Ok(SpinValue::from_two_s(num)),
                _ => Err(bad()),
            };
        }
        if let Ok(n) = text.parse::<u32>() {
            return Ok(SpinValue::from_two_s(2 * n));
        }
        let x: f64 = text.parse().map_err(|_| bad())?;
        let twice = 2.0 * x;
        if x < 0.0 || (twice - twice.round()).abs() > 1e-12 || twice > f64::from(u32::MAX) {
            return Err(bad());
        }
        Ok(SpinValue::from_two_s(twice.round() as u32))
    }
}

/// Formats `m` given as `2m`, e.g. `-3/2` or `1`.
pub fn format_m(two_m: i32) -> String {
    if two_m % 2 == 0 {
        format!("{}", two_m / 2)
    } else {
        format!("{}/2", two_m)
    }
}

/// Spin component matrices `Ŝx, Ŝy, Ŝz`.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub spin: SpinValue,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
}

impl SpinOperators {
    /// Raising operator `Ŝ+ = Ŝx + iŜy`.
    pub fn raising(&self) -> CMatrix {
        &self.sx + &self.sy * I
    }

    /// Lowering operator `Ŝ− = Ŝx − iŜy`.
    pub fn lowering(&self) -> CMatrix {
        &self.sx - &self.sy * I
    }

    /// `n · Ŝ` for a direction `n` (not required to be normalized).
    pub fn component(&self, n: [f64; 3]) -> CMatrix {
        self.sx.scale(n[0]) + self.sy.scale(n[1]) + self.sz.scale(n[2])
    }
}

/// Builds the standard spin matrices from the ladder elements
/// `⟨m+1|Ŝ+|m⟩ = √(s(s+1) − m(m+1))`.
pub fn spin_operators(spin: SpinValue) -> SpinOperators {
    let d = spin.dim();
    let s = spin.s();
    let mut raising = CMatrix::zeros(d, d);
    let mut sz = CMatrix::zeros(d, d);
    for j in 0..d {
        let m = spin.m(j);
        sz[(j, j)] = c(m, 0.0);
        if j > 0 {
            raising[(j - 1, j)] = c((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let lowering = raising.adjoint();
    let sx = (&raising + &lowering).scale(0.5);
    let sy = (&raising - &lowering) * c(0.0, -0.5);
    SpinOperators { spin, sx, sy, sz }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, hermiticity_defect};

    fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a * b - b * a
    }

    #[test]
    fn sz_eigenvalues_descend() {
        let half = spin_operators(SpinValue::HALF);
        assert_eq!(half.sz[(0, 0)], c(0.5, 0.0));
        assert_eq!(half.sz[(1, 1)], c(-0.5, 0.0));
        let one = spin_operators(SpinValue::ONE);
        let diag: Vec<f64> = one.sz.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn commutation_relations_up_to_spin_six() {
        for two_s in 1..=12 {
            let ops = spin_operators(SpinValue::from_two_s(two_s));
            let tol = if two_s == 1 { 1e-14 } else { 1e-12 };
            assert!(frobenius(&(commutator(&ops.sx, &ops.sy) - &ops.sz * I)) <= tol);
            assert!(frobenius(&(commutator(&ops.sy, &ops.sz) - &ops.sx * I)) <= tol);
            assert!(frobenius(&(commutator(&ops.sz, &ops.sx) - &ops.sy * I)) <= tol);
            for m in [&ops.sx, &ops.sy, &ops.sz] {
                assert!(hermiticity_defect(m) <= 1e-15);
            }
        }
    }

    #[test]
    fn casimir_is_s_times_s_plus_one() {
        for two_s in 1..=8 {
            let spin = SpinValue::from_two_s(two_s);
            let ops = spin_operators(spin);
            let cas = &ops.sx * &ops.sx + &ops.sy * &ops.sy + &ops.sz * &ops.sz;
            let d = spin.dim();
            let expected = CMatrix::identity(d, d) * c(spin.s() * (spin.s() + 1.0), 0.0);
            assert!(frobenius(&(cas - expected)) < 1e-12);
        }
    }

    #[test]
    fn ladder_elements() {
        let spin = SpinValue::from_two_s(3);
        let ops = spin_operators(spin);
        let sp = ops.raising();
        // ⟨3/2|Ŝ+|1/2⟩ = √3
        assert!((sp[(0, 1)].re - 3f64.sqrt()).abs() < 1e-15);
        assert!((sp[(1, 2)].re - 2.0).abs() < 1e-15);
        assert!(sp[(1, 0)].norm() == 0.0);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("3/2".parse::<SpinValue>().unwrap().two_s(), 3);
        assert_eq!("1".parse::<SpinValue>().unwrap().two_s(), 2);
        assert_eq!("2.5".parse::<SpinValue>().unwrap().two_s(), 5);
        assert_eq!("4/2".parse::<SpinValue>().unwrap().two_s(), 4);
        assert!("1/3".parse::<SpinValue>().is_err());
        assert!("-1".parse::<SpinValue>().is_err());
        assert!("0.3".parse::<SpinValue>().is_err());
        assert_eq!(SpinValue::from_two_s(5).to_string(), "5/2");
        assert_eq!(SpinValue::from_two_s(4).to_string(), "2");
        assert_eq!(format_m(-3), "-3/2");
    }

    #[test]
    fn index_round_trip() {
        let spin = SpinValue::from_two_s(5);
        for j in 0..spin.dim() {
            assert_eq!(spin.index_of_two_m(spin.two_m(j)), Some(j));
        }
        assert_eq!(spin.index_of_two_m(2), None);
        assert_eq!(spin.index_of_two_m(7), None);
    }
}

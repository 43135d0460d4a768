use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

use super::axis::{triple_product, Axis};

/// Minimum `|e1 · (e2 × e3)|` for a tripod.
pub const TRIPOD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuorumKind {
    /// `count` axes at polar angle `theta`, equally spaced in azimuth.
    Cone { theta: f64, count: usize },
    Tripod,
    Explicit,
}

/// An ordered list of Stern-Gerlach orientations.
#[derive(Debug, Clone, PartialEq)]
pub struct QuorumSpec {
    kind: QuorumKind,
    axes: Vec<Axis>,
}

impl QuorumSpec {
    pub fn explicit(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyQuorum);
        }
        Ok(QuorumSpec { kind: QuorumKind::Explicit, axes })
    }

    pub fn kind(&self) -> QuorumKind {
        self.kind
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    /// Copy with one more axis appended (the result is an explicit list).
    pub fn with_axis(&self, axis: Axis) -> QuorumSpec {
        let mut axes = self.axes.clone();
        axes.push(axis);
        QuorumSpec { kind: QuorumKind::Explicit, axes }
    }

    /// Smallest angle between `axis` and any quorum axis.
    pub fn min_angle_to(&self, axis: &Axis) -> f64 {
        self.axes.iter().map(|a| a.angle_to(axis)).fold(f64::INFINITY, f64::min)
    }

    /// Applies a rotation (given as a map on unit vectors) to every axis.
    pub fn rotated<F: Fn([f64; 3]) -> [f64; 3]>(&self, rotate: F) -> Result<QuorumSpec> {
        let axes = self
            .axes
            .iter()
            .map(|a| Axis::from_direction(rotate(a.unit_vector())))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuorumSpec { kind: QuorumKind::Explicit, axes })
    }
}

/// `count` axes on a cone about `z` with opening angle `theta`, at azimuths
/// `2πk/count`.
pub fn cone_axes(count: usize, theta: f64) -> Result<QuorumSpec> {
    if count == 0 {
        return Err(Error::EmptyQuorum);
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::DegenerateCone { theta });
    }
    let axes = (0..count)
        .map(|k| Axis::new(theta, TAU * k as f64 / count as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuorumSpec { kind: QuorumKind::Cone { theta, count }, axes })
}

/// Three axes not in a plane.
pub fn tripod_axes(e1: Axis, e2: Axis, e3: Axis) -> Result<QuorumSpec> {
    let triple_product = triple_product(&e1, &e2, &e3);
    if triple_product.abs() <= TRIPOD_TOL {
        return Err(Error::Coplanar { triple_product });
    }
    Ok(QuorumSpec { kind: QuorumKind::Tripod, axes: vec![e1, e2, e3] })
}

/// The `{x, y, z}` tripod.
pub fn default_tripod() -> QuorumSpec {
    tripod_axes(Axis::x(), Axis::y(), Axis::z()).expect("orthonormal frame")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn equatorial_cone_is_coplanar() {
        let q = cone_axes(3, FRAC_PI_2).unwrap();
        assert_eq!(q.len(), 3);
        for a in q.axes() {
            assert!(a.unit_vector()[2].abs() < 1e-15);
        }
        let t = triple_product(&q.axes()[0], &q.axes()[1], &q.axes()[2]);
        assert!(t.abs() < 1e-15);
    }

    #[test]
    fn cone_counts() {
        // 2s+1 and 4s+1 for s = 1
        assert_eq!(cone_axes(3, 1.0).unwrap().len(), 3);
        assert_eq!(cone_axes(5, 1.0).unwrap().len(), 5);
        let q = cone_axes(5, 1.0).unwrap();
        assert!((q.axes()[2].phi() - 2.0 * TAU / 5.0).abs() < 1e-15);
        assert!(q.axes().iter().all(|a| a.theta() == 1.0));
    }

    #[test]
    fn degenerate_cone_rejected() {
        assert!(matches!(cone_axes(3, 0.0), Err(Error::DegenerateCone { .. })));
        assert!(matches!(cone_axes(3, PI), Err(Error::DegenerateCone { .. })));
        assert!(matches!(cone_axes(0, 1.0), Err(Error::EmptyQuorum)));
    }

    #[test]
    fn tripods() {
        let q = default_tripod();
        assert_eq!(q.kind(), QuorumKind::Tripod);
        let diag = Axis::from_direction([1.0, 1.0, 0.0]).unwrap();
        match tripod_axes(Axis::x(), Axis::y(), diag) {
            Err(Error::Coplanar { triple_product }) => assert!(triple_product.abs() < 1e-15),
            other => panic!("expected coplanar rejection, got {other:?}"),
        }
        // Oracle: triple product by direct evaluation of the determinant.
        let e2 = Axis::new(0.4, 0.3).unwrap();
        let e3 = Axis::new(0.9, 2.1).unwrap();
        let (a, b) = (e2.unit_vector(), e3.unit_vector());
        let det = a[0] * b[1] - a[1] * b[0];
        assert!(det.abs() > 1e-3);
        assert!(tripod_axes(Axis::z(), e2, e3).is_ok());
    }

    #[test]
    fn holdout_distance() {
        let q = default_tripod();
        let a = Axis::new(0.77, 0.0).unwrap();
        assert!((q.min_angle_to(&a) - 0.77).abs() < 1e-14);
    }
}

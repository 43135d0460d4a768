use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C64};

use super::{DensityMatrix, GenericOperator, PureState, SpinValue};

/// Deterministic generator used for every seeded operation in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: rand::Rng>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure(spin: SpinValue, seed: u64) -> PureState {
    let mut rng = rng_from_seed(seed);
    let amps = CVector::from_fn(spin.dim(), |_, _| complex_normal(&mut rng));
    PureState::normalized(spin, amps).expect("gaussian vector is nonzero")
}

/// Random density matrix `A A† / Tr(A A†)` with `A` a `d × rank` Gaussian matrix.
pub fn random_density(spin: SpinValue, seed: u64, rank: usize) -> Result<DensityMatrix> {
    let d = spin.dim();
    if rank == 0 || rank > d {
        return Err(Error::InvalidRank { rank, dim: d });
    }
    let mut rng = rng_from_seed(seed);
    let a = CMatrix::from_fn(d, rank, |_, _| complex_normal(&mut rng));
    let mut rho = &a * a.adjoint();
    let tr = rho.trace().re;
    rho.unscale_mut(tr);
    let rho = crate::linalg::hermitize(&rho);
    Ok(DensityMatrix::new_unchecked(spin, rho))
}

/// Random Gaussian operator, hermitized on request.
pub fn random_operator(spin: SpinValue, seed: u64, hermitean: bool) -> GenericOperator {
    let d = spin.dim();
    let mut rng = rng_from_seed(seed ^ 0x9e37_79b9_7f4a_7c15);
    let a = CMatrix::from_fn(d, d, |_, _| complex_normal(&mut rng));
    let m = if hermitean { crate::linalg::hermitize(&a) } else { a };
    GenericOperator::new(spin, m).expect("dimensions match")
}

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spin::{rng_from_seed, DensityMatrix, PureState};

use super::{sg_probabilities, sg_probabilities_pure, IntensityTable, QuorumSpec};

/// Stacks the exact outcome probabilities of every quorum axis.
pub fn measure_exact(rho: &DensityMatrix, quorum: &QuorumSpec) -> Result<IntensityTable> {
    let probs = quorum
        .axes()
        .iter()
        .map(|axis| sg_probabilities(rho, axis))
        .collect::<Result<Vec<_>>>()?;
    IntensityTable::exact(rho.spin(), quorum.axes().to_vec(), probs)
}

pub fn measure_exact_pure(psi: &PureState, quorum: &QuorumSpec) -> Result<IntensityTable> {
    let probs = quorum
        .axes()
        .iter()
        .map(|axis| sg_probabilities_pure(psi, axis))
        .collect::<Result<Vec<_>>>()?;
    IntensityTable::exact(psi.spin(), quorum.axes().to_vec(), probs)
}

/// Generator for axis `k`: the seed fixes the key, the axis index selects the
/// stream, so axes can be sampled in any order.
pub(crate) fn axis_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = rng_from_seed(seed);
    rng.set_stream(k as u64);
    rng
}

/// One multinomial draw of size `shots` by inverse-CDF lookup per shot.
pub fn multinomial_counts<R: Rng>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let last = probs.len() - 1;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let j = cdf.partition_point(|&c| c <= u).min(last);
        counts[j] += 1;
    }
    counts
}

/// Shot-noise simulation: one multinomial sample of size `shots` per axis.
pub fn measure_sampled(rho: &DensityMatrix, quorum: &QuorumSpec, shots: u64, seed: u64) -> Result<IntensityTable> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let counts = quorum
        .axes()
        .iter()
        .enumerate()
        .map(|(k, axis)| {
            let p = sg_probabilities(rho, axis)?;
            Ok(multinomial_counts(&p, shots, &mut axis_rng(seed, k)))
        })
        .collect::<Result<Vec<_>>>()?;
    IntensityTable::sampled(rho.spin(), quorum.axes().to_vec(), counts, shots, seed)
}

//! Seeded Poisson photon counting.
//!
//! Every scan point draws from its own ChaCha stream `(seed, point index)`,
//! so counts do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// How a scan turns expected rates into counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Poisson {
        seed: u64,
    },
    /// Report expectations only.
    Noiseless,
}

impl Sampling {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Sampling::Poisson { seed } => Some(*seed),
            Sampling::Noiseless => None,
        }
    }
}

/// Independent generator for one scan point.
pub fn point_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One Poisson draw from `rng`.
pub fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean >= 0.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Poisson mean must be finite and >= 0, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist =
        Poisson::new(mean).map_err(|e| Error::InvalidParameter(format!("Poisson({mean}): {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// A single count, deterministic in `seed`.
pub fn poisson_sample(mean: f64, seed: u64) -> Result<u64> {
    poisson_draw(mean, &mut point_rng(seed, 0))
}

/// `n` successive draws from one seeded stream.
pub fn poisson_draws(mean: f64, seed: u64, n: usize) -> Result<Vec<u64>> {
    let mut rng = point_rng(seed, 0);
    (0..n).map(|_| poisson_draw(mean, &mut rng)).collect()
}

/// Counts for each expected value, using per-point streams.
pub fn sample_counts(expected: &[f64], seed: u64) -> Result<Vec<u64>> {
    expected
        .iter()
        .enumerate()
        .map(|(i, &m)| poisson_draw(m, &mut point_rng(seed, i as u64)))
        .collect()
}

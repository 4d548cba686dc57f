//! The Gaussian mechanism for ranking histograms.
//!
//! Publishing a ranking histogram has l2 sensitivity 1 (one voter moves one
//! unit of count), so adding i.i.d. Gaussian noise with
//! `sigma = sqrt(2 ln(2/delta)) / epsilon` per coordinate gives
//! (epsilon, delta)-differential privacy. Working on vote shares instead of
//! counts only rescales the noise: `sigma_hat = sigma / N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ranking::{Histogram, VoteDistribution};

/// Privacy budget plus the electorate size it is calibrated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
    voters: u64,
}

/// Below this epsilon the calibrated noise is so large that every error
/// bound saturates at 1/2 or above; callers may want to warn.
pub const EPSILON_WARN_THRESHOLD: f64 = 1e-6;

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, voters: u64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
        }
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        if voters == 0 {
            return Err(Error::Domain("voter count must be at least 1".into()));
        }
        Ok(Self { epsilon, delta, voters })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn voters(&self) -> u64 {
        self.voters
    }

    /// Per-coordinate noise scale on raw counts.
    pub fn sigma(&self) -> f64 {
        (2.0 * (2.0 / self.delta).ln()).sqrt() / self.epsilon
    }

    /// Per-coordinate noise scale on vote shares: `sigma / N`.
    pub fn sigma_hat(&self) -> f64 {
        self.sigma() / self.voters as f64
    }

    /// A human-readable caution for parameter corners that are accepted but
    /// rarely intended.
    pub fn warning(&self) -> Option<String> {
        (self.epsilon < EPSILON_WARN_THRESHOLD).then(|| {
            format!(
                "epsilon = {:e} calibrates sigma = {:.3e}; every published ranking \
                 will be noise-dominated",
                self.epsilon,
                self.sigma()
            )
        })
    }
}

/// Delta given directly or as a fraction of the electorate (`delta = c / N`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSpec {
    Absolute(f64),
    PerVoter(f64),
}

impl DeltaSpec {
    pub fn resolve(&self, voters: u64) -> f64 {
        match *self {
            DeltaSpec::Absolute(d) => d,
            DeltaSpec::PerVoter(c) => c / voters as f64,
        }
    }
}

/// Seed for one noise draw: a master seed plus a stream id, mapped onto
/// ChaCha8 streams. Every (master, stream) pair yields an independent,
/// reproducible generator, which is what lets parallel simulations assign
/// stream = trial index and stay deterministic under any thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSeed {
    pub master: u64,
    pub stream: u64,
}

impl NoiseSeed {
    pub fn new(master: u64) -> Self {
        Self { master, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// The outcome of one Gaussian mechanism invocation. Keeps the pre-noise
/// input and the raw standard-normal draws alongside the noised values so
/// the sample can be rescaled on exactly the same draws (see
/// [`NoisySample::to_distribution`]).
#[derive(Debug, Clone)]
pub struct NoisySample {
    values: Vec<f64>,
    base: Vec<f64>,
    draws: Vec<f64>,
    sigma: f64,
    seed: NoiseSeed,
}

impl NoisySample {
    /// Noised coordinates (may be negative or fractional; never clamped).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> NoiseSeed {
        self.seed
    }

    /// Rescales a noised histogram to vote-share scale, coordinate-wise
    /// `base/n + (sigma/n) * z`. Because the same draws `z` are reused and
    /// the arithmetic matches [`add_noise_normalized`] operation for
    /// operation, this is bit-identical to noising `h.normalized_by(n)`
    /// under the same seed.
    pub fn to_distribution(&self, voters: u64) -> Result<Vec<f64>> {
        if voters == 0 {
            return Err(Error::DegenerateInput("voter count must be positive".into()));
        }
        let n = voters as f64;
        let s = self.sigma / n;
        Ok(self
            .base
            .iter()
            .zip(&self.draws)
            .map(|(b, z)| b / n + s * z)
            .collect())
    }
}

fn noised(base: &[f64], sigma: f64, seed: NoiseSeed) -> NoisySample {
    let mut rng = seed.rng();
    let draws: Vec<f64> = (0..base.len()).map(|_| rng.sample(StandardNormal)).collect();
    let values = base.iter().zip(&draws).map(|(b, z)| b + sigma * z).collect();
    NoisySample { values, base: base.to_vec(), draws, sigma, seed }
}

/// Gaussian mechanism on raw counts: `h + sigma * z`.
pub fn add_noise(h: &Histogram, params: &PrivacyParams, seed: NoiseSeed) -> NoisySample {
    noised(h.counts(), params.sigma(), seed)
}

/// Gaussian mechanism on vote shares: `v + sigma_hat * z`. With the same
/// seed this consumes the identical draw sequence as [`add_noise`].
pub fn add_noise_normalized(
    v: &VoteDistribution,
    params: &PrivacyParams,
    seed: NoiseSeed,
) -> NoisySample {
    noised(v.weights(), params.sigma_hat(), seed)
}

/// l2 sensitivity of the histogram query: adding or changing one ballot
/// moves the count vector by exactly one unit of Euclidean length.
pub fn l2_sensitivity() -> f64 {
    1.0
}

/// Euclidean distance between two same-shape histograms.
pub fn l2_distance(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.m() != b.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), got: b.m() });
    }
    Ok(a.counts()
        .iter()
        .zip(b.counts())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

//! Seeded random sampling with named substreams.
//!
//! Every random decision in the generator draws from an [`RngStream`]
//! derived from the master seed and a short label naming the concern
//! ("lifetimes", "membership", "edges", ...). Streams with different
//! labels are statistically independent, so changing the distribution of
//! one concern never perturbs the samples of another, and the same
//! `(seed, label)` pair yields an identical sequence on every platform.
//!
//! Seed derivation is fixed bit-exactly so that artifacts stay stable
//! across releases:
//!
//! ```text
//! splitmix64(x): x += 0x9e3779b97f4a7c15
//!               z = x; z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//!               z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//!               return z ^ (z >> 31)
//! mix(seed, salt)          = splitmix64(seed ^ splitmix64(salt))
//! stream seed              = mix(master_seed, fnv1a64(label))
//! substream seed           = mix(stream_seed, index)
//! instance seed (campaign) = mix(mix(master_seed, config_id), instance_id)
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::error::ConfigError;

/// How many rejection draws a truncated normal attempts before switching
/// to the inverse-CDF fallback.
const TRUNCATION_RETRIES: usize = 64;

/// One member of the splitmix64 output sequence.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over a byte string, used to turn stream labels into salts.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Combines a seed with a salt into a new seed.
pub fn mix(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt))
}

/// Seed for the campaign instance at `(config_id, instance_id)`.
pub fn instance_seed(master_seed: u64, config_id: u64, instance_id: u64) -> u64 {
    mix(mix(master_seed, config_id), instance_id)
}

/// A deterministic random stream identified by `(master seed, label)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Opens the stream for `label` under `master_seed`.
    pub fn new(master_seed: u64, label: &str) -> Self {
        let seed = mix(master_seed, fnv1a64(label.as_bytes()));
        RngStream {
            seed,
            label: label.to_owned(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// An indexed child stream, e.g. one per snapshot for edge sampling.
    ///
    /// Substreams of distinct indices are independent of each other and of
    /// the parent, which allows generating snapshots in parallel without
    /// changing any output.
    pub fn substream(&self, index: u64) -> Self {
        let seed = mix(self.seed, index);
        RngStream {
            seed,
            label: format!("{}[{}]", self.label, index),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// A univariate distribution as it appears in configuration files.
///
/// The JSON form is tagged by `kind`, e.g.
/// `{"kind": "normal", "mu": 50, "sigma": 20}` or
/// `{"kind": "truncated_normal", "mu": 5, "sigma": 2, "lo": 3, "hi": 7}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Constant { value: f64 },
    Uniform { lo: f64, hi: f64 },
    Normal { mu: f64, sigma: f64 },
    TruncatedNormal { mu: f64, sigma: f64, lo: f64, hi: f64 },
}

impl DistributionSpec {
    pub fn constant(value: f64) -> Self {
        DistributionSpec::Constant { value }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        DistributionSpec::Uniform { lo, hi }
    }

    pub fn normal(mu: f64, sigma: f64) -> Self {
        DistributionSpec::Normal { mu, sigma }
    }

    pub fn truncated_normal(mu: f64, sigma: f64, lo: f64, hi: f64) -> Self {
        DistributionSpec::TruncatedNormal { mu, sigma, lo, hi }
    }

    /// Rejects non-finite parameters, inverted bounds and negative spreads.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::InvalidDistribution(msg));
        match *self {
            DistributionSpec::Constant { value } => {
                if !value.is_finite() {
                    return invalid(format!("constant value {value} is not finite"));
                }
            }
            DistributionSpec::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return invalid(format!("uniform bounds [{lo}, {hi}] are not finite"));
                }
                if lo > hi {
                    return invalid(format!("uniform bounds inverted: lo {lo} > hi {hi}"));
                }
            }
            DistributionSpec::Normal { mu, sigma } => {
                if !mu.is_finite() || !sigma.is_finite() {
                    return invalid(format!("normal({mu}, {sigma}) has non-finite parameters"));
                }
                if sigma < 0.0 {
                    return invalid(format!("normal sigma {sigma} is negative"));
                }
            }
            DistributionSpec::TruncatedNormal { mu, sigma, lo, hi } => {
                if !mu.is_finite() || !sigma.is_finite() || !lo.is_finite() || !hi.is_finite() {
                    return invalid(format!(
                        "truncated_normal({mu}, {sigma}, [{lo}, {hi}]) has non-finite parameters"
                    ));
                }
                if sigma < 0.0 {
                    return invalid(format!("truncated_normal sigma {sigma} is negative"));
                }
                if lo > hi {
                    return invalid(format!(
                        "truncated_normal bounds inverted: lo {lo} > hi {hi}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// The mean of the untruncated base distribution, used in summaries.
    pub fn nominal_mean(&self) -> f64 {
        match *self {
            DistributionSpec::Constant { value } => value,
            DistributionSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistributionSpec::Normal { mu, .. } => mu,
            DistributionSpec::TruncatedNormal { mu, .. } => mu,
        }
    }
}

/// Draws one value from `spec`.
///
/// Truncated normals first try bounded rejection sampling and then fall
/// back to inverse-CDF sampling restricted to `[lo, hi]`, so the result is
/// always inside the bounds. A zero sigma degenerates to the mean.
///
/// # Errors
///
/// Returns [`ConfigError::InvalidDistribution`] for invalid parameters.
pub fn sample(spec: &DistributionSpec, stream: &mut RngStream) -> Result<f64, ConfigError> {
    spec.validate()?;
    let rng = stream.rng();
    let value = match *spec {
        DistributionSpec::Constant { value } => value,
        DistributionSpec::Uniform { lo, hi } => {
            if lo == hi {
                lo
            } else {
                rng.gen_range(lo..hi)
            }
        }
        DistributionSpec::Normal { mu, sigma } => sample_normal(mu, sigma, rng),
        DistributionSpec::TruncatedNormal { mu, sigma, lo, hi } => {
            if sigma == 0.0 || lo == hi {
                mu.clamp(lo, hi)
            } else {
                let mut accepted = None;
                for _ in 0..TRUNCATION_RETRIES {
                    let x = sample_normal(mu, sigma, rng);
                    if x >= lo && x <= hi {
                        accepted = Some(x);
                        break;
                    }
                }
                match accepted {
                    Some(x) => x,
                    None => inverse_cdf_fallback(mu, sigma, lo, hi, rng),
                }
            }
        }
    };
    Ok(value)
}

fn sample_normal(mu: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    if sigma == 0.0 {
        return mu;
    }
    // Parameters were validated by the caller; sigma > 0 here.
    let normal = Normal::new(mu, sigma).expect("validated normal parameters");
    normal.sample(rng)
}

/// Inverse-CDF sampling on the truncation window. Used when the window has
/// so little mass that rejection keeps missing it.
fn inverse_cdf_fallback(mu: f64, sigma: f64, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> f64 {
    let base = statrs::distribution::Normal::new(mu, sigma).expect("validated normal parameters");
    let (cdf_lo, cdf_hi) = (base.cdf(lo), base.cdf(hi));
    if cdf_hi <= cdf_lo {
        // The window carries no representable mass; collapse to the edge
        // nearest the mean.
        return mu.clamp(lo, hi);
    }
    let u = rng.gen_range(cdf_lo..cdf_hi);
    base.inverse_cdf(u).clamp(lo, hi)
}

/// Draws from `spec`, rounds half away from zero, clamps to `[lo, hi]`.
///
/// # Errors
///
/// Returns [`ConfigError::InvalidDistribution`] for invalid parameters.
pub fn sample_integer(
    spec: &DistributionSpec,
    stream: &mut RngStream,
    lo: i64,
    hi: i64,
) -> Result<i64, ConfigError> {
    let x = sample(spec, stream)?;
    Ok(round_clamped(x, lo, hi))
}

/// Round half away from zero, then clamp. `f64::round` already rounds
/// halves away from zero, so this is a plain composition.
pub fn round_clamped(x: f64, lo: i64, hi: i64) -> i64 {
    let rounded = x.round();
    if rounded <= lo as f64 {
        lo
    } else if rounded >= hi as f64 {
        hi
    } else {
        rounded as i64
    }
}

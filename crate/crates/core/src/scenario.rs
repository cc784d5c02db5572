//! Scenario configuration and community skeletons.
//!
//! A skeleton fixes everything about an evolving community except its
//! members: when it is born, how long it lives, its target size at every
//! step of its life, and the fraction of core members carried over between
//! consecutive steps. Member assignment and graph generation happen later,
//! so merges and splits are never scripted here; they emerge from member
//! flows.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::CommunityId;
use crate::sampling::{self, DistributionSpec, RngStream};

fn default_timesteps() -> usize {
    10
}

fn default_n_communities() -> usize {
    10
}

fn default_min_size() -> usize {
    10
}

fn default_initial_size() -> DistributionSpec {
    DistributionSpec::normal(50.0, 20.0)
}

fn default_lifetime() -> DistributionSpec {
    DistributionSpec::truncated_normal(5.0, 2.0, 3.0, 7.0)
}

fn default_start_time() -> DistributionSpec {
    DistributionSpec::uniform(0.0, 1.0)
}

fn default_size_change() -> DistributionSpec {
    DistributionSpec::constant(0.0)
}

fn default_core_node_ratio() -> DistributionSpec {
    DistributionSpec::constant(1.0)
}

/// Accepts either a bare number (shorthand for a constant distribution) or
/// a full distribution object.
fn number_or_spec<'de, D>(deserializer: D) -> Result<DistributionSpec, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum NumberOrSpec {
        Number(f64),
        Spec(DistributionSpec),
    }
    Ok(match NumberOrSpec::deserialize(deserializer)? {
        NumberOrSpec::Number(value) => DistributionSpec::constant(value),
        NumberOrSpec::Spec(spec) => spec,
    })
}

/// Full description of one benchmark scenario.
///
/// All fields except `p_in` and `p_out` carry defaults matching the base
/// scenario: 10 timesteps, 10 communities of at least 10 nodes, initial
/// sizes from normal(50, 20), lifetimes from a normal(5, 2) truncated to
/// [3, 7], start times uniform in the feasible window, constant sizes and
/// full core retention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_timesteps")]
    pub timesteps: usize,
    #[serde(default = "default_n_communities")]
    pub n_communities: usize,
    #[serde(default = "default_min_size")]
    pub min_size: usize,
    #[serde(default = "default_initial_size", deserialize_with = "number_or_spec")]
    pub initial_size: DistributionSpec,
    #[serde(default = "default_lifetime", deserialize_with = "number_or_spec")]
    pub lifetime: DistributionSpec,
    #[serde(default = "default_start_time", deserialize_with = "number_or_spec")]
    pub start_time: DistributionSpec,
    #[serde(default = "default_size_change", deserialize_with = "number_or_spec")]
    pub size_change: DistributionSpec,
    #[serde(
        default = "default_core_node_ratio",
        deserialize_with = "number_or_spec"
    )]
    pub core_node_ratio: DistributionSpec,
    /// Probability of an edge between two nodes of the same community.
    pub p_in: f64,
    /// Probability of an edge between nodes of different communities.
    pub p_out: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    /// The base scenario with the given edge probabilities.
    pub fn base(p_in: f64, p_out: f64) -> Self {
        ScenarioConfig {
            timesteps: default_timesteps(),
            n_communities: default_n_communities(),
            min_size: default_min_size(),
            initial_size: default_initial_size(),
            lifetime: default_lifetime(),
            start_time: default_start_time(),
            size_change: default_size_change(),
            core_node_ratio: default_core_node_ratio(),
            p_in,
            p_out,
            seed: 0,
        }
    }

    /// Checks parameter ranges and distribution validity.
    ///
    /// Returns warnings for configurations that are legal but produce
    /// graphs without detectable structure, most notably `p_out >= p_in`.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let param = |name: &str, reason: String| {
            Err(ConfigError::InvalidParameter {
                name: name.to_owned(),
                reason,
            })
        };
        if self.timesteps == 0 {
            return param("timesteps", "must be at least 1".to_owned());
        }
        if self.n_communities == 0 {
            return param("n_communities", "must be at least 1".to_owned());
        }
        if self.min_size == 0 {
            return param("min_size", "must be at least 1".to_owned());
        }
        for (name, prob) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !prob.is_finite() || !(0.0..=1.0).contains(&prob) {
                return param(name, format!("probability {prob} outside [0, 1]"));
            }
        }
        self.initial_size.validate()?;
        self.lifetime.validate()?;
        self.start_time.validate()?;
        self.size_change.validate()?;
        self.core_node_ratio.validate()?;
        if let DistributionSpec::Constant { value } = self.core_node_ratio {
            if !(value > 0.0 && value <= 1.0) {
                return param("core_node_ratio", format!("ratio {value} outside (0, 1]"));
            }
        }

        let mut warnings = Vec::new();
        if self.p_out >= self.p_in {
            warnings.push(format!(
                "p_out {} >= p_in {}: snapshots will carry little or no community signal",
                self.p_out, self.p_in
            ));
        }
        Ok(warnings)
    }
}

/// The life plan of one community before members are assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySkeleton {
    pub id: CommunityId,
    pub birth_t: usize,
    /// Target member count for each step of the life; the length is the
    /// lifespan.
    pub target_sizes: Vec<usize>,
    /// Fraction of members guaranteed to carry over between consecutive
    /// steps.
    pub core_ratio: f64,
}

impl CommunitySkeleton {
    pub fn lifespan(&self) -> usize {
        self.target_sizes.len()
    }

    pub fn last_t(&self) -> usize {
        self.birth_t + self.lifespan() - 1
    }

    pub fn alive_at(&self, t: usize) -> bool {
        t >= self.birth_t && t < self.birth_t + self.lifespan()
    }

    /// Target size at absolute timestep `t`.
    pub fn target_at(&self, t: usize) -> Option<usize> {
        if self.alive_at(t) {
            Some(self.target_sizes[t - self.birth_t])
        } else {
            None
        }
    }
}

/// Samples one skeleton per community.
///
/// Lifespans are drawn from the lifetime distribution and discretised with
/// a ceiling: a community living a fraction of a step still occupies that
/// snapshot, so a draw of 4.2 spans 5 snapshots. The result is clamped to
/// `[1, timesteps]` rather than resampled. Birth times place the start
/// fraction inside the feasible window `[0, timesteps - lifespan]`, target
/// sizes follow `size[i+1] = max(min_size, round(size[i] * (1 + s)))` with
/// a fresh relative change `s` per step, and each concern draws from its
/// own named substream so distributions can be swapped independently.
///
/// # Errors
///
/// Returns a [`ConfigError`] when the configuration fails validation.
pub fn generate_skeletons(config: &ScenarioConfig) -> Result<Vec<CommunitySkeleton>, ConfigError> {
    config.validate()?;
    let horizon = config.timesteps;

    let mut lifetimes = RngStream::new(config.seed, "lifetimes");
    let mut starts = RngStream::new(config.seed, "starts");
    let mut sizes = RngStream::new(config.seed, "sizes");
    let mut size_changes = RngStream::new(config.seed, "size-changes");
    let mut core_ratios = RngStream::new(config.seed, "core-ratios");

    let mut skeletons = Vec::with_capacity(config.n_communities);
    for k in 0..config.n_communities {
        let drawn = sampling::sample(&config.lifetime, &mut lifetimes)?;
        let lifespan = (drawn.ceil() as i64).clamp(1, horizon as i64) as usize;

        let fraction = sampling::sample(&config.start_time, &mut starts)?.clamp(0.0, 1.0);
        let window = (horizon - lifespan) as f64;
        let birth_t = sampling::round_clamped(fraction * window, 0, horizon as i64 - lifespan as i64)
            as usize;

        let mut target_sizes = Vec::with_capacity(lifespan);
        let first =
            sampling::sample_integer(&config.initial_size, &mut sizes, config.min_size as i64, i64::MAX)?;
        target_sizes.push(first as usize);
        for step in 1..lifespan {
            let change = sampling::sample(&config.size_change, &mut size_changes)?;
            let previous = target_sizes[step - 1] as f64;
            let next =
                sampling::round_clamped(previous * (1.0 + change), config.min_size as i64, i64::MAX);
            target_sizes.push(next as usize);
        }

        // Clamped to (0, 1]: zero retention would disconnect a community
        // from its own past.
        let core_ratio =
            sampling::sample(&config.core_node_ratio, &mut core_ratios)?.clamp(1e-12, 1.0);

        skeletons.push(CommunitySkeleton {
            id: CommunityId(k as u32),
            birth_t,
            target_sizes,
            core_ratio,
        });
    }
    Ok(skeletons)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_config_round_trips_through_json() {
        let config = ScenarioConfig::base(0.5, 0.05);
        let json = serde_json::to_string_pretty(&config).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn distribution_fields_accept_bare_numbers() {
        let config: ScenarioConfig = serde_json::from_str(
            r#"{"p_in": 0.5, "p_out": 0.05, "core_node_ratio": 0.25, "size_change": 0.1,
                "lifetime": 4}"#,
        )
        .unwrap();
        assert_eq!(config.core_node_ratio, DistributionSpec::constant(0.25));
        assert_eq!(config.size_change, DistributionSpec::constant(0.1));
        assert_eq!(config.lifetime, DistributionSpec::constant(4.0));
        assert_eq!(config.timesteps, 10);
        assert_eq!(config.n_communities, 10);
        assert_eq!(config.min_size, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<ScenarioConfig>(
            r#"{"p_in": 0.5, "p_out": 0.05, "p_inside": 0.9}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("p_inside"));
    }

    #[test]
    fn missing_required_probability_names_the_field() {
        let err = serde_json::from_str::<ScenarioConfig>(r#"{"p_out": 0.05}"#).unwrap_err();
        assert!(err.to_string().contains("p_in"), "got: {err}");
    }

    #[test]
    fn weak_structure_yields_a_warning_not_an_error() {
        let config = ScenarioConfig::base(0.1, 0.5);
        let warnings = config.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("p_out"));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.n_communities = 0;
        assert!(matches!(
            config.validate(),
            Err(ConfigError::InvalidParameter { name, .. }) if name == "n_communities"
        ));

        let mut config = ScenarioConfig::base(1.5, 0.05);
        assert!(config.validate().is_err());
        config.p_in = 0.5;
        config.core_node_ratio = DistributionSpec::constant(0.0);
        assert!(config.validate().is_err());
    }

    #[test]
    fn long_lifetimes_push_births_into_the_feasible_window() {
        // With a horizon of 10 and a constant lifetime draw of 7 the birth
        // window is {0, 1, 2, 3}; every value must appear and none beyond.
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.lifetime = DistributionSpec::constant(7.0);
        config.n_communities = 400;
        let skeletons = generate_skeletons(&config).unwrap();
        let births: std::collections::BTreeSet<usize> =
            skeletons.iter().map(|s| s.birth_t).collect();
        assert!(births.iter().all(|&b| b <= 3), "births outside window: {births:?}");
        assert_eq!(births.len(), 4, "expected all of 0..=3, got {births:?}");
        assert!(skeletons.iter().all(|s| s.lifespan() == 7));
    }

    #[test]
    fn lifespans_are_clamped_to_the_horizon() {
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.lifetime = DistributionSpec::constant(25.0);
        config.n_communities = 5;
        let skeletons = generate_skeletons(&config).unwrap();
        for s in &skeletons {
            assert_eq!(s.lifespan(), 10);
            assert_eq!(s.birth_t, 0);
        }
    }

    #[test]
    fn constant_size_change_keeps_targets_flat() {
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.seed = 7;
        let skeletons = generate_skeletons(&config).unwrap();
        for s in &skeletons {
            assert!(!s.target_sizes.is_empty());
            let first = s.target_sizes[0];
            assert!(first >= config.min_size);
            assert!(s.target_sizes.iter().all(|&v| v == first));
        }
    }

    #[test]
    fn shrinking_sizes_never_fall_below_min_size() {
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.size_change = DistributionSpec::constant(-0.9);
        config.lifetime = DistributionSpec::constant(6.0);
        let skeletons = generate_skeletons(&config).unwrap();
        for s in &skeletons {
            assert!(s.target_sizes.iter().all(|&v| v >= config.min_size));
            assert_eq!(*s.target_sizes.last().unwrap(), config.min_size);
        }
    }

    #[test]
    fn skeletons_are_reproducible_per_seed() {
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.seed = 99;
        let a = generate_skeletons(&config).unwrap();
        let b = generate_skeletons(&config).unwrap();
        assert_eq!(a, b);
        config.seed = 100;
        let c = generate_skeletons(&config).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn swapping_the_size_change_distribution_leaves_other_draws_untouched() {
        let mut constant = ScenarioConfig::base(0.5, 0.05);
        constant.seed = 11;
        let mut changing = constant.clone();
        changing.size_change = DistributionSpec::normal(0.0, 0.2);

        let a = generate_skeletons(&constant).unwrap();
        let b = generate_skeletons(&changing).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.birth_t, y.birth_t);
            assert_eq!(x.lifespan(), y.lifespan());
            assert_eq!(x.target_sizes[0], y.target_sizes[0]);
            assert_eq!(x.core_ratio, y.core_ratio);
        }
    }

    #[test]
    fn lifespan_discretisation_matches_the_documented_mean() {
        // Ceiling a normal(5, 2) truncated to [3, 7] yields integer
        // lifespans over {3, ..., 7} with mean 5.5; check against a large
        // sample. This pins the duration-to-snapshot-count convention.
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.n_communities = 4000;
        config.seed = 31;
        let skeletons = generate_skeletons(&config).unwrap();
        let mean = skeletons.iter().map(|s| s.lifespan() as f64).sum::<f64>()
            / skeletons.len() as f64;
        assert!(
            (mean - 5.5).abs() < 0.1,
            "lifespan mean {mean} deviates from 5.5"
        );
        assert!(skeletons
            .iter()
            .all(|s| (3..=7).contains(&s.lifespan())));
    }
}

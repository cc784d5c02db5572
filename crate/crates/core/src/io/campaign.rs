//! Parameter sweeps: a grid of scenario configs, many instances each.
//!
//! A campaign expands a grid into configs (cross product over `p_in`,
//! `p_out`, `size_change` and `core_node_ratio`, in that nesting order),
//! generates `instances` seeds per config, writes each instance under
//! `config_<ccc>/instance_<iii>/`, and aggregates per-config dynamics
//! into `summary.csv` next to a `manifest.json`.
//!
//! Instance seeds derive from the master seed, the config index and the
//! instance index alone, and the aggregation runs over results collected
//! in index order, so output bytes do not depend on how many worker
//! threads generate instances.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::generate::generate_with_seed;
use crate::model::GroundTruth;
use crate::sampling::{instance_seed, DistributionSpec};
use crate::scenario::ScenarioConfig;
use crate::stats::{community_dynamics, modularity, summarize, system_renewal, Summary};

use super::formats::save_ground_truth;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

/// A sweep over scenario parameters. Empty axes keep the base value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignGrid {
    pub base: ScenarioConfig,
    #[serde(default)]
    pub p_in: Vec<f64>,
    #[serde(default)]
    pub p_out: Vec<f64>,
    /// Constant relative size changes overriding the base distribution.
    #[serde(default)]
    pub size_change: Vec<f64>,
    /// Constant core retention ratios overriding the base distribution.
    #[serde(default)]
    pub core_node_ratio: Vec<f64>,
}

impl CampaignGrid {
    /// A grid that sweeps nothing: one config equal to the base.
    pub fn single(base: ScenarioConfig) -> Self {
        CampaignGrid {
            base,
            p_in: Vec::new(),
            p_out: Vec::new(),
            size_change: Vec::new(),
            core_node_ratio: Vec::new(),
        }
    }
}

/// Loads a campaign grid from JSON.
pub fn load_grid(path: &Path) -> Result<CampaignGrid, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ConfigError::parse(path, e.to_string()))
}

/// One point of the expanded grid.
#[derive(Debug, Clone)]
pub struct ConfigPoint {
    pub id: usize,
    pub config: ScenarioConfig,
}

impl ConfigPoint {
    pub fn dir_name(&self) -> String {
        format!("config_{:03}", self.id)
    }
}

/// Directory name of one instance inside a config directory.
pub fn instance_dir_name(instance: usize) -> String {
    format!("instance_{instance:03}")
}

/// Expands the grid into validated configs, ids assigned in cross
/// product order with `p_in` outermost and `core_node_ratio` innermost.
pub fn expand_grid(grid: &CampaignGrid) -> Result<Vec<ConfigPoint>, ConfigError> {
    grid.base.validate()?;
    let p_ins = if grid.p_in.is_empty() {
        vec![grid.base.p_in]
    } else {
        grid.p_in.clone()
    };
    let p_outs = if grid.p_out.is_empty() {
        vec![grid.base.p_out]
    } else {
        grid.p_out.clone()
    };
    let size_changes: Vec<Option<f64>> = if grid.size_change.is_empty() {
        vec![None]
    } else {
        grid.size_change.iter().copied().map(Some).collect()
    };
    let core_ratios: Vec<Option<f64>> = if grid.core_node_ratio.is_empty() {
        vec![None]
    } else {
        grid.core_node_ratio.iter().copied().map(Some).collect()
    };

    let mut points = Vec::new();
    for &p_in in &p_ins {
        for &p_out in &p_outs {
            for &size_change in &size_changes {
                for &core_ratio in &core_ratios {
                    let mut config = grid.base.clone();
                    config.p_in = p_in;
                    config.p_out = p_out;
                    if let Some(s) = size_change {
                        config.size_change = DistributionSpec::constant(s);
                    }
                    if let Some(c) = core_ratio {
                        config.core_node_ratio = DistributionSpec::constant(c);
                    }
                    config.validate()?;
                    points.push(ConfigPoint {
                        id: points.len(),
                        config,
                    });
                }
            }
        }
    }
    Ok(points)
}

/// How to run a campaign.
#[derive(Debug, Clone, Copy)]
pub struct CampaignOptions {
    /// Instances generated per config.
    pub instances: usize,
    /// Master seed from which every instance seed derives.
    pub master_seed: u64,
    /// Worker threads; `None` uses the global thread pool.
    pub threads: Option<usize>,
}

/// What a finished campaign produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignReport {
    pub configs: usize,
    pub instances_per_config: usize,
}

#[derive(Serialize)]
struct ManifestConfig<'a> {
    id: usize,
    dir: String,
    size_change_mean: f64,
    core_node_ratio_mean: f64,
    config: &'a ScenarioConfig,
}

#[derive(Serialize)]
struct Manifest<'a> {
    master_seed: u64,
    instances_per_config: usize,
    configs: Vec<ManifestConfig<'a>>,
}

/// Dynamics pooled over all instances of one config.
#[derive(Debug, Default, Clone)]
struct PooledDynamics {
    turnover: Vec<f64>,
    emigrant_ratio: Vec<f64>,
    n_predecessors: Vec<f64>,
    renewal: Vec<f64>,
    modularity: Vec<f64>,
}

impl PooledDynamics {
    fn absorb(&mut self, other: PooledDynamics) {
        self.turnover.extend(other.turnover);
        self.emigrant_ratio.extend(other.emigrant_ratio);
        self.n_predecessors.extend(other.n_predecessors);
        self.renewal.extend(other.renewal);
        self.modularity.extend(other.modularity);
    }
}

fn instance_dynamics(truth: &GroundTruth) -> PooledDynamics {
    let mut pooled = PooledDynamics::default();
    for record in community_dynamics(&truth.communities, truth.timesteps()) {
        pooled.emigrant_ratio.push(record.emigrant_ratio);
        if let Some(turnover) = record.turnover {
            pooled.turnover.push(turnover);
        }
        if let Some(n) = record.n_predecessors {
            pooled.n_predecessors.push(n as f64);
        }
    }
    for (_, renewal) in system_renewal(&truth.communities, truth.timesteps()) {
        pooled.renewal.push(renewal);
    }
    for snapshot in &truth.snapshots {
        pooled
            .modularity
            .push(modularity(snapshot, &truth.assignment_at(snapshot.t)));
    }
    pooled
}

fn summary_cells(summary: Option<Summary>) -> (String, String) {
    match summary {
        Some(s) => (s.mean.to_string(), s.std.to_string()),
        None => (String::new(), String::new()),
    }
}

fn render_summary_csv(points: &[ConfigPoint], pooled: &[PooledDynamics], instances: usize) -> String {
    let mut out = String::new();
    out.push_str(
        "config_id,p_in,p_out,size_change,core_node_ratio,instances,\
         turnover_mean,turnover_std,emigrant_mean,emigrant_std,\
         predecessors_mean,predecessors_std,renewal_mean,renewal_std,\
         modularity_mean,modularity_std\n",
    );
    for (point, dynamics) in points.iter().zip(pooled) {
        let config = &point.config;
        let columns = [
            dynamics.turnover.clone(),
            dynamics.emigrant_ratio.clone(),
            dynamics.n_predecessors.clone(),
            dynamics.renewal.clone(),
            dynamics.modularity.clone(),
        ];
        write!(
            out,
            "{},{},{},{},{},{}",
            point.id,
            config.p_in,
            config.p_out,
            config.size_change.nominal_mean(),
            config.core_node_ratio.nominal_mean(),
            instances
        )
        .expect("writing to a string cannot fail");
        for values in columns {
            let (mean, std) = summary_cells(summarize(values));
            write!(out, ",{mean},{std}").expect("writing to a string cannot fail");
        }
        out.push('\n');
    }
    out
}

/// Runs the campaign into `out_dir`.
///
/// Layout: `out_dir/config_<ccc>/instance_<iii>/` holds one saved
/// instance each; `out_dir/manifest.json` records the grid and seeds;
/// `out_dir/summary.csv` holds per-config dynamics aggregated over
/// instances. Output is byte-identical for a given grid, instance count
/// and master seed regardless of thread count.
pub fn run_campaign(
    grid: &CampaignGrid,
    options: &CampaignOptions,
    out_dir: &Path,
) -> Result<CampaignReport, ConfigError> {
    if options.instances == 0 {
        return Err(ConfigError::InvalidParameter {
            name: "instances".to_owned(),
            reason: "must be at least 1".to_owned(),
        });
    }
    let points = expand_grid(grid)?;
    fs::create_dir_all(out_dir).map_err(|e| ConfigError::io(out_dir, e))?;

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|c| (0..options.instances).map(move |i| (c, i)))
        .collect();
    let generate_one = |&(config_index, instance_index): &(usize, usize)| {
        let point = &points[config_index];
        let seed = instance_seed(
            options.master_seed,
            config_index as u64,
            instance_index as u64,
        );
        let truth = generate_with_seed(&point.config, seed)?;
        let dir = out_dir
            .join(point.dir_name())
            .join(instance_dir_name(instance_index));
        save_ground_truth(&truth, &dir)?;
        Ok(instance_dynamics(&truth))
    };
    let run_all = || -> Result<Vec<PooledDynamics>, ConfigError> {
        jobs.par_iter().map(generate_one).collect()
    };
    let results = match options.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ConfigError::InvalidParameter {
                name: "threads".to_owned(),
                reason: e.to_string(),
            })?
            .install(run_all),
        None => run_all(),
    }?;

    let mut pooled = vec![PooledDynamics::default(); points.len()];
    for ((config_index, _), dynamics) in jobs.into_iter().zip(results) {
        pooled[config_index].absorb(dynamics);
    }

    let manifest = Manifest {
        master_seed: options.master_seed,
        instances_per_config: options.instances,
        configs: points
            .iter()
            .map(|point| ManifestConfig {
                id: point.id,
                dir: point.dir_name(),
                size_change_mean: point.config.size_change.nominal_mean(),
                core_node_ratio_mean: point.config.core_node_ratio.nominal_mean(),
                config: &point.config,
            })
            .collect(),
    };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let mut manifest_text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| ConfigError::parse(&manifest_path, e.to_string()))?;
    manifest_text.push('\n');
    fs::write(&manifest_path, manifest_text).map_err(|e| ConfigError::io(&manifest_path, e))?;

    let summary_path = out_dir.join(SUMMARY_FILE);
    let summary = render_summary_csv(&points, &pooled, options.instances);
    fs::write(&summary_path, summary).map_err(|e| ConfigError::io(&summary_path, e))?;

    Ok(CampaignReport {
        configs: points.len(),
        instances_per_config: options.instances,
    })
}

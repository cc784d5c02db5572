//! `evocomm`: benchmark generator and evaluator for dynamic community
//! detection in temporal networks.
//!
//! Exit codes: 0 on success, 2 for configuration and input problems
//! (including command line errors), 3 for evaluations that are undefined
//! on the given data.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use evocomm::detect::{detect_communities, DetectorConfig};
use evocomm::error::{ConfigError, EvalError};
use evocomm::events::{detect_events, event_count_diff, EventKind, DEFAULT_LINK_THRESHOLD};
use evocomm::generate::generate_ground_truth;
use evocomm::io::campaign::{load_grid, run_campaign, CampaignOptions};
use evocomm::io::formats::{
    load_config, load_ground_truth, read_partition_csv, save_ground_truth, write_partition_csv,
};
use evocomm::io::heatmap::{write_heatmap_csv, HeatmapCell};
use evocomm::io::sankey::write_sankey_svg;
use evocomm::metrics::{snapshot_scores, Metric, NmiNormalization};
use evocomm::model::{GroundTruth, NodeId, PartitionSource, TemporalPartition};
use evocomm::stats::{community_dynamics, network_properties, summarize, system_renewal};
use evocomm::transitions::{transition_scores, window_scores};

#[derive(Parser)]
#[command(
    name = "evocomm",
    version,
    about = "Generate, detect and evaluate evolving communities in temporal networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one benchmark instance from a scenario config.
    Generate(GenerateArgs),
    /// Sweep a parameter grid, generating many instances per config.
    Campaign(CampaignArgs),
    /// Score a detected partition against an instance's ground truth.
    Evaluate(EvaluateArgs),
    /// List life-cycle events, or compare them against a detection.
    Events(EventsArgs),
    /// Report per-snapshot network properties and community dynamics.
    Stats(StatsArgs),
    /// Run the built-in detector and save its partition.
    Detect(DetectArgs),
    /// Draw an instance's member flows as an SVG diagram.
    Sankey(SankeyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario configuration JSON.
    #[arg(short, long)]
    config: PathBuf,
    /// Output instance directory.
    #[arg(short, long)]
    out: PathBuf,
    /// Override the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CampaignArgs {
    /// Campaign grid JSON.
    #[arg(short, long)]
    grid: PathBuf,
    /// Instances generated per config.
    #[arg(short = 'n', long, default_value_t = 1)]
    instances: usize,
    /// Output campaign directory.
    #[arg(short, long)]
    out: PathBuf,
    /// Worker threads; defaults to one per logical CPU.
    #[arg(short = 'j', long)]
    threads: Option<usize>,
    /// Master seed from which every instance seed derives.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground truth instance directory.
    #[arg(long)]
    truth: PathBuf,
    /// Detected membership CSV.
    #[arg(long)]
    detected: PathBuf,
    /// Similarity metric: nmi, nvi, ari, f1 or jaccard.
    #[arg(long, default_value = "nmi", value_parser = Metric::from_str)]
    metric: Metric,
    /// NMI normalization: arithmetic or max.
    #[arg(long, default_value = "arithmetic", value_parser = NmiNormalization::from_str)]
    norm: NmiNormalization,
    /// Score node transitions with this gap instead of snapshots.
    #[arg(long, conflicts_with = "window")]
    delta: Option<usize>,
    /// Aggregate transitions over gaps 1..=W for each start.
    #[arg(long)]
    window: Option<usize>,
    /// Also write every defined transition score as row,col,value CSV
    /// (row = start timestep, col = gap).
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Args)]
struct EventsArgs {
    /// Ground truth instance directory.
    #[arg(long)]
    truth: PathBuf,
    /// Detected membership CSV to classify and compare.
    #[arg(long)]
    detected: Option<PathBuf>,
    /// Minimum shared fraction for a strong predecessor link.
    #[arg(long, default_value_t = DEFAULT_LINK_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct StatsArgs {
    /// Ground truth instance directory.
    #[arg(long)]
    truth: PathBuf,
    /// Write per-snapshot properties as CSV.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Ground truth instance directory providing the snapshots.
    #[arg(long)]
    truth: PathBuf,
    /// Output membership CSV.
    #[arg(short, long)]
    out: PathBuf,
    /// Louvain resolution.
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    /// Minimum Jaccard overlap for label matching across snapshots.
    #[arg(long, default_value_t = 0.3)]
    match_threshold: f64,
    /// Detector seed; defaults to the instance seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SankeyArgs {
    /// Ground truth instance directory.
    #[arg(long)]
    truth: PathBuf,
    /// Output SVG file.
    #[arg(short, long)]
    out: PathBuf,
}

enum CliError {
    Config(ConfigError),
    Eval(EvalError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Eval(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Eval(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(args) => run_generate(args),
        Command::Campaign(args) => run_campaign_cmd(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Events(args) => run_events(args),
        Command::Stats(args) => run_stats(args),
        Command::Detect(args) => run_detect(args),
        Command::Sankey(args) => run_sankey(args),
    }
}

fn load_truth_and_partition(dir: &Path) -> Result<(GroundTruth, TemporalPartition), CliError> {
    let truth = load_ground_truth(dir)?;
    let partition = truth.to_partition();
    Ok((truth, partition))
}

fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let (mut config, warnings) = load_config(&args.config)?;
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let truth = generate_ground_truth(&config)?;
    save_ground_truth(&truth, &args.out)?;
    let nodes: BTreeSet<NodeId> = truth
        .snapshots
        .iter()
        .flat_map(|s| s.active_nodes.iter().copied())
        .collect();
    let edges: usize = truth.snapshots.iter().map(|s| s.n_edges()).sum();
    println!(
        "generated instance: seed={} timesteps={} communities={} nodes={} edges={} -> {}",
        truth.seed,
        truth.timesteps(),
        truth.communities.len(),
        nodes.len(),
        edges,
        args.out.display()
    );
    Ok(())
}

fn run_campaign_cmd(args: CampaignArgs) -> Result<(), CliError> {
    let grid = load_grid(&args.grid)?;
    let options = CampaignOptions {
        instances: args.instances,
        master_seed: args.seed,
        threads: args.threads,
    };
    let report = run_campaign(&grid, &options, &args.out)?;
    println!(
        "campaign complete: {} configs x {} instances -> {}",
        report.configs,
        report.instances_per_config,
        args.out.display()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let (truth, truth_partition) = load_truth_and_partition(&args.truth)?;
    let detected = read_partition_csv(
        &args.detected,
        PartitionSource::Detected,
        Some(truth.timesteps()),
    )?;
    let metric = args.metric;
    let norm = args.norm;

    match (args.delta, args.window) {
        (None, None) => {
            let scores = snapshot_scores(&truth_partition, &detected, metric, norm)?;
            for &(t, score) in &scores {
                println!("t={t} {metric}={score:.6}");
            }
            match summarize(scores.iter().map(|&(_, s)| s)) {
                Some(summary) => println!(
                    "mean {metric}={:.6} over {} snapshots",
                    summary.mean, summary.n
                ),
                None => println!("no snapshots scored"),
            }
        }
        (Some(delta), None) => {
            let scores = transition_scores(&truth_partition, &detected, delta, metric, norm)?;
            for s in &scores {
                println!(
                    "t={} delta={} {metric}={:.6} coverage={:.6}",
                    s.t, s.delta, s.score, s.coverage
                );
            }
            match summarize(scores.iter().map(|s| s.score)) {
                Some(summary) => println!(
                    "mean transition {metric}={:.6} over {} transitions",
                    summary.mean, summary.n
                ),
                None => println!("no transitions scored"),
            }
        }
        (None, Some(window)) => {
            let scores = window_scores(&truth_partition, &detected, window, metric, norm)?;
            for s in &scores {
                println!(
                    "t={} window={} mean={:.6} mse={:.6}",
                    s.t, s.window, s.mean, s.mse
                );
            }
            match summarize(scores.iter().map(|s| s.mean)) {
                Some(summary) => println!(
                    "mean windowed {metric}={:.6} over {} starts",
                    summary.mean, summary.n
                ),
                None => println!("no windows scored"),
            }
        }
        (Some(_), Some(_)) => unreachable!("clap rejects delta with window"),
    }

    if let Some(path) = args.heatmap {
        let max_delta = match args.window.or(args.delta) {
            Some(limit) => limit.min(truth.timesteps().saturating_sub(1)),
            None => truth.timesteps().saturating_sub(1),
        };
        let mut cells = Vec::new();
        for delta in 1..=max_delta {
            for s in transition_scores(&truth_partition, &detected, delta, metric, norm)? {
                cells.push(HeatmapCell::new(
                    s.t.to_string(),
                    delta.to_string(),
                    s.score,
                ));
            }
        }
        let written = write_heatmap_csv(&cells, &path)?;
        println!("wrote {written} transition cells -> {}", path.display());
    }
    Ok(())
}

fn run_events(args: EventsArgs) -> Result<(), CliError> {
    let (truth, truth_partition) = load_truth_and_partition(&args.truth)?;
    let truth_log = detect_events(&truth_partition, args.threshold)?;
    match args.detected {
        None => {
            for event in &truth_log.events {
                if event.related.is_empty() {
                    println!("t={} community={} {}", event.t, event.community, event.kind);
                } else {
                    println!(
                        "t={} community={} {} from={}",
                        event.t,
                        event.community,
                        event.kind,
                        event.related.join(",")
                    );
                }
            }
            println!("{} events", truth_log.events.len());
        }
        Some(path) => {
            let detected =
                read_partition_csv(&path, PartitionSource::Detected, Some(truth.timesteps()))?;
            let detected_log = detect_events(&detected, args.threshold)?;
            let truth_counts = truth_log.counts();
            let detected_counts = detected_log.counts();
            println!("{:<26} {:>8} {:>8}", "event", "truth", "detected");
            for kind in EventKind::ALL {
                println!(
                    "{:<26} {:>8} {:>8}",
                    kind.name(),
                    truth_counts.get(&kind).copied().unwrap_or(0),
                    detected_counts.get(&kind).copied().unwrap_or(0)
                );
            }
            println!(
                "count difference: {}",
                event_count_diff(&truth_log, &detected_log)
            );
        }
    }
    Ok(())
}

fn run_stats(args: StatsArgs) -> Result<(), CliError> {
    let truth = load_ground_truth(&args.truth)?;
    let properties = network_properties(&truth);
    for p in &properties {
        let diameter = p.diameter.map_or("-".to_owned(), |d| d.to_string());
        let asp = p
            .avg_shortest_path
            .map_or("-".to_owned(), |v| format!("{v:.3}"));
        println!(
            "t={} nodes={} edges={} communities={} mean_degree={:.3} modularity={:.4} \
             clustering={:.4} largest_cc={} diameter={diameter} avg_path={asp}",
            p.t,
            p.n_nodes,
            p.n_edges,
            p.n_communities,
            p.mean_degree,
            p.modularity,
            p.avg_clustering,
            p.largest_component
        );
    }

    let records = community_dynamics(&truth.communities, truth.timesteps());
    let blocks = [
        (
            "turnover",
            summarize(records.iter().filter_map(|r| r.turnover)),
        ),
        (
            "size_change",
            summarize(records.iter().filter_map(|r| r.size_change)),
        ),
        (
            "emigrant_ratio",
            summarize(records.iter().map(|r| r.emigrant_ratio)),
        ),
        (
            "predecessors",
            summarize(records.iter().filter_map(|r| r.n_predecessors.map(|n| n as f64))),
        ),
        (
            "renewal",
            summarize(
                system_renewal(&truth.communities, truth.timesteps())
                    .into_iter()
                    .map(|(_, v)| v),
            ),
        ),
    ];
    for (name, summary) in blocks {
        match summary {
            Some(s) => println!(
                "{name}: mean={:.4} std={:.4} min={:.4} max={:.4} n={}",
                s.mean, s.std, s.min, s.max, s.n
            ),
            None => println!("{name}: no observations"),
        }
    }

    if let Some(path) = args.out {
        let mut writer = csv::Writer::from_path(&path)
            .map_err(|e| ConfigError::parse(&path, e.to_string()))?;
        for p in &properties {
            writer
                .serialize(p)
                .map_err(|e| ConfigError::parse(&path, e.to_string()))?;
        }
        writer
            .flush()
            .map_err(|e| ConfigError::io(&path, e))?;
        println!(
            "wrote {} snapshot property rows -> {}",
            properties.len(),
            path.display()
        );
    }
    Ok(())
}

fn run_detect(args: DetectArgs) -> Result<(), CliError> {
    if !(args.resolution.is_finite() && args.resolution > 0.0) {
        return Err(ConfigError::InvalidParameter {
            name: "resolution".to_owned(),
            reason: format!("must be a positive number, got {}", args.resolution),
        }
        .into());
    }
    if !(args.match_threshold > 0.0 && args.match_threshold <= 1.0) {
        return Err(ConfigError::InvalidParameter {
            name: "match_threshold".to_owned(),
            reason: format!("must be in (0, 1], got {}", args.match_threshold),
        }
        .into());
    }
    let truth = load_ground_truth(&args.truth)?;
    let config = DetectorConfig {
        resolution: args.resolution,
        match_threshold: args.match_threshold,
    };
    let seed = args.seed.unwrap_or(truth.seed);
    let partition = detect_communities(&truth.snapshots, &config, seed);
    write_partition_csv(&partition, &args.out)?;
    println!(
        "detected partition: seed={seed} labels={} timesteps={} -> {}",
        partition.n_labels(),
        partition.timesteps(),
        args.out.display()
    );
    Ok(())
}

fn run_sankey(args: SankeyArgs) -> Result<(), CliError> {
    let truth = load_ground_truth(&args.truth)?;
    write_sankey_svg(&truth, &args.out)?;
    println!("wrote member flow diagram -> {}", args.out.display());
    Ok(())
}

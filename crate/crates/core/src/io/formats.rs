//! Instance directory layout and the CSV/JSON files inside it.
//!
//! A saved instance is a directory:
//!
//! ```text
//! <dir>/config.json      scenario configuration, including the seed
//! <dir>/membership.csv   node,t,community rows for every active node
//! <dir>/edges/t_<k>.csv  u,v rows for snapshot k, one file per timestep
//! ```
//!
//! Membership rows are sorted by timestep, then community, then node;
//! numeric community labels sort numerically so `2` precedes `10`. Edge
//! rows are sorted by endpoint pair. Detected partitions use the same
//! membership format with detector-assigned labels.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::ConfigError;
use crate::model::{
    CommunityId, EvolvingCommunity, GroundTruth, NodeId, PartitionSource, Snapshot,
    StaticCommunity, TemporalPartition,
};
use crate::scenario::ScenarioConfig;

pub const CONFIG_FILE: &str = "config.json";
pub const MEMBERSHIP_FILE: &str = "membership.csv";
pub const EDGES_DIR: &str = "edges";

const MEMBERSHIP_HEADER: [&str; 3] = ["node", "t", "community"];
const EDGES_HEADER: [&str; 2] = ["u", "v"];

/// File name of the edge list for timestep `t`.
pub fn edges_file_name(t: usize) -> String {
    format!("t_{t}.csv")
}

fn csv_err(path: &Path, err: csv::Error) -> ConfigError {
    let text = err.to_string();
    match err.into_kind() {
        csv::ErrorKind::Io(e) => ConfigError::io(path, e),
        _ => ConfigError::parse(path, text),
    }
}

/// Writes a scenario configuration as pretty-printed JSON.
pub fn save_config(config: &ScenarioConfig, path: &Path) -> Result<(), ConfigError> {
    let mut text = serde_json::to_string_pretty(config)
        .map_err(|e| ConfigError::parse(path, e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| ConfigError::io(path, e))
}

/// Loads and validates a scenario configuration from JSON.
///
/// Returns the configuration together with any validation warnings, such
/// as `p_out >= p_in`.
pub fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<String>), ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::io(path, e))?;
    let config: ScenarioConfig =
        serde_json::from_str(&text).map_err(|e| ConfigError::parse(path, e.to_string()))?;
    let warnings = config.validate()?;
    Ok((config, warnings))
}

/// Orders community labels for output: numeric labels numerically first,
/// everything else lexically after them.
fn label_sort_key(name: &str) -> (u8, u64, &str) {
    match name.parse::<u64>() {
        Ok(value) => (0, value, name),
        Err(_) => (1, 0, name),
    }
}

/// Writes a temporal partition as a membership CSV with the header
/// `node,t,community`, rows sorted by timestep, community, node.
pub fn write_partition_csv(partition: &TemporalPartition, path: &Path) -> Result<(), ConfigError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer
        .write_record(MEMBERSHIP_HEADER)
        .map_err(|e| csv_err(path, e))?;
    for t in 0..partition.timesteps() {
        let mut communities: Vec<(&str, BTreeSet<NodeId>)> = partition
            .communities_at(t)
            .into_iter()
            .map(|(label, members)| (partition.label_name(label), members))
            .collect();
        communities.sort_by(|a, b| label_sort_key(a.0).cmp(&label_sort_key(b.0)));
        for (name, members) in communities {
            for node in members {
                writer
                    .write_record([node.to_string().as_str(), &t.to_string(), name])
                    .map_err(|e| csv_err(path, e))?;
            }
        }
    }
    writer.flush().map_err(|e| ConfigError::io(path, e))
}

/// One parsed membership row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipRow {
    pub node: NodeId,
    pub t: usize,
    pub community: String,
}

fn check_header<const N: usize>(
    path: &Path,
    found: &csv::StringRecord,
    expected: [&str; N],
) -> Result<(), ConfigError> {
    if found.iter().eq(expected) {
        Ok(())
    } else {
        Err(ConfigError::parse(
            path,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ))
    }
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    name: &str,
    raw: &str,
) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| {
        ConfigError::parse(path, format!("line {line}: invalid {name} `{raw}`"))
    })
}

/// Reads membership rows, enforcing the header and one community per
/// node and timestep.
pub fn read_membership_rows(path: &Path) -> Result<Vec<MembershipRow>, ConfigError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    check_header(path, &headers, MEMBERSHIP_HEADER)?;

    let mut rows = Vec::new();
    let mut seen: BTreeSet<(usize, NodeId)> = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(ConfigError::parse(
                path,
                format!("line {line}: expected 3 fields, found {}", record.len()),
            ));
        }
        let node = NodeId(parse_field(path, line, "node", &record[0])?);
        let t: usize = parse_field(path, line, "timestep", &record[1])?;
        let community = record[2].to_owned();
        if community.is_empty() {
            return Err(ConfigError::parse(
                path,
                format!("line {line}: empty community label"),
            ));
        }
        if !seen.insert((t, node)) {
            return Err(ConfigError::parse(
                path,
                format!("line {line}: node {node} already assigned at t={t}"),
            ));
        }
        rows.push(MembershipRow { node, t, community });
    }
    if rows.is_empty() {
        return Err(ConfigError::parse(path, "no membership rows"));
    }
    Ok(rows)
}

/// Reads a membership CSV into a temporal partition.
///
/// With `timesteps` given, the partition spans exactly that horizon and
/// rows beyond it are rejected; trailing timesteps with no rows stay
/// empty. Without it, the horizon is the last timestep that has rows,
/// plus one.
pub fn read_partition_csv(
    path: &Path,
    source: PartitionSource,
    timesteps: Option<usize>,
) -> Result<TemporalPartition, ConfigError> {
    let rows = read_membership_rows(path)?;
    let max_t = rows.iter().map(|r| r.t).max().unwrap_or(0);
    let horizon = match timesteps {
        Some(horizon) => {
            if max_t >= horizon {
                return Err(ConfigError::parse(
                    path,
                    format!("timestep {max_t} outside horizon {horizon}"),
                ));
            }
            horizon
        }
        None => max_t + 1,
    };
    let mut partition = TemporalPartition::new(horizon, source);
    for row in rows {
        let label = partition.intern(&row.community);
        partition.assign(row.t, row.node, label);
    }
    Ok(partition)
}

/// Writes one snapshot's edge list with the header `u,v`.
pub fn write_edges_csv(snapshot: &Snapshot, path: &Path) -> Result<(), ConfigError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer
        .write_record(EDGES_HEADER)
        .map_err(|e| csv_err(path, e))?;
    for &(u, v) in &snapshot.edges {
        writer
            .write_record([u.to_string(), v.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| ConfigError::io(path, e))
}

/// Reads one snapshot's edge list.
pub fn read_edges_csv(path: &Path) -> Result<Vec<(NodeId, NodeId)>, ConfigError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    check_header(path, &headers, EDGES_HEADER)?;

    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(ConfigError::parse(
                path,
                format!("line {line}: expected 2 fields, found {}", record.len()),
            ));
        }
        let u = NodeId(parse_field(path, line, "endpoint", &record[0])?);
        let v = NodeId(parse_field(path, line, "endpoint", &record[1])?);
        edges.push((u, v));
    }
    Ok(edges)
}

/// Saves a complete instance under `dir`, creating it if needed.
pub fn save_ground_truth(truth: &GroundTruth, dir: &Path) -> Result<(), ConfigError> {
    fs::create_dir_all(dir).map_err(|e| ConfigError::io(dir, e))?;
    save_config(&truth.config, &dir.join(CONFIG_FILE))?;
    write_partition_csv(&truth.to_partition(), &dir.join(MEMBERSHIP_FILE))?;
    let edges_dir = dir.join(EDGES_DIR);
    fs::create_dir_all(&edges_dir).map_err(|e| ConfigError::io(&edges_dir, e))?;
    for snapshot in &truth.snapshots {
        write_edges_csv(snapshot, &edges_dir.join(edges_file_name(snapshot.t)))?;
    }
    Ok(())
}

/// Loads an instance saved by [`save_ground_truth`].
///
/// The reconstruction is exact: loading a saved instance yields a value
/// equal to the original, including the seed recorded in its config.
pub fn load_ground_truth(dir: &Path) -> Result<GroundTruth, ConfigError> {
    let config_path = dir.join(CONFIG_FILE);
    let (config, _) = load_config(&config_path)?;

    let membership_path = dir.join(MEMBERSHIP_FILE);
    let rows = read_membership_rows(&membership_path)?;
    let mut by_community: BTreeMap<CommunityId, BTreeMap<usize, BTreeSet<NodeId>>> =
        BTreeMap::new();
    let mut active: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); config.timesteps];
    for row in rows {
        if row.t >= config.timesteps {
            return Err(ConfigError::parse(
                &membership_path,
                format!("timestep {} outside horizon {}", row.t, config.timesteps),
            ));
        }
        let id = row.community.parse::<u32>().map_err(|_| {
            ConfigError::parse(
                &membership_path,
                format!("non-numeric community label `{}`", row.community),
            )
        })?;
        by_community
            .entry(CommunityId(id))
            .or_default()
            .entry(row.t)
            .or_default()
            .insert(row.node);
        active[row.t].insert(row.node);
    }

    let mut communities = Vec::with_capacity(by_community.len());
    for (id, steps) in by_community {
        let birth_t = *steps.keys().next().expect("community has at least one row");
        let last_t = *steps.keys().next_back().expect("community has at least one row");
        if steps.len() != last_t - birth_t + 1 {
            return Err(ConfigError::parse(
                &membership_path,
                format!("community {id} skips timesteps between {birth_t} and {last_t}"),
            ));
        }
        let sequence = steps
            .into_iter()
            .map(|(t, members)| StaticCommunity {
                evolving_id: id,
                t,
                members,
            })
            .collect();
        communities.push(EvolvingCommunity {
            id,
            birth_t,
            sequence,
        });
    }

    let edges_dir = dir.join(EDGES_DIR);
    let mut snapshots = Vec::with_capacity(config.timesteps);
    for (t, active_nodes) in active.into_iter().enumerate() {
        let path = edges_dir.join(edges_file_name(t));
        let mut snapshot = Snapshot::new(t);
        snapshot.active_nodes = active_nodes;
        for (u, v) in read_edges_csv(&path)? {
            snapshot.insert_edge(u, v);
        }
        snapshots.push(snapshot);
    }

    Ok(GroundTruth {
        seed: config.seed,
        config,
        communities,
        snapshots,
    })
}

/// Convenience paths inside an instance directory.
pub fn instance_paths(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (
        dir.join(CONFIG_FILE),
        dir.join(MEMBERSHIP_FILE),
        dir.join(EDGES_DIR),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_ground_truth;
    use crate::sampling::DistributionSpec;

    fn small_config(seed: u64) -> ScenarioConfig {
        let mut config = ScenarioConfig::base(0.5, 0.05);
        config.timesteps = 6;
        config.n_communities = 4;
        config.initial_size = DistributionSpec::normal(18.0, 3.0);
        config.core_node_ratio = DistributionSpec::constant(0.5);
        config.seed = seed;
        config
    }

    #[test]
    fn save_and_load_reconstruct_the_instance_exactly() {
        let truth = generate_ground_truth(&small_config(41)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ground_truth(&truth, dir.path()).unwrap();
        let loaded = load_ground_truth(dir.path()).unwrap();
        assert_eq!(loaded, truth);
    }

    #[test]
    fn membership_rows_are_sorted_and_headed() {
        let truth = generate_ground_truth(&small_config(3)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ground_truth(&truth, dir.path()).unwrap();

        let text = fs::read_to_string(dir.path().join(MEMBERSHIP_FILE)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node,t,community"));
        let mut keys = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 3);
            let node: u32 = fields[0].parse().unwrap();
            let t: usize = fields[1].parse().unwrap();
            let community: u64 = fields[2].parse().unwrap();
            keys.push((t, community, node));
        }
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(!keys.is_empty());
    }

    #[test]
    fn edge_files_cover_every_timestep_with_the_expected_header() {
        let truth = generate_ground_truth(&small_config(5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ground_truth(&truth, dir.path()).unwrap();
        for t in 0..truth.timesteps() {
            let path = dir.path().join(EDGES_DIR).join(edges_file_name(t));
            let text = fs::read_to_string(&path).unwrap();
            assert_eq!(text.lines().next(), Some("u,v"));
            assert_eq!(text.lines().count() - 1, truth.snapshots[t].n_edges());
        }
    }

    #[test]
    fn detected_partitions_round_trip_by_label_name() {
        let mut partition = TemporalPartition::new(3, PartitionSource::Detected);
        let a = partition.intern("12");
        let b = partition.intern("3");
        partition.assign(0, NodeId(0), a);
        partition.assign(0, NodeId(1), b);
        partition.assign(2, NodeId(1), a);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("detected.csv");
        write_partition_csv(&partition, &path).unwrap();

        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // Numeric labels sort numerically: community 3 before community 12.
        assert_eq!(
            lines,
            ["node,t,community", "1,0,3", "0,0,12", "1,2,12"]
        );

        let loaded = read_partition_csv(&path, PartitionSource::Detected, Some(3)).unwrap();
        assert_eq!(loaded.timesteps(), 3);
        for t in 0..3 {
            let want: BTreeMap<String, BTreeSet<NodeId>> = partition
                .communities_at(t)
                .into_iter()
                .map(|(l, m)| (partition.label_name(l).to_owned(), m))
                .collect();
            let got: BTreeMap<String, BTreeSet<NodeId>> = loaded
                .communities_at(t)
                .into_iter()
                .map(|(l, m)| (loaded.label_name(l).to_owned(), m))
                .collect();
            assert_eq!(got, want, "t={t}");
        }
    }

    #[test]
    fn wrong_membership_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "node,time,community\n0,0,1\n").unwrap();
        let err = read_membership_rows(&path).unwrap_err();
        assert!(err.to_string().contains("node,t,community"), "got: {err}");
    }

    #[test]
    fn duplicate_assignment_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.csv");
        fs::write(&path, "node,t,community\n5,1,a\n5,1,b\n").unwrap();
        let err = read_membership_rows(&path).unwrap_err();
        assert!(err.to_string().contains("already assigned"), "got: {err}");
    }

    #[test]
    fn rows_beyond_a_fixed_horizon_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("long.csv");
        fs::write(&path, "node,t,community\n0,7,a\n").unwrap();
        let err = read_partition_csv(&path, PartitionSource::Detected, Some(5)).unwrap_err();
        assert!(err.to_string().contains("horizon"), "got: {err}");
        let ok = read_partition_csv(&path, PartitionSource::Detected, None).unwrap();
        assert_eq!(ok.timesteps(), 8);
    }

    #[test]
    fn non_numeric_truth_labels_are_rejected_on_load() {
        let truth = generate_ground_truth(&small_config(9)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ground_truth(&truth, dir.path()).unwrap();
        let membership = dir.path().join(MEMBERSHIP_FILE);
        let mut text = fs::read_to_string(&membership).unwrap();
        text.push_str("9999,0,not-a-number\n");
        fs::write(&membership, text).unwrap();
        let err = load_ground_truth(dir.path()).unwrap_err();
        assert!(err.to_string().contains("non-numeric"), "got: {err}");
    }

    #[test]
    fn missing_edge_file_is_an_io_error() {
        let truth = generate_ground_truth(&small_config(2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_ground_truth(&truth, dir.path()).unwrap();
        fs::remove_file(dir.path().join(EDGES_DIR).join(edges_file_name(0))).unwrap();
        let err = load_ground_truth(dir.path()).unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }), "got: {err}");
    }

    #[test]
    fn unknown_config_keys_are_rejected_with_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(CONFIG_FILE);
        fs::write(&path, r#"{"p_in": 0.5, "p_out": 0.05, "bogus": 1}"#).unwrap();
        let err = load_config(&path).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("bogus"), "got: {text}");
        assert!(text.contains("config.json"), "got: {text}");
    }

    #[test]
    fn saving_twice_produces_identical_bytes() {
        let truth = generate_ground_truth(&small_config(13)).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        save_ground_truth(&truth, a.path()).unwrap();
        save_ground_truth(&truth, b.path()).unwrap();
        for name in [CONFIG_FILE, MEMBERSHIP_FILE] {
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{name} differs"
            );
        }
        for t in 0..truth.timesteps() {
            let rel = Path::new(EDGES_DIR).join(edges_file_name(t));
            assert_eq!(
                fs::read(a.path().join(&rel)).unwrap(),
                fs::read(b.path().join(&rel)).unwrap(),
                "{} differs",
                rel.display()
            );
        }
    }
}

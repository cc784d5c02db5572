//! Community flow diagrams as self-contained SVG.
//!
//! Each timestep is a column; each community at that timestep is a block
//! whose height is proportional to its member count. Gray ribbons connect
//! a community's block to its successor blocks, one ribbon per member
//! flow, so merges, splits and migrations are visible as ribbons that
//! change lanes. Members arriving from the idle pool or as brand-new
//! nodes have no source block; their counts are recorded on the
//! destination block as `data-idle-in` and `data-birth-in`.
//!
//! The output is a pure function of the ground truth: no timestamps, no
//! random ids, fixed iteration order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::ConfigError;
use crate::membership::{flow_records, FlowRecord, FlowSource};
use crate::model::{CommunityId, GroundTruth};

const MARGIN: f64 = 30.0;
const TOP: f64 = 50.0;
const COLUMN_SPACING: f64 = 150.0;
const BLOCK_WIDTH: f64 = 24.0;
const BLOCK_GAP: f64 = 12.0;
const PX_PER_MEMBER: f64 = 3.0;
const LABEL_MIN_HEIGHT: f64 = 12.0;

struct Block {
    x: f64,
    y: f64,
    height: f64,
    size: usize,
    idle_in: usize,
    birth_in: usize,
    out_used: f64,
    in_used: f64,
}

fn px(value: f64) -> String {
    format!("{value:.1}")
}

fn block_color(id: CommunityId) -> String {
    let hue = (u64::from(id.0) * 137) % 360;
    format!("hsl({hue}, 55%, 52%)")
}

/// Renders the member-flow diagram of a ground truth as an SVG document.
pub fn sankey_svg(truth: &GroundTruth) -> String {
    let timesteps = truth.timesteps();
    let mut blocks: BTreeMap<(usize, CommunityId), Block> = BTreeMap::new();
    let mut max_bottom = TOP;
    for t in 0..timesteps {
        let x = MARGIN + t as f64 * COLUMN_SPACING;
        let mut y = TOP;
        for (i, community) in truth.communities_at(t).iter().enumerate() {
            if i > 0 {
                y += BLOCK_GAP;
            }
            let height = community.size() as f64 * PX_PER_MEMBER;
            blocks.insert(
                (t, community.evolving_id),
                Block {
                    x,
                    y,
                    height,
                    size: community.size(),
                    idle_in: 0,
                    birth_in: 0,
                    out_used: 0.0,
                    in_used: 0.0,
                },
            );
            y += height;
        }
        max_bottom = max_bottom.max(y);
    }
    let width = MARGIN * 2.0 + timesteps.saturating_sub(1) as f64 * COLUMN_SPACING + BLOCK_WIDTH;
    let height = max_bottom + MARGIN;

    let mut flows_by_t: BTreeMap<usize, Vec<FlowRecord>> = BTreeMap::new();
    for record in flow_records(&truth.communities, timesteps) {
        flows_by_t.entry(record.t).or_default().push(record);
    }
    for records in flows_by_t.values_mut() {
        records.sort_by_key(|r| r.destination);
    }

    let mut ribbons = String::new();
    for (&t, records) in &flows_by_t {
        for record in records {
            for (&source, &count) in &record.sources {
                let band = count as f64 * PX_PER_MEMBER;
                match source {
                    FlowSource::Community(from) if t > 0 => {
                        let (x1, y1) = {
                            let s = &blocks[&(t - 1, from)];
                            (s.x + BLOCK_WIDTH, s.y + s.out_used)
                        };
                        let (x2, y2) = {
                            let d = &blocks[&(t, record.destination)];
                            (d.x, d.y + d.in_used)
                        };
                        let cx = (x1 + x2) / 2.0;
                        writeln!(
                            ribbons,
                            "  <path class=\"flow\" data-t=\"{t}\" data-source=\"{from}\" \
                             data-dest=\"{dest}\" data-count=\"{count}\" d=\"M {x1} {y1} \
                             C {cx} {y1}, {cx} {y2}, {x2} {y2} L {x2} {y2b} \
                             C {cx} {y2b}, {cx} {y1b}, {x1} {y1b} Z\"/>",
                            dest = record.destination,
                            x1 = px(x1),
                            y1 = px(y1),
                            x2 = px(x2),
                            y2 = px(y2),
                            y2b = px(y2 + band),
                            y1b = px(y1 + band),
                            cx = px(cx),
                        )
                        .expect("writing to a string cannot fail");
                        blocks.get_mut(&(t - 1, from)).expect("source block exists").out_used +=
                            band;
                        blocks
                            .get_mut(&(t, record.destination))
                            .expect("destination block exists")
                            .in_used += band;
                    }
                    FlowSource::Community(_) => {}
                    FlowSource::Idle => {
                        let block = blocks
                            .get_mut(&(t, record.destination))
                            .expect("destination block exists");
                        block.idle_in += count;
                        block.in_used += band;
                    }
                    FlowSource::Birth => {
                        let block = blocks
                            .get_mut(&(t, record.destination))
                            .expect("destination block exists");
                        block.birth_in += count;
                        block.in_used += band;
                    }
                }
            }
        }
    }

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" \
         width=\"{w}\" height=\"{h}\">",
        w = px(width),
        h = px(height),
    )
    .expect("writing to a string cannot fail");
    svg.push_str(
        "  <style>\n\
         \x20   .flow { fill: #9e9e9e; fill-opacity: 0.45; }\n\
         \x20   .community { stroke: #333; stroke-width: 0.5; }\n\
         \x20   text { font: 11px sans-serif; fill: #333; }\n\
         \x20 </style>\n",
    );
    for t in 0..timesteps {
        let x = MARGIN + t as f64 * COLUMN_SPACING;
        writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t={t}</text>",
            px(x + BLOCK_WIDTH / 2.0),
            px(TOP - 12.0),
        )
        .expect("writing to a string cannot fail");
    }
    svg.push_str(&ribbons);
    for (&(t, id), block) in &blocks {
        writeln!(
            svg,
            "  <rect class=\"community\" data-t=\"{t}\" data-community=\"{id}\" \
             data-size=\"{size}\" data-idle-in=\"{idle}\" data-birth-in=\"{birth}\" \
             x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\" fill=\"{color}\">\
             <title>community {id} at t={t}: {size} members</title></rect>",
            size = block.size,
            idle = block.idle_in,
            birth = block.birth_in,
            x = px(block.x),
            y = px(block.y),
            w = px(BLOCK_WIDTH),
            h = px(block.height),
            color = block_color(id),
        )
        .expect("writing to a string cannot fail");
        if block.height >= LABEL_MIN_HEIGHT {
            writeln!(
                svg,
                "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{id}</text>",
                px(block.x + BLOCK_WIDTH / 2.0),
                px(block.y + block.height / 2.0 + 4.0),
            )
            .expect("writing to a string cannot fail");
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders and writes the flow diagram.
pub fn write_sankey_svg(truth: &GroundTruth, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, sankey_svg(truth)).map_err(|e| ConfigError::io(path, e))
}

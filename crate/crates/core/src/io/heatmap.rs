//! Long-format heatmap export: one `row,col,value` line per cell.
//!
//! The format is deliberately sparse; cells that are undefined for a
//! given dataset are simply absent. Plotting tools pivot the three
//! columns back into a matrix.

use std::path::Path;

use crate::error::ConfigError;

/// One heatmap cell.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapCell {
    pub row: String,
    pub col: String,
    pub value: f64,
}

impl HeatmapCell {
    pub fn new(row: impl Into<String>, col: impl Into<String>, value: f64) -> Self {
        HeatmapCell {
            row: row.into(),
            col: col.into(),
            value,
        }
    }
}

/// Renders cells in the given order as `row,col,value` CSV.
///
/// Every value must be finite; a NaN or infinity anywhere aborts the
/// render so no partial file can be mistaken for a complete one.
pub fn render_heatmap_csv(cells: &[HeatmapCell]) -> Result<String, ConfigError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let fail = |message: String| ConfigError::InvalidParameter {
        name: "heatmap".to_owned(),
        reason: message,
    };
    writer
        .write_record(["row", "col", "value"])
        .map_err(|e| fail(e.to_string()))?;
    for cell in cells {
        if !cell.value.is_finite() {
            return Err(fail(format!(
                "non-finite value {} at ({}, {})",
                cell.value, cell.row, cell.col
            )));
        }
        writer
            .write_record([&cell.row, &cell.col, &cell.value.to_string()])
            .map_err(|e| fail(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| fail(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| fail(e.to_string()))
}

/// Renders and writes a heatmap CSV, returning the number of cells.
pub fn write_heatmap_csv(cells: &[HeatmapCell], path: &Path) -> Result<usize, ConfigError> {
    let text = render_heatmap_csv(cells)?;
    std::fs::write(path, text).map_err(|e| ConfigError::io(path, e))?;
    Ok(cells.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_cells(rows: usize, cols: usize) -> Vec<HeatmapCell> {
        let mut cells = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                cells.push(HeatmapCell::new(
                    r.to_string(),
                    c.to_string(),
                    (r * cols + c) as f64 / 10.0,
                ));
            }
        }
        cells
    }

    #[test]
    fn a_3x4_grid_renders_12_rows_plus_header() {
        let text = render_heatmap_csv(&grid_cells(3, 4)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 13);
        assert_eq!(lines[0], "row,col,value");
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[12], "2,3,1.1");
    }

    #[test]
    fn cell_order_is_preserved() {
        let cells = vec![
            HeatmapCell::new("b", "1", 0.5),
            HeatmapCell::new("a", "2", 0.25),
        ];
        let text = render_heatmap_csv(&cells).unwrap();
        assert_eq!(text, "row,col,value\nb,1,0.5\na,2,0.25\n");
    }

    #[test]
    fn non_finite_values_abort_without_writing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("heat.csv");
        let cells = vec![
            HeatmapCell::new("0", "0", 1.0),
            HeatmapCell::new("0", "1", f64::NAN),
        ];
        let err = write_heatmap_csv(&cells, &path).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "got: {err}");
        assert!(!path.exists());

        let inf = vec![HeatmapCell::new("0", "0", f64::INFINITY)];
        assert!(render_heatmap_csv(&inf).is_err());
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let cells = vec![HeatmapCell::new("t=1,delta=2", "x", 0.75)];
        let text = render_heatmap_csv(&cells).unwrap();
        assert_eq!(text.lines().nth(1), Some("\"t=1,delta=2\",x,0.75"));
    }

    #[test]
    fn write_reports_the_cell_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("heat.csv");
        let n = write_heatmap_csv(&grid_cells(2, 2), &path).unwrap();
        assert_eq!(n, 4);
        assert!(path.is_file());
    }
}

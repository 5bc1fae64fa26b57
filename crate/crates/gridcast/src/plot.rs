//! gnuplot-ready plot data. Each figure gets its table as CSV, one
//! whitespace-separated `.dat` file per series group, and a `.plt` script
//! that draws them. Nothing is rendered here.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, PartialEq)]
pub enum PlotKind {
    /// `y` columns against `x`, one `.dat` per value of `group` (if set).
    Lines {
        x: String,
        y: Vec<String>,
        group: Option<String>,
    },
    /// Matrix of `value` over (`row`, `col`) labels, drawn as an image.
    Heatmap {
        row: String,
        col: String,
        value: String,
    },
}

impl PlotKind {
    pub fn lines(x: &str, y: &[&str], group: Option<&str>) -> Self {
        Self::Lines {
            x: x.into(),
            y: y.iter().map(|s| s.to_string()).collect(),
            group: group.map(str::to_string),
        }
    }

    pub fn heatmap(row: &str, col: &str, value: &str) -> Self {
        Self::Heatmap {
            row: row.into(),
            col: col.into(),
            value: value.into(),
        }
    }
}

/// File-name-safe form of a group label.
fn slug(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn dat_value(c: &Cell) -> String {
    match c {
        Cell::Empty => "NaN".into(),
        Cell::Text(s) => format!("\"{s}\""),
        other => other.to_string(),
    }
}

fn col(table: &Table, name: &str) -> Result<usize> {
    table
        .column(name)
        .ok_or_else(|| HarnessError::Other(format!("table {} has no column `{name}`", table.name)))
}

/// File contents for one figure, keyed by file name.
pub fn render_plotdata(table: &Table, kind: &PlotKind) -> Result<BTreeMap<String, String>> {
    if table.is_empty() {
        return Err(HarnessError::Other(format!(
            "table {} is empty; nothing to plot",
            table.name
        )));
    }
    let stem = slug(&table.name);
    let mut files = BTreeMap::new();
    files.insert(
        format!("{stem}.csv"),
        String::from_utf8(table.to_csv_bytes()).expect("csv is utf-8"),
    );
    let mut plt = format!(
        "# {stem}: gnuplot script over the .dat files beside it\nset datafile missing \"NaN\"\nset key outside\n"
    );
    match kind {
        PlotKind::Lines { x, y, group } => {
            let xi = col(table, x)?;
            let yi: Vec<usize> = y.iter().map(|c| col(table, c)).collect::<Result<_>>()?;
            let mut groups: BTreeMap<String, Vec<&Vec<Cell>>> = BTreeMap::new();
            match group {
                Some(g) => {
                    let gi = col(table, g)?;
                    for r in &table.rows {
                        groups.entry(r[gi].to_string()).or_default().push(r);
                    }
                }
                None => {
                    groups.insert(String::new(), table.rows.iter().collect());
                }
            }
            let _ = writeln!(plt, "set xlabel \"{x}\"");
            let mut plots = Vec::new();
            for (label, rows) in &groups {
                let name = if label.is_empty() {
                    format!("{stem}.dat")
                } else {
                    format!("{stem}_{}.dat", slug(label))
                };
                let mut dat = format!("# {x} {}\n", y.join(" "));
                for r in rows {
                    let mut line = dat_value(&r[xi]);
                    for &i in &yi {
                        line.push(' ');
                        line.push_str(&dat_value(&r[i]));
                    }
                    dat.push_str(&line);
                    dat.push('\n');
                }
                let xspec = if matches!(rows[0][xi], Cell::Text(_)) {
                    "0:xtic(1)".to_string()
                } else {
                    "1".to_string()
                };
                for (k, name_y) in y.iter().enumerate() {
                    let title = if label.is_empty() {
                        name_y.clone()
                    } else {
                        format!("{label} {name_y}")
                    };
                    plots.push(format!(
                        "'{name}' using {xspec}:{} with linespoints title \"{title}\"",
                        k + 2
                    ));
                }
                files.insert(name, dat);
            }
            let _ = writeln!(plt, "plot {}", plots.join(", \\\n     "));
        }
        PlotKind::Heatmap { row, col: c, value } => {
            let (ri, ci, vi) = (col(table, row)?, col(table, c)?, col(table, value)?);
            let mut rows: Vec<String> = Vec::new();
            let mut cols: Vec<String> = Vec::new();
            for r in &table.rows {
                for (list, i) in [(&mut rows, ri), (&mut cols, ci)] {
                    let k = r[i].to_string();
                    if !list.contains(&k) {
                        list.push(k);
                    }
                }
            }
            let mut dat = format!("# {c} index, {row} index, {value}\n");
            for (i, rl) in rows.iter().enumerate() {
                for (j, cl) in cols.iter().enumerate() {
                    let v = table
                        .rows
                        .iter()
                        .find(|r| r[ri].to_string() == *rl && r[ci].to_string() == *cl)
                        .map_or("NaN".to_string(), |r| dat_value(&r[vi]));
                    let _ = writeln!(dat, "{j} {i} {v}");
                }
                dat.push('\n');
            }
            let tics = |labels: &[String]| {
                labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| format!("\"{l}\" {i}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let _ = writeln!(plt, "set xlabel \"{c}\"\nset ylabel \"{row}\"");
            let _ = writeln!(
                plt,
                "set xtics ({})\nset ytics ({})",
                tics(&cols),
                tics(&rows)
            );
            let _ = writeln!(
                plt,
                "plot '{stem}.dat' using 1:2:3 with image title \"{value}\""
            );
            files.insert(format!("{stem}.dat"), dat);
        }
    }
    files.insert(format!("{stem}.plt"), plt);
    Ok(files)
}

/// Writes the figure files for `table` into `dir` and returns their paths.
/// Re-emitting the same table rewrites identical bytes.
pub fn emit_plotdata(table: &Table, kind: &PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    let files = render_plotdata(table, kind)?;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut out = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics() -> Table {
        let mut t = Table::new("metrics", &["model", "variable", "nrmse"]);
        for (m, v, x) in [
            ("linear", "load_0", 0.1),
            ("conv", "load_0", 0.2),
            ("linear", "solar", 0.3),
        ] {
            t.push(vec![m.into(), v.into(), x.into()]);
        }
        t
    }

    #[test]
    fn one_dat_per_group() {
        let files = render_plotdata(
            &metrics(),
            &PlotKind::lines("model", &["nrmse"], Some("variable")),
        )
        .unwrap();
        let names: Vec<&String> = files.keys().collect();
        assert_eq!(
            names,
            [
                "metrics.csv",
                "metrics.plt",
                "metrics_load_0.dat",
                "metrics_solar.dat"
            ]
        );
        assert!(files["metrics_load_0.dat"].contains("\"conv\" 0.2"));
        assert!(files["metrics.plt"].contains("xtic(1)"));
    }

    #[test]
    fn heatmap_and_errors() {
        let mut t = Table::new("sim", &["a", "b", "v"]);
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            t.push(vec![
                (a as usize).into(),
                (b as usize).into(),
                ((a + b) as f64).into(),
            ]);
        }
        let f = render_plotdata(&t, &PlotKind::heatmap("a", "b", "v")).unwrap();
        assert!(f["sim.dat"].contains("1 1 2.0"));
        assert!(
            render_plotdata(&Table::new("e", &["a"]), &PlotKind::lines("a", &[], None)).is_err()
        );
        assert!(render_plotdata(&t, &PlotKind::lines("zz", &["v"], None)).is_err());
    }

    #[test]
    fn re_emit_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let kind = PlotKind::lines("model", &["nrmse"], Some("variable"));
        let first = emit_plotdata(&metrics(), &kind, dir.path()).unwrap();
        let bytes: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
        let again = emit_plotdata(&metrics(), &kind, dir.path()).unwrap();
        assert_eq!(first, again);
        for (p, b) in again.iter().zip(bytes) {
            assert_eq!(std::fs::read(p).unwrap(), b);
        }
    }
}

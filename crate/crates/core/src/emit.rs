//! CSV and JSON-lines tables for sweep results, plus a plotting script.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::sweep::{AxisName, SweepRow, SweepSpec};

/// Result columns following the axis columns.
pub const RESULT_COLUMNS: [&str; 5] = ["delta", "theta", "g_ab", "g_ba", "g_asym"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidSweep(format!(
                "unknown format `{other}` (csv, jsonl)"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        })
    }
}

fn axis_names(rows: &[SweepRow]) -> Result<Vec<AxisName>> {
    let first = rows
        .first()
        .ok_or_else(|| Error::InvalidSweep("nothing to emit: no rows".into()))?;
    Ok(first.axes.iter().map(|&(n, _)| n).collect())
}

/// Header names for a table of `rows`.
pub fn columns(rows: &[SweepRow]) -> Result<Vec<&'static str>> {
    let mut cols: Vec<&'static str> = axis_names(rows)?.iter().map(|n| n.column()).collect();
    cols.extend(RESULT_COLUMNS);
    Ok(cols)
}

fn values(row: &SweepRow) -> impl Iterator<Item = f64> + '_ {
    row.axes
        .iter()
        .map(|&(_, v)| v)
        .chain([row.delta, row.theta, row.g_ab, row.g_ba, row.g_asym])
}

/// Twelve significant digits, lowercase exponent. Negative zero prints as zero.
pub fn format_number(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

/// Writes `rows` to `out` in the requested format.
pub fn emit<W: Write>(rows: &[SweepRow], format: Format, out: &mut W) -> Result<()> {
    let cols = columns(rows)?;
    match format {
        Format::Csv => {
            writeln!(out, "{}", cols.join(","))?;
            let mut line = String::new();
            for row in rows {
                line.clear();
                for (i, v) in values(row).enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    line.push_str(&format_number(v));
                }
                line.push('\n');
                out.write_all(line.as_bytes())?;
            }
        }
        Format::Jsonl => {
            for row in rows {
                let object: Map<String, Value> = cols
                    .iter()
                    .zip(values(row))
                    .map(|(&k, v)| (k.to_string(), Value::from(v)))
                    .collect();
                writeln!(out, "{}", Value::Object(object))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn emit_to_string(rows: &[SweepRow], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    emit(rows, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("emitted tables are ASCII"))
}

/// Python/matplotlib script that plots the CSV at `csv_path` (relative to the
/// script's own directory).
pub fn plot_script(spec: &SweepSpec, csv_path: &str, title: &str) -> String {
    let axes: Vec<&str> = spec.axes.iter().map(|a| a.name.column()).collect();
    let focus: Vec<String> = spec
        .focus
        .columns()
        .iter()
        .map(|c| format!("{c:?}"))
        .collect();
    let mut s = String::new();
    s.push_str("#!/usr/bin/env python3\n");
    s.push_str("import csv\nimport os\n\nimport matplotlib.pyplot as plt\n\n");
    s.push_str(&format!(
        "HERE = os.path.dirname(os.path.abspath(__file__))\nCSV = os.path.join(HERE, {csv_path:?})\n"
    ));
    s.push_str(&format!("TITLE = {title:?}\nFOCUS = [{}]\n", focus.join(", ")));
    s.push_str(&format!(
        "AXES = [{}]\n\n",
        axes.iter().map(|a| format!("{a:?}")).collect::<Vec<_>>().join(", ")
    ));
    s.push_str(
        r#"with open(CSV, newline="") as fh:
    rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]

fig, ax = plt.subplots()
if len(AXES) == 1:
    x = [r[AXES[0]] for r in rows]
    for col in FOCUS:
        ax.plot(x, [r[col] for r in rows], label=col)
    ax.set_xlabel(AXES[0])
    ax.legend()
else:
    outer, inner = AXES
    outer_vals = sorted({r[outer] for r in rows})
    inner_vals = sorted({r[inner] for r in rows})
    col = FOCUS[0]
    if len(outer_vals) <= 10:
        for v in outer_vals:
            sel = [r for r in rows if r[outer] == v]
            ax.plot([r[inner] for r in sel], [r[col] for r in sel], label=f"{outer}={v:g}")
        ax.set_xlabel(inner)
        ax.set_ylabel(col)
        ax.legend()
    else:
        grid = [[r[col] for r in rows[i * len(inner_vals):(i + 1) * len(inner_vals)]]
                for i in range(len(outer_vals))]
        mesh = ax.pcolormesh(inner_vals, outer_vals, grid, shading="auto")
        fig.colorbar(mesh, ax=ax, label=col)
        ax.set_xlabel(inner)
        ax.set_ylabel(outer)
ax.set_title(TITLE)
fig.tight_layout()
fig.savefig(os.path.splitext(CSV)[0] + ".png", dpi=150)
"#,
    );
    s
}

//! Writes CSVs, the JSON summary and the human-readable table.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::summary::{Experiment, RunSummary, Timings};

/// 17 significant digits, so every `f64` reads back bit for bit.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header `series,x,y`, one row per point of every series.
pub fn experiment_csv(e: &Experiment) -> String {
    let mut s = String::from("series,x,y\n");
    for series in &e.series {
        for (x, y) in series.x.iter().zip(&series.y) {
            let _ = writeln!(s, "{},{},{}", series.label, format_f64(x.0), format_f64(y.0));
        }
    }
    s
}

/// Fixed-width table: experiment, reference, measured, required, status.
pub fn table(summary: &RunSummary) -> String {
    let rows: Vec<[String; 5]> = summary
        .checks
        .iter()
        .map(|c| {
            let m = c.measured.0;
            let measured = match m.abs() {
                _ if m.is_nan() => "-".to_string(),
                a if a == 0.0 || a.is_infinite() || (1e-3..1e4).contains(&a) => format!("{m:.4}"),
                _ => format!("{m:.3e}"),
            };
            let status = if c.pass { "PASS" } else { "FAILED" };
            [c.experiment.clone(), c.reference.clone(), measured, c.required.clone(), status.into()]
        })
        .collect();
    let header = ["experiment", "reference", "measured", "required", "status"].map(String::from);
    let mut width = header.clone().map(|h| h.chars().count());
    for r in &rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |r: &[String; 5]| {
        let cells: Vec<String> = r.iter().zip(&width).map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count()))).collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = format!("{} ({})\n\n", summary.config.name, if summary.passed { "PASS" } else { "FAILED" });
    out += &line(&header);
    for r in &rows {
        out += &line(r);
    }
    if let Some(f) = &summary.failure {
        let _ = writeln!(out, "\nhalted in stage `{}`: {}", f.stage, f.error);
    }
    out
}

/// Writes `summary.json`, `report.txt`, `timings.json` and one `<experiment>.csv`
/// per experiment into `dir`. Returns the written paths.
pub fn emit_report(summary: &RunSummary, timings: &Timings, dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = vec![];
    let mut put = |name: String, body: String| -> io::Result<()> {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        written.push(p);
        Ok(())
    };
    put("summary.json".into(), summary.to_json())?;
    put("report.txt".into(), table(summary))?;
    put("timings.json".into(), serde_json::to_string_pretty(timings).map_err(io::Error::other)?)?;
    for e in &summary.experiments {
        put(format!("{}.csv", e.id), experiment_csv(e))?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summary::{nums, Series};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_numbers_read_back_exactly(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
            prop_assert_eq!(format_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let e = Experiment {
            id: "x".into(),
            series: vec![Series { label: "a".into(), x: nums(&[1.0, 2.0]), y: nums(&[0.5, 0.25]) }],
            fits: vec![],
        };
        let csv = experiment_csv(&e);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "series,x,y");
        assert_eq!(lines[1], "a,1.0000000000000000e0,5.0000000000000000e-1");
        assert_eq!(lines.len(), 3);
    }
}

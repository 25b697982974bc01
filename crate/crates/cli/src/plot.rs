//! Gnuplot script emission from the runner's CSVs.
//!
//! The script draws one page per system, separated by `pause -1`: log-log
//! count-vs-n points for every (kind, delta) series found in results.csv,
//! with the fitted power law from estimates.csv overlaid as a function.
//! Series are selected inside gnuplot by string-matching the CSV columns, so
//! the script references the data files by relative path and stays valid when
//! the directory is moved as a whole.

use anyhow::{bail, Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::runner::{ESTIMATES_COLUMNS, ESTIMATES_FILE, RESULTS_COLUMNS, RESULTS_FILE};

pub const PLOT_FILE: &str = "plot.gp";

fn read_csv(path: &Path, expected_header: &str) -> Result<Vec<Vec<String>>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != expected_header {
        bail!(
            "{} is malformed: expected header {expected_header:?}, found {header:?}",
            path.display()
        );
    }
    let width = expected_header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != width {
            bail!("{} is malformed at data row {}", path.display(), i + 1);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Kinds whose counts grow with the horizon n; asymptotic rows are keyed by
/// nu instead and are not drawn.
fn growth_kind(kind: &str) -> bool {
    matches!(kind, "bowen" | "hamming" | "subword")
}

fn fit_quantity(kind: &str) -> &'static str {
    match kind {
        "bowen" => "pow",
        "hamming" => "mod",
        _ => "",
    }
}

pub fn emit_plot_script(dir: &Path) -> Result<PathBuf> {
    let results = read_csv(&dir.join(RESULTS_FILE), RESULTS_COLUMNS)?;
    let estimates = read_csv(&dir.join(ESTIMATES_FILE), ESTIMATES_COLUMNS)?;

    let mut script = String::new();
    let w = &mut script;
    let _ = writeln!(
        w,
        "# separation growth, log-log; render with: gnuplot {PLOT_FILE}"
    );
    let _ = writeln!(w, "set datafile separator ','");
    let _ = writeln!(w, "set logscale xy");
    let _ = writeln!(w, "set xlabel 'n'");
    let _ = writeln!(w, "set ylabel 'count'");
    let _ = writeln!(w, "set key left top");

    // Systems in first-appearance order.
    let mut systems: Vec<&str> = Vec::new();
    for row in &results {
        if growth_kind(&row[1]) && !systems.contains(&row[0].as_str()) {
            systems.push(&row[0]);
        }
    }

    if systems.is_empty() {
        let _ = writeln!(w, "# warning: {RESULTS_FILE} has no count-vs-n data rows");
    }

    for (page, system) in systems.iter().enumerate() {
        let mut series: Vec<(&str, &str)> = Vec::new();
        let mut n_lo = usize::MAX;
        let mut n_hi = 0usize;
        for row in &results {
            if row[0] != *system || !growth_kind(&row[1]) {
                continue;
            }
            let key = (row[1].as_str(), row[3].as_str());
            if !series.contains(&key) {
                series.push(key);
            }
            if let Ok(n) = row[5].parse::<usize>() {
                n_lo = n_lo.min(n);
                n_hi = n_hi.max(n);
            }
        }
        let _ = writeln!(w);
        let _ = writeln!(w, "# page {}: {system}", page + 1);
        let _ = writeln!(w, "set title '{system} separation growth'");
        if n_lo < n_hi {
            let _ = writeln!(w, "set xrange [{}:{}]", n_lo, n_hi);
        }
        let mut clauses: Vec<String> = Vec::new();
        for (kind, delta) in &series {
            clauses.push(format!(
                "'{RESULTS_FILE}' every ::1 using \
                 (stringcolumn(1) eq '{system}' && stringcolumn(2) eq '{kind}' \
                 && stringcolumn(4) eq '{delta}' ? $6 : NaN):7 \
                 with points title '{kind} delta={delta}'"
            ));
            let fit = estimates
                .iter()
                .find(|e| e[0] == *system && e[1] == fit_quantity(kind) && e[2] == *delta);
            if let Some(e) = fit {
                clauses.push(format!(
                    "exp({}) * x**({}) with lines title 'fit slope {}'",
                    e[4], e[3], e[3]
                ));
            }
        }
        let _ = writeln!(w, "plot {}", clauses.join(", \\\n     "));
        let _ = writeln!(w, "pause -1");
    }

    let path = dir.join(PLOT_FILE);
    std::fs::write(&path, script).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) {
        std::fs::write(dir.join(name), text).unwrap();
    }

    #[test]
    fn script_covers_every_series_and_system() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            RESULTS_FILE,
            &format!(
                "{RESULTS_COLUMNS}\n\
                 torus,bowen,greedy,0.1,,16,128,1,torus-x-grid-128,128\n\
                 torus,bowen,greedy,0.1,,32,256,1,torus-x-grid-256,256\n\
                 rotation,bowen,greedy,0.25,,16,4,1,circle-grid-509,509\n"
            ),
        );
        write(
            dir.path(),
            ESTIMATES_FILE,
            &format!(
                "{ESTIMATES_COLUMNS}\n\
                 torus,pow,0.1,1.0,-0.25,0.999,16,32\n"
            ),
        );
        let path = emit_plot_script(dir.path()).unwrap();
        let script = std::fs::read_to_string(path).unwrap();
        assert_eq!(script.matches("pause -1").count(), 2);
        assert!(script.contains("stringcolumn(1) eq 'torus'"));
        assert!(script.contains("stringcolumn(1) eq 'rotation'"));
        assert!(script.contains("stringcolumn(4) eq '0.25'"));
        assert!(script.contains("exp(-0.25) * x**(1.0)"));
    }

    #[test]
    fn empty_csvs_give_a_warning_script() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), RESULTS_FILE, &format!("{RESULTS_COLUMNS}\n"));
        write(
            dir.path(),
            ESTIMATES_FILE,
            &format!("{ESTIMATES_COLUMNS}\n"),
        );
        let path = emit_plot_script(dir.path()).unwrap();
        let script = std::fs::read_to_string(path).unwrap();
        assert!(script.contains("# warning"));
        assert!(!script.contains("\nplot "));
    }

    #[test]
    fn malformed_csvs_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), RESULTS_FILE, "wrong,header\n");
        write(
            dir.path(),
            ESTIMATES_FILE,
            &format!("{ESTIMATES_COLUMNS}\n"),
        );
        assert!(emit_plot_script(dir.path()).is_err());

        write(
            dir.path(),
            RESULTS_FILE,
            &format!("{RESULTS_COLUMNS}\nshort,row\n"),
        );
        assert!(emit_plot_script(dir.path()).is_err());
    }
}

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::exec;
use crate::experiment::config::{TableConfig, TableId};
use crate::experiment::run::{run_experiment, ExperimentReport, Outcome};

pub const DIVERGED_LABEL: &str = "does not converge";

/// Which time step a reproduction uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepChoice {
    Desk,
    Paper,
    Explicit(f64),
}

impl TableConfig {
    pub fn dt_for(&self, choice: StepChoice) -> f64 {
        match choice {
            StepChoice::Desk => self.dt,
            StepChoice::Paper => self.paper_dt,
            StepChoice::Explicit(dt) => dt,
        }
    }
}

/// Runs every row of a table, in parallel when enabled.
pub fn reproduce(config: &TableConfig, step: StepChoice) -> Result<Vec<ExperimentReport>> {
    let runs = config.experiments(config.dt_for(step))?;
    exec::map(&runs, |r| {
        let rep = run_experiment(r);
        if let Ok(rep) = &rep {
            log::info!("{} / {}: finished in {:.1}s", config.table.name(), rep.label, rep.wall_seconds);
        }
        rep
    })
    .into_iter()
    .collect()
}

fn fmt_sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `label,n,dt,policy,n1,n2,n3,status`; diverged runs leave the norms empty.
pub fn norms_csv(reports: &[ExperimentReport]) -> String {
    let mut s = String::from("label,n,dt,policy,n1,n2,n3,status\n");
    for r in reports {
        let (norms, status) = match &r.outcome {
            Outcome::Completed { norms } => (
                format!("{},{},{}", fmt_sci(norms.n1), fmt_sci(norms.n2), fmt_sci(norms.n3)),
                "ok",
            ),
            Outcome::Diverged { .. } => (",,".to_string(), DIVERGED_LABEL),
        };
        let _ = writeln!(
            s,
            "{},{},{:e},{},{},{}",
            field(&r.label),
            r.n,
            r.dt,
            field(&r.policy),
            norms,
            status
        );
    }
    s
}

/// `t` followed by one α column per run; cells stay empty past a divergence.
pub fn trajectory_csv(reports: &[ExperimentReport]) -> String {
    let mut times: Vec<f64> = reports
        .iter()
        .flat_map(|r| r.alpha_trajectory.iter().map(|p| p.0))
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut s = String::from("t");
    for r in reports {
        let _ = write!(s, ",{}", field(&r.label));
    }
    s.push('\n');
    for t in times {
        let _ = write!(s, "{t:.4}");
        for r in reports {
            match r.alpha_trajectory.iter().find(|p| (p.0 - t).abs() < 1e-12) {
                Some(p) => {
                    let _ = write!(s, ",{:.6}", p.1);
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

/// Writes the table CSV plus per-run gnuplot data; returns the files written.
pub fn emit_tables(table: TableId, reports: &[ExperimentReport], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let main = out_dir.join(format!("{}.csv", table.name()));
    let body = match table {
        TableId::Table4 => trajectory_csv(reports),
        _ => norms_csv(reports),
    };
    write(&main, &body)?;
    written.push(main);

    for r in reports {
        let stem = format!("{}_{}", table.name(), slug(&r.label));
        let mut alpha = String::from("# t alpha\n");
        for (t, a) in &r.alpha_trajectory {
            let _ = writeln!(alpha, "{t:.6} {a:.12e}");
        }
        let mut numerical = String::from("# x u_N\n");
        let mut exact = String::from("# x u\n");
        for (x, un, u) in &r.snapshot {
            let _ = writeln!(numerical, "{x:.6} {un:.12e}");
            let _ = writeln!(exact, "{x:.6} {u:.12e}");
        }
        for (suffix, text) in [("alpha", alpha), ("numerical", numerical), ("exact", exact)] {
            let path = out_dir.join(format!("{stem}_{suffix}.dat"));
            write(&path, &text)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Plain-text rendering of every table CSV found in `out_dir`.
pub fn render_report(out_dir: &Path) -> Result<String> {
    let mut s = String::new();
    let mut found = false;
    for table in TableId::ALL {
        let path = out_dir.join(format!("{}.csv", table.name()));
        if !path.exists() {
            continue;
        }
        found = true;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(&path)
            .map_err(|e| Error::parse(&path, e))?;
        let rows: Vec<Vec<String>> = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(&path, e))?;
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|v| v.len()).max().unwrap_or(0))
            .collect();
        let _ = writeln!(s, "== {} ==", table.name());
        for r in &rows {
            let line: Vec<String> = r.iter().enumerate().map(|(c, v)| format!("{v:<w$}", w = widths[c])).collect();
            let _ = writeln!(s, "{}", line.join("  ").trim_end());
        }
        s.push('\n');
    }
    if !found {
        return Err(Error::InvalidArgument(format!("no table CSVs in {}", out_dir.display())));
    }
    Ok(s)
}

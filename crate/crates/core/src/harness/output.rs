use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{ExperimentOutcome, ExperimentResults};
use crate::error::Result;
use crate::numfmt::sig12;

/// Results table as CSV text; identical results give identical bytes.
pub fn render_csv(results: &ExperimentResults) -> String {
    let mut out = String::new();
    match results {
        ExperimentResults::Cdf(tables) => {
            out.push_str(
                "k,n,metric,n_trials,delta,empirical,closed_form,abs_deviation,sup_deviation\n",
            );
            for t in tables {
                for ((d, e), c) in t.deltas.iter().zip(&t.empirical).zip(&t.closed_form) {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        t.k,
                        t.n,
                        t.metric,
                        t.n_trials,
                        sig12(*d),
                        sig12(*e),
                        sig12(*c),
                        sig12((e - c).abs()),
                        sig12(t.sup_deviation)
                    );
                }
            }
        }
        ExperimentResults::Stats(rows) => {
            out.push_str(
                "n_antennas,n_users,alpha,sinr_su_db,n_trials,excluded,mean_db,std_db,std_error_db,estimate_mean,real_mean,real_se\n",
            );
            for r in rows {
                let p = &r.grid_point;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    p.n_antennas,
                    p.n_users,
                    sig12(p.alpha),
                    sig12(p.sinr_su_db),
                    r.n_trials,
                    r.excluded,
                    sig12(r.mean_db),
                    sig12(r.std_db),
                    sig12(r.std_error_db),
                    sig12(r.estimate_mean),
                    sig12(r.real_mean),
                    sig12(r.real_se)
                );
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct Exclusion {
    n_antennas: usize,
    n_users: usize,
    alpha: f64,
    excluded: usize,
    attempted: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    experiment_id: &'a str,
    version: &'a str,
    master_seed: u64,
    config: &'a ExperimentConfig,
    started_at: String,
    wall_clock_seconds: f64,
    exclusions: Vec<Exclusion>,
    total_excluded: usize,
    tolerance_passed: bool,
    tolerance_violations: &'a [String],
}

fn exclusions(outcome: &ExperimentOutcome) -> Vec<Exclusion> {
    let ExperimentResults::Stats(rows) = &outcome.results else {
        return Vec::new();
    };
    let mut out: Vec<Exclusion> = Vec::new();
    for r in rows {
        let p = &r.grid_point;
        let seen = out
            .iter()
            .any(|e| e.n_antennas == p.n_antennas && e.n_users == p.n_users && e.alpha == p.alpha);
        if !seen {
            out.push(Exclusion {
                n_antennas: p.n_antennas,
                n_users: p.n_users,
                alpha: p.alpha,
                excluded: r.excluded,
                attempted: outcome.config.trials,
            });
        }
    }
    out
}

/// Creates `<output_dir>/<experiment_id>/<timestamp>/` holding
/// `results.csv` and `manifest.json`, and returns that directory.
pub fn write_outputs(outcome: &ExperimentOutcome) -> Result<PathBuf> {
    let cfg = &outcome.config;
    let now = Utc::now();
    let base = cfg.output_dir.join(cfg.experiment_id.as_str());
    let stamp = now.format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let dir = unique_dir(&base, &stamp)?;

    fs::write(dir.join("results.csv"), render_csv(&outcome.results))?;

    let exclusions = exclusions(outcome);
    let manifest = Manifest {
        experiment_id: cfg.experiment_id.as_str(),
        version: crate::VERSION,
        master_seed: cfg.master_seed,
        config: cfg,
        started_at: now.to_rfc3339(),
        wall_clock_seconds: outcome.wall_clock_seconds,
        total_excluded: exclusions.iter().map(|e| e.excluded).sum(),
        exclusions,
        tolerance_passed: outcome.passed(),
        tolerance_violations: &outcome.violations,
    };
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(dir)
}

fn unique_dir(base: &Path, stamp: &str) -> Result<PathBuf> {
    fs::create_dir_all(base)?;
    let mut suffix = 0;
    loop {
        let name = match suffix {
            0 => stamp.to_string(),
            s => format!("{stamp}-{s}"),
        };
        let dir = base.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => suffix += 1,
            Err(e) => return Err(e.into()),
        }
    }
}

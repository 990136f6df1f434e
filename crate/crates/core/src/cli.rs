//! Command-line front end. Exit codes: 0 ok, 1 usage or invalid input,
//! 2 unsupported query, 3 tolerance or experiment failure.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{invalid, Error, Result};
use crate::grassmann::{sample_uniform, write_points_csv};
use crate::harness::{
    run_experiment, write_outputs, ConfigFile, ExperimentConfig, ExperimentId, ExperimentResults,
    DEFAULT_SEED,
};
use crate::mimo::{
    db, estimate_cb, estimate_cb_expected, estimate_zf, gain_zf_cb, gain_zf_cb_asymptotic, precode,
    real_sinr, sample_channel_set, zf_expected_lower_bound, zf_ideal_expected, zf_ideal_sinr,
    MimoScenario, PrecoderKind,
};
use crate::numfmt::sig12;
use crate::rng::SeededRng;
use crate::volume::{max_delta, volume, Metric, VolumeQuery};

pub const SEED_ENV: &str = "GRASSMIMO_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSUPPORTED: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "grassmimo", version = crate::VERSION, about = "Grassmann hyperball volumes and MU-MIMO SINR prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized hyperball volume, i.e. the distance CDF at delta
    Volume(VolumeArgs),
    /// Closed-form distance CDF on a uniform delta grid
    CdfSweep(CdfSweepArgs),
    /// Haar-uniform points of G(k, n) as CSV
    Sample(SampleArgs),
    /// Estimated, empirical and expected SINR of user 0
    Sinr(SinrArgs),
    /// ZF-over-CB SINR gain
    Gain(GainArgs),
    /// Run a registered Monte Carlo experiment
    Experiment(ExperimentArgs),
    /// List registered experiment ids
    ListExperiments,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Pf,
    P2,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Pf => Metric::ProjectiveF,
            MetricArg::P2 => Metric::Projective2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecoderArg {
    Cb,
    Zf,
    ZfNpa,
    ZfIdeal,
}

fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

#[derive(Debug, Args)]
struct VolumeArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long, value_enum, default_value = "pf")]
    metric: MetricArg,
}

#[derive(Debug, Args)]
struct CdfSweepArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, value_enum, default_value = "pf")]
    metric: MetricArg,
    /// Grid points on (0, delta-max]
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Upper end of the grid; defaults to the manifold diameter
    #[arg(long)]
    delta_max: Option<f64>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SinrArgs {
    #[arg(long, value_enum)]
    precoder: PrecoderArg,
    /// Base-station antennas
    #[arg(long = "N")]
    n_antennas: usize,
    /// Co-scheduled users
    #[arg(long = "K")]
    n_users: usize,
    /// Correlation between true and reported channel directions
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// SU-MIMO SINR in dB
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    /// Monte Carlo channel draws; 0 prints the closed-form expectation only
    #[arg(long, default_value_t = 10_000)]
    trials: u32,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct GainArgs {
    #[arg(long = "N")]
    n_antennas: usize,
    #[arg(long = "K")]
    n_users: usize,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    snr_db: f64,
    /// Cross-power sum at which to evaluate the pointwise estimate
    #[arg(long)]
    z: Option<f64>,
    /// Monte Carlo channel draws for the empirical gain
    #[arg(long, default_value_t = 0)]
    trials: u32,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Experiment id; see list-experiments
    #[arg(long)]
    id: Option<String>,
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; defaults to all cores
    #[arg(long)]
    workers: Option<usize>,
}

/// `--seed`, then `GRASSMIMO_SEED`, then [`DEFAULT_SEED`].
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    env_seed().map(|s| s.unwrap_or(DEFAULT_SEED))
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_seed(v.trim())
            .map(Some)
            .map_err(|e| invalid(format!("{SEED_ENV}: {e}"))),
        Err(_) => Ok(None),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Unsupported(_) => EXIT_UNSUPPORTED,
                Error::ExperimentFailed(_) => EXIT_TOLERANCE,
                _ => EXIT_USAGE,
            }
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Volume(a) => {
            let v = volume(VolumeQuery::new(a.k, a.n, a.delta, a.metric.into()))?;
            writeln!(out, "{}", sig12(v))?;
        }
        Command::CdfSweep(a) => cmd_cdf_sweep(a, out)?,
        Command::Sample(a) => {
            let seed = resolve_seed(a.seed)?;
            let mut points = Vec::with_capacity(a.count);
            for t in 0..a.count {
                let mut rng = SeededRng::for_trial(seed, 0, t as u32);
                points.push(sample_uniform(a.n, a.k, &mut rng)?);
            }
            write_points_csv(&mut *out, &points)?;
        }
        Command::Sinr(a) => cmd_sinr(a, out)?,
        Command::Gain(a) => cmd_gain(a, out)?,
        Command::Experiment(a) => return cmd_experiment(a, out, err),
        Command::ListExperiments => {
            for id in ExperimentId::ALL {
                writeln!(out, "{}\t{}", id.as_str(), id.description())?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_cdf_sweep(a: CdfSweepArgs, out: &mut dyn Write) -> Result<()> {
    let metric: Metric = a.metric.into();
    if a.points == 0 {
        return Err(invalid("points must be positive"));
    }
    let top = match a.delta_max {
        Some(d) if d.is_finite() && d > 0.0 => d,
        Some(d) => return Err(invalid(format!("delta-max must be positive, got {d}"))),
        None => max_delta(a.k, a.n, metric)?,
    };
    let rows = (1..=a.points)
        .map(|i| {
            let d = top * i as f64 / a.points as f64;
            volume(VolumeQuery::new(a.k, a.n, d, metric)).map(|v| (d, v))
        })
        .collect::<Result<Vec<_>>>()?;
    writeln!(out, "delta,volume")?;
    for (d, v) in rows {
        writeln!(out, "{},{}", sig12(d), sig12(v))?;
    }
    Ok(())
}

fn row(out: &mut dyn Write, name: &str, linear: f64) -> io::Result<()> {
    writeln!(out, "{name},{},{}", sig12(linear), sig12(db(linear)))
}

fn cmd_sinr(a: SinrArgs, out: &mut dyn Write) -> Result<()> {
    let s = MimoScenario::with_sinr_db(a.n_antennas, a.n_users, a.alpha, a.snr_db)?;
    if !a.snr_db.is_finite() {
        return Err(invalid("snr-db must be finite"));
    }
    if a.precoder == PrecoderArg::ZfIdeal && a.alpha != 1.0 {
        return Err(invalid(format!(
            "zf-ideal needs --alpha 1, got {}",
            a.alpha
        )));
    }
    let seed = resolve_seed(a.seed)?;
    let kind = match a.precoder {
        PrecoderArg::Cb => PrecoderKind::Cb,
        PrecoderArg::Zf | PrecoderArg::ZfIdeal => PrecoderKind::ZfFull,
        PrecoderArg::ZfNpa => PrecoderKind::ZfNpa,
    };
    let expectation = match a.precoder {
        PrecoderArg::Cb => estimate_cb_expected(&s),
        PrecoderArg::Zf | PrecoderArg::ZfNpa => zf_expected_lower_bound(&s),
        PrecoderArg::ZfIdeal => zf_ideal_expected(&s),
    };

    let (mut est_sum, mut real_sum, mut used) = (0.0, 0.0, 0u32);
    for t in 0..a.trials {
        let mut rng = SeededRng::for_trial(seed, 0, t);
        let cs = sample_channel_set(&s, &mut rng)?;
        let Ok(p) = precode(kind, &cs) else { continue };
        let estimate = match a.precoder {
            PrecoderArg::Cb => Ok(estimate_cb(&cs.cross_powers(0), &s)),
            PrecoderArg::Zf | PrecoderArg::ZfNpa => estimate_zf(cs.cross_power_sum(0), &s),
            PrecoderArg::ZfIdeal => zf_ideal_sinr(&cs, &s).map(|r| r.per_user_linear[0]),
        };
        let Ok(estimate) = estimate else { continue };
        est_sum += estimate;
        real_sum += real_sinr(&cs, &p, &s)?.per_user_linear[0];
        used += 1;
    }

    writeln!(out, "quantity,linear,db")?;
    if used > 0 {
        row(out, "estimate_mean", est_sum / used as f64)?;
        row(out, "empirical_mean", real_sum / used as f64)?;
    }
    row(out, "expectation", expectation)?;
    if used < a.trials {
        writeln!(out, "excluded,{},", a.trials - used)?;
    }
    Ok(())
}

fn cmd_gain(a: GainArgs, out: &mut dyn Write) -> Result<()> {
    let s = MimoScenario::with_sinr_db(a.n_antennas, a.n_users, a.alpha, a.snr_db)?;
    let seed = resolve_seed(a.seed)?;
    writeln!(out, "quantity,linear,db")?;
    row(out, "asymptotic", gain_zf_cb_asymptotic(&s))?;
    if let Some(z) = a.z {
        row(out, "estimate_at_z", gain_zf_cb(z, &s)?)?;
    }
    if a.trials > 0 {
        let (mut est_sum, mut real_sum, mut used) = (0.0, 0.0, 0u32);
        for t in 0..a.trials {
            let mut rng = SeededRng::for_trial(seed, 0, t);
            let cs = sample_channel_set(&s, &mut rng)?;
            let (Ok(zf), Ok(est)) = (
                precode(PrecoderKind::ZfFull, &cs),
                gain_zf_cb(cs.cross_power_sum(0), &s),
            ) else {
                continue;
            };
            let cb = precode(PrecoderKind::Cb, &cs)?;
            let g = real_sinr(&cs, &zf, &s)?.per_user_linear[0]
                / real_sinr(&cs, &cb, &s)?.per_user_linear[0];
            est_sum += est;
            real_sum += g;
            used += 1;
        }
        if used > 0 {
            row(out, "estimate_mean", est_sum / used as f64)?;
            row(out, "empirical_mean", real_sum / used as f64)?;
        }
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let file = match &a.config {
        Some(path) => ConfigFile::from_path(path)
            .map_err(|e| invalid(format!("config {}: {e}", path.display())))?,
        None => ConfigFile::default(),
    };
    let id = match (&a.id, file.experiment_id) {
        (Some(s), _) => s.parse::<ExperimentId>()?,
        (None, Some(id)) => id,
        (None, None) => {
            return Err(invalid(
                "--id is required unless the config names an experiment",
            ))
        }
    };
    let file_seed = file.master_seed;
    let mut cfg = ExperimentConfig::from_file(id, file)?;
    cfg.master_seed = match (a.seed, file_seed) {
        (Some(s), _) => s,
        (None, Some(s)) => s,
        (None, None) => resolve_seed(None)?,
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(o) = a.out {
        cfg.output_dir = o;
    }
    if let Some(w) = a.workers {
        cfg.workers = Some(w);
    }
    cfg.validate()?;

    let outcome = run_experiment(&cfg)?;
    let dir = write_outputs(&outcome)?;
    match &outcome.results {
        ExperimentResults::Cdf(tables) => {
            for t in tables {
                writeln!(
                    out,
                    "k={} n={} {} sup_deviation={}",
                    t.k,
                    t.n,
                    t.metric,
                    sig12(t.sup_deviation)
                )?;
            }
        }
        ExperimentResults::Stats(rows) => {
            for r in rows {
                let p = &r.grid_point;
                writeln!(
                    out,
                    "N={} K={} alpha={} sinr_su_db={} mean_db={} std_db={}",
                    p.n_antennas,
                    p.n_users,
                    sig12(p.alpha),
                    sig12(p.sinr_su_db),
                    sig12(r.mean_db),
                    sig12(r.std_db)
                )?;
            }
        }
    }
    writeln!(out, "results: {}", dir.display())?;
    if outcome.passed() {
        return Ok(EXIT_OK);
    }
    for v in &outcome.violations {
        writeln!(err, "tolerance violated: {v}")?;
    }
    Ok(EXIT_TOLERANCE)
}

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentId, ExperimentKind};
use super::stats::{ks_sup_deviation, mean_std, CdfSeries, CdfTable, ErrorStats, GridPoint};
use crate::error::{invalid, Error, Result};
use crate::grassmann::{canonical_angles, sample_uniform, CMatrix};
use crate::mimo::{
    db, estimate_cb, estimate_cb_expected, estimate_zf, from_db, gain_zf_cb, gain_zf_cb_asymptotic,
    precode_cb, precode_zf_full, sample_channel_set, zf_expected_lower_bound, zf_ideal_expected,
    zf_ideal_sinr, ChannelSet, MimoScenario,
};
use crate::rng::SeededRng;
use crate::volume::{volume, Metric, VolumeQuery};

/// Largest tolerated fraction of failed trials per grid point.
pub const MAX_EXCLUSION_RATE: f64 = 1e-3;

/// 99% Dvoretzky–Kiefer–Wolfowitz radius `sqrt(ln(2/0.01) / 2n)`.
pub fn dkw_radius(n: usize) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt()
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::ExperimentFailed(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn require_kind(cfg: &ExperimentConfig, kinds: &[ExperimentKind]) -> Result<()> {
    cfg.validate()?;
    if !kinds.contains(&cfg.experiment_id.kind()) {
        return Err(invalid(format!(
            "{} cannot be run by this runner",
            cfg.experiment_id
        )));
    }
    Ok(())
}

/// Empirical distance CDFs of Haar-uniform pairs against the closed forms.
pub fn run_cdf_experiment(cfg: &ExperimentConfig) -> Result<Vec<CdfTable>> {
    require_kind(cfg, &[ExperimentKind::Cdf])?;
    let metric = cfg
        .experiment_id
        .metric()
        .expect("CDF experiments have a metric");
    with_pool(cfg.workers, || {
        let mut tables = Vec::new();
        for (g, (k, n)) in cfg.sweep.grassmann_points().into_iter().enumerate() {
            let deltas = cfg.deltas_for(k, n)?;
            // Closed forms first, so unsupported queries fail before sampling.
            let closed_form = deltas
                .iter()
                .map(|&d| volume(VolumeQuery::new(k, n, d, metric)))
                .collect::<Result<Vec<f64>>>()?;
            let mut distances = (0..cfg.trials as u32)
                .into_par_iter()
                .map(|t| {
                    let mut rng = SeededRng::for_trial(cfg.master_seed, g as u32, t);
                    let a = sample_uniform(n as usize, k as usize, &mut rng)?;
                    let b = sample_uniform(n as usize, k as usize, &mut rng)?;
                    let angles = canonical_angles(&a, &b)?;
                    Ok(match metric {
                        Metric::ProjectiveF => angles.projective_f(),
                        Metric::Projective2 => angles.projective_2(),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let empirical = CdfSeries::empirical(&mut distances, &deltas);
            let closed = CdfSeries {
                deltas: deltas.clone(),
                values: closed_form,
            };
            let sup_deviation = ks_sup_deviation(&empirical, &closed)?;
            tables.push(CdfTable {
                k,
                n,
                metric,
                n_trials: cfg.trials,
                deltas,
                empirical: empirical.values,
                closed_form: closed.values,
                sup_deviation,
            });
        }
        Ok(tables)
    })?
}

/// Linear estimate and ground truth for user 0 of one trial at one SINR.
#[derive(Debug, Clone, Copy)]
struct Sample {
    estimate: f64,
    real: f64,
}

/// Signal and interference power seen by user 0 under unit-norm beams `w`.
fn user0_powers(cs: &ChannelSet, w: &CMatrix) -> (f64, f64) {
    let u0 = cs.true_directions().column(0);
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, col) in w.column_iter().enumerate() {
        let p = u0.dotc(&col).norm_sqr();
        if j == 0 {
            signal = p;
        } else {
            interference += p;
        }
    }
    (signal, interference)
}

fn sinr(powers: (f64, f64), s: &MimoScenario) -> f64 {
    powers.0 / (powers.1 + s.k_gamma())
}

/// One channel draw evaluated at every SINR^SU of the sweep. Precoders do
/// not depend on SINR^SU, so the draw is shared.
fn sinr_trial(
    id: ExperimentId,
    scenarios: &[MimoScenario],
    rng: &mut SeededRng,
) -> Result<Vec<Sample>> {
    use ExperimentId::*;
    let cs = sample_channel_set(&scenarios[0], rng)?;
    let z = cs.cross_power_sum(0);
    let needs_cb = matches!(
        id,
        CbErrorMean | CbErrorStd | CbExpectation | Gain | GainAsymptoticStd
    );
    let needs_zf = !matches!(id, CbErrorMean | CbErrorStd | CbExpectation);
    let cb = needs_cb.then(|| user0_powers(&cs, precode_cb(&cs).vectors()));
    let zf = match needs_zf {
        true => Some(user0_powers(&cs, precode_zf_full(&cs)?.vectors())),
        false => None,
    };
    scenarios
        .iter()
        .map(|s| {
            let sample = match id {
                CbErrorMean | CbErrorStd => Sample {
                    estimate: estimate_cb(&cs.cross_powers(0), s),
                    real: sinr(cb.unwrap(), s),
                },
                CbExpectation => Sample {
                    estimate: estimate_cb_expected(s),
                    real: sinr(cb.unwrap(), s),
                },
                ZfErrorMean | ZfErrorStd => Sample {
                    estimate: estimate_zf(z, s)?,
                    real: sinr(zf.unwrap(), s),
                },
                ZfExpectation => Sample {
                    estimate: zf_expected_lower_bound(s),
                    real: sinr(zf.unwrap(), s),
                },
                ZfIdealErrorMean | ZfIdealErrorStd => {
                    let report = zf_ideal_sinr(&cs, s)?;
                    if report.clamped.contains(&0) {
                        return Err(Error::Singular("ideal-CSI estimate clamped to 0".into()));
                    }
                    Sample {
                        estimate: report.per_user_linear[0],
                        real: sinr(zf.unwrap(), s),
                    }
                }
                ZfIdealExpectation => Sample {
                    estimate: zf_ideal_expected(s),
                    real: sinr(zf.unwrap(), s),
                },
                Gain => Sample {
                    estimate: gain_zf_cb(z, s)?,
                    real: sinr(zf.unwrap(), s) / sinr(cb.unwrap(), s),
                },
                GainAsymptoticStd => Sample {
                    estimate: gain_zf_cb_asymptotic(s),
                    real: sinr(zf.unwrap(), s) / sinr(cb.unwrap(), s),
                },
                CdfK1 | CdfK2Pf | CdfP2 | CdfPfGeneral => unreachable!("not a SINR experiment"),
            };
            Ok(sample)
        })
        .collect()
}

fn aggregate(
    id: ExperimentId,
    grid_point: GridPoint,
    samples: &[Sample],
    excluded: usize,
) -> ErrorStats {
    let n = samples.len();
    let reals: Vec<f64> = samples.iter().map(|s| s.real).collect();
    let estimates: Vec<f64> = samples.iter().map(|s| s.estimate).collect();
    let (real_mean, real_std) = mean_std(&reals);
    let (estimate_mean, _) = mean_std(&estimates);
    let real_se = real_std / (n as f64).sqrt();
    let (mean_db, std_db) = match id.kind() {
        ExperimentKind::Expectation => {
            let real_db: Vec<f64> = reals.iter().map(|&x| db(x)).collect();
            (db(estimate_mean) - db(real_mean), mean_std(&real_db).1)
        }
        _ => {
            let err: Vec<f64> = samples
                .iter()
                .map(|s| db(s.estimate) - db(s.real))
                .collect();
            mean_std(&err)
        }
    };
    ErrorStats {
        grid_point,
        mean_db,
        std_db,
        n_trials: n,
        std_error_db: std_db / (n as f64).sqrt(),
        excluded,
        estimate_mean,
        real_mean,
        real_se,
    }
}

fn run_sinr_experiment(
    cfg: &ExperimentConfig,
    kinds: &[ExperimentKind],
) -> Result<Vec<ErrorStats>> {
    require_kind(cfg, kinds)?;
    let id = cfg.experiment_id;
    with_pool(cfg.workers, || {
        let mut out = Vec::new();
        for (g, (n, k, alpha)) in cfg.sweep.channel_points().into_iter().enumerate() {
            let scenarios = cfg
                .sweep
                .sinr_su_db
                .iter()
                .map(|&d| MimoScenario::new(n, k, alpha, from_db(d)))
                .collect::<Result<Vec<_>>>()?;
            let trials: Vec<Option<Vec<Sample>>> = (0..cfg.trials as u32)
                .into_par_iter()
                .map(|t| {
                    let mut rng = SeededRng::for_trial(cfg.master_seed, g as u32, t);
                    sinr_trial(id, &scenarios, &mut rng).ok()
                })
                .collect();
            let excluded = trials.iter().filter(|t| t.is_none()).count();
            if excluded as f64 > MAX_EXCLUSION_RATE * cfg.trials as f64 {
                return Err(Error::ExperimentFailed(format!(
                    "{id}: {excluded} of {} trials failed at N={n}, K={k}, alpha={alpha}, above the {}% limit",
                    cfg.trials,
                    MAX_EXCLUSION_RATE * 100.0
                )));
            }
            let kept: Vec<&Vec<Sample>> = trials.iter().flatten().collect();
            for (si, &sinr_su_db) in cfg.sweep.sinr_su_db.iter().enumerate() {
                let samples: Vec<Sample> = kept.iter().map(|t| t[si]).collect();
                let point = GridPoint {
                    n_antennas: n,
                    n_users: k,
                    alpha,
                    sinr_su_db,
                };
                out.push(aggregate(id, point, &samples, excluded));
            }
        }
        Ok(out)
    })?
}

/// Per-trial estimator error `estimate_dB - real_dB` for user 0.
pub fn run_estimator_error_experiment(cfg: &ExperimentConfig) -> Result<Vec<ErrorStats>> {
    run_sinr_experiment(cfg, &[ExperimentKind::EstimatorError])
}

/// Closed-form mean SINR against the empirical mean of the real SINR.
pub fn run_expectation_experiment(cfg: &ExperimentConfig) -> Result<Vec<ErrorStats>> {
    run_sinr_experiment(cfg, &[ExperimentKind::Expectation])
}

/// Estimated against empirical ZF-over-CB gain on shared channel draws.
pub fn run_gain_experiment(cfg: &ExperimentConfig) -> Result<Vec<ErrorStats>> {
    run_sinr_experiment(cfg, &[ExperimentKind::Gain])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "rows", rename_all = "kebab-case")]
pub enum ExperimentResults {
    Cdf(Vec<CdfTable>),
    Stats(Vec<ErrorStats>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub results: ExperimentResults,
    /// Human-readable descriptions of violated embedded tolerances.
    pub violations: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    let results = match cfg.experiment_id.kind() {
        ExperimentKind::Cdf => ExperimentResults::Cdf(run_cdf_experiment(cfg)?),
        ExperimentKind::EstimatorError => {
            ExperimentResults::Stats(run_estimator_error_experiment(cfg)?)
        }
        ExperimentKind::Expectation => ExperimentResults::Stats(run_expectation_experiment(cfg)?),
        ExperimentKind::Gain => ExperimentResults::Stats(run_gain_experiment(cfg)?),
    };
    let violations = check_tolerances(cfg, &results);
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        results,
        violations,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Sup-norm CDF tolerance: 0.01 at 10⁵ pairs or more, twice the 99% DKW
/// radius below that.
pub fn cdf_tolerance(trials: usize) -> f64 {
    if trials >= 100_000 {
        0.01
    } else {
        2.0 * dkw_radius(trials)
    }
}

fn describe(p: &GridPoint) -> String {
    format!(
        "N={} K={} alpha={} sinr_su={}dB",
        p.n_antennas, p.n_users, p.alpha, p.sinr_su_db
    )
}

/// Checks the acceptance tolerances embedded in each experiment definition.
pub fn check_tolerances(cfg: &ExperimentConfig, results: &ExperimentResults) -> Vec<String> {
    use ExperimentId::*;
    let mut v = Vec::new();
    match results {
        ExperimentResults::Cdf(tables) => {
            let tol = cdf_tolerance(cfg.trials);
            for t in tables {
                if !(t.sup_deviation <= tol) {
                    v.push(format!(
                        "k={} n={} {}: sup deviation {:.5} > {:.5}",
                        t.k, t.n, t.metric, t.sup_deviation, tol
                    ));
                }
            }
        }
        ExperimentResults::Stats(rows) => {
            for r in rows {
                let at = describe(&r.grid_point);
                match cfg.experiment_id {
                    CbErrorMean if r.mean_db.abs() > 0.2 => v.push(format!(
                        "{at}: |mean error| {:.4} dB > 0.2 dB",
                        r.mean_db.abs()
                    )),
                    CbExpectation if !(r.mean_db.abs() <= 0.5) => {
                        v.push(format!("{at}: |gap| {:.4} dB > 0.5 dB", r.mean_db.abs()))
                    }
                    ZfExpectation => {
                        if r.estimate_mean > r.real_mean + 2.0 * r.real_se {
                            v.push(format!(
                                "{at}: bound {:.6} exceeds empirical mean {:.6} + 2 s.e.",
                                r.estimate_mean, r.real_mean
                            ));
                        }
                        if r.grid_point.sinr_su_db >= 15.0 && -r.mean_db > 1.0 {
                            v.push(format!("{at}: bound gap {:.4} dB > 1 dB", -r.mean_db));
                        }
                    }
                    Gain if r.mean_db > 2.0 * r.std_error_db => v.push(format!(
                        "{at}: mean(estimate - empirical) {:.4} dB > 2 s.e. {:.4} dB",
                        r.mean_db,
                        2.0 * r.std_error_db
                    )),
                    ZfIdealErrorMean | ZfIdealErrorStd => {
                        if !(r.mean_db.abs() <= 0.1) {
                            v.push(format!(
                                "{at}: |mean error| {:.4} dB > 0.1 dB",
                                r.mean_db.abs()
                            ));
                        }
                        if !(r.std_db <= 0.3) {
                            v.push(format!("{at}: error std {:.4} dB > 0.3 dB", r.std_db));
                        }
                    }
                    ZfIdealExpectation if !(r.mean_db.abs() <= 0.3) => {
                        v.push(format!("{at}: |gap| {:.4} dB > 0.3 dB", r.mean_db.abs()))
                    }
                    _ => {}
                }
            }
            if cfg.experiment_id == GainAsymptoticStd {
                v.extend(check_std_grows_as_k_shrinks(rows));
            }
        }
    }
    v
}

/// Within each `(N, α, SINR^SU)` group, the error std must strictly
/// decrease as `K` increases.
fn check_std_grows_as_k_shrinks(rows: &[ErrorStats]) -> Vec<String> {
    let mut v = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let (pa, pb) = (&a.grid_point, &b.grid_point);
            let same_group = pa.n_antennas == pb.n_antennas
                && pa.alpha == pb.alpha
                && pa.sinr_su_db == pb.sinr_su_db;
            if !same_group || pa.n_users == pb.n_users {
                continue;
            }
            let (small, large) = if pa.n_users < pb.n_users {
                (a, b)
            } else {
                (b, a)
            };
            if !(small.std_db > large.std_db) {
                v.push(format!(
                    "{}: std {:.4} dB not above K={} std {:.4} dB",
                    describe(&small.grid_point),
                    small.std_db,
                    large.grid_point.n_users,
                    large.std_db
                ));
            }
        }
    }
    v
}

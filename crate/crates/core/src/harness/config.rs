use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mimo::{from_db, MimoScenario};
use crate::volume::{dualize, max_delta, Metric};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_CDF_TRIALS: usize = 100_000;
pub const DEFAULT_SINR_TRIALS: usize = 10_000;
pub const DEFAULT_DELTA_POINTS: usize = 200;
pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    CdfK1,
    CdfK2Pf,
    CdfP2,
    CdfPfGeneral,
    CbErrorMean,
    CbErrorStd,
    CbExpectation,
    ZfErrorMean,
    ZfErrorStd,
    ZfExpectation,
    Gain,
    GainAsymptoticStd,
    ZfIdealErrorMean,
    ZfIdealErrorStd,
    ZfIdealExpectation,
}

/// How an experiment's trials are turned into statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Cdf,
    EstimatorError,
    Expectation,
    Gain,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 15] = [
        ExperimentId::CdfK1,
        ExperimentId::CdfK2Pf,
        ExperimentId::CdfP2,
        ExperimentId::CdfPfGeneral,
        ExperimentId::CbErrorMean,
        ExperimentId::CbErrorStd,
        ExperimentId::CbExpectation,
        ExperimentId::ZfErrorMean,
        ExperimentId::ZfErrorStd,
        ExperimentId::ZfExpectation,
        ExperimentId::Gain,
        ExperimentId::GainAsymptoticStd,
        ExperimentId::ZfIdealErrorMean,
        ExperimentId::ZfIdealErrorStd,
        ExperimentId::ZfIdealExpectation,
    ];

    pub fn as_str(self) -> &'static str {
        use ExperimentId::*;
        match self {
            CdfK1 => "cdf-k1",
            CdfK2Pf => "cdf-k2-pf",
            CdfP2 => "cdf-p2",
            CdfPfGeneral => "cdf-pf-general",
            CbErrorMean => "cb-error-mean",
            CbErrorStd => "cb-error-std",
            CbExpectation => "cb-expectation",
            ZfErrorMean => "zf-error-mean",
            ZfErrorStd => "zf-error-std",
            ZfExpectation => "zf-expectation",
            Gain => "gain",
            GainAsymptoticStd => "gain-asymptotic-std",
            ZfIdealErrorMean => "zf-ideal-error-mean",
            ZfIdealErrorStd => "zf-ideal-error-std",
            ZfIdealExpectation => "zf-ideal-expectation",
        }
    }

    pub fn description(self) -> &'static str {
        use ExperimentId::*;
        match self {
            CdfK1 => "distance CDF on G(1, n), both metrics coincide",
            CdfK2Pf => "projective-F distance CDF on G(2, n) over (0, sqrt 2]",
            CdfP2 => "projective-2 distance CDF on G(k, n)",
            CdfPfGeneral => "projective-F distance CDF on G(k, n) for delta <= 1",
            CbErrorMean => "mean error of the CB SINR estimate",
            CbErrorStd => "std of the CB SINR estimate error",
            CbExpectation => "closed-form mean CB SINR vs empirical mean",
            ZfErrorMean => "mean error of the ZF SINR estimate",
            ZfErrorStd => "std of the ZF SINR estimate error",
            ZfExpectation => "Jensen lower bound on mean ZF SINR vs empirical mean",
            Gain => "estimated vs empirical ZF-over-CB gain",
            GainAsymptoticStd => "error of the large-system gain vs empirical gain",
            ZfIdealErrorMean => "mean error of the ideal-CSI ZF SINR estimate",
            ZfIdealErrorStd => "std of the ideal-CSI ZF SINR estimate error",
            ZfIdealExpectation => "closed-form mean ideal-CSI ZF SINR vs empirical mean",
        }
    }

    pub fn kind(self) -> ExperimentKind {
        use ExperimentId::*;
        match self {
            CdfK1 | CdfK2Pf | CdfP2 | CdfPfGeneral => ExperimentKind::Cdf,
            CbErrorMean | CbErrorStd | ZfErrorMean | ZfErrorStd | ZfIdealErrorMean
            | ZfIdealErrorStd => ExperimentKind::EstimatorError,
            CbExpectation | ZfExpectation | ZfIdealExpectation => ExperimentKind::Expectation,
            Gain | GainAsymptoticStd => ExperimentKind::Gain,
        }
    }

    /// Distance metric of a CDF experiment.
    pub fn metric(self) -> Option<Metric> {
        match self {
            ExperimentId::CdfK1 | ExperimentId::CdfK2Pf | ExperimentId::CdfPfGeneral => {
                Some(Metric::ProjectiveF)
            }
            ExperimentId::CdfP2 => Some(Metric::Projective2),
            _ => None,
        }
    }

    pub fn is_ideal_csi(self) -> bool {
        matches!(
            self,
            ExperimentId::ZfIdealErrorMean
                | ExperimentId::ZfIdealErrorStd
                | ExperimentId::ZfIdealExpectation
        )
    }

    pub fn default_trials(self) -> usize {
        match self.kind() {
            ExperimentKind::Cdf => DEFAULT_CDF_TRIALS,
            _ => DEFAULT_SINR_TRIALS,
        }
    }

    pub fn default_sweep(self) -> Sweep {
        use ExperimentId::*;
        let pairs = |p: &[(u32, u32)]| Sweep {
            pairs: p.to_vec(),
            ..Sweep::default()
        };
        let sinr = |n: &[usize], k: &[usize], a: &[f64], db: &[f64]| Sweep {
            antennas: n.to_vec(),
            users: k.to_vec(),
            alpha: a.to_vec(),
            sinr_su_db: db.to_vec(),
            ..Sweep::default()
        };
        let five = [0.0, 5.0, 10.0, 15.0, 20.0];
        match self {
            CdfK1 => pairs(&[(1, 2), (1, 4), (1, 8)]),
            CdfK2Pf => pairs(&[(2, 4), (2, 6), (2, 8)]),
            CdfP2 => pairs(&[(2, 4), (3, 6), (3, 8), (5, 8)]),
            CdfPfGeneral => pairs(&[(2, 5), (3, 6), (3, 8)]),
            CbErrorMean | CbErrorStd | CbExpectation => sinr(
                &[32, 64, 128],
                &[8, 16],
                &[0.7, 0.8, 0.9],
                &[0.0, 10.0, 20.0],
            ),
            ZfErrorMean | ZfErrorStd => sinr(&[64, 128], &[8, 16], &[0.7, 0.8, 0.9], &five),
            ZfExpectation => sinr(&[128], &[12, 20], &[0.9], &five),
            Gain => sinr(&[64, 128], &[8, 16], &[0.8, 0.9], &five),
            GainAsymptoticStd => sinr(&[128], &[4, 8, 16, 32], &[0.8, 0.9], &[20.0, 25.0, 30.0]),
            ZfIdealErrorMean | ZfIdealErrorStd | ZfIdealExpectation => {
                sinr(&[64, 128], &[8, 16], &[1.0], &[0.0, 10.0, 20.0])
            }
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = ExperimentId::ALL.iter().map(|id| id.as_str()).collect();
                invalid(format!(
                    "unknown experiment id {s:?}; valid ids: {}",
                    valid.join(", ")
                ))
            })
    }
}

/// Parameter grid. Empty lists fall back to the experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    /// Grassmann `k` values, crossed with `n`.
    pub k: Vec<u32>,
    /// Grassmann `n` values, crossed with `k`.
    pub n: Vec<u32>,
    /// Explicit `(k, n)` pairs; take precedence over `k` x `n`.
    pub pairs: Vec<(u32, u32)>,
    /// Explicit δ grid; overrides `delta_points`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_points: Option<usize>,
    /// Base-station antenna counts `N`.
    pub antennas: Vec<usize>,
    /// User counts `K`.
    pub users: Vec<usize>,
    pub alpha: Vec<f64>,
    pub sinr_su_db: Vec<f64>,
}

impl Sweep {
    fn merged_over(mut self, defaults: Sweep) -> Sweep {
        if self.k.is_empty() && self.n.is_empty() && self.pairs.is_empty() {
            self.pairs = defaults.pairs;
        }
        if self.antennas.is_empty() {
            self.antennas = defaults.antennas;
        }
        if self.users.is_empty() {
            self.users = defaults.users;
        }
        if self.alpha.is_empty() {
            self.alpha = defaults.alpha;
        }
        if self.sinr_su_db.is_empty() {
            self.sinr_su_db = defaults.sinr_su_db;
        }
        self
    }

    /// `(k, n)` grid points in order.
    pub fn grassmann_points(&self) -> Vec<(u32, u32)> {
        if !self.pairs.is_empty() {
            return self.pairs.clone();
        }
        let mut out = Vec::new();
        for &k in &self.k {
            for &n in &self.n {
                out.push((k, n));
            }
        }
        out
    }

    /// `(N, K, α)` channel configurations; each is crossed with every
    /// `sinr_su_db` value on shared channel draws.
    pub fn channel_points(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &n in &self.antennas {
            for &k in &self.users {
                for &a in &self.alpha {
                    out.push((n, k, a));
                }
            }
        }
        out
    }
}

/// JSON configuration file. Every field is optional; command-line flags
/// override file values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment_id: Option<ExperimentId>,
    pub sweep: Option<Sweep>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ConfigFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: ExperimentId,
    pub sweep: Sweep,
    pub trials: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Configuration with the experiment's default grid and trial count.
    pub fn new(experiment_id: ExperimentId) -> Self {
        ExperimentConfig {
            experiment_id,
            sweep: experiment_id.default_sweep(),
            trials: experiment_id.default_trials(),
            master_seed: DEFAULT_SEED,
            output_dir: PathBuf::from("results"),
            workers: None,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_sweep(mut self, sweep: Sweep) -> Self {
        self.sweep = sweep.merged_over(self.experiment_id.default_sweep());
        self
    }

    /// Resolves a file against `id`, filling gaps with defaults.
    pub fn from_file(id: ExperimentId, file: ConfigFile) -> Result<Self> {
        if let Some(file_id) = file.experiment_id {
            if file_id != id {
                return Err(invalid(format!(
                    "config is for experiment {file_id}, but {id} was requested"
                )));
            }
        }
        let mut cfg = ExperimentConfig::new(id);
        if let Some(sweep) = file.sweep {
            cfg = cfg.with_sweep(sweep);
        }
        if let Some(t) = file.trials {
            cfg.trials = t;
        }
        if let Some(s) = file.master_seed {
            cfg.master_seed = s;
        }
        if let Some(o) = file.output_dir {
            cfg.output_dir = o;
        }
        cfg.workers = file.workers.or(cfg.workers);
        Ok(cfg)
    }

    /// δ abscissae for a CDF curve on G(k, n): either the explicit list or
    /// `delta_points` uniform points on `(0, δ_range]`.
    pub fn deltas_for(&self, k: u32, n: u32) -> Result<Vec<f64>> {
        let metric = self
            .experiment_id
            .metric()
            .ok_or_else(|| invalid(format!("{} is not a CDF experiment", self.experiment_id)))?;
        if let Some(d) = &self.sweep.deltas {
            let mut d = d.clone();
            if d.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(invalid("deltas must be finite and nonnegative"));
            }
            d.sort_by(f64::total_cmp);
            return Ok(d);
        }
        let mut range = max_delta(k, n, metric)?;
        if self.experiment_id == ExperimentId::CdfPfGeneral {
            range = range.min(1.0);
        }
        let points = self.sweep.delta_points.unwrap_or(DEFAULT_DELTA_POINTS);
        if points == 0 {
            return Err(invalid("delta_points must be positive"));
        }
        Ok((1..=points)
            .map(|i| range * i as f64 / points as f64)
            .collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(invalid(format!(
                "trials must be at least {MIN_TRIALS}, got {}",
                self.trials
            )));
        }
        if self.trials > u32::MAX as usize {
            return Err(invalid("trials must fit in 32 bits"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be positive"));
        }
        let id = self.experiment_id;
        if id.kind() == ExperimentKind::Cdf {
            let points = self.sweep.grassmann_points();
            if points.is_empty() {
                return Err(invalid("empty (k, n) grid"));
            }
            for (k, n) in points {
                let (kd, _) = dualize(k, n)?;
                let ok = match id {
                    ExperimentId::CdfK1 => kd == 1,
                    ExperimentId::CdfK2Pf => kd == 2,
                    _ => kd >= 1,
                };
                if !ok {
                    return Err(invalid(format!("(k={k}, n={n}) is not valid for {id}")));
                }
                self.deltas_for(k, n)?;
            }
        } else {
            let points = self.sweep.channel_points();
            if points.is_empty() || self.sweep.sinr_su_db.is_empty() {
                return Err(invalid("empty (N, K, alpha, sinr) grid"));
            }
            for (n, k, a) in points {
                if id.is_ideal_csi() && a != 1.0 {
                    return Err(invalid(format!("{id} needs alpha = 1, got {a}")));
                }
                if k < 2 {
                    return Err(invalid(format!("{id} needs K >= 2, got {k}")));
                }
                for &db in &self.sweep.sinr_su_db {
                    if !db.is_finite() {
                        return Err(invalid(format!("sinr_su_db must be finite, got {db}")));
                    }
                    MimoScenario::new(n, k, a, from_db(db))?;
                }
            }
        }
        Ok(())
    }
}

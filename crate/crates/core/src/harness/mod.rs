//! Seeded Monte Carlo sweeps over SNR or transmit power.
//!
//! Every trial draws its channel from its own generator stream
//! `(seed, trial)`, runs each selection method once, and evaluates the
//! metric at every grid point. Trials run on a rayon pool; per-trial
//! results are collected in trial order and reduced sequentially, so the
//! output does not depend on the number of worker threads.

mod output;
mod specfile;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

pub use output::{format_sig, SweepResult, SweepRow, CSV_HEADER};
pub use specfile::{parse_spec, render_spec};

use crate::beamspace::{fast_beamspace, reduce, BeamSet, BeamspaceChannel};
use crate::channel::generate_channel;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    db_to_linear, dbm_to_watts, energy_efficiency, gap_profile, inverse_gram_traces, sum_rate_from_traces,
    EnergyConfig,
};
use crate::scalar::pairwise_sum;
use crate::selection::{full_digital_set, select_iabs, select_mm, select_wideband};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    SumRateVsSnr,
    EeVsPower,
    GapVsSnr,
    /// User-defined sweep: sum-rate over an SNR grid, or energy efficiency
    /// over a power grid.
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::SumRateVsSnr => "sumrate_vs_snr",
            Scenario::EeVsPower => "ee_vs_power",
            Scenario::GapVsSnr => "gap_vs_snr",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sumrate_vs_snr" => Ok(Scenario::SumRateVsSnr),
            "ee_vs_power" => Ok(Scenario::EeVsPower),
            "gap_vs_snr" => Ok(Scenario::GapVsSnr),
            "custom" => Ok(Scenario::Custom),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Proposed,
    Mm,
    Iabs,
    FullDigital,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::Mm, Method::Iabs, Method::FullDigital];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Mm => "mm",
            Method::Iabs => "iabs",
            Method::FullDigital => "full_digital",
        }
    }

    /// Selects this method's beams for one channel realization.
    pub fn select(self, h: &BeamspaceChannel<f64>, cfg: &SystemConfig, iabs_xi: f64) -> Result<BeamSet> {
        match self {
            Method::Proposed => select_wideband(h, cfg).map(|(set, _)| set),
            Method::Mm => select_mm(h, cfg.n_rf),
            Method::Iabs => select_iabs(h, cfg, iabs_xi),
            Method::FullDigital => Ok(full_digital_set(h.n_beams())),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// SNR `ξ = ρ/σ²` in dB.
    SnrDb(Vec<f64>),
    /// Transmit power `ρ` in dBm.
    PowerDbm(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> &[f64] {
        match self {
            Grid::SnrDb(v) | Grid::PowerDbm(v) => v,
        }
    }

    pub fn x_name(&self) -> &'static str {
        match self {
            Grid::SnrDb(_) => "snr_db",
            Grid::PowerDbm(_) => "power_dbm",
        }
    }
}

/// `start, start+step, …` up to and including `stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub cfg: SystemConfig,
    pub methods: Vec<Method>,
    pub grid: Grid,
    pub trials: usize,
    pub out_path: Option<PathBuf>,
    /// Noise power for power sweeps, dBm.
    pub sigma2_dbm: f64,
    /// Circuit power per RF chain, W.
    pub p_rf_w: f64,
    /// SNR used by IA-BS at selection time; the grid midpoint when unset.
    pub iabs_snr_db: Option<f64>,
}

impl ExperimentSpec {
    pub fn new(scenario: Scenario, cfg: SystemConfig, methods: Vec<Method>, grid: Grid) -> Self {
        Self {
            scenario,
            cfg,
            methods,
            grid,
            trials: 100,
            out_path: None,
            sigma2_dbm: -75.0,
            p_rf_w: 34.4e-3,
            iabs_snr_db: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        let xs = self.grid.values();
        if xs.is_empty() {
            return fail("grid is empty");
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) || !xs.iter().all(|x| x.is_finite()) {
            return fail("grid must be finite and strictly increasing");
        }
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.methods.is_empty() {
            return fail("no methods selected");
        }
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        if m.len() != self.methods.len() {
            return fail("duplicate method");
        }
        match (self.scenario, &self.grid) {
            (Scenario::SumRateVsSnr | Scenario::GapVsSnr, Grid::PowerDbm(_)) => {
                fail("this scenario sweeps SNR; use snr_grid_db")
            }
            (Scenario::EeVsPower, Grid::SnrDb(_)) => fail("ee_vs_power sweeps power; use power_grid_dbm"),
            _ => {
                if !(self.p_rf_w > 0.0 && self.sigma2_dbm.is_finite()) {
                    return fail("p_rf must be positive and sigma2 finite");
                }
                Ok(())
            }
        }
    }

    /// SNR handed to IA-BS at selection time, linear.
    pub fn iabs_xi(&self) -> f64 {
        let db = self.iabs_snr_db.unwrap_or_else(|| {
            let xs = self.grid.values();
            let mid = (xs[0] + xs[xs.len() - 1]) / 2.0;
            match self.grid {
                Grid::SnrDb(_) => mid,
                Grid::PowerDbm(_) => mid - self.sigma2_dbm,
            }
        });
        db_to_linear(db)
    }

    /// Short SHA-256 digest of the canonical spec text, `out_path` excluded.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_path = None;
        let digest = Sha256::digest(render_spec(&canonical).as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }
}

/// Named presets mirroring the three reference experiments, all on the
/// 256-antenna, 128-subcarrier, 8-user, 16-chain scenario.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let cfg = SystemConfig::reference();
    match name {
        "fig3" => Ok(ExperimentSpec::new(
            Scenario::SumRateVsSnr,
            cfg,
            Method::ALL.to_vec(),
            Grid::SnrDb(linear_grid(-10.0, 30.0, 5.0)),
        )),
        "fig4" => Ok(ExperimentSpec::new(
            Scenario::EeVsPower,
            cfg,
            Method::ALL.to_vec(),
            Grid::PowerDbm(linear_grid(0.0, 30.0, 2.0)),
        )),
        "fig5" => Ok(ExperimentSpec::new(
            Scenario::GapVsSnr,
            cfg,
            vec![Method::Proposed, Method::FullDigital],
            Grid::SnrDb(linear_grid(-10.0, 40.0, 5.0)),
        )),
        other => Err(Error::Config(format!("unknown preset '{other}' (expected fig3, fig4 or fig5)"))),
    }
}

/// Per-trial samples, indexed `[method][grid point][value]`.
type TrialSamples = Vec<Vec<Vec<f64>>>;

struct Layout {
    metric: &'static str,
    extras: Vec<&'static str>,
}

fn layout(spec: &ExperimentSpec) -> Layout {
    match (spec.scenario, &spec.grid) {
        (Scenario::GapVsSnr, _) => Layout {
            metric: "gap_simulated",
            extras: vec!["gap_exact_mean", "gap_exact_stderr", "gap_bound_mean", "gap_bound_stderr"],
        },
        (_, Grid::PowerDbm(_)) => Layout {
            metric: "energy_efficiency",
            extras: vec!["sum_rate_mean", "sum_rate_stderr", "snr_db"],
        },
        (_, Grid::SnrDb(_)) => Layout { metric: "sum_rate", extras: vec!["c_total_mean", "c_total_stderr"] },
    }
}

fn run_trial(spec: &ExperimentSpec, trial: u64) -> Result<TrialSamples> {
    let cfg = &spec.cfg;
    let h = fast_beamspace(&generate_channel::<f64>(cfg, trial)?);
    let k = cfg.n_subcarriers as f64;
    let iabs_xi = spec.iabs_xi();
    let full = full_digital_set(h.n_beams());
    let full_traces = if spec.scenario == Scenario::GapVsSnr {
        Some(inverse_gram_traces(&reduce(&h, &full)?, 0.0)?)
    } else {
        None
    };

    spec.methods
        .iter()
        .map(|&method| {
            let beams = method.select(&h, cfg, iabs_xi)?;
            let traces = inverse_gram_traces(&reduce(&h, &beams)?, 0.0)?;
            let per_point = match (spec.scenario, &spec.grid) {
                (Scenario::GapVsSnr, Grid::SnrDb(xs)) => {
                    let profile = gap_profile(&h, &beams)?;
                    let full_traces = full_traces.as_ref().expect("computed for gap sweeps");
                    xs.iter()
                        .map(|&db| {
                            let xi = db_to_linear(db);
                            let c_full = sum_rate_from_traces(full_traces, cfg.n_users, xi).total;
                            let c_sel = sum_rate_from_traces(&traces, cfg.n_users, xi).total;
                            vec![(c_full - c_sel) / k, profile.exact(xi) / k, profile.bound() / k]
                        })
                        .collect()
                }
                (_, Grid::PowerDbm(xs)) => {
                    let sigma2 = dbm_to_watts(spec.sigma2_dbm);
                    xs.iter()
                        .map(|&dbm| {
                            let ec = EnergyConfig::new(dbm_to_watts(dbm), sigma2, spec.p_rf_w)?;
                            let rate = sum_rate_from_traces(&traces, cfg.n_users, ec.snr()).average;
                            Ok(vec![energy_efficiency(rate, &ec, beams.len()), rate])
                        })
                        .collect::<Result<_>>()?
                }
                (_, Grid::SnrDb(xs)) => xs
                    .iter()
                    .map(|&db| {
                        let r = sum_rate_from_traces(&traces, cfg.n_users, db_to_linear(db));
                        vec![r.average, r.total]
                    })
                    .collect(),
            };
            Ok(per_point)
        })
        .collect()
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(spec: &ExperimentSpec, samples: &[TrialSamples]) -> SweepResult {
    let lay = layout(spec);
    let xs = spec.grid.values();
    let mut rows = Vec::with_capacity(spec.methods.len() * xs.len());
    for (mi, method) in spec.methods.iter().enumerate() {
        for (xi, &x) in xs.iter().enumerate() {
            let column = |v: usize| -> Vec<f64> { samples.iter().map(|t| t[mi][xi][v]).collect() };
            let (mean, stderr) = mean_stderr(&column(0));
            let n_values = samples[0][mi][xi].len();
            let mut extras: Vec<f64> = (1..n_values)
                .flat_map(|v| {
                    let (m, s) = mean_stderr(&column(v));
                    [m, s]
                })
                .collect();
            if lay.extras.contains(&"snr_db") {
                extras.push(x - spec.sigma2_dbm);
            }
            rows.push(SweepRow {
                method: method.name().to_string(),
                x_value: x,
                metric: lay.metric.to_string(),
                mean,
                stderr,
                extras,
            });
        }
    }
    SweepResult {
        scenario: spec.scenario.name().to_string(),
        x_name: spec.grid.x_name().to_string(),
        trials: spec.trials,
        seed: spec.cfg.seed,
        config_hash: spec.config_hash(),
        extra_columns: lay.extras.iter().map(|s| s.to_string()).collect(),
        rows,
    }
}

/// Runs an experiment on the global rayon pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let samples = (0..spec.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(spec, t))
        .collect::<Result<Vec<_>>>()?;
    let result = aggregate(spec, &samples);
    if let Some(path) = &spec.out_path {
        result.write_csv(path)?;
    }
    Ok(result)
}

/// Runs an experiment on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_experiment(spec))
}

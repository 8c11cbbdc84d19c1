//! Flat `key = value` experiment files.
//!
//! ```text
//! # comment
//! scenario = sumrate_vs_snr
//! methods = proposed, mm
//! snr_grid_db = 0, 10, 20
//! N = 64
//! delta = relative:1e-6
//! ```
//!
//! Keys are the field names of the system configuration (`N`, `K`, `U`,
//! `L`, `N_RF`, `f_c`, `B`, `d`, `c`, `N_Q`, `T_s`, `rolloff`, `delta`,
//! `nlos_gain_var`, `seed`, `distinct_init`) and of the experiment
//! (`scenario`, `methods`, `snr_grid_db`, `power_grid_dbm`, `trials`,
//! `out_path`, `sigma2_dbm`, `p_rf_w`, `iabs_snr_db`). Unknown or repeated
//! keys are errors. `d`, `T_s` and `N_Q` default to `c/(2 f_c)`, `1/B` and
//! `K/4` computed from the other values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{format_sig, ExperimentSpec, Grid, Method, Scenario};
use crate::config::{Regularizer, SystemConfig};
use crate::error::{Error, Result};

const KEYS: &[&str] = &[
    "scenario", "methods", "snr_grid_db", "power_grid_dbm", "trials", "out_path", "sigma2_dbm", "p_rf_w",
    "iabs_snr_db", "N", "K", "U", "L", "N_RF", "f_c", "B", "d", "c", "N_Q", "T_s", "rolloff", "delta",
    "nlos_gain_var", "seed", "distinct_init",
];

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse { line, msg: format!("cannot parse '{raw}' for {key}") }),
        }
    }

    fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse()
                        .map_err(|_| Error::Parse { line, msg: format!("cannot parse '{s}' in {key}") })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

fn parse_regularizer(raw: &str) -> Option<Regularizer> {
    match raw.split_once(':') {
        Some(("relative", v)) => v.trim().parse().ok().map(Regularizer::Relative),
        Some(("absolute", v)) => v.trim().parse().ok().map(Regularizer::Absolute),
        None => raw.parse().ok().map(Regularizer::Absolute),
        _ => None,
    }
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, msg: "expected 'key = value'".into() })?;
        let key = key.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| Error::Parse { line, msg: format!("unknown key '{key}'") })?;
        if map.insert(*known, (line, value.trim().to_string())).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key '{key}'") });
        }
    }
    let mut e = Entries { map };

    let mut cfg = SystemConfig::reference();
    let dims_given = e.map.contains_key("K");
    if let Some(v) = e.take("N")? {
        cfg.n_antennas = v;
    }
    if let Some(v) = e.take("K")? {
        cfg.n_subcarriers = v;
    }
    if let Some(v) = e.take("U")? {
        cfg.n_users = v;
    }
    if let Some(v) = e.take("L")? {
        cfg.n_paths = v;
    }
    if let Some(v) = e.take("N_RF")? {
        cfg.n_rf = v;
    }
    if let Some(v) = e.take("f_c")? {
        cfg.carrier_hz = v;
    }
    if let Some(v) = e.take("B")? {
        cfg.bandwidth_hz = v;
    }
    if let Some(v) = e.take("c")? {
        cfg.light_speed = v;
    }
    cfg.spacing_m = e.take("d")?.unwrap_or(cfg.light_speed / (2.0 * cfg.carrier_hz));
    cfg.sample_period = e.take("T_s")?.unwrap_or(1.0 / cfg.bandwidth_hz);
    cfg.cp_len = match e.take("N_Q")? {
        Some(v) => v,
        None if dims_given => (cfg.n_subcarriers / 4).max(1),
        None => cfg.cp_len,
    };
    if let Some(v) = e.take("rolloff")? {
        cfg.rolloff = v;
    }
    if let Some((line, raw)) = e.map.remove("delta") {
        cfg.delta = parse_regularizer(&raw).ok_or_else(|| Error::Parse {
            line,
            msg: format!("delta must be a number, 'relative:<x>' or 'absolute:<x>', got '{raw}'"),
        })?;
    }
    if let Some(v) = e.take("nlos_gain_var")? {
        cfg.nlos_gain_var = v;
    }
    if let Some(v) = e.take("seed")? {
        cfg.seed = v;
    }
    if let Some(v) = e.take("distinct_init")? {
        cfg.distinct_init = v;
    }

    let scenario: Scenario = match e.map.remove("scenario") {
        Some((_, raw)) => raw.parse()?,
        None => return Err(Error::Config("missing key 'scenario'".into())),
    };
    let methods = match e.take_list::<String>("methods")? {
        Some(names) => names.iter().map(|n| n.parse()).collect::<Result<Vec<Method>>>()?,
        None => Method::ALL.to_vec(),
    };
    let snr = e.take_list::<f64>("snr_grid_db")?;
    let power = e.take_list::<f64>("power_grid_dbm")?;
    let grid = match (snr, power) {
        (Some(s), None) => Grid::SnrDb(s),
        (None, Some(p)) => Grid::PowerDbm(p),
        (Some(_), Some(_)) => return Err(Error::Config("give either snr_grid_db or power_grid_dbm, not both".into())),
        (None, None) => return Err(Error::Config("missing snr_grid_db or power_grid_dbm".into())),
    };
    let mut spec = ExperimentSpec::new(scenario, cfg, methods, grid);
    if let Some(v) = e.take("trials")? {
        spec.trials = v;
    }
    spec.out_path = e.take::<String>("out_path")?.map(Into::into);
    if let Some(v) = e.take("sigma2_dbm")? {
        spec.sigma2_dbm = v;
    }
    if let Some(v) = e.take("p_rf_w")? {
        spec.p_rf_w = v;
    }
    spec.iabs_snr_db = e.take("iabs_snr_db")?;
    debug_assert!(e.map.is_empty(), "every known key is consumed");
    spec.validate()?;
    Ok(spec)
}

/// Canonical text form; [`parse_spec`] reads it back to an equal spec.
pub fn render_spec(spec: &ExperimentSpec) -> String {
    let c = &spec.cfg;
    let list = |xs: &[f64]| xs.iter().map(|&x| exact(x)).collect::<Vec<_>>().join(", ");
    let mut s = String::new();
    let _ = writeln!(s, "scenario = {}", spec.scenario);
    let methods: Vec<&str> = spec.methods.iter().map(|m| m.name()).collect();
    let _ = writeln!(s, "methods = {}", methods.join(", "));
    match &spec.grid {
        Grid::SnrDb(xs) => {
            let _ = writeln!(s, "snr_grid_db = {}", list(xs));
        }
        Grid::PowerDbm(xs) => {
            let _ = writeln!(s, "power_grid_dbm = {}", list(xs));
        }
    }
    let _ = writeln!(s, "trials = {}", spec.trials);
    if let Some(p) = &spec.out_path {
        let _ = writeln!(s, "out_path = {}", p.display());
    }
    let _ = writeln!(s, "sigma2_dbm = {}", exact(spec.sigma2_dbm));
    let _ = writeln!(s, "p_rf_w = {}", exact(spec.p_rf_w));
    if let Some(v) = spec.iabs_snr_db {
        let _ = writeln!(s, "iabs_snr_db = {}", exact(v));
    }
    let _ = writeln!(s, "N = {}", c.n_antennas);
    let _ = writeln!(s, "K = {}", c.n_subcarriers);
    let _ = writeln!(s, "U = {}", c.n_users);
    let _ = writeln!(s, "L = {}", c.n_paths);
    let _ = writeln!(s, "N_RF = {}", c.n_rf);
    let _ = writeln!(s, "f_c = {}", exact(c.carrier_hz));
    let _ = writeln!(s, "B = {}", exact(c.bandwidth_hz));
    let _ = writeln!(s, "d = {}", exact(c.spacing_m));
    let _ = writeln!(s, "c = {}", exact(c.light_speed));
    let _ = writeln!(s, "N_Q = {}", c.cp_len);
    let _ = writeln!(s, "T_s = {}", exact(c.sample_period));
    let _ = writeln!(s, "rolloff = {}", exact(c.rolloff));
    let delta = match c.delta {
        Regularizer::Relative(v) => format!("relative:{}", exact(v)),
        Regularizer::Absolute(v) => format!("absolute:{}", exact(v)),
    };
    let _ = writeln!(s, "delta = {delta}");
    let _ = writeln!(s, "nlos_gain_var = {}", exact(c.nlos_gain_var));
    let _ = writeln!(s, "seed = {}", c.seed);
    let _ = writeln!(s, "distinct_init = {}", c.distinct_init);
    s
}

/// Shortest representation that parses back to the same `f64`.
fn exact(x: f64) -> String {
    let short = format_sig(x);
    if short.parse::<f64>().ok() == Some(x) {
        short
    } else {
        format!("{x:e}")
    }
}

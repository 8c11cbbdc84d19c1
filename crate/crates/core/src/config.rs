//! Scenario constants for one simulated downlink.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// How the selection-time regularizer δ in `G = H̃_rᴴH̃_r + δI` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// Fixed δ.
    Absolute(f64),
    /// δ = scale · (1 + mean diagonal of H̃_rᴴH̃_r over all subcarriers),
    /// evaluated on the first-stage beam set.
    Relative(f64),
}

impl Regularizer {
    pub fn resolve(self, mean_gram_diagonal: f64) -> f64 {
        match self {
            Regularizer::Absolute(d) => d,
            Regularizer::Relative(s) => s * (1.0 + mean_gram_diagonal),
        }
    }

    fn value(self) -> f64 {
        match self {
            Regularizer::Absolute(d) | Regularizer::Relative(d) => d,
        }
    }
}

impl Default for Regularizer {
    fn default() -> Self {
        Regularizer::Relative(1e-6)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Antennas (and beams) at the base station.
    pub n_antennas: usize,
    pub n_subcarriers: usize,
    pub n_users: usize,
    /// Paths per user; path 0 is line-of-sight.
    pub n_paths: usize,
    /// RF chains, i.e. beams that can be selected.
    pub n_rf: usize,
    /// Center frequency, Hz.
    pub carrier_hz: f64,
    /// Bandwidth, Hz.
    pub bandwidth_hz: f64,
    /// Antenna spacing, m.
    pub spacing_m: f64,
    /// Propagation speed, m/s.
    pub light_speed: f64,
    /// Cyclic-prefix length in taps.
    pub cp_len: usize,
    /// Sample period, s.
    pub sample_period: f64,
    /// Raised-cosine roll-off factor.
    pub rolloff: f64,
    pub delta: Regularizer,
    /// Variance of the NLOS complex gains (the LOS gain has unit variance).
    pub nlos_gain_var: f64,
    /// Give every user a distinct first-stage beam instead of letting
    /// coinciding strongest beams collapse into one.
    pub distinct_init: bool,
    pub seed: u64,
}

impl SystemConfig {
    /// The reference mmWave scenario: 256 antennas, 128 subcarriers, 3 paths,
    /// 8 users, 16 RF chains at 28 GHz with 1.4 GHz of bandwidth.
    pub fn reference() -> Self {
        Self::with_dims(256, 128, 8, 3, 16)
    }

    /// Reference physical constants with custom dimensions. Derived
    /// quantities follow the defaults: half-wavelength spacing at the
    /// carrier, `T_s = 1/B` and a cyclic prefix of `K/4` taps.
    pub fn with_dims(n: usize, k: usize, u: usize, l: usize, n_rf: usize) -> Self {
        let carrier_hz = 28e9;
        let bandwidth_hz = 1.4e9;
        Self {
            n_antennas: n,
            n_subcarriers: k,
            n_users: u,
            n_paths: l,
            n_rf,
            carrier_hz,
            bandwidth_hz,
            spacing_m: SPEED_OF_LIGHT / (2.0 * carrier_hz),
            light_speed: SPEED_OF_LIGHT,
            cp_len: (k / 4).max(1),
            sample_period: 1.0 / bandwidth_hz,
            rolloff: 1.0,
            delta: Regularizer::default(),
            nlos_gain_var: 0.1,
            distinct_init: false,
            seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n_antennas == 0 || self.n_subcarriers == 0 || self.n_users == 0 || self.n_paths == 0 {
            return fail("N, K, U and L must all be at least 1".into());
        }
        if !(self.n_users <= self.n_rf && self.n_rf <= self.n_antennas) {
            return fail(format!(
                "need U <= N_RF <= N, got U={} N_RF={} N={}",
                self.n_users, self.n_rf, self.n_antennas
            ));
        }
        if !(self.carrier_hz > 0.0 && self.bandwidth_hz > 0.0 && self.bandwidth_hz < self.carrier_hz) {
            return fail(format!("need 0 < B < f_c, got B={} f_c={}", self.bandwidth_hz, self.carrier_hz));
        }
        if (self.sample_period * self.bandwidth_hz - 1.0).abs() > 1e-9 {
            return fail(format!("T_s must equal 1/B, got T_s={}", self.sample_period));
        }
        if self.cp_len == 0 || self.cp_len > self.n_subcarriers {
            return fail(format!("need 1 <= N_Q <= K, got N_Q={}", self.cp_len));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return fail(format!("roll-off must lie in [0,1], got {}", self.rolloff));
        }
        if !(self.delta.value() > 0.0) {
            return fail(format!("delta must be positive, got {:?}", self.delta));
        }
        if !(self.spacing_m > 0.0 && self.light_speed > 0.0) {
            return fail("antenna spacing and propagation speed must be positive".into());
        }
        if !(self.nlos_gain_var >= 0.0) {
            return fail(format!("NLOS gain variance must be >= 0, got {}", self.nlos_gain_var));
        }
        Ok(())
    }

    /// Index of the center subcarrier, `⌈K/2⌉` (1-based).
    pub fn center_subcarrier(&self) -> usize {
        self.n_subcarriers.div_ceil(2)
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::reference()
    }
}

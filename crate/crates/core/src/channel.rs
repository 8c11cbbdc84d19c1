//! Wideband multi-user spatial channels with frequency-dependent
//! steering (beam squint).
//!
//! Each user sees `L` paths. Path ℓ contributes
//! `β_ℓ[k] · a(f_k d sinθ_ℓ / c)` on subcarrier `k`, where `β_ℓ[k]` is the
//! complex gain filtered by a raised-cosine pulse sampled on the cyclic
//! prefix taps, and `a(φ)` is the uniform-linear-array response. Because
//! the spatial frequency scales with `f_k`, a path drifts across beamspace
//! bins over the band.

use std::io::{Read, Write};

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SystemConfig;
use crate::error::{domain, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::Real;

/// Frequency of subcarrier `k` (1-based): `f_c + (B/K)(k − 1 − (K−1)/2)`.
pub fn subcarrier_frequency(cfg: &SystemConfig, k: usize) -> Result<f64> {
    let kk = cfg.n_subcarriers;
    if k == 0 || k > kk {
        return domain(format!("subcarrier {k} outside 1..={kk}"));
    }
    let offset = (k as f64 - 1.0) - (kk as f64 - 1.0) / 2.0;
    Ok(cfg.carrier_hz + cfg.bandwidth_hz / kk as f64 * offset)
}

/// Array response `(1/√N)·[1, e^{j2πφ}, …, e^{j2πφ(N−1)}]`.
pub fn steering_vector<T: Real>(n: usize, phi: T) -> Vec<Complex<T>> {
    let amp = T::one() / T::lit(n as f64).sqrt();
    (0..n)
        .map(|m| Complex::from_polar(amp, T::TAU() * phi * T::lit(m as f64)))
        .collect()
}

/// Spatial angle of departure `(f/c)·d·sinθ`.
pub fn spatial_aod<T: Real>(f: T, d: T, c: T, sin_theta: T) -> T {
    f / c * d * sin_theta
}

/// Raised-cosine pulse at `x = t/T_s`, normalized so `p(0) = 1` and
/// `p(n) = 0` for nonzero integers `n`.
pub fn raised_cosine<T: Real>(x: T, rolloff: T) -> T {
    let pi = T::PI();
    let sinc = |v: T| {
        if v.abs() < T::lit(1e-12) {
            T::one()
        } else {
            (pi * v).sin() / (pi * v)
        }
    };
    let two_bx = T::lit(2.0) * rolloff * x;
    let denom = T::one() - two_bx * two_bx;
    if denom.abs() < T::lit(1e-8) {
        // removable singularity at |x| = 1/(2β)
        return pi / T::lit(4.0) * sinc(T::one() / (T::lit(2.0) * rolloff));
    }
    sinc(x) * (pi * rolloff * x).cos() / denom
}

/// Physical parameters of one propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    /// Sine of the physical angle of departure.
    pub sin_theta: f64,
    /// Delay in seconds.
    pub tau: f64,
    /// Complex path gain.
    pub alpha: Complex<f64>,
}

/// All paths of one user. Entry 0 is the line-of-sight path.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPathParams {
    pub paths: Vec<PathParams>,
}

/// Generator for realization `realization_id` of a run seeded with `seed`.
/// Each realization owns an independent ChaCha stream, so realizations can
/// be drawn in any order or concurrently.
pub fn realization_rng(seed: u64, realization_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization_id);
    rng
}

/// Draws path parameters for every user.
///
/// `sinθ ~ U[−1/2, 1/2]`; LOS gain `~ CN(0, 1)`, NLOS gains
/// `~ CN(0, nlos_gain_var)`; delay `~ U[T_s, N_Q·T_s]`, the span of the
/// prefix taps `q = 1..N_Q`.
pub fn sample_user_params<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Vec<UserPathParams> {
    let ts = cfg.sample_period;
    let max_tau = cfg.cp_len as f64 * ts;
    (0..cfg.n_users)
        .map(|_| {
            let paths = (0..cfg.n_paths)
                .map(|l| {
                    let sin_theta = rng.random_range(-0.5..=0.5);
                    let tau = if cfg.cp_len > 1 { rng.random_range(ts..=max_tau) } else { ts };
                    let var = if l == 0 { 1.0 } else { cfg.nlos_gain_var };
                    let sd = (var / 2.0).sqrt();
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    PathParams { sin_theta, tau, alpha: Complex::new(re * sd, im * sd) }
                })
                .collect();
            UserPathParams { paths }
        })
        .collect()
}

/// Frequency-domain gain of a path on subcarrier `k` (1-based):
/// `α · Σ_{q=1}^{N_Q} p_rc(q·T_s − τ) · e^{−j2πkq/K}`.
pub fn beta_gain<T: Real>(alpha: Complex<T>, tau: T, k: usize, cfg: &SystemConfig) -> Complex<T> {
    let ts = T::lit(cfg.sample_period);
    let rolloff = T::lit(cfg.rolloff);
    let kk = T::lit(cfg.n_subcarriers as f64);
    let kf = T::lit(k as f64);
    let mut acc = Complex::<T>::zero();
    for q in 1..=cfg.cp_len {
        let qf = T::lit(q as f64);
        let pulse = raised_cosine(qf - tau / ts, rolloff);
        acc = acc + Complex::from_polar(pulse, -T::TAU() * kf * qf / kk);
    }
    alpha * acc
}

/// Spatial channel of one realization: an `N×U` matrix per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    /// `per_subcarrier[k-1]` is `H[k]`, column `u` is user `u`'s channel.
    pub per_subcarrier: Vec<CMatrix<T>>,
    pub realization_id: u64,
}

impl<T: Real> ChannelSet<T> {
    pub fn n_antennas(&self) -> usize {
        self.per_subcarrier.first().map_or(0, CMatrix::rows)
    }

    pub fn n_users(&self) -> usize {
        self.per_subcarrier.first().map_or(0, CMatrix::cols)
    }

    pub fn n_subcarriers(&self) -> usize {
        self.per_subcarrier.len()
    }

    /// `H[k]` for 1-based `k`.
    pub fn at(&self, k: usize) -> &CMatrix<T> {
        &self.per_subcarrier[k - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.per_subcarrier
            .iter()
            .all(|m| m.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Binary dump: `N, U, K, realization_id` as little-endian `u64`,
    /// then the `N×U×K` tensor in row-major order (subcarrier fastest) as
    /// interleaved little-endian `f64` real/imaginary pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let (n, u, k) = (self.n_antennas(), self.n_users(), self.n_subcarriers());
        for v in [n as u64, u as u64, k as u64, self.realization_id] {
            w.write_all(&v.to_le_bytes())?;
        }
        for a in 0..n {
            for b in 0..u {
                for h in &self.per_subcarrier {
                    let z = h[(a, b)];
                    w.write_all(&z.re.to_f64_lossy().to_le_bytes())?;
                    w.write_all(&z.im.to_f64_lossy().to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut header = [0u64; 4];
        for h in &mut header {
            r.read_exact(&mut word)?;
            *h = u64::from_le_bytes(word);
        }
        let [n, u, k, realization_id] = header;
        let (n, u, k) = (n as usize, u as usize, k as usize);
        let mut per_subcarrier = vec![CMatrix::zeros(n, u); k];
        let mut next = |r: &mut R| -> Result<T> {
            r.read_exact(&mut word)?;
            Ok(T::lit(f64::from_le_bytes(word)))
        };
        for a in 0..n {
            for b in 0..u {
                for h in per_subcarrier.iter_mut() {
                    let re = next(&mut r)?;
                    let im = next(&mut r)?;
                    h[(a, b)] = Complex::new(re, im);
                }
            }
        }
        Ok(Self { per_subcarrier, realization_id })
    }
}

/// Builds `H[k]` column by column: `h_u[k] = Σ_ℓ β_{u,ℓ}[k] · a(φ^k_{u,ℓ})`
/// with the steering frequency evaluated at `f_k`.
pub fn frequency_channel<T: Real>(
    params: &[UserPathParams],
    cfg: &SystemConfig,
    realization_id: u64,
) -> Result<ChannelSet<T>> {
    if params.len() != cfg.n_users {
        return Err(Error::Shape(format!("{} users in params, config has {}", params.len(), cfg.n_users)));
    }
    let n = cfg.n_antennas;
    let d = T::lit(cfg.spacing_m);
    let c = T::lit(cfg.light_speed);
    let mut per_subcarrier = Vec::with_capacity(cfg.n_subcarriers);
    for k in 1..=cfg.n_subcarriers {
        let fk = T::lit(subcarrier_frequency(cfg, k)?);
        let mut h = CMatrix::zeros(n, cfg.n_users);
        for (u, user) in params.iter().enumerate() {
            for p in &user.paths {
                let alpha = Complex::new(T::lit(p.alpha.re), T::lit(p.alpha.im));
                let beta = beta_gain(alpha, T::lit(p.tau), k, cfg);
                let a = steering_vector(n, spatial_aod(fk, d, c, T::lit(p.sin_theta)));
                for (m, am) in a.into_iter().enumerate() {
                    h[(m, u)] = h[(m, u)] + beta * am;
                }
            }
        }
        per_subcarrier.push(h);
    }
    Ok(ChannelSet { per_subcarrier, realization_id })
}

/// Draws realization `realization_id` of the configured scenario.
pub fn generate_channel<T: Real>(cfg: &SystemConfig, realization_id: u64) -> Result<ChannelSet<T>> {
    let mut rng = realization_rng(cfg.seed, realization_id);
    let params = sample_user_params(cfg, &mut rng);
    frequency_channel(&params, cfg, realization_id)
}

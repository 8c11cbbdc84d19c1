//! Zero-forcing precoding, sum-rate, energy efficiency and the
//! selected-vs-fully-digital rate gap.
//!
//! With the ZF precoder scaled to total power `ρ` every user receives the
//! same SNR `ξ / tr(G⁻¹[k])`, `G[k] = H̃_rᴴ[k] H̃_r[k] (+ δI)`, so the
//! wideband sum-rate is `U Σ_k log₂(1 + ξ / tr(G⁻¹[k]))`.

use num_complex::Complex;

use crate::beamspace::{reduce_rows, BeamSet, BeamspaceChannel};
use crate::error::{domain, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{pairwise_sum, Real};

pub(crate) fn log2_1p<T: Real>(x: T) -> T {
    x.ln_1p() / T::LN_2()
}

/// ZF precoder `F = c·(H̃_rᴴ)†` for one subcarrier, with `c > 0` chosen so
/// that `tr(F Fᴴ) = ρ`.
pub fn zf_precoder<T: Real>(reduced: &CMatrix<T>, rho: T) -> Result<CMatrix<T>> {
    if reduced.rows() < reduced.cols() {
        return Err(Error::Singular(format!(
            "{} beams cannot separate {} users",
            reduced.rows(),
            reduced.cols()
        )));
    }
    let g_inv = reduced.gram().inverse()?;
    // (H̃_rᴴ)† = H̃_r (H̃_rᴴ H̃_r)⁻¹ and tr(F₀F₀ᴴ) = tr(G⁻¹)
    let f0 = reduced.matmul(&g_inv)?;
    let c = (rho / g_inv.trace().re).sqrt();
    Ok(f0.scale(Complex::new(c, T::zero())))
}

/// `tr((H̃_rᴴ[k] H̃_r[k] + δI)⁻¹)` for every subcarrier.
pub fn inverse_gram_traces<T: Real>(reduced: &BeamspaceChannel<T>, delta: T) -> Result<Vec<T>> {
    if delta == T::zero() && reduced.n_beams() < reduced.n_users() {
        return Err(Error::Singular(format!(
            "{} beams cannot separate {} users",
            reduced.n_beams(),
            reduced.n_users()
        )));
    }
    reduced
        .per_subcarrier
        .iter()
        .map(|m| {
            let mut g = m.gram();
            g.add_diagonal(delta);
            Ok(g.inverse()?.trace().re)
        })
        .collect()
}

/// Sum-rate at one SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint<T> {
    /// `ξ = ρ/σ²`.
    pub xi: T,
    /// `U Σ_k log₂(1 + ξ/tr(G⁻¹[k]))`, bits per OFDM symbol.
    pub total: T,
    /// `total / K`, bits/s/Hz.
    pub average: T,
}

/// Sum-rate from precomputed `tr(G⁻¹[k])` values.
pub fn sum_rate_from_traces<T: Real>(traces: &[T], n_users: usize, xi: T) -> RatePoint<T> {
    let terms: Vec<T> = traces.iter().map(|&t| log2_1p(xi / t)).collect();
    let total = T::lit(n_users as f64) * pairwise_sum(&terms);
    RatePoint { xi, total, average: total / T::lit(traces.len() as f64) }
}

/// Wideband sum-rate of a reduced channel. `delta = 0` gives the exact ZF
/// rate and reports rank-deficient channels as errors.
pub fn sum_rate<T: Real>(reduced: &BeamspaceChannel<T>, xi: T, delta: T) -> Result<RatePoint<T>> {
    let traces = inverse_gram_traces(reduced, delta)?;
    Ok(sum_rate_from_traces(&traces, reduced.n_users(), xi))
}

/// Per-subcarrier ingredients of the rate gap between a beam set and the
/// fully digital system:
/// `T_B[k] = tr(B⁻¹[k])` with `B = H̃_rᴴH̃_r`, and
/// `t_M[k] = tr(P B⁻¹B⁻¹ Pᴴ (I + P B⁻¹ Pᴴ)⁻¹)` where `P[k]` holds the
/// unselected rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile<T> {
    pub n_users: usize,
    pub trace_b_inv: Vec<T>,
    pub trace_m: Vec<T>,
}

impl<T: Real> GapProfile<T> {
    fn total(&self, factor: impl Fn(T) -> T) -> T {
        let terms: Vec<T> = self
            .trace_b_inv
            .iter()
            .zip(&self.trace_m)
            .map(|(&tb, &tm)| log2_1p(tm * factor(tb) / (tb - tm)))
            .collect();
        T::lit(self.n_users as f64) * pairwise_sum(&terms)
    }

    /// Exact gap `C_D − C_P` at SNR `ξ`, bits per OFDM symbol.
    pub fn exact(&self, xi: T) -> T {
        self.total(|tb| xi / (tb + xi))
    }

    /// Limit of [`exact`](Self::exact) as `ξ → ∞`.
    pub fn bound(&self) -> T {
        self.total(|_| T::one())
    }
}

/// Builds the gap ingredients. The `(N−|ℬ|)`-sized inverse in `t_M` is
/// folded into a `U×U` one with the push-through identity
/// `(I + P B⁻¹ Pᴴ)⁻¹ P = P (I + B⁻¹ PᴴP)⁻¹`, giving
/// `t_M = tr(B⁻¹ B⁻¹ Q (I + B⁻¹ Q)⁻¹)` with `Q = PᴴP`.
pub fn gap_profile<T: Real>(h: &BeamspaceChannel<T>, beams: &BeamSet) -> Result<GapProfile<T>> {
    let n_users = h.n_users();
    if beams.len() < n_users {
        return Err(Error::Singular(format!("{} beams cannot separate {n_users} users", beams.len())));
    }
    let rest = beams.complement(h.n_beams());
    let mut trace_b_inv = Vec::with_capacity(h.n_subcarriers());
    let mut trace_m = Vec::with_capacity(h.n_subcarriers());
    for hk in &h.per_subcarrier {
        let b_inv = hk.select_rows(beams.as_slice())?.gram().inverse()?;
        let tb = b_inv.trace().re;
        let tm = if rest.is_empty() {
            T::zero()
        } else {
            let q = hk.select_rows(&rest)?.gram();
            let b_inv_q = b_inv.matmul(&q)?;
            let mut inner = b_inv_q.clone();
            inner.add_diagonal(T::one());
            b_inv.matmul(&b_inv_q)?.matmul(&inner.inverse()?)?.trace().re
        };
        if !(tb > tm) {
            return Err(Error::Inconsistent(format!("tr(B⁻¹) = {tb:e} does not exceed tr(M) = {tm:e}")));
        }
        trace_b_inv.push(tb);
        trace_m.push(tm);
    }
    Ok(GapProfile { n_users, trace_b_inv, trace_m })
}

/// Rate gap between the fully digital system and a beam set at one SNR.
/// All values are in bits per OFDM symbol (summed over subcarriers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint<T> {
    pub xi: T,
    /// Closed-form gap.
    pub exact: T,
    /// High-SNR limit of the closed form; an upper bound for every `ξ`.
    pub bound: T,
    /// Difference of the two separately computed sum-rates.
    pub simulated: T,
}

pub fn sum_rate_gap<T: Real>(h: &BeamspaceChannel<T>, beams: &BeamSet, xi: T) -> Result<GapPoint<T>> {
    let profile = gap_profile(h, beams)?;
    let all: Vec<usize> = (0..h.n_beams()).collect();
    let full = sum_rate(&reduce_rows(h, &all)?, xi, T::zero())?;
    let part = sum_rate(&reduce_rows(h, beams.as_slice())?, xi, T::zero())?;
    Ok(GapPoint {
        xi,
        exact: profile.exact(xi),
        bound: profile.bound(),
        simulated: full.total - part.total,
    })
}

/// Transmit, noise and per-chain circuit power, all in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyConfig {
    pub rho: f64,
    pub sigma2: f64,
    pub p_rf: f64,
}

impl EnergyConfig {
    pub fn new(rho: f64, sigma2: f64, p_rf: f64) -> Result<Self> {
        if !(rho > 0.0 && sigma2 > 0.0 && p_rf > 0.0) {
            return domain(format!("powers must be positive: rho={rho} sigma2={sigma2} p_rf={p_rf}"));
        }
        Ok(Self { rho, sigma2, p_rf })
    }

    pub fn snr(&self) -> f64 {
        self.rho / self.sigma2
    }
}

/// `η = C / (ρ + N_RF·P_RF)` in bits/s/Hz/W.
pub fn energy_efficiency(rate: f64, ec: &EnergyConfig, n_rf: usize) -> f64 {
    rate / (ec.rho + n_rf as f64 * ec.p_rf)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamspace::{fast_beamspace, reduce};
    use crate::channel::generate_channel;
    use crate::config::SystemConfig;
    use crate::linalg::test_util::random_matrix;

    fn channel(n: usize, u: usize, k: usize, seed: u64) -> BeamspaceChannel<f64> {
        let mut cfg = SystemConfig::with_dims(n, k, u, 3, u);
        cfg.seed = seed;
        fast_beamspace(&generate_channel(&cfg, 0).unwrap())
    }

    #[test]
    fn zf_scalar_example() {
        let h = CMatrix::from_vec(1, 1, vec![Complex::new(2.0, 0.0)]).unwrap();
        let f = zf_precoder(&h, 3.0).unwrap();
        assert!((f[(0, 0)] - Complex::new(3f64.sqrt(), 0.0)).norm() < 1e-14);
        let eff = h.adjoint().matmul(&f).unwrap();
        assert!((eff[(0, 0)] - Complex::new(2.0 * 3f64.sqrt(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zf_meets_power_and_nulls_interference() {
        for seed in 0..10 {
            let h = random_matrix(4, 2, seed);
            let rho = 0.37;
            let f = zf_precoder(&h, rho).unwrap();
            let p = f.matmul(&f.adjoint()).unwrap().trace().re;
            assert!((p - rho).abs() <= 1e-10 * rho);
            let eff = h.adjoint().matmul(&f).unwrap();
            let scale = eff.frobenius_norm();
            assert!(eff[(0, 1)].norm() < 1e-9 * scale && eff[(1, 0)].norm() < 1e-9 * scale);
            assert!((eff[(0, 0)] - eff[(1, 1)]).norm() < 1e-9 * scale);
            assert!(eff[(0, 0)].im.abs() < 1e-9 * scale && eff[(0, 0)].re > 0.0);
        }
        assert!(zf_precoder(&random_matrix(1, 2, 0), 1.0).is_err());
    }

    #[test]
    fn sum_rate_examples() {
        let one = BeamspaceChannel { per_subcarrier: vec![CMatrix::from_vec(1, 1, vec![Complex::new(0.6, 0.8)]).unwrap()] };
        let r = sum_rate(&one, 1.0f64, 0.0).unwrap();
        assert!((r.total - 1.0).abs() < 1e-15);
        assert_eq!(sum_rate(&one, 0.0, 0.0).unwrap().total, 0.0);

        let h = channel(8, 3, 4, 2);
        let too_few = reduce(&h, &BeamSet::from_indices(vec![0, 1]).unwrap()).unwrap();
        assert!(sum_rate(&too_few, 10.0, 0.0).is_err());
        assert!(sum_rate(&too_few, 10.0, 1e-3).is_ok());
    }

    /// Per-user SINR from the explicit precoder: signal `|c|²` on the
    /// diagonal of `H̃_rᴴF`, unit noise (so `ρ = ξ`).
    #[test]
    fn sum_rate_matches_link_budget() {
        let h = channel(16, 3, 4, 5);
        let set = BeamSet::from_indices(vec![2, 9, 4, 13, 7]).unwrap();
        let r = reduce(&h, &set).unwrap();
        let xi = 31.0;
        let mut total = 0.0;
        for k in 1..=4 {
            let f = zf_precoder(r.at(k), xi).unwrap();
            let eff = r.at(k).adjoint().matmul(&f).unwrap();
            for u in 0..3 {
                let signal = eff[(u, u)].norm_sqr();
                let interference: f64 = (0..3).filter(|&v| v != u).map(|v| eff[(u, v)].norm_sqr()).sum();
                total += (1.0 + signal / (interference + 1.0)).log2();
            }
        }
        let rate = sum_rate(&r, xi, 0.0).unwrap();
        assert!((rate.total - total).abs() < 1e-9 * total);
        assert!((rate.total - 4.0 * rate.average).abs() < 1e-12);
    }

    #[test]
    fn adding_a_beam_never_hurts_and_permutation_is_invariant() {
        let h = channel(16, 3, 4, 6);
        let base = vec![1, 5, 9];
        let r0 = sum_rate(&reduce(&h, &BeamSet::from_indices(base.clone()).unwrap()).unwrap(), 50.0, 0.0).unwrap();
        for b in 0..16 {
            if base.contains(&b) {
                continue;
            }
            let mut more = base.clone();
            more.push(b);
            let r = sum_rate(&reduce(&h, &BeamSet::from_indices(more).unwrap()).unwrap(), 50.0, 0.0).unwrap();
            assert!(r.total >= r0.total - 1e-12);
        }
        let perm = sum_rate(&reduce(&h, &BeamSet::from_indices(vec![9, 1, 5]).unwrap()).unwrap(), 50.0, 0.0).unwrap();
        assert!((perm.total - r0.total).abs() < 1e-10);
    }

    /// Literal `(N−|ℬ|)`-sized evaluation of `tr(M)`.
    fn trace_m_literal(hk: &CMatrix<f64>, beams: &BeamSet) -> f64 {
        let rest = beams.complement(hk.rows());
        let b_inv = hk.select_rows(beams.as_slice()).unwrap().gram().inverse().unwrap();
        let p = hk.select_rows(&rest).unwrap();
        let pb = p.matmul(&b_inv).unwrap();
        let mut inner = pb.matmul(&p.adjoint()).unwrap();
        inner.add_diagonal(1.0);
        pb.matmul(&b_inv).unwrap().matmul(&p.adjoint()).unwrap().matmul(&inner.inverse().unwrap()).unwrap().trace().re
    }

    #[test]
    fn push_through_matches_literal_trace() {
        let h = channel(16, 3, 4, 8);
        let set = BeamSet::from_indices(vec![0, 3, 6, 8, 11, 14]).unwrap();
        let prof = gap_profile(&h, &set).unwrap();
        for k in 1..=4 {
            let lit = trace_m_literal(h.at(k), &set);
            assert!((prof.trace_m[k - 1] - lit).abs() < 1e-10 * lit.abs().max(1e-300));
        }
    }

    #[test]
    fn gap_examples() {
        let h = channel(16, 3, 4, 3);
        let all = BeamSet::from_indices((0..16).collect()).unwrap();
        let g = sum_rate_gap(&h, &all, 100.0).unwrap();
        assert_eq!(g.exact, 0.0);
        assert_eq!(g.bound, 0.0);
        assert!(g.simulated.abs() < 1e-10);

        let set = BeamSet::from_indices(vec![2, 4, 6, 8, 10, 12]).unwrap();
        let g = sum_rate_gap(&h, &set, 1e12).unwrap();
        assert!((g.exact - g.bound).abs() <= 1e-5 * g.bound);
        let g = sum_rate_gap(&h, &set, 20.0).unwrap();
        assert!((g.exact - g.simulated).abs() <= 1e-8 * g.simulated.abs());
        assert!(g.bound >= g.exact);

        assert!(sum_rate_gap(&h, &BeamSet::from_indices(vec![1, 2]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn energy_helpers() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-75.0) - 3.1622776601683795e-11).abs() < 1e-24);

        let ec = EnergyConfig::new(1.0, 1e-3, 1e-300).unwrap();
        assert!((energy_efficiency(1.0, &ec, 1) - 1.0).abs() < 1e-15);
        let ec = EnergyConfig::new(0.5, 1e-3, 0.0344).unwrap();
        assert!((16.0 * ec.p_rf - 0.5504).abs() < 1e-15);
        assert!((energy_efficiency(4.0, &ec, 16) - 2.0 * energy_efficiency(2.0, &ec, 16)).abs() < 1e-15);
        assert!(EnergyConfig::new(0.0, 1.0, 1.0).is_err());
    }
}

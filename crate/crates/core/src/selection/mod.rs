//! Beam selection.
//!
//! [`select_wideband`] is the two-stage wideband method: every user first
//! gets the beam carrying the most energy averaged over the band, then
//! beams are added one at a time by the largest sum-rate increment scored
//! with [`kappa`]. The narrow-band baselines extended to the wideband
//! setting live in [`baselines`].

mod baselines;

pub use baselines::{full_digital_set, select_exhaustive, select_iabs, select_mm, EXHAUSTIVE_LIMIT};

use num_complex::Complex;

use crate::beamspace::{argmax, beam_energy_profile, reduce_rows, BeamSet, BeamspaceChannel};
use crate::config::SystemConfig;
use crate::error::{domain, Error, Result};
use crate::linalg::{row_times, CMatrix};
use crate::metrics::log2_1p;
use crate::scalar::{pairwise_sum, Real};

/// Normalized sum-rate increment of adding beam row `g_b` on one
/// subcarrier:
///
/// ```text
/// t_M = g_b G⁻¹ G⁻¹ g_bᴴ / (1 + g_b G⁻¹ g_bᴴ)
/// κ   = t_M / ((xi_inv·tr(G⁻¹) + 1) · (tr(G⁻¹) − t_M))
/// ```
///
/// `log₂(1 + κ)` with `xi_inv = 1/ξ` is exactly the per-user, per-subcarrier
/// rate increase at SNR `ξ`; selection scores with `xi_inv = 1`.
pub fn kappa<T: Real>(g_inv: &CMatrix<T>, g_b: &[Complex<T>], xi_inv: T) -> Result<T> {
    let tr = g_inv.trace().re;
    if !(tr > T::zero()) {
        return Err(Error::Inconsistent(format!("tr(G⁻¹) = {tr:e} is not positive")));
    }
    let t_m = trace_reduction(g_inv, g_b);
    if !(tr > t_m) {
        return Err(Error::Inconsistent(format!("tr(G⁻¹) = {tr:e} does not exceed t_M = {t_m:e}")));
    }
    Ok(t_m / ((xi_inv * tr + T::one()) * (tr - t_m)))
}

/// `tr(G⁻¹) − tr((G + g_bᴴg_b)⁻¹)` by the matrix inversion lemma.
fn trace_reduction<T: Real>(g_inv: &CMatrix<T>, g_b: &[Complex<T>]) -> T {
    // G⁻¹ is Hermitian, so G⁻¹ g_bᴴ = (g_b G⁻¹)ᴴ
    let v = row_times(g_b, g_inv);
    let quad: T = v.iter().zip(g_b).fold(T::zero(), |acc, (vi, gi)| acc + (vi * gi.conj()).re);
    let energy: T = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
    energy / (T::one() + quad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDiagnostics<T> {
    /// Beam picked for each user by the band-averaged energy stage.
    pub init_beams: Vec<usize>,
    /// Winning `Σ_k log₂(1 + κ_b[k])` of each greedy step.
    pub scores: Vec<T>,
    /// Number of greedy steps.
    pub iterations: usize,
    /// Regularizer used in `G = H̃_rᴴH̃_r + δI`.
    pub delta: T,
}

/// Inverse regularized Gram matrix of each subcarrier for a set of rows.
pub(crate) fn regularized_gram_inverses<T: Real>(
    h: &BeamspaceChannel<T>,
    rows: &[usize],
    delta: T,
) -> Result<Vec<CMatrix<T>>> {
    reduce_rows(h, rows)?
        .per_subcarrier
        .iter()
        .map(|m| {
            let mut g = m.gram();
            g.add_diagonal(delta);
            g.inverse()
        })
        .collect()
}

/// Regularizer for a beam set under `cfg.delta`: the relative rule uses
/// the mean diagonal of `H̃_rᴴH̃_r` over all subcarriers.
pub fn resolve_delta<T: Real>(h: &BeamspaceChannel<T>, rows: &[usize], cfg: &SystemConfig) -> Result<T> {
    let reduced = reduce_rows(h, rows)?;
    let energies: Vec<T> = reduced.per_subcarrier.iter().map(|m| m.frobenius_norm().powi(2)).collect();
    let mean = pairwise_sum(&energies) / T::lit((h.n_subcarriers() * h.n_users()) as f64);
    Ok(T::lit(cfg.delta.resolve(mean.to_f64_lossy())))
}

/// Two-stage wideband beam selection.
///
/// Stage one adds, for each user, the argmax of its band-averaged beam
/// energy; users sharing a strongest beam collapse onto one entry unless
/// `cfg.distinct_init` is set, in which case a later user takes its best
/// beam not yet chosen. Stage two fills the set to `cfg.n_rf` beams, each
/// step adding the candidate with the largest `Σ_k log₂(1 + κ_b[k])`.
/// Ties go to the lowest beam index.
pub fn select_wideband<T: Real>(
    h: &BeamspaceChannel<T>,
    cfg: &SystemConfig,
) -> Result<(BeamSet, SelectionDiagnostics<T>)> {
    let n = h.n_beams();
    if cfg.n_rf > n {
        return domain(format!("N_RF = {} exceeds the {n} available beams", cfg.n_rf));
    }
    if cfg.n_rf == 0 {
        return domain("N_RF must be at least 1");
    }
    let mut set = BeamSet::with_capacity(cfg.n_rf);
    let mut init_beams = Vec::with_capacity(h.n_users());
    for u in 0..h.n_users() {
        let profile = beam_energy_profile(h, u)?;
        let pick = if cfg.distinct_init {
            let masked: Vec<T> = profile
                .iter()
                .enumerate()
                .map(|(b, &e)| if set.contains(b) { -T::one() } else { e })
                .collect();
            argmax(&masked)
        } else {
            argmax(&profile)
        }
        .expect("at least one beam");
        set.insert(pick)?;
        init_beams.push(pick);
    }

    let delta: T = resolve_delta(h, set.as_slice(), cfg)?;
    let mut scores = Vec::new();
    while set.len() < cfg.n_rf {
        let g_inv = regularized_gram_inverses(h, set.as_slice(), delta)?;
        let mut best: Option<(usize, T)> = None;
        let mut terms = vec![T::zero(); h.n_subcarriers()];
        for b in set.complement(n) {
            for ((t, gi), hk) in terms.iter_mut().zip(&g_inv).zip(&h.per_subcarrier) {
                *t = log2_1p(kappa(gi, hk.row(b), T::one())?);
            }
            let score = pairwise_sum(&terms);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((b, score));
            }
        }
        let (b, score) = best.expect("candidates remain while the set is not full");
        set.insert(b)?;
        scores.push(score);
    }
    let iterations = scores.len();
    Ok((set, SelectionDiagnostics { init_beams, scores, iterations, delta }))
}

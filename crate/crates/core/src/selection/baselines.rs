use std::cmp::Ordering;

use crate::beamspace::{argmax, beam_energy_profile, reduce_rows, BeamSet, BeamspaceChannel};
use crate::config::SystemConfig;
use crate::error::{domain, Result};
use crate::metrics::sum_rate;
use crate::scalar::Real;

/// Largest number of subsets [`select_exhaustive`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

/// IA-BS enumerates assignments of interfering users exhaustively up to
/// this many combinations and switches to coordinate ascent beyond it.
const IABS_ENUMERATION_LIMIT: usize = 4096;

/// Every beam, in index order.
pub fn full_digital_set(n: usize) -> BeamSet {
    BeamSet::from_indices((0..n).collect()).expect("indices are distinct")
}

/// Beam indices sorted by decreasing score, ties to the lower index.
fn ranked<T: Real>(scores: &[T], exclude: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&b| !exclude(b)).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    idx
}

fn total_energy<T: Real>(h: &BeamspaceChannel<T>) -> Result<Vec<T>> {
    let mut total = vec![T::zero(); h.n_beams()];
    for u in 0..h.n_users() {
        for (t, e) in total.iter_mut().zip(beam_energy_profile(h, u)?) {
            *t = *t + e;
        }
    }
    Ok(total)
}

/// Magnitude maximization: the `n_rf` beams with the largest band-averaged
/// energy summed over users.
pub fn select_mm<T: Real>(h: &BeamspaceChannel<T>, n_rf: usize) -> Result<BeamSet> {
    if n_rf > h.n_beams() {
        return domain(format!("N_RF = {n_rf} exceeds the {} available beams", h.n_beams()));
    }
    let order = ranked(&total_energy(h)?, |_| false);
    BeamSet::from_indices(order[..n_rf].to_vec())
}

/// Interference-aware selection.
///
/// Users whose strongest band-averaged beam is not shared keep it. Users
/// that collide search jointly over their top-ranked free beams (as many
/// candidates each as there are colliding users) for the assignment with
/// the highest ZF sum-rate at `xi` on the center subcarrier; each
/// contested beam stays in the set. The remaining budget is filled by
/// magnitude ranking.
pub fn select_iabs<T: Real>(h: &BeamspaceChannel<T>, cfg: &SystemConfig, xi: T) -> Result<BeamSet> {
    let n = h.n_beams();
    let n_users = h.n_users();
    if cfg.n_rf < n_users || cfg.n_rf > n {
        return domain(format!("need U <= N_RF <= N, got U={n_users} N_RF={} N={n}", cfg.n_rf));
    }
    let profiles: Vec<Vec<T>> = (0..n_users).map(|u| beam_energy_profile(h, u)).collect::<Result<_>>()?;
    let strongest: Vec<usize> = profiles.iter().map(|p| argmax(p).expect("at least one beam")).collect();

    let mut set = BeamSet::with_capacity(cfg.n_rf);
    let mut interfering = Vec::new();
    for u in 0..n_users {
        if strongest.iter().filter(|&&b| b == strongest[u]).count() == 1 {
            set.insert(strongest[u])?;
        } else {
            interfering.push(u);
        }
    }

    if !interfering.is_empty() {
        let m = interfering.len();
        let mut contested: Vec<usize> = interfering.iter().map(|&u| strongest[u]).collect();
        contested.sort_unstable();
        contested.dedup();
        let candidates: Vec<Vec<usize>> = interfering
            .iter()
            .map(|&u| ranked(&profiles[u], |b| set.contains(b)).into_iter().take(m).collect())
            .collect();
        let center = h.at(cfg.center_subcarrier().min(h.n_subcarriers()));
        let center = BeamspaceChannel { per_subcarrier: vec![center.clone()] };
        let search = AssignmentSearch { h: &center, fixed: set.as_slice().to_vec(), candidates, contested, xi };
        for b in search.best() {
            set.insert(b)?;
        }
    }

    let order = ranked(&total_energy(h)?, |b| set.contains(b));
    for b in order.into_iter().take(cfg.n_rf - set.len()) {
        set.insert(b)?;
    }
    Ok(set)
}

struct AssignmentSearch<'a, T> {
    h: &'a BeamspaceChannel<T>,
    fixed: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    contested: Vec<usize>,
    xi: T,
}

impl<T: Real> AssignmentSearch<'_, T> {
    fn valid(&self, beams: &[usize]) -> bool {
        let distinct = beams.iter().enumerate().all(|(i, b)| !beams[..i].contains(b));
        distinct && self.contested.iter().all(|c| beams.contains(c))
    }

    /// Sum-rate of the fixed beams plus `beams`; singular channels rank last.
    fn rate(&self, beams: &[usize]) -> Option<T> {
        let rows: Vec<usize> = self.fixed.iter().chain(beams).copied().collect();
        let reduced = reduce_rows(self.h, &rows).ok()?;
        sum_rate(&reduced, self.xi, T::zero()).ok().map(|r| r.total)
    }

    fn pick(&self, choice: &[usize]) -> Vec<usize> {
        choice.iter().zip(&self.candidates).map(|(&c, list)| list[c]).collect()
    }

    fn best(&self) -> Vec<usize> {
        let combos = self
            .candidates
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
            .unwrap_or(usize::MAX);
        if combos <= IABS_ENUMERATION_LIMIT {
            self.enumerate()
        } else {
            self.coordinate_ascent()
        }
    }

    fn enumerate(&self) -> Vec<usize> {
        let m = self.candidates.len();
        let mut choice = vec![0usize; m];
        let mut best: Option<(Vec<usize>, Option<T>)> = None;
        loop {
            let beams = self.pick(&choice);
            if self.valid(&beams) {
                let rate = self.rate(&beams);
                let better = match (&best, rate) {
                    (None, _) => true,
                    (Some((_, None)), Some(_)) => true,
                    (Some((_, Some(r0))), Some(r)) => r > *r0,
                    _ => false,
                };
                if better {
                    best = Some((beams, rate));
                }
            }
            // odometer, last user fastest
            let mut i = m;
            loop {
                if i == 0 {
                    return best.map(|(b, _)| b).unwrap_or_else(|| self.contested.clone());
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < self.candidates[i].len() {
                    break;
                }
                choice[i] = 0;
            }
        }
    }

    fn coordinate_ascent(&self) -> Vec<usize> {
        // start: each user in turn takes its best beam still free
        let mut beams: Vec<usize> = Vec::with_capacity(self.candidates.len());
        for list in &self.candidates {
            let b = list.iter().copied().find(|b| !beams.contains(b)).unwrap_or(list[0]);
            beams.push(b);
        }
        if !self.valid(&beams) {
            return self.contested.clone();
        }
        let mut current = self.rate(&beams);
        for _ in 0..16 {
            let mut improved = false;
            for i in 0..beams.len() {
                for &b in &self.candidates[i] {
                    let mut trial = beams.clone();
                    trial[i] = b;
                    if !self.valid(&trial) {
                        continue;
                    }
                    let r = self.rate(&trial);
                    let better = match (current, r) {
                        (None, Some(_)) => true,
                        (Some(c), Some(r)) => r > c,
                        _ => false,
                    };
                    if better {
                        beams = trial;
                        current = r;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        beams
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Best subset of `n_rf` beams by exact ZF sum-rate at `xi`, over all
/// subcarriers. Ties go to the lexicographically smallest subset. Refuses
/// instances with more than [`EXHAUSTIVE_LIMIT`] subsets.
pub fn select_exhaustive<T: Real>(h: &BeamspaceChannel<T>, n_rf: usize, xi: T) -> Result<BeamSet> {
    let n = h.n_beams();
    if n_rf == 0 || n_rf > n {
        return domain(format!("N_RF = {n_rf} must lie in 1..={n}"));
    }
    let count = binomial(n, n_rf);
    if count > EXHAUSTIVE_LIMIT {
        return domain(format!("{count} subsets exceed the exhaustive search limit"));
    }
    let mut subset: Vec<usize> = (0..n_rf).collect();
    let mut best: Option<(Vec<usize>, T)> = None;
    loop {
        if let Ok(r) = reduce_rows(h, &subset).and_then(|r| sum_rate(&r, xi, T::zero())) {
            if best.as_ref().is_none_or(|(_, b)| r.total > *b) {
                best = Some((subset.clone(), r.total));
            }
        }
        // next combination in lexicographic order
        let Some(i) = (0..n_rf).rev().find(|&i| subset[i] < n - n_rf + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..n_rf {
            subset[j] = subset[j - 1] + 1;
        }
    }
    match best {
        Some((s, _)) => BeamSet::from_indices(s),
        None => Err(crate::error::Error::Singular("every subset is rank deficient".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamspace::fast_beamspace;
    use crate::channel::generate_channel;
    use crate::linalg::CMatrix;
    use crate::selection::select_wideband;
    use num_complex::Complex;

    fn channel(cfg: &SystemConfig, id: u64) -> BeamspaceChannel<f64> {
        fast_beamspace(&generate_channel(cfg, id).unwrap())
    }

    #[test]
    fn full_digital_examples() {
        assert_eq!(full_digital_set(1).as_slice(), &[0]);
        assert_eq!(full_digital_set(4).as_slice(), &[0, 1, 2, 3]);
        assert_eq!(full_digital_set(256).len(), 256);
    }

    #[test]
    fn mm_single_user_is_top_of_profile() {
        let cfg = SystemConfig::with_dims(32, 8, 1, 3, 4);
        let h = channel(&cfg, 1);
        let set = select_mm(&h, 4).unwrap();
        let p = beam_energy_profile(&h, 0).unwrap();
        let mut sorted: Vec<usize> = (0..32).collect();
        sorted.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap());
        assert_eq!(set.as_slice(), &sorted[..4]);
    }

    #[test]
    fn mm_matches_brute_force_sort() {
        let cfg = SystemConfig::with_dims(32, 8, 4, 3, 8);
        for id in 0..5 {
            let h = channel(&cfg, id);
            let mut totals = vec![0.0; 32];
            for k in 1..=8 {
                for b in 0..32 {
                    for u in 0..4 {
                        totals[b] += h.at(k)[(b, u)].norm_sqr() / 8.0;
                    }
                }
            }
            let mut pairs: Vec<(f64, usize)> = totals.iter().copied().zip(0..).collect();
            pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let want: Vec<usize> = pairs[..8].iter().map(|p| p.1).collect();
            assert_eq!(select_mm(&h, 8).unwrap().as_slice(), &want[..]);
        }
        assert!(select_mm(&channel(&cfg, 0), 33).is_err());
    }

    #[test]
    fn mm_is_scale_invariant() {
        let cfg = SystemConfig::with_dims(32, 4, 3, 3, 6);
        let h = channel(&cfg, 2);
        assert_eq!(select_mm(&h, 6).unwrap(), select_mm(&h.scaled(0.01), 6).unwrap());
    }

    #[test]
    fn iabs_without_conflicts_matches_energy_stage() {
        let mut cfg = SystemConfig::with_dims(64, 8, 3, 3, 3);
        for id in 0..20 {
            cfg.seed = id;
            let h = channel(&cfg, id);
            let (wb, diag) = select_wideband(&h, &cfg).unwrap();
            let mut init = diag.init_beams.clone();
            init.sort_unstable();
            init.dedup();
            if init.len() < 3 {
                continue;
            }
            let ia = select_iabs(&h, &cfg, 100.0).unwrap();
            assert_eq!(ia, wb);
            return;
        }
        panic!("no conflict-free instance found");
    }

    #[test]
    fn iabs_resolves_a_shared_beam_by_center_rate() {
        // hand-made beamspace: both users peak on beam 0
        let rows = |a: [f64; 4], b: [f64; 4]| {
            CMatrix::from_fn(4, 2, |i, j| Complex::new(if j == 0 { a[i] } else { b[i] }, 0.1 * (i + j) as f64))
        };
        let hk = rows([1.0, 0.6, 0.1, 0.05], [0.9, 0.05, 0.5, 0.1]);
        let h = BeamspaceChannel { per_subcarrier: vec![hk.clone(), hk] };
        let mut cfg = SystemConfig::with_dims(4, 2, 2, 1, 2);
        cfg.cp_len = 1;
        let xi = 10.0;
        let set = select_iabs(&h, &cfg, xi).unwrap();

        let rate = |bs: Vec<usize>| sum_rate(&reduce_rows(&h, &bs).unwrap(), xi, 0.0).unwrap().total;
        let with_first = rate(vec![0, 1]);
        let with_second = rate(vec![0, 2]);
        let mut want = if with_first >= with_second { vec![0, 1] } else { vec![0, 2] };
        let mut got = set.as_slice().to_vec();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want);
    }

    #[test]
    fn iabs_always_fills_the_budget() {
        let cfg = SystemConfig::with_dims(32, 8, 6, 3, 10);
        for id in 0..10 {
            let h = channel(&cfg, id);
            let set = select_iabs(&h, &cfg, 100.0).unwrap();
            assert_eq!(set.len(), 10);
        }
    }

    #[test]
    fn iabs_search_paths_agree_on_small_problems() {
        let cfg = SystemConfig::with_dims(16, 4, 3, 3, 3);
        let h = channel(&cfg, 4);
        let center = BeamspaceChannel { per_subcarrier: vec![h.at(2).clone()] };
        let search = AssignmentSearch {
            h: &center,
            fixed: vec![],
            candidates: vec![vec![3, 4, 5], vec![3, 6, 7], vec![8, 3, 9]],
            contested: vec![3],
            xi: 30.0,
        };
        let ex = search.enumerate();
        let ca = search.coordinate_ascent();
        assert!(search.valid(&ex) && search.valid(&ca));
        assert!(search.rate(&ex).unwrap() >= search.rate(&ca).unwrap() - 1e-12);
    }

    #[test]
    fn exhaustive_examples() {
        let cfg = SystemConfig::with_dims(3, 4, 2, 2, 3);
        let h = channel(&cfg, 0);
        assert_eq!(select_exhaustive(&h, 3, 10.0).unwrap().as_slice(), &[0, 1, 2]);

        // one user, one beam: the strongest beam when it dominates
        let hk = CMatrix::from_vec(4, 1, vec![Complex::new(0.1, 0.0), Complex::new(2.0, 0.0), Complex::new(0.3, 0.0), Complex::new(0.2, 0.1)]).unwrap();
        let h = BeamspaceChannel { per_subcarrier: vec![hk] };
        assert_eq!(select_exhaustive(&h, 1, 5.0).unwrap().as_slice(), &[1]);

        let big = channel(&SystemConfig::with_dims(64, 2, 2, 2, 8), 0);
        assert!(select_exhaustive(&big, 8, 1.0).is_err());
    }

    #[test]
    fn exhaustive_dominates_wideband() {
        let cfg = SystemConfig::with_dims(8, 4, 2, 3, 3);
        for id in 0..10 {
            let h = channel(&cfg, id);
            let (wb, _) = select_wideband(&h, &cfg).unwrap();
            let ex = select_exhaustive(&h, 3, 100.0).unwrap();
            let rate = |s: &BeamSet| sum_rate(&reduce_rows(&h, s.as_slice()).unwrap(), 100.0, 0.0).map(|r| r.total);
            if let Ok(w) = rate(&wb) {
                assert!(rate(&ex).unwrap() >= w - 1e-12);
            }
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(256, 16), 10078751602022313874633200u128);
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(binomial(5, 5), 1);
    }
}

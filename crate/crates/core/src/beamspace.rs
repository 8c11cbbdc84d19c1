//! Lens-as-DFT transform and beamspace bookkeeping.
//!
//! The lens maps the spatial channel onto `N` orthogonal beams whose
//! spatial frequencies sit on the symmetric grid
//! `φ̄_n = (n − (N−1)/2)/N`, `n = 0..N` (0-based). Beam indices are 0-based
//! throughout the crate.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::channel::{steering_vector, ChannelSet};
use crate::error::{domain, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{pairwise_sum, Real};

/// Spatial frequency of beam `n` (0-based).
pub fn beam_grid_frequency<T: Real>(n_beams: usize, n: usize) -> T {
    (T::lit(n as f64) - T::lit((n_beams as f64 - 1.0) / 2.0)) / T::lit(n_beams as f64)
}

/// Unitary `N×N` lens matrix; row `n` is `a(φ̄_n)ᴴ`.
#[derive(Debug, Clone)]
pub struct LensMatrix<T> {
    mat: CMatrix<T>,
}

impl<T: Real> LensMatrix<T> {
    pub fn new(n: usize) -> Self {
        let rows: Vec<Vec<Complex<T>>> = (0..n)
            .map(|b| steering_vector(n, beam_grid_frequency::<T>(n, b)))
            .collect();
        Self { mat: CMatrix::from_fn(n, n, |i, j| rows[i][j].conj()) }
    }

    pub fn size(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }
}

/// Beamspace channel: one `rows×U` matrix per subcarrier, where rows are
/// either all `N` beams or a selected subset.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamspaceChannel<T> {
    /// `per_subcarrier[k-1]` is `H̃[k]`.
    pub per_subcarrier: Vec<CMatrix<T>>,
}

impl<T: Real> BeamspaceChannel<T> {
    pub fn n_beams(&self) -> usize {
        self.per_subcarrier.first().map_or(0, CMatrix::rows)
    }

    pub fn n_users(&self) -> usize {
        self.per_subcarrier.first().map_or(0, CMatrix::cols)
    }

    pub fn n_subcarriers(&self) -> usize {
        self.per_subcarrier.len()
    }

    /// `H̃[k]` for 1-based `k`.
    pub fn at(&self, k: usize) -> &CMatrix<T> {
        &self.per_subcarrier[k - 1]
    }

    pub fn scaled(&self, s: T) -> Self {
        let s = Complex::new(s, T::zero());
        Self { per_subcarrier: self.per_subcarrier.iter().map(|m| m.scale(s)).collect() }
    }
}

/// `H̃[k] = U·H[k]` by dense multiplication with the lens matrix.
pub fn to_beamspace<T: Real>(h: &ChannelSet<T>, lens: &LensMatrix<T>) -> Result<BeamspaceChannel<T>> {
    if h.n_antennas() != lens.size() {
        return Err(Error::Shape(format!(
            "channel has {} antennas, lens is {}x{}",
            h.n_antennas(),
            lens.size(),
            lens.size()
        )));
    }
    let per_subcarrier = h
        .per_subcarrier
        .iter()
        .map(|hk| lens.mat.matmul(hk))
        .collect::<Result<_>>()?;
    Ok(BeamspaceChannel { per_subcarrier })
}

/// Same transform as [`to_beamspace`] computed with an FFT: the symmetric
/// grid is a standard DFT after modulating the input by `e^{jπ(N−1)m/N}`.
pub fn fast_beamspace<T: Real>(h: &ChannelSet<T>) -> BeamspaceChannel<T> {
    let n = h.n_antennas();
    let u = h.n_users();
    let fft = FftPlanner::<T>::new().plan_fft_forward(n);
    let norm = T::one() / T::lit(n as f64).sqrt();
    let shift = T::lit((n as f64 - 1.0) / 2.0);
    let twiddle: Vec<Complex<T>> = (0..n)
        .map(|m| Complex::from_polar(norm, T::TAU() * shift * T::lit(m as f64) / T::lit(n as f64)))
        .collect();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    let per_subcarrier = h
        .per_subcarrier
        .iter()
        .map(|hk| {
            let mut out = CMatrix::zeros(n, u);
            for col in 0..u {
                for (m, b) in buf.iter_mut().enumerate() {
                    *b = hk[(m, col)] * twiddle[m];
                }
                fft.process(&mut buf);
                for (m, b) in buf.iter().enumerate() {
                    out[(m, col)] = *b;
                }
            }
            out
        })
        .collect();
    BeamspaceChannel { per_subcarrier }
}

/// Ordered set of selected beams, the index form of the selector matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BeamSet {
    beams: Vec<usize>,
    capacity: usize,
}

impl BeamSet {
    pub fn with_capacity(capacity: usize) -> Self {
        Self { beams: Vec::with_capacity(capacity), capacity }
    }

    /// Builds a set from distinct indices; the capacity is their count.
    pub fn from_indices(beams: Vec<usize>) -> Result<Self> {
        let mut set = Self::with_capacity(beams.len());
        for b in beams {
            set.insert(b)?;
        }
        Ok(set)
    }

    /// Appends `beam`. Returns `Ok(false)` without change if it is already
    /// in the set.
    pub fn insert(&mut self, beam: usize) -> Result<bool> {
        if self.contains(beam) {
            return Ok(false);
        }
        if self.beams.len() == self.capacity {
            return domain(format!("beam set is full ({} beams)", self.capacity));
        }
        self.beams.push(beam);
        Ok(true)
    }

    pub fn contains(&self, beam: usize) -> bool {
        self.beams.contains(&beam)
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Beams in selection order.
    pub fn as_slice(&self) -> &[usize] {
        &self.beams
    }

    /// Beams of `0..n_beams` not in the set, ascending.
    pub fn complement(&self, n_beams: usize) -> Vec<usize> {
        (0..n_beams).filter(|b| !self.contains(*b)).collect()
    }
}

/// Rows of `H̃[k]` indexed by the beam set, in selection order.
pub fn reduce<T: Real>(h: &BeamspaceChannel<T>, beams: &BeamSet) -> Result<BeamspaceChannel<T>> {
    reduce_rows(h, beams.as_slice())
}

pub(crate) fn reduce_rows<T: Real>(h: &BeamspaceChannel<T>, rows: &[usize]) -> Result<BeamspaceChannel<T>> {
    if rows.is_empty() {
        return domain("cannot reduce onto an empty beam set");
    }
    let per_subcarrier = h
        .per_subcarrier
        .iter()
        .map(|m| m.select_rows(rows))
        .collect::<Result<_>>()?;
    Ok(BeamspaceChannel { per_subcarrier })
}

/// Band-averaged energy per beam for user `u`:
/// entry `b` is `(1/K) Σ_k |H̃[k](b, u)|²`.
pub fn beam_energy_profile<T: Real>(h: &BeamspaceChannel<T>, u: usize) -> Result<Vec<T>> {
    if u >= h.n_users() {
        return domain(format!("user {u} outside 0..{}", h.n_users()));
    }
    let k = T::lit(h.n_subcarriers() as f64);
    let mut terms = vec![T::zero(); h.n_subcarriers()];
    Ok((0..h.n_beams())
        .map(|b| {
            for (t, m) in terms.iter_mut().zip(&h.per_subcarrier) {
                *t = m[(b, u)].norm_sqr();
            }
            pairwise_sum(&terms) / k
        })
        .collect())
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Real>(xs: &[T]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, &x) in xs.iter().enumerate() {
        match best {
            Some((_, v)) if !(x > v) => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, frequency_channel, PathParams, UserPathParams};
    use crate::config::SystemConfig;
    use crate::linalg::norm_sqr;

    #[test]
    fn lens_of_one_is_one() {
        let lens = LensMatrix::<f64>::new(1);
        assert!((lens.matrix()[(0, 0)] - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn lens_is_unitary() {
        for n in [2, 5, 16, 64] {
            let u = LensMatrix::<f64>::new(n);
            let uu = u.matrix().matmul(&u.matrix().adjoint()).unwrap();
            assert!(uu.sub(&CMatrix::identity(n)).unwrap().frobenius_norm() < 1e-10, "N={n}");
        }
    }

    #[test]
    fn on_grid_steering_maps_to_basis_vector() {
        let n = 16;
        let lens = LensMatrix::<f64>::new(n);
        for b in [0, 3, 8, 15] {
            let a = steering_vector(n, beam_grid_frequency::<f64>(n, b));
            let y = lens.matrix().matmul(&CMatrix::column(&a)).unwrap();
            for i in 0..n {
                let want = if i == b { 1.0 } else { 0.0 };
                assert!((y[(i, 0)] - Complex::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn beamspace_preserves_energy_and_inverts() {
        let cfg = SystemConfig::with_dims(32, 8, 3, 3, 3);
        let h: ChannelSet<f64> = generate_channel(&cfg, 0).unwrap();
        let lens = LensMatrix::new(32);
        let ht = to_beamspace(&h, &lens).unwrap();
        for k in 1..=8 {
            assert!((ht.at(k).frobenius_norm() - h.at(k).frobenius_norm()).abs() < 1e-10);
            let back = lens.matrix().adjoint().matmul(ht.at(k)).unwrap();
            assert!(back.sub(h.at(k)).unwrap().frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn fft_route_matches_dense_route() {
        for n in [1, 7, 32, 256] {
            let cfg = SystemConfig::with_dims(n, 4, 1, 2, 1);
            let h: ChannelSet<f64> = generate_channel(&cfg, 3).unwrap();
            let dense = to_beamspace(&h, &LensMatrix::new(n)).unwrap();
            let fast = fast_beamspace(&h);
            for k in 1..=4 {
                assert!(dense.at(k).sub(fast.at(k)).unwrap().frobenius_norm() < 1e-10, "N={n}");
            }
        }
    }

    #[test]
    fn to_beamspace_rejects_wrong_lens() {
        let cfg = SystemConfig::with_dims(8, 2, 1, 1, 1);
        let h: ChannelSet<f64> = generate_channel(&cfg, 0).unwrap();
        assert!(to_beamspace(&h, &LensMatrix::new(4)).is_err());
    }

    fn on_grid_user(cfg: &SystemConfig, beam: usize) -> UserPathParams {
        // Steer exactly onto beam `beam` at the carrier and use a single
        // subcarrier sitting on the carrier so there is no squint.
        let phi = beam_grid_frequency::<f64>(cfg.n_antennas, beam);
        let sin_theta = phi * cfg.light_speed / (cfg.carrier_hz * cfg.spacing_m);
        UserPathParams {
            paths: vec![PathParams { sin_theta, tau: cfg.sample_period, alpha: Complex::new(1.0, 0.0) }],
        }
    }

    #[test]
    fn on_grid_path_lands_in_its_bin() {
        let mut cfg = SystemConfig::with_dims(16, 1, 1, 1, 1);
        cfg.cp_len = 1;
        let h = frequency_channel::<f64>(&[on_grid_user(&cfg, 5)], &cfg, 0).unwrap();
        let ht = fast_beamspace(&h);
        // β = e^{-j2π·1·1/1} = 1
        for b in 0..16 {
            let want = if b == 5 { 1.0 } else { 0.0 };
            assert!((ht.at(1)[(b, 0)] - Complex::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn reduce_examples() {
        let cfg = SystemConfig::with_dims(8, 3, 2, 2, 2);
        let ht = fast_beamspace(&generate_channel::<f64>(&cfg, 1).unwrap());
        let all = BeamSet::from_indices((0..8).collect()).unwrap();
        assert_eq!(reduce(&ht, &all).unwrap(), ht);

        let one = BeamSet::from_indices(vec![6]).unwrap();
        let r = reduce(&ht, &one).unwrap();
        assert_eq!(r.at(2).row(0), ht.at(2).row(6));

        // against an explicit 0/1 selector S: H̃_r = Sᴴ H̃
        let set = BeamSet::from_indices(vec![4, 1, 7]).unwrap();
        let mut s = CMatrix::<f64>::zeros(8, 3);
        for (col, &b) in set.as_slice().iter().enumerate() {
            s[(b, col)] = Complex::new(1.0, 0.0);
        }
        let r = reduce(&ht, &set).unwrap();
        for k in 1..=3 {
            let direct = s.adjoint().matmul(ht.at(k)).unwrap();
            assert_eq!(direct.sub(r.at(k)).unwrap().frobenius_norm(), 0.0);
        }

        assert!(reduce(&ht, &BeamSet::with_capacity(2)).is_err());
        let bad = BeamSet::from_indices(vec![8]).unwrap();
        assert!(reduce(&ht, &bad).is_err());
    }

    #[test]
    fn beam_set_rules() {
        let mut s = BeamSet::with_capacity(2);
        assert!(s.insert(3).unwrap());
        assert!(!s.insert(3).unwrap());
        assert!(s.insert(1).unwrap());
        assert!(s.insert(0).is_err());
        assert_eq!(s.as_slice(), &[3, 1]);
        assert_eq!(s.complement(5), vec![0, 2, 4]);
        assert!(BeamSet::from_indices(vec![1, 1]).unwrap().len() == 1);
    }

    #[test]
    fn energy_profile_sums() {
        let cfg = SystemConfig::with_dims(16, 6, 2, 3, 2);
        let ht = fast_beamspace(&generate_channel::<f64>(&cfg, 8).unwrap());
        for u in 0..2 {
            let p = beam_energy_profile(&ht, u).unwrap();
            assert!(p.iter().all(|&x| x >= 0.0));
            let total: f64 = p.iter().sum();
            let direct: f64 = (1..=6).map(|k| norm_sqr(&ht.at(k).col(u))).sum::<f64>() / 6.0;
            assert!((total - direct).abs() < 1e-12);
        }
        assert!(beam_energy_profile(&ht, 2).is_err());

        let single = BeamspaceChannel { per_subcarrier: vec![ht.at(1).clone()] };
        let p = beam_energy_profile(&single, 1).unwrap();
        for b in 0..16 {
            assert_eq!(p[b], ht.at(1)[(b, 1)].norm_sqr());
        }
    }

    #[test]
    fn energy_profile_ignores_per_subcarrier_phase() {
        let cfg = SystemConfig::with_dims(16, 4, 1, 2, 1);
        let ht = fast_beamspace(&generate_channel::<f64>(&cfg, 2).unwrap());
        let rotated = BeamspaceChannel {
            per_subcarrier: ht
                .per_subcarrier
                .iter()
                .enumerate()
                .map(|(k, m)| m.scale(Complex::from_polar(1.0, 0.7 * k as f64 + 0.1)))
                .collect(),
        };
        let a = beam_energy_profile(&ht, 0).unwrap();
        let b = beam_energy_profile(&rotated, 0).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-14));
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax::<f64>(&[]), None);
    }

    #[test]
    fn lens_unitary_in_f32() {
        let u = LensMatrix::<f32>::new(64);
        let uu = u.matrix().matmul(&u.matrix().adjoint()).unwrap();
        assert!(uu.sub(&CMatrix::identity(64)).unwrap().frobenius_norm() < 1e-4);
    }
}

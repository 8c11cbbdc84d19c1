#![allow(dead_code)]

use lensbeam::{Beamspace64, CMatrix64};
use num_complex::Complex64;

/// `H_rᴴH_r + δI` for the given rows of `h`, built entry by entry.
pub fn gram(h: &CMatrix64, rows: &[usize], delta: f64) -> Vec<Vec<Complex64>> {
    let u = h.cols();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); u]; u];
    for (i, gi) in g.iter_mut().enumerate() {
        for (j, gij) in gi.iter_mut().enumerate() {
            for &r in rows {
                *gij += h[(r, i)].conj() * h[(r, j)];
            }
        }
        gi[i] += delta;
    }
    g
}

/// `tr(G⁻¹)` through a Cholesky factor, `‖L⁻¹‖²_F`. `None` unless `G` is
/// numerically positive definite.
pub fn trace_inverse(g: &[Vec<Complex64>]) -> Option<f64> {
    let n = g.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut d = g[j][j].re;
        for p in 0..j {
            d -= l[j][p].norm_sqr();
        }
        if !(d > 1e-300) {
            return None;
        }
        let d = d.sqrt();
        l[j][j] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = g[i][j];
            for p in 0..j {
                s -= l[i][p] * l[j][p].conj();
            }
            l[i][j] = s / d;
        }
    }
    // columns of L⁻¹ by forward substitution
    let mut total = 0.0;
    for c in 0..n {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in c..n {
            let mut s = if i == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for p in c..i {
                s -= l[i][p] * x[p];
            }
            x[i] = s / l[i][i];
        }
        total += x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    Some(total)
}

/// `U Σ_k log₂(1 + ξ / tr((H_rᴴH_r + δI)⁻¹))` from scratch.
pub fn rate(h: &Beamspace64, rows: &[usize], xi: f64, delta: f64) -> Option<f64> {
    let u = h.n_users() as f64;
    let mut c = 0.0;
    for m in &h.per_subcarrier {
        let tr = trace_inverse(&gram(m, rows, delta))?;
        c += u * (xi / tr).ln_1p() / std::f64::consts::LN_2;
    }
    Some(c)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Prints the verdict line for one criterion and returns whether it passed.
pub fn verdict(id: u32, name: &str, ok: bool, detail: impl std::fmt::Display) -> bool {
    println!("criterion {id} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

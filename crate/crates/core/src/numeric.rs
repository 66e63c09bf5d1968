//! Floating-point evaluation of the analytic objects and residual checks of their identities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::{json, Value};
use statrs::function::erf::erfc;

use crate::cmat::{self, CMat};
use crate::qseries::QSeries;
use crate::rat::to_f64;

pub type C = Complex64;

/// Outcome of one residual check.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub residual: f64,
    pub truncation: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn passes(&self) -> bool {
        self.residual.is_finite() && self.residual < self.tolerance && self.tolerance > 10.0 * self.truncation
    }

    pub fn worst(items: &[Residual]) -> Residual {
        let mut out = Residual { residual: 0.0, truncation: 0.0, tolerance: f64::INFINITY };
        for r in items {
            out.residual = fmax(out.residual, r.residual);
            out.truncation = out.truncation.max(r.truncation);
            out.tolerance = out.tolerance.min(r.tolerance);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "residual": format!("{:.3e}", self.residual),
            "truncation": format!("{:.3e}", self.truncation),
            "tolerance": format!("{:.1e}", self.tolerance),
            "pass": self.passes(),
        })
    }
}

/// Sample points and tolerances.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub height: i64,
    pub taus: Vec<C>,
    pub tolerance: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { height: 10, taus: vec![C::new(0.0, 1.0), C::new(0.5, 0.5)], tolerance: 1e-8 }
    }
}

pub fn q_pow(n: f64, tau: C) -> C {
    (C::new(0.0, 2.0 * PI) * tau * n).exp()
}

/// Components of a truncated series at `tau`.
pub fn eval_series(f: &QSeries, tau: C) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); f.fq.order()];
    let s = (f.radicand as f64).sqrt();
    for ((n, b), c) in &f.coeffs {
        out[*b] += q_pow(to_f64(n), tau) * (to_f64(c) * s);
    }
    out
}

/// Weil matrix of the representation a series transforms with.
pub fn weil_s_for(f: &QSeries) -> CMat {
    if f.dual {
        f.fq.dual().weil_s()
    } else {
        f.fq.weil_s()
    }
}

/// Maximum that propagates NaN, so a broken evaluation can never pass a gate.
pub fn fmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn max_norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, fmax)
}

/// Size of the omitted tail: the largest term of the top unit shell, extrapolated one shell on.
pub fn truncation_estimate(f: &QSeries, y: f64) -> f64 {
    let top = to_f64(&f.ceiling);
    let s = (f.radicand as f64).sqrt();
    let mut m: f64 = 0.0;
    for ((n, _), c) in &f.coeffs {
        let nf = to_f64(n);
        if nf > top - 1.0 {
            m = m.max((to_f64(c) * s).abs());
        }
    }
    m * f.fq.order() as f64 * (-2.0 * PI * (top + 1.0) * y).exp() * 4.0
}

/// `|F(-1/tau) - tau^k rho(S) F(tau)|`, relative to the size of `F(-1/tau)` when that exceeds 1.
pub fn s_residual(f: &QSeries, tau: C, tolerance: f64) -> Residual {
    let k = to_f64(&f.weight);
    let st = -tau.inv();
    let lhs = eval_series(f, st);
    let rhs0 = cmat::apply(&weil_s_for(f), &eval_series(f, tau));
    let factor = (tau.ln() * k).exp();
    let scale = max_norm(&lhs).max(1.0);
    let res = lhs.iter().zip(&rhs0).map(|(a, b)| (a - b * factor).norm()).fold(0.0, fmax) / scale;
    let y = tau.im.min(st.im);
    Residual { residual: res, truncation: truncation_estimate(f, y) / scale, tolerance }
}

/// `|F(tau + 1) - rho(T) F(tau)|`.
pub fn t_residual(f: &QSeries, tau: C, tolerance: f64) -> Residual {
    let lhs = eval_series(f, tau + 1.0);
    let rhs = eval_series(f, tau);
    let phases = f.fq.weil_t(f.dual);
    let scale = max_norm(&lhs).max(1.0);
    let res = lhs
        .iter()
        .zip(&rhs)
        .zip(&phases)
        .map(|((a, b), p)| (a - b * cmat::e(to_f64(p))).norm())
        .fold(0.0, fmax)
        / scale;
    Residual { residual: res, truncation: truncation_estimate(f, tau.im) / scale, tolerance }
}

/// S and T residuals at every sample point.
pub fn modularity_residuals(f: &QSeries, cfg: &EvalConfig) -> Vec<Residual> {
    let mut out = vec![];
    for &t in &cfg.taus {
        out.push(s_residual(f, t, cfg.tolerance));
        out.push(t_residual(f, t, cfg.tolerance));
    }
    out
}

/// Unary theta `(2 sqrt(2 pi v))^{-k} sum H_k(sqrt(2 pi v)(lambda, w)) e(Q(lambda) tau) e_lambda`
/// for the lattice `[2N]`, indexed by labels `j mod 2N`.
pub fn eval_unary_theta(n: i64, k: u32, tau: C, terms: i64) -> Vec<C> {
    let two_n = 2 * n;
    let v = tau.im;
    let a = (2.0 * PI * v).sqrt();
    let pref = (2.0 * a).powi(-(k as i32));
    let mut out = vec![C::new(0.0, 0.0); two_n as usize];
    for j in -terms..=terms {
        let x = a * j as f64 / (two_n as f64).sqrt();
        let h = hermite(k, x);
        out[j.rem_euclid(two_n) as usize] += q_pow((j * j) as f64 / (4 * n) as f64, tau) * (h * pref);
    }
    out
}

/// Physicists' Hermite polynomial.
pub fn hermite(k: u32, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if k == 0 {
        return h0;
    }
    for i in 1..k {
        let h2 = 2.0 * x * h1 - 2.0 * i as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Residual of `R_{1/2} Theta_{K,1/2} = -2 pi Theta_{K,5/2}` with `R_k = 2i d/dtau + k/v`.
pub fn check_raising_lemma(n: i64, tau: C, tolerance: f64) -> Residual {
    let terms = 60;
    let h = 1e-5;
    let th = |t: C| eval_unary_theta(n, 0, t, terms);
    let (p, m) = (th(tau + h), th(tau - h));
    let base = th(tau);
    let rhs = eval_unary_theta(n, 2, tau, terms);
    let mut res: f64 = 0.0;
    for i in 0..base.len() {
        let d = (p[i] - m[i]) / (2.0 * h);
        let lhs = C::new(0.0, 2.0) * d + base[i] * (0.5 / tau.im);
        res = fmax(res, (lhs + rhs[i] * (2.0 * PI)).norm());
    }
    Residual { residual: res, truncation: h * h * 10.0 + 1e-16 / h, tolerance }
}

/// Shadow `sign * (1/sqrt M) sum_j j q^{j^2/4M} e_j` of the unary preimages.
pub fn eval_shadow(m: i64, sign: f64, tau: C, terms: i64) -> Vec<C> {
    let two_m = 2 * m;
    let mut out = vec![C::new(0.0, 0.0); two_m as usize];
    for j in -terms..=terms {
        out[j.rem_euclid(two_m) as usize] +=
            q_pow((j * j) as f64 / (4 * m) as f64, tau) * (sign * j as f64 / (m as f64).sqrt());
    }
    out
}

/// Non-holomorphic part `-sign * sum_{j != 0} sgn(j) erfc(|j| sqrt(pi v / M)) q^{-j^2/4M} e_j`.
pub fn eval_nonholomorphic(m: i64, sign: f64, tau: C, terms: i64) -> Vec<C> {
    let two_m = 2 * m;
    let v = tau.im;
    let mut out = vec![C::new(0.0, 0.0); two_m as usize];
    for j in -terms..=terms {
        let x = j.unsigned_abs() as f64 * (PI * v / m as f64).sqrt();
        // terms have size about exp(-x^2/2); beyond x = 10 they vanish in double precision
        if j == 0 || x > 10.0 {
            continue;
        }
        let c = -sign * (j.signum() as f64) * erfc(x);
        out[j.rem_euclid(two_m) as usize] += q_pow(-((j * j) as f64) / (4 * m) as f64, tau) * c;
    }
    out
}

/// Completion test of a weight-1/2 holomorphic part on the lattice `[-2M]`.
#[derive(Debug, Clone)]
pub struct CompletionReport {
    pub modularity: Residual,
    pub xi_recovery: Residual,
}

impl CompletionReport {
    pub fn passes(&self) -> bool {
        self.modularity.passes() && self.xi_recovery.passes()
    }
    pub fn to_json(&self) -> Value {
        json!({"modularity": self.modularity.to_json(), "xi_recovery": self.xi_recovery.to_json(), "pass": self.passes()})
    }
}

/// Attaches the non-holomorphic part fixed by the shadow `sign * (1/sqrt M) sum j q^{j^2/4M} e_j`,
/// then checks S-modularity (`< 1e-6`) and `xi_{1/2} F = shadow` by finite differences (`< 1e-4`).
/// Series components are indexed by the module of `plus`; `label_index[j]` maps `j mod 2M` into it.
pub fn check_completion(plus: &QSeries, m: i64, sign: f64, label_index: &[usize], taus: &[C]) -> CompletionReport {
    let terms = 80;
    let order = plus.fq.order();
    let relabel = |v: Vec<C>| {
        let mut out = vec![C::new(0.0, 0.0); order];
        for (j, z) in v.into_iter().enumerate() {
            out[label_index[j]] += z;
        }
        out
    };
    let full = |t: C| -> Vec<C> {
        let hol = eval_series(plus, t);
        let non = relabel(eval_nonholomorphic(m, sign, t, terms));
        hol.iter().zip(&non).map(|(a, b)| a + b).collect()
    };
    let s = weil_s_for(plus);
    let mut modr: Vec<Residual> = vec![];
    let mut xir: Vec<Residual> = vec![];
    for &tau in taus {
        let st = -tau.inv();
        let lhs = full(st);
        let rhs = cmat::apply(&s, &full(tau));
        let factor = (tau.ln() * 0.5).exp();
        let scale = max_norm(&lhs).max(1.0);
        let res = lhs.iter().zip(&rhs).map(|(a, b)| (a - b * factor).norm()).fold(0.0, fmax) / scale;
        modr.push(Residual { residual: res, truncation: truncation_estimate(plus, tau.im.min(st.im)) / scale, tolerance: 1e-6 });
        // xi_{1/2} F = 2 i v^{1/2} conj(dF/dtaubar), dF/dtaubar = (d_x + i d_y) / 2
        let h = 1e-5;
        let (fx1, fx0) = (full(tau + h), full(tau - h));
        let (fy1, fy0) = (full(tau + C::new(0.0, h)), full(tau - C::new(0.0, h)));
        let shadow = relabel(eval_shadow(m, sign, tau, terms));
        let mut r: f64 = 0.0;
        for i in 0..order {
            let dx = (fx1[i] - fx0[i]) / (2.0 * h);
            let dy = (fy1[i] - fy0[i]) / (2.0 * h);
            let dbar = (dx + C::new(0.0, 1.0) * dy) * 0.5;
            let xi = C::new(0.0, 2.0) * tau.im.sqrt() * dbar.conj();
            r = fmax(r, (xi - shadow[i]).norm());
        }
        xir.push(Residual { residual: r, truncation: 1e-9, tolerance: 1e-4 });
    }
    CompletionReport { modularity: Residual::worst(&modr), xi_recovery: Residual::worst(&xir) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert!((hermite(1, 0.3) - 0.6).abs() < 1e-15);
        assert!((hermite(2, 0.3) - (4.0 * 0.09 - 2.0)).abs() < 1e-15);
        assert!((hermite(3, 0.5) - (8.0 * 0.125 - 12.0 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn raising_lemma_holds() {
        assert!(check_raising_lemma(1, C::new(0.0, 1.0), 1e-5).passes());
        assert!(check_raising_lemma(3, C::new(1.0 / 3.0, 2.0 / 3.0), 1e-5).passes());
    }
}

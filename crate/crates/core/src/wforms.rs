//! Weakly holomorphic forms of negative weight for the dual Weil representation of the Hilbert
//! lattice, built from scalar plus-space forms on `Gamma_0(D)` with character `chi_D`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{HzError, Result};
use crate::fqm::FqModule;
use crate::intmat::{self, IMat};
use crate::lattice::HilbertLattice;
use crate::numeric::{self, Residual, C};
use crate::qseries::{DirectSum, QSeries, Sublattice};
use crate::rat::{fmt_rat, int, kronecker, mod1, rat, Rat};

/// Integer Laurent series `sum c[i] q^(low + i)`, complete through `low + c.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub low: i64,
    pub c: Vec<BigInt>,
}

impl Laurent {
    pub fn one(top: i64) -> Laurent {
        let mut c = vec![BigInt::zero(); (top + 1).max(1) as usize];
        c[0] = BigInt::one();
        Laurent { low: 0, c }
    }

    pub fn top(&self) -> i64 {
        self.low + self.c.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> BigInt {
        if n < self.low || n > self.top() {
            return BigInt::zero();
        }
        self.c[(n - self.low) as usize].clone()
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let low = self.low + o.low;
        let top = (self.top() + o.low).min(o.top() + self.low);
        let len = (top - low + 1).max(0) as usize;
        let mut c = vec![BigInt::zero(); len];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                c[i + j] += a * b;
            }
        }
        Laurent { low, c }
    }

    pub fn pow(&self, e: u32) -> Laurent {
        let top = self.top() - self.low + e as i64 * self.low;
        let mut acc = Laurent::one(top - e as i64 * self.low);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Inverse of a series with leading term `+-q^low`.
    pub fn inverse(&self) -> Result<Laurent> {
        let a0 = &self.c[0];
        if !(a0.is_one() || (-a0).is_one()) {
            return Err(HzError::inv("series inverse needs a unit leading coefficient"));
        }
        let len = self.c.len();
        let mut c = vec![BigInt::zero(); len];
        c[0] = a0.clone();
        for n in 1..len {
            let mut s = BigInt::zero();
            for i in 1..=n {
                s += &self.c[i] * &c[n - i];
            }
            c[n] = -s * a0;
        }
        Ok(Laurent { low: -self.low, c })
    }
}

/// `prod_{n >= 1} (1 - q^(step n))` through `q^top`, from the pentagonal number theorem.
fn euler(top: i64, step: i64) -> Laurent {
    let mut out = Laurent { low: 0, c: vec![BigInt::zero(); (top + 1) as usize] };
    let mut k: i64 = 0;
    loop {
        let mut any = false;
        for kk in if k == 0 { vec![0] } else { vec![k, -k] } {
            let e = step * kk * (3 * kk - 1) / 2;
            if e <= top {
                out.c[e as usize] += if kk.is_even() { 1 } else { -1 };
                any = true;
            }
        }
        if !any {
            break;
        }
        k += 1;
    }
    out
}

/// `prod eta(d tau)^r` through `q^top`; the leading exponent must be integral.
pub fn eta_quotient(parts: &[(i64, i64)], top: i64) -> Result<Laurent> {
    let num: i64 = parts.iter().map(|(d, r)| d * r).sum();
    if num % 24 != 0 {
        return Err(HzError::pre("eta quotient has a fractional leading exponent"));
    }
    let low = num / 24;
    let inner = top - low;
    let mut acc = Laurent::one(inner);
    for &(d, r) in parts {
        let e = euler(inner, d);
        let f = if r >= 0 { e.pow(r as u32) } else { e.inverse()?.pow((-r) as u32) };
        acc = acc.mul(&f);
    }
    acc.low = low;
    Ok(acc)
}

fn sigma(n: i64, k: u32) -> BigInt {
    (1..=n).filter(|d| n % d == 0).map(|d| BigInt::from(d).pow(k)).sum()
}

/// `E_k(d tau)` for `k = 4, 6` through `q^top`.
pub fn eisenstein(k: u32, d: i64, top: i64) -> Laurent {
    let c0: i64 = match k {
        4 => 240,
        6 => -504,
        _ => panic!("only E4 and E6 are needed"),
    };
    let mut out = Laurent::one(top);
    let mut n = 1;
    while n * d <= top {
        out.c[(n * d) as usize] = sigma(n, k - 1) * c0;
        n += 1;
    }
    out
}

/// Scalar form with rational coefficients on `Gamma_0(D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarForm {
    pub weight: i64,
    pub level: i64,
    pub coeffs: BTreeMap<i64, Rat>,
    /// Coefficients are complete through this exponent.
    pub top: i64,
}

impl ScalarForm {
    pub fn pole_order(&self) -> i64 {
        self.coeffs.keys().next().map_or(0, |&n| (-n).max(0))
    }

    pub fn satisfies_plus(&self) -> bool {
        self.coeffs.keys().all(|&n| kronecker(self.level, n) != -1)
    }
}

/// Weakly holomorphic form of weight `2 - k` for the dual representation, with its gate result.
#[derive(Debug, Clone)]
pub struct WeakForm {
    pub series: QSeries,
    pub meta: Value,
    pub gate: Residual,
}

impl WeakForm {
    /// `(coset, -exponent, coefficient)` for the strictly negative exponents.
    pub fn principal_part(&self) -> Vec<(usize, Rat, Rat)> {
        self.series.principal_part().into_iter().map(|(b, n, c)| (b, -n, c)).collect()
    }

    pub fn max_pole(&self) -> Rat {
        self.series.floor().map_or(Rat::zero(), |f| (-f).max(Rat::zero()))
    }

    pub fn k(&self) -> i64 {
        (int(2) - &self.series.weight).to_integer().to_i64().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "series": self.series.to_json(),
            "principal_part": self.principal_part().iter().map(|(b, m, c)| json!([b, fmt_rat(m), fmt_rat(c)])).collect::<Vec<_>>(),
            "meta": self.meta,
        })
    }
}

/// Sample points for the weak-form gate: on the unit circle, so both `tau` and `-1/tau` stay high.
pub fn gate_taus() -> [C; 2] {
    [C::new(0.0, 1.0), C::new(0.28, 0.96)]
}

pub const GATE_TOLERANCE: f64 = 1e-6;

/// Structural checks plus the numeric S-gate.
pub fn validate(series: &QSeries) -> Result<Residual> {
    if !series.dual {
        return Err(HzError::pre("weak form must transform with the dual representation"));
    }
    if series.radicand != 1 {
        return Err(HzError::pre("weak form must have rational coefficients"));
    }
    let w = &series.weight;
    if !w.is_integer() || w.to_integer() > BigInt::from(-2) || w.to_integer().is_odd() {
        return Err(HzError::pre(format!("weak form weight {} is not 2 - k with k >= 4 even", fmt_rat(w))));
    }
    series.check_grading()?;
    for ((n, b), c) in &series.coeffs {
        let nb = series.fq.neg(*b);
        if &series.get(nb, n) != c {
            return Err(HzError::pre(format!("weak form is not symmetric under beta -> -beta at ({b}, {})", fmt_rat(n))));
        }
    }
    let mut rs = vec![];
    for tau in gate_taus() {
        rs.push(numeric::s_residual(series, tau, GATE_TOLERANCE));
    }
    let worst = Residual::worst(&rs);
    if !worst.passes() {
        return Err(HzError::pre(format!(
            "weak form rejected: S-residual {:.3e} with truncation bound {:.3e} exceeds the budget {:.1e}",
            worst.residual, worst.truncation, worst.tolerance
        )));
    }
    Ok(worst)
}

/// Reads a weak form (bare series JSON or `{series, meta}`) and validates it.
pub fn load_weak_form(text: &str, lat: &HilbertLattice) -> Result<WeakForm> {
    let v: Value = serde_json::from_str(text).map_err(|e| HzError::pre(format!("weak form is not JSON: {e}")))?;
    let (sv, meta) = match v.get("series") {
        Some(s) => (s.clone(), v.get("meta").cloned().unwrap_or(Value::Null)),
        None => (v.clone(), Value::Null),
    };
    let series = QSeries::from_json(&sv, lat.fq.clone())?;
    let gate = validate(&series)?;
    Ok(WeakForm { series, meta, gate })
}

/// Vector-valued form whose `beta` component collects the scalar coefficients `c(n)` with
/// `n / D = -Q(beta) mod 1`, doubled on the zero coset.
pub fn vv_from_plus(f: &ScalarForm, lat: &HilbertLattice) -> Result<QSeries> {
    let d = f.level;
    if d != lat.d {
        return Err(HzError::pre("scalar form level differs from the discriminant"));
    }
    if !f.satisfies_plus() {
        return Err(HzError::pre("scalar form violates the plus-space condition"));
    }
    let fq = &lat.fq;
    let ceiling = rat(f.top, d);
    let mut out = QSeries::new(fq.clone(), true, int(f.weight), 1, ceiling);
    for (&n, c) in &f.coeffs {
        let e = rat(n, d);
        let g = mod1(&e);
        for b in 0..fq.order() {
            if mod1(&-fq.q(b)) != g {
                continue;
            }
            let factor = if b == 0 { int(2) } else { int(1) };
            out.add_term(b, e.clone(), c * factor)?;
        }
    }
    Ok(out)
}

fn is_prime(n: i64) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

/// Exponent tuples with `sum e_i w_i = target` and prescribed parity of the first two entries.
fn monomials(weights: &[i64], target: i64, parity: i64) -> Vec<Vec<u32>> {
    fn rec(ws: &[i64], left: i64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if ws.is_empty() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut e = 0;
        while e as i64 * ws[0] <= left {
            cur.push(e);
            rec(&ws[1..], left - e as i64 * ws[0], cur, out);
            cur.pop();
            e += 1;
        }
    }
    let mut out = vec![];
    rec(weights, target, &mut vec![], &mut out);
    out.retain(|m| (m[0] + m[1]) as i64 % 2 == parity);
    out
}

struct Spanning {
    forms: Vec<Laurent>,
    low: i64,
}

/// `H / (G Ghat)^t` for holomorphic monomials `H`, where `G = eta(D tau)^D / eta(tau)` vanishes
/// only at infinity and `Ghat = eta(tau)^D / eta(D tau)` only at zero. Without `full`, `H` is a
/// monomial in `G` and `Ghat` alone.
fn spanning_set(d: i64, k: i64, t: i64, top: i64, full: bool) -> Result<Option<Spanning>> {
    let g_ord = (d * d - 1) / 24;
    let wt_g = (d - 1) / 2;
    let target = 2 - k + 2 * t * wt_g;
    if target < 0 {
        return Ok(None);
    }
    let inner = top + t * g_ord;
    let g = eta_quotient(&[(d, d), (1, -1)], inner + g_ord)?;
    let hat = eta_quotient(&[(1, d), (d, -1)], inner)?;
    let mut unit = g.clone();
    unit.low = 0;
    let inv = unit.mul(&hat).inverse()?.pow(t as u32);
    let mut gens = vec![hat, g];
    let mut weights = vec![wt_g, wt_g];
    if full {
        gens.extend([eisenstein(4, 1, inner), eisenstein(4, d, inner), eisenstein(6, 1, inner), eisenstein(6, d, inner)]);
        weights.extend([4, 4, 6, 6]);
    }
    let mut forms = vec![];
    for m in monomials(&weights, target, 1) {
        let mut h = Laurent::one(inner);
        for (gen, &e) in gens.iter().zip(&m) {
            if e > 0 {
                h = h.mul(&gen.pow(e));
            }
        }
        let mut f = h.mul(&inv);
        f.low -= t * g_ord;
        f.c.truncate((top - f.low + 1) as usize);
        forms.push(f);
    }
    Ok(Some(Spanning { forms, low: -t * g_ord }))
}

/// Reduced basis of plus-space forms of weight `2 - k` on `Gamma_0(D)`, `chi_D`, with poles of
/// scalar order at most `pole`, from the spanning set with divisor power `t`.
fn plus_forms(d: i64, k: i64, t: i64, pole: i64, top: i64, full: bool) -> Result<Vec<ScalarForm>> {
    let Some(span) = spanning_set(d, k, t, top, full)? else { return Ok(vec![]) };
    let exps: Vec<i64> = (span.low..=top).collect();
    let bad: Vec<i64> = exps.iter().copied().filter(|&n| kronecker(d, n) == -1).collect();
    let cols = span.forms.len();
    let cond: Vec<Vec<Rat>> = bad
        .iter()
        .map(|&n| span.forms.iter().map(|f| Rat::from_integer(f.get(n))).collect())
        .collect();
    let null = intmat::nullspace_q(&cond, cols);
    let mut rows: Vec<Vec<Rat>> = null
        .iter()
        .map(|v| {
            exps.iter()
                .map(|&n| span.forms.iter().zip(v).map(|(f, x)| x * Rat::from_integer(f.get(n))).sum())
                .collect()
        })
        .collect();
    let pivots = intmat::rref_q(&mut rows);
    let mut out = vec![];
    for (row, &p) in rows.iter().zip(&pivots) {
        let n0 = exps[p];
        if n0 >= 0 {
            return Err(HzError::inv("plus-space combination without a pole; truncation too short"));
        }
        if -n0 > pole {
            continue;
        }
        let coeffs: BTreeMap<i64, Rat> = exps
            .iter()
            .zip(row)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&n, c)| (n, c.clone()))
            .collect();
        out.push(ScalarForm { weight: 2 - k, level: d, coeffs, top });
    }
    out.sort_by_key(|f| f.pole_order());
    Ok(out)
}

/// Weakly holomorphic plus-space basis with vector-valued pole order at most `max_pole`,
/// transferred to the dual representation and gated.
pub fn plus_space_basis(lat: &HilbertLattice, k: i64, max_pole: &Rat, ceiling: &Rat) -> Result<Vec<WeakForm>> {
    let d = lat.d;
    if !is_prime(d) {
        return Err(HzError::pre(format!("plus-space construction needs an odd prime discriminant, got {d}")));
    }
    if k < 4 || k % 2 != 0 {
        return Err(HzError::pre("k must be even and at least 4"));
    }
    if !max_pole.is_positive() || ceiling < max_pole {
        return Err(HzError::pre("need 0 < max_pole <= ceiling"));
    }
    let pole = (max_pole * int(d)).floor().to_integer().to_i64().unwrap_or(0);
    let top = (ceiling * int(d)).floor().to_integer().to_i64().unwrap_or(0);
    let g_ord = (d * d - 1) / 24;
    let wanted = (1..=pole).rev().find(|&n| kronecker(d, n) != -1).unwrap_or(0);
    let t0 = Integer::div_ceil(&pole, &g_ord).max(1);
    let mut forms = vec![];
    'search: for full in [false, true] {
        for t in t0..t0 + 3 {
            forms = plus_forms(d, k, t, pole, top, full)?;
            if forms.iter().any(|f| f.pole_order() == wanted) {
                break 'search;
            }
        }
    }
    let achieved = forms.iter().map(ScalarForm::pole_order).max().unwrap_or(0);
    if forms.is_empty() || achieved < wanted {
        return Err(HzError::pre(format!(
            "spanning set insufficient for pole order {}; achieved {}",
            fmt_rat(max_pole),
            fmt_rat(&rat(achieved, d))
        )));
    }
    forms
        .iter()
        .map(|f| {
            let series = vv_from_plus(f, lat)?;
            let gate = validate(&series)?;
            let meta = json!({
                "construction": "plus-space",
                "D": d,
                "k": k,
                "scalar_pole": f.pole_order(),
                "max_pole": fmt_rat(max_pole),
                "ceiling": fmt_rat(ceiling),
            });
            Ok(WeakForm { series, meta, gate })
        })
        .collect()
}

/// Gram matrix of `E8` with one end of the long arm stretched to norm `2 + (D - 1)/2`: positive
/// definite of determinant `D` for `D = 1 mod 4`.
pub fn stretched_e8(d: i64) -> Result<IMat> {
    if d % 4 != 1 || d < 5 {
        return Err(HzError::pre("stretched E8 needs D = 1 mod 4"));
    }
    let mut g = vec![vec![0i128; 8]; 8];
    for i in 0..8 {
        g[i][i] = 2;
    }
    // chain 0-1-2-3-4-5-6 with node 7 on node 4
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)];
    for (a, b) in edges {
        g[a][b] = -1;
        g[b][a] = -1;
    }
    g[0][0] += ((d - 1) / 2) as i128;
    Ok(g)
}

/// Integer vectors `y` with `y^T a y <= bound` (Fincke-Pohst on a positive definite form).
fn short_vectors(a: &[Vec<f64>], bound: f64) -> Vec<Vec<i64>> {
    let n = a.len();
    // a = sum_i q[i][i] (y_i + sum_{j>i} q[i][j] y_j)^2
    let mut q = a.to_vec();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    let mut out = vec![];
    let mut y = vec![0i64; n];
    fn rec(q: &[Vec<f64>], i: usize, left: f64, y: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let n = q.len();
        let c: f64 = (i + 1..n).map(|j| q[i][j] * y[j] as f64).sum();
        let r = (left.max(0.0) / q[i][i]).sqrt();
        let lo = (-c - r - 1e-9).ceil() as i64;
        let hi = (-c + r + 1e-9).floor() as i64;
        for v in lo..=hi {
            y[i] = v;
            let t = v as f64 + c;
            let rest = left - q[i][i] * t * t;
            if rest < -1e-9 {
                continue;
            }
            if i == 0 {
                out.push(y.clone());
            } else {
                rec(q, i - 1, rest, y, out);
            }
        }
        y[i] = 0;
    }
    rec(&q, n - 1, bound, &mut y, &mut out);
    out
}

/// Theta series `sum_{lambda in M'} e(Q(lambda) tau) e_lambda` of a positive definite even lattice.
pub fn lattice_theta(fq: &Arc<FqModule>, ceiling: &Rat) -> Result<QSeries> {
    let g = intmat::to_q(&fq.gram);
    let inv = intmat::inverse_q(&g).ok_or_else(|| HzError::pre("singular lattice"))?;
    let a: Vec<Vec<f64>> = inv.iter().map(|r| r.iter().map(crate::rat::to_f64).collect()).collect();
    let rank = fq.gram.len() as i64;
    let mut out = QSeries::new(fq.clone(), false, rat(rank, 2), 1, ceiling.clone());
    let bound = 2.0 * crate::rat::to_f64(ceiling) + 1e-6;
    for y in short_vectors(&a, bound) {
        let yq: Vec<Rat> = y.iter().map(|&v| int(v)).collect();
        let lam = intmat::mat_vec_q(&inv, &yq);
        let qv = intmat::bilinear_q(&inv, &yq, &yq) / int(2);
        if &qv <= ceiling {
            let b = fq.element_of(&lam)?;
            out.add_term(b, qv, int(1))?;
        }
    }
    Ok(out)
}

/// Holomorphic weight-4 forms for the representation of the Hilbert lattice built from theta
/// series: the stretched `E8` theta, and the same lattice rebuilt from an orthogonal split
/// `K1 + K2` as the arrowed-up tensor `[Theta_K1, Theta_K2]_0`.
pub fn honest_thetas(lat: &HilbertLattice, ceiling: &Rat) -> Result<Vec<(String, QSeries)>> {
    let gram = stretched_e8(lat.d)?;
    let m = Arc::new(FqModule::from_gram(&gram, (8, 0))?);
    let map = m
        .isomorphism_to(&lat.fq)
        .ok_or_else(|| HzError::pre("stretched E8 discriminant form is not isomorphic to L'/L"))?;
    let full = lattice_theta(&m, ceiling)?;
    let mut out = vec![("theta_E8_stretched".to_string(), full.transport(&map, lat.fq.clone())?)];

    let k1: Vec<Vec<i128>> = (0..4).map(|i| (0..8).map(|j| i128::from(i == j)).collect()).collect();
    let rows: Vec<Vec<i128>> = k1
        .iter()
        .map(|v| (0..8).map(|j| (0..8).map(|i| v[i] * gram[i][j]).sum()).collect())
        .collect();
    let k2 = intmat::kernel(&rows);
    let sub_gram = |b: &[Vec<i128>]| -> IMat {
        b.iter()
            .map(|x| b.iter().map(|y| (0..8).map(|i| (0..8).map(|j| x[i] * gram[i][j] * y[j]).sum::<i128>()).sum()).collect())
            .collect()
    };
    let f1 = Arc::new(FqModule::from_gram(&sub_gram(&k1), (4, 0))?);
    let f2 = Arc::new(FqModule::from_gram(&sub_gram(&k2), (4, 0))?);
    let sum = DirectSum::new(f1.clone(), f2.clone())?;
    let mut basis = k1.clone();
    basis.extend(k2.iter().cloned());
    let sub = Sublattice::new(sum.fq.clone(), m.clone(), &basis)?;
    let t1 = lattice_theta(&f1, ceiling)?;
    let t2 = lattice_theta(&f2, ceiling)?;
    let split = sub.arrow_up(&t1.rc_bracket(&t2, 0, &sum)?)?;
    out.push(("theta_split_bracket".to_string(), split.transport(&map, lat.fq.clone())?));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    fn laurent(low: i64, c: &[i64]) -> Laurent {
        Laurent { low, c: c.iter().map(|&x| BigInt::from(x)).collect() }
    }

    #[test]
    fn euler_and_eta() {
        let p = euler(10, 1);
        assert_eq!(p, laurent(0, &[1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0]));
        // Delta = q - 24 q^2 + 252 q^3 - 1472 q^4 + 4830 q^5
        let delta = eta_quotient(&[(1, 24)], 5).unwrap();
        assert_eq!(delta, laurent(1, &[1, -24, 252, -1472, 4830]));
        // eta(5 tau)^5 / eta(tau) = sum sigma-like q^n: q + q^2 + 2q^3 + 3q^4 + 5q^5
        let b = eta_quotient(&[(5, 5), (1, -1)], 5).unwrap();
        assert_eq!(b, laurent(1, &[1, 1, 2, 3, 5]));
    }

    #[test]
    fn inverse_roundtrip() {
        let p = euler(12, 1);
        let one = p.mul(&p.inverse().unwrap());
        assert_eq!(one, Laurent::one(12));
    }

    #[test]
    fn monomial_weights() {
        let ms = monomials(&[2, 2, 4], 4, 0);
        assert_eq!(ms.len(), 4);
        assert!(ms.iter().all(|m| 2 * m[0] + 2 * m[1] + 4 * m[2] == 4));
    }

    #[test]
    fn d5_basis_has_one_form_per_admissible_pole() {
        let lat = build_lattice(5).unwrap();
        let basis = plus_space_basis(&lat, 4, &int(1), &int(10)).unwrap();
        // scalar poles 1, 4, 5 are the n <= 5 with chi_5(n) != -1
        let poles: Vec<Rat> = basis.iter().map(WeakForm::max_pole).collect();
        assert_eq!(poles, vec![rat(1, 5), rat(4, 5), int(1)]);
        for f in &basis {
            assert!(f.gate.passes());
            assert!(f.series.coeffs.values().all(|c| c.denom().is_one()));
        }
    }

    #[test]
    fn weight_minus_two_coefficients() {
        // unique form 1/B - c with q^{-1} pole: 1/B = q^{-1} - 1 + 0 q + ... then the plus condition
        // fixes the rest; the scalar coefficient at q^-1 is 1 and the vv component is on +-beta
        let lat = build_lattice(5).unwrap();
        let f = &plus_space_basis(&lat, 4, &rat(1, 5), &int(8)).unwrap()[0];
        let pp = f.principal_part();
        assert_eq!(pp.len(), 2);
        for (b, m, c) in pp {
            assert_ne!(b, 0);
            assert_eq!(m, rat(1, 5));
            assert_eq!(c, int(1));
        }
    }

    #[test]
    fn corrupted_form_is_rejected() {
        let lat = build_lattice(5).unwrap();
        let f = &plus_space_basis(&lat, 4, &rat(1, 5), &int(10)).unwrap()[0];
        let text = serde_json::to_string(&f.to_json()).unwrap();
        let back = load_weak_form(&text, &lat).unwrap();
        assert!(back.series.agrees_with(&f.series));
        let mut bad = f.series.clone();
        let key = bad.coeffs.keys().nth(3).unwrap().clone();
        let nb = bad.fq.neg(key.1);
        for b in [key.1, nb] {
            let v = bad.get(b, &key.0) + int(1);
            bad.coeffs.insert((key.0.clone(), b), v);
        }
        assert!(validate(&bad).is_err());
    }

    #[test]
    fn stretched_e8_has_det_d() {
        for d in [5, 13, 17] {
            assert_eq!(intmat::det(&stretched_e8(d).unwrap()), d as i128);
        }
    }

    #[test]
    fn honest_thetas_agree_and_are_modular() {
        let lat = build_lattice(5).unwrap();
        let th = honest_thetas(&lat, &int(4)).unwrap();
        assert!(th[0].1.agrees_with(&th[1].1));
        assert_eq!(th[0].1.get(0, &int(0)), int(1));
        for tau in gate_taus() {
            let r = numeric::s_residual(&th[0].1, tau, 1e-6);
            assert!(r.passes(), "{r:?}");
        }
    }

    #[test]
    fn residue_pairing_vanishes() {
        let lat = build_lattice(5).unwrap();
        let basis = plus_space_basis(&lat, 4, &int(1), &int(8)).unwrap();
        let th = honest_thetas(&lat, &int(2)).unwrap();
        for f in &basis {
            for (_, g) in &th {
                assert!(f.series.ct_pair(g).unwrap().is_zero());
            }
        }
    }
}

//! Unary theta series, the thetas of the negative line `N`, the view of a `K`-theta as a
//! form for `P`, and rational holomorphic parts of weight-1/2 preimages.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::cusp::{IsotropicLine, SublatticeSplit};
use crate::error::{HzError, Result};
use crate::fqm::FqModule;
use crate::intmat;
use crate::numeric::{self, C};
use crate::qseries::{QSeries, QuadScalar};
use crate::rat::{int, parse_rat, rat, Rat};

const BUILTIN_TABLE: &str = include_str!("../data/preimages.json");

/// Module of the positive line `[2N]`.
pub fn k_module(n: i64) -> Result<Arc<FqModule>> {
    if n < 1 {
        return Err(HzError::pre("unary lattice needs N >= 1"));
    }
    Ok(Arc::new(FqModule::from_gram(&vec![vec![2 * n as i128]], (1, 0))?))
}

/// Module of the negative line `[-2M]`.
pub fn n_module(m: i64) -> Result<Arc<FqModule>> {
    if m < 1 {
        return Err(HzError::pre("unary lattice needs M >= 1"));
    }
    Ok(Arc::new(FqModule::from_gram(&vec![vec![-2 * m as i128]], (0, 1))?))
}

/// Index of the class of `j * generator / (2n)` in a rank-one module.
pub fn label_index(fq: &FqModule, j: i64) -> usize {
    let two_n = fq.gram[0][0].unsigned_abs() as i64;
    fq.element_of(&[rat(j.rem_euclid(two_n), two_n)]).expect("unary labels lie in the dual")
}

fn unary_n(fq: &FqModule) -> Result<i64> {
    if fq.gram.len() != 1 {
        return Err(HzError::pre("expected a rank-one lattice"));
    }
    Ok((fq.gram[0][0].abs() / 2) as i64)
}

/// `sum_j q^{j^2/4N} e_j` (weight 1/2) or `(1/sqrt(2N)) sum_j j q^{j^2/4N} e_j` (weight 3/2)
/// for `K = [2N]`.
pub fn unary_theta(fq: &Arc<FqModule>, hermite_index: u32, ceiling: &Rat) -> Result<QSeries> {
    if hermite_index >= 2 {
        return Err(HzError::pre("non-holomorphic; use numeric module"));
    }
    let n = unary_n(fq)?;
    if fq.gram[0][0] <= 0 {
        return Err(HzError::pre("unary_theta needs a positive definite line"));
    }
    let weight = int(hermite_index as i64) + rat(1, 2);
    let scale = if hermite_index == 0 { QuadScalar::rational(int(1)) } else { QuadScalar::new(rat(1, 2 * n), (2 * n) as u64) };
    let mut out = QSeries::new(fq.clone(), false, weight, scale.radicand, ceiling.clone());
    let jmax = ((ceiling.ceil().to_integer().to_i64().unwrap_or(0).max(0) * 4 * n) as f64).sqrt() as i64 + 1;
    for j in -jmax..=jmax {
        let e = rat(j * j, 4 * n);
        let c = if hermite_index == 0 { int(1) } else { int(j) * &scale.rat };
        out.add_term(label_index(fq, j), e, c)?;
    }
    Ok(out)
}

/// `Theta_{N^-} = sum_j q^{j^2/4M} e_j`, a dual series on `N = [-2M]`.
pub fn theta_n_negative(fq: &Arc<FqModule>, ceiling: &Rat) -> Result<QSeries> {
    let m = unary_n(fq)?;
    let mut out = QSeries::new(fq.clone(), true, rat(1, 2), 1, ceiling.clone());
    let jmax = ((ceiling.ceil().to_integer().to_i64().unwrap_or(0).max(0) * 4 * m) as f64).sqrt() as i64 + 1;
    for j in -jmax..=jmax {
        out.add_term(label_index(fq, j), rat(j * j, 4 * m), int(1))?;
    }
    Ok(out)
}

/// `+1` when `X` is a positive multiple of `eta`, `-1` for a negative multiple.
pub fn orientation(eta: &[Rat], x: &[Rat]) -> Result<i32> {
    let i = eta.iter().position(|c| !c.is_zero()).ok_or_else(|| HzError::pre("eta is zero"))?;
    let c = &x[i] / &eta[i];
    if c.is_zero() || eta.iter().zip(x).any(|(e, v)| &(e * &c) != v) {
        return Err(HzError::pre("X is not proportional to eta"));
    }
    Ok(if c.is_positive() { 1 } else { -1 })
}

/// `Theta*_{N^-} = sum (lambda, X)/sqrt|Q(X)| q^{-Q(lambda)} e_lambda`
/// `= -orientation * (1/sqrt M) sum_j j q^{j^2/4M} e_j`, a dual weight-3/2 series on `N`.
pub fn theta_n_star(fq: &Arc<FqModule>, orientation: i32, ceiling: &Rat) -> Result<QSeries> {
    let m = unary_n(fq)?;
    let scale = QuadScalar::new(rat(-(orientation as i64), m), m as u64);
    let mut out = QSeries::new(fq.clone(), true, rat(3, 2), scale.radicand, ceiling.clone());
    let jmax = ((ceiling.ceil().to_integer().to_i64().unwrap_or(0).max(0) * 4 * m) as f64).sqrt() as i64 + 1;
    for j in -jmax..=jmax {
        out.add_term(label_index(fq, j), rat(j * j, 4 * m), int(j) * &scale.rat)?;
    }
    Ok(out)
}

fn gcd_slice(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |a, &b| a.gcd(&b))
}

fn bezout(r: &[i128]) -> Vec<i128> {
    let mut z = vec![0i128; r.len()];
    let mut g = 0i128;
    for i in 0..r.len() {
        let e = g.extended_gcd(&r[i]);
        for zj in z.iter_mut().take(i) {
            *zj *= e.x;
        }
        z[i] = e.y;
        g = e.gcd;
    }
    if g < 0 {
        for v in z.iter_mut() {
            *v = -*v;
        }
    }
    z
}

/// For each class of `P'/P`, the label `j mod 2N_K` it reads from, or `None`.
///
/// A class contributes when it has a representative `lambda` with `(lambda, ell) = 0`;
/// the label is then `(lambda, kappa)`, well defined modulo `2N_K`.
pub fn view_labels(split: &SublatticeSplit, line: &IsotropicLine) -> Result<Vec<Option<i64>>> {
    let gp = intmat::to_q(&split.p_gram);
    let gl: Vec<i128> = (0..3).map(|i| (0..3).map(|j| split.p_gram[i][j] * line.ell_p[j]).sum()).collect();
    let lev = gcd_slice(&gl);
    let w = bezout(&gl);
    let kappa_p = p_coords(split, &line.kappa)?;
    let gk = intmat::mat_vec_q(&gp, &kappa_p.iter().map(|&c| int(c as i64)).collect::<Vec<_>>());
    let two_n = 2 * line.n_k;
    (0..split.p_fq.order())
        .map(|g| {
            let r = split.p_fq.representative(g);
            let rl: Rat = r.iter().zip(&gl).map(|(a, &b)| a * int(b as i64)).sum();
            let t = &rl / int(lev as i64);
            if !t.is_integer() {
                return Ok(None);
            }
            let t = t.to_integer().to_i64().unwrap();
            let lam: Vec<Rat> = (0..3).map(|i| &r[i] - int((t as i128 * w[i]) as i64)).collect();
            let j: Rat = lam.iter().zip(&gk).map(|(a, b)| a * b).sum();
            if !j.is_integer() {
                return Err(HzError::inv("pairing of a dual vector with kappa is not integral"));
            }
            Ok(Some(j.to_integer().to_i64().unwrap().rem_euclid(two_n)))
        })
        .collect()
}

fn p_coords(split: &SublatticeSplit, v: &[i128]) -> Result<Vec<i128>> {
    let b = intmat::to_q(&split.p_basis);
    let bbt: Vec<Vec<Rat>> = (0..3).map(|i| (0..3).map(|j| (0..4).map(|a| &b[i][a] * &b[j][a]).sum()).collect()).collect();
    let bv: Vec<Rat> = (0..3).map(|i| (0..4).map(|a| &b[i][a] * int(v[a] as i64)).sum()).collect();
    let inv = intmat::inverse_q(&bbt).ok_or_else(|| HzError::inv("P basis is dependent"))?;
    let z = intmat::mat_vec_q(&inv, &bv);
    if split.p_to_l(&z.iter().map(|c| c.to_integer().to_i128().unwrap()).collect::<Vec<_>>()) != v {
        return Err(HzError::inv("vector is not in P"));
    }
    Ok(z.iter().map(|c| c.to_integer().to_i128().unwrap()).collect())
}

/// Sample points used by the modularity gates.
pub fn gate_points() -> [C; 2] {
    [C::new(0.0, 1.0), C::new(0.5, 0.5)]
}

/// The `K`-theta regarded as a form for `P`, accepted only if it passes the S/T residual gate.
pub fn view_in_rho_p(theta_k: &QSeries, split: &SublatticeSplit, line: &IsotropicLine) -> Result<QSeries> {
    if unary_n(&theta_k.fq)? != line.n_k || theta_k.dual {
        return Err(HzError::pre("theta series does not belong to K of this line"));
    }
    let labels = view_labels(split, line)?;
    let mut out = QSeries::new(split.p_fq.clone(), false, theta_k.weight.clone(), theta_k.radicand, theta_k.ceiling.clone());
    for (g, lab) in labels.iter().enumerate() {
        if let Some(j) = lab {
            let src = label_index(&theta_k.fq, *j);
            for ((n, b), c) in &theta_k.coeffs {
                if *b == src {
                    out.add_term(g, n.clone(), c.clone()).map_err(|_| HzError::inv("rhoP-view rejected: grading mismatch"))?;
                }
            }
        }
    }
    let gate = Arc::new(out.truncate(&out.ceiling.clone().min(int(6))));
    // points on the unit circle keep both tau and -1/tau high, so short expansions still certify
    for t in [C::new(0.0, 1.0), C::new(0.28, 0.96)] {
        let r = [numeric::s_residual(&gate, t, 1e-8), numeric::t_residual(&gate, t, 1e-8)];
        if r.iter().any(|x| !x.passes()) {
            return Err(HzError::inv(format!("rhoP-view rejected: residual {:.2e}", r[0].residual.max(r[1].residual))));
        }
    }
    Ok(out)
}

/// One preimage table entry: holomorphic part whose completion has shadow
/// `(1/sqrt M) sum_j j q^{j^2/4M} e_j`.
#[derive(Debug, Clone)]
pub struct PreimageEntry {
    pub m: i64,
    pub ceiling: Rat,
    pub coeffs: Vec<(i64, Rat, Rat)>,
    pub provenance: String,
}

#[derive(Debug, Clone)]
pub struct PreimageTable {
    pub entries: BTreeMap<i64, PreimageEntry>,
    pub digest: String,
}

impl PreimageTable {
    pub fn parse(text: &str) -> Result<PreimageTable> {
        let v: Value = serde_json::from_str(text).map_err(|e| HzError::pre(format!("preimage table: {e}")))?;
        let rows: Vec<Value> = match v {
            Value::Array(a) => a,
            o @ Value::Object(_) => vec![o],
            _ => return Err(HzError::pre("preimage table must be an object or a list")),
        };
        let bad = |m: &str| HzError::pre(format!("preimage table: {m}"));
        let mut entries = BTreeMap::new();
        for r in rows {
            let m = r.get("M").and_then(Value::as_i64).ok_or_else(|| bad("M"))?;
            let ceiling = parse_rat(r.get("ceiling").and_then(Value::as_str).ok_or_else(|| bad("ceiling"))?)?;
            let mut coeffs = vec![];
            for c in r.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("coeffs"))? {
                let c = c.as_array().ok_or_else(|| bad("row"))?;
                if c.len() != 3 {
                    return Err(bad("row"));
                }
                let j = c[0].as_i64().ok_or_else(|| bad("label"))?;
                let e = parse_rat(c[1].as_str().ok_or_else(|| bad("exponent"))?)?;
                let x = parse_rat(c[2].as_str().ok_or_else(|| bad("coefficient"))?)?;
                coeffs.push((j, e, x));
            }
            let provenance = r.get("provenance").and_then(Value::as_str).unwrap_or("").to_string();
            entries.insert(m, PreimageEntry { m, ceiling, coeffs, provenance });
        }
        Ok(PreimageTable { entries, digest: crate::qseries::sha256_hex(text.as_bytes()) })
    }

    pub fn builtin() -> PreimageTable {
        PreimageTable::parse(BUILTIN_TABLE).expect("shipped preimage table parses")
    }

    pub fn from_file(path: &std::path::Path) -> Result<PreimageTable> {
        let text = std::fs::read_to_string(path).map_err(|e| HzError::pre(format!("{}: {e}", path.display())))?;
        PreimageTable::parse(&text)
    }

    /// Table entry as a series on `fq = [-2M]`, scaled by `sign`.
    pub fn series(&self, fq: &Arc<FqModule>, sign: i64, ceiling: &Rat) -> Result<QSeries> {
        let m = unary_n(fq)?;
        let entry = self.entries.get(&m).ok_or_else(|| HzError::pre(format!("preimage table miss for M = {m}")))?;
        let c = ceiling.clone().min(entry.ceiling.clone());
        let mut out = QSeries::new(fq.clone(), false, rat(1, 2), 1, c);
        for (j, e, x) in &entry.coeffs {
            out.add_term(label_index(fq, *j), e.clone(), x * int(sign))?;
        }
        Ok(out)
    }
}

/// Holomorphic part of a preimage of `Theta*_{N^-}` for `X` a positive multiple of `eta`
/// (shadow `-(1/sqrt M) sum_j j q^{j^2/4M} e_j`): the negated table entry; zero for `M = 1`.
pub fn xi_preimage_plus(fq: &Arc<FqModule>, ceiling: &Rat, user: Option<&PreimageTable>) -> Result<QSeries> {
    let m = unary_n(fq)?;
    if m == 1 {
        return Ok(QSeries::new(fq.clone(), false, rat(1, 2), 1, ceiling.clone()));
    }
    if let Some(t) = user {
        if t.entries.contains_key(&m) {
            return t.series(fq, -1, ceiling);
        }
    }
    let builtin = PreimageTable::builtin();
    if builtin.entries.contains_key(&m) {
        return builtin.series(fq, -1, ceiling);
    }
    Err(HzError::pre(format!("preimage table miss: no entry for M = {m} and no user file")))
}

/// Completion test for a preimage returned by `xi_preimage_plus`.
pub fn certify_preimage(plus: &QSeries, taus: &[C]) -> Result<numeric::CompletionReport> {
    let m = unary_n(&plus.fq)?;
    let labels: Vec<usize> = (0..2 * m).map(|j| label_index(&plus.fq, j)).collect();
    Ok(numeric::check_completion(plus, m, -1.0, &labels, taus))
}

/// Truncated series in `q` and `zeta`: `rows[n - low][r]`.
#[derive(Debug, Clone)]
struct Jacobi {
    low: i64,
    top: i64,
    rows: Vec<BTreeMap<i64, i128>>,
}

impl Jacobi {
    fn new(low: i64, top: i64) -> Jacobi {
        Jacobi { low, top, rows: vec![BTreeMap::new(); (top - low + 1).max(0) as usize] }
    }

    fn one(top: i64) -> Jacobi {
        let mut j = Jacobi::new(0, top);
        j.add(0, 0, 1);
        j
    }

    fn add(&mut self, n: i64, r: i64, c: i128) {
        if n < self.low || n > self.top || c == 0 {
            return;
        }
        let e = self.rows[(n - self.low) as usize].entry(r).or_insert(0);
        *e += c;
        if *e == 0 {
            self.rows[(n - self.low) as usize].remove(&r);
        }
    }

    fn mul(&self, o: &Jacobi) -> Result<Jacobi> {
        let low = self.low + o.low;
        let top = (self.top + o.low).min(o.top + self.low);
        let mut out = Jacobi::new(low, top);
        for (i, ra) in self.rows.iter().enumerate() {
            let na = self.low + i as i64;
            for (k, rb) in o.rows.iter().enumerate() {
                let nb = o.low + k as i64;
                if na + nb > top {
                    break;
                }
                for (&r1, &c1) in ra {
                    for (&r2, &c2) in rb {
                        let c = c1.checked_mul(c2).ok_or_else(|| HzError::inv("Jacobi coefficient overflow"))?;
                        out.add(na + nb, r1 + r2, c);
                    }
                }
            }
        }
        Ok(out)
    }

    fn pow(&self, e: u32, top: i64) -> Result<Jacobi> {
        let mut acc = Jacobi::one(top);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

fn sigma(n: i64, k: u32) -> i128 {
    (1..=n).filter(|d| n % d == 0).map(|d| (d as i128).pow(k)).sum()
}

fn eisenstein(top: i64, k: u32, c: i128) -> Jacobi {
    let mut j = Jacobi::one(top);
    for n in 1..=top {
        j.add(n, 0, c * sigma(n, k - 1));
    }
    j
}

/// `prod_{n >= 1} (1 - q^n zeta^r)^e`, expanded to `q^top`.
fn product(top: i64, r: i64, e: i32) -> Result<Jacobi> {
    let mut acc = Jacobi::one(top);
    for n in 1..=top {
        let mut f = Jacobi::one(top);
        if e > 0 {
            f.add(n, r, -1);
            acc = acc.mul(&f.pow(e as u32, top)?)?;
        } else {
            // 1 / (1 - x) = sum x^i
            let mut g = Jacobi::one(top);
            let mut i = 1;
            while n * i <= top {
                g.add(n * i, r * i, 1);
                i += 1;
            }
            acc = acc.mul(&g.pow((-e) as u32, top)?)?;
        }
    }
    Ok(acc)
}

/// Weakly holomorphic weight-1/2 form on `[-2M]` with rational coefficients, from the theta
/// decomposition of `phi_{-1,2} phi_{-2,1}^{M-2} E4^a E6^b / Delta^z` (index `M`, weight 1).
/// Used to shift preimages by an exact, non-trivial amount.
pub fn shift_form(fq: &Arc<FqModule>, ceiling: &Rat) -> Result<QSeries> {
    let m = unary_n(fq)?;
    if m < 2 {
        return Err(HzError::pre("shift forms need M >= 2"));
    }
    let z: i64 = if m == 2 { 1 } else { 0 };
    let wg = 2 * m - 2 + 12 * z;
    let (a, b) = (0..=wg / 4).rev().find_map(|a| {
        let rest = wg - 4 * a;
        (rest % 6 == 0).then_some((a, rest / 6))
    }).ok_or_else(|| HzError::inv("no Eisenstein monomial of the needed weight"))?;
    let c_top = ceiling.floor().to_integer().to_i64().unwrap_or(0).max(0);
    let top = c_top + m / 4 + 2 + z;
    let mut p21 = Jacobi::new(0, top);
    p21.add(0, 1, 1);
    p21.add(0, 0, -2);
    p21.add(0, -1, 1);
    let p21 = p21
        .mul(&product(top, 1, 2)?)?
        .mul(&product(top, -1, 2)?)?
        .mul(&product(top, 0, -4)?)?;
    let mut p12 = Jacobi::new(0, top);
    p12.add(0, 1, 1);
    p12.add(0, -1, -1);
    let p12 = p12.mul(&product(top, 2, 1)?)?.mul(&product(top, -2, 1)?)?.mul(&product(top, 0, -2)?)?;
    let mut phi = p12.mul(&p21.pow((m - 2) as u32, top)?)?;
    phi = phi.mul(&eisenstein(top, 4, 240).pow(a as u32, top)?)?;
    phi = phi.mul(&eisenstein(top, 6, -504).pow(b as u32, top)?)?;
    if z == 1 {
        // 1/Delta = q^{-1} prod (1 - q^n)^{-24}
        let mut inv = product(top, 0, -24)?;
        inv.low = -1;
        inv.top = top - 1;
        inv.rows.truncate((inv.top - inv.low + 1) as usize);
        phi = phi.mul(&inv)?;
    }
    let mut out = QSeries::new(fq.clone(), false, rat(1, 2), 1, ceiling.clone());
    for (i, row) in phi.rows.iter().enumerate() {
        let n = phi.low + i as i64;
        for (&r, &c) in row {
            // representatives r in (-M, M]
            if r > -m && r <= m {
                let e = int(n) - rat(r * r, 4 * m);
                out.add_term(label_index(fq, r), e, Rat::from_integer((c as i64).into()))?;
            }
        }
    }
    let floor_top = out.ceiling.clone().min(int(phi.top) - rat(m, 4));
    Ok(out.truncate(&floor_top))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusp::{isotropic_lines, split_sublattices};
    use crate::lattice::build_lattice;

    #[test]
    fn weight_three_halves_vanishes_for_n_one() {
        let fq = k_module(1).unwrap();
        assert!(unary_theta(&fq, 1, &int(10)).unwrap().is_zero());
    }

    #[test]
    fn unary_coefficients() {
        let fq = k_module(3).unwrap();
        let t = unary_theta(&fq, 1, &int(5)).unwrap();
        let c = t.coefficient(label_index(&fq, 1), &rat(1, 12));
        assert_eq!(c, QuadScalar::new(rat(1, 6), 6));
        let c5 = t.coefficient(label_index(&fq, 5), &rat(25, 12));
        assert_eq!(c5, QuadScalar::new(rat(5, 6), 6));
        let t1 = unary_theta(&k_module(1).unwrap(), 0, &int(3)).unwrap();
        let f1 = k_module(1).unwrap();
        assert_eq!(t1.get(label_index(&f1, 1), &rat(1, 4)), int(2));
        assert_eq!(t1.get(label_index(&f1, 0), &int(0)), int(1));
        assert!(unary_theta(&fq, 2, &int(5)).is_err());
    }

    #[test]
    fn thetas_are_modular() {
        for n in 1..=6 {
            for w in 0..=1 {
                let t = unary_theta(&k_module(n).unwrap(), w, &int(8)).unwrap();
                for tau in gate_points() {
                    assert!(numeric::s_residual(&t, tau, 1e-8).passes(), "N={n} w={w}");
                }
            }
            let nf = n_module(n).unwrap();
            for s in [theta_n_negative(&nf, &int(8)).unwrap(), theta_n_star(&nf, 1, &int(8)).unwrap()] {
                for tau in gate_points() {
                    assert!(numeric::s_residual(&s, tau, 1e-8).passes(), "M={n}");
                }
            }
        }
    }

    #[test]
    fn theta_star_sign() {
        let nf = n_module(3).unwrap();
        let s = theta_n_star(&nf, 1, &int(4)).unwrap();
        assert_eq!(s.coefficient(label_index(&nf, 1), &rat(1, 12)), QuadScalar::new(rat(-1, 3), 3));
        let s2 = theta_n_star(&nf, -1, &int(4)).unwrap();
        assert!(s.add(&s2).unwrap().is_zero());
        assert!(theta_n_star(&n_module(1).unwrap(), 1, &int(4)).unwrap().is_zero());
        assert!(orientation(&[int(1), int(2)], &[int(1), int(3)]).is_err());
    }

    #[test]
    fn view_passes_gate() {
        let lat = build_lattice(5).unwrap();
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let s = split_sublattices(&lat, &x).unwrap();
        let rep = isotropic_lines(&lat, &s, 2).unwrap();
        for l in &rep.lines {
            let kf = k_module(l.n_k).unwrap();
            for w in 0..=1 {
                let th = unary_theta(&kf, w, &int(8)).unwrap();
                let v = view_in_rho_p(&th, &s, l).unwrap();
                assert!(!v.is_zero());
                v.check_grading().unwrap();
            }
        }
    }

    #[test]
    fn preimages_certify() {
        for m in [2, 3, 5] {
            let nf = n_module(m).unwrap();
            let p = xi_preimage_plus(&nf, &int(13), None).unwrap();
            let rep = certify_preimage(&p, &gate_points()).unwrap();
            assert!(rep.passes(), "M={m}: {:?}", rep);
        }
        let nf = n_module(1).unwrap();
        assert!(xi_preimage_plus(&nf, &int(5), None).unwrap().is_zero());
        assert!(xi_preimage_plus(&n_module(11).unwrap(), &int(5), None).is_err());
    }

    #[test]
    fn corrupted_preimage_fails() {
        let nf = n_module(2).unwrap();
        let mut p = xi_preimage_plus(&nf, &int(13), None).unwrap();
        let key = p.coeffs.keys().nth(3).unwrap().clone();
        *p.coeffs.get_mut(&key).unwrap() += int(1);
        let rep = certify_preimage(&p, &gate_points()).unwrap();
        assert!(!rep.passes(), "{rep:?} {key:?}");
    }

    #[test]
    fn shift_forms_are_modular() {
        let mut bad = vec![];
        for m in 2..=5 {
            let nf = n_module(m).unwrap();
            let h = shift_form(&nf, &int(14)).unwrap();
            assert!(!h.is_zero());
            // the pole makes coefficients grow fast, so stay high in the upper half-plane
            for tau in [C::new(0.0, 1.0), C::new(0.2, 1.0)] {
                let r = numeric::s_residual(&h, tau, 1e-8);
                if !r.passes() {
                    bad.push(format!("M={m} tau={tau}: {r:?}"));
                }
            }
        }
        assert!(bad.is_empty(), "{bad:#?}");
    }
}

//! Coset-graded q-expansions with exact coefficients.
//!
//! A series for a module `G` is `sum c(beta, n) q^n e_beta`. Non-dual series carry exponents
//! `n = Q(beta) mod 1`, dual ones `n = -Q(beta) mod 1`. All coefficients share one radicand `s`,
//! so a stored rational `c` means `c * sqrt(s)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{HzError, Result};
use crate::fqm::FqModule;
use crate::rat::{fmt_rat, int, is_integer, mod1, parse_rat, square_split, to_f64, Rat};

/// `rat * sqrt(radicand)` with a squarefree radicand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadScalar {
    pub rat: Rat,
    pub radicand: u64,
}

impl QuadScalar {
    pub fn new(rat: Rat, radicand: u64) -> Self {
        let (k, s) = square_split(radicand);
        let rat = rat * int(k as i64);
        if rat.is_zero() {
            Self::zero()
        } else {
            QuadScalar { rat, radicand: s }
        }
    }

    pub fn rational(rat: Rat) -> Self {
        Self::new(rat, 1)
    }

    pub fn zero() -> Self {
        QuadScalar { rat: Rat::zero(), radicand: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero()
    }

    pub fn mul(&self, o: &QuadScalar) -> QuadScalar {
        Self::new(&self.rat * &o.rat, self.radicand * o.radicand)
    }

    pub fn add(&self, o: &QuadScalar) -> Result<QuadScalar> {
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        if self.radicand != o.radicand {
            return Err(HzError::inv(format!(
                "mixed radicals: sqrt({}) + sqrt({})",
                self.radicand, o.radicand
            )));
        }
        Ok(Self::new(&self.rat + &o.rat, self.radicand))
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.rat) * (self.radicand as f64).sqrt()
    }

    pub fn to_json(&self) -> Value {
        json!({"rat": fmt_rat(&self.rat), "radicand": self.radicand})
    }
}

impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radicand == 1 {
            write!(f, "{}", fmt_rat(&self.rat))
        } else {
            write!(f, "{}*sqrt({})", fmt_rat(&self.rat), self.radicand)
        }
    }
}

pub type Key = (Rat, usize);

#[derive(Debug, Clone)]
pub struct QSeries {
    pub fq: Arc<FqModule>,
    pub dual: bool,
    pub weight: Rat,
    pub radicand: u64,
    /// Coefficients with exponent `<= ceiling` are complete.
    pub ceiling: Rat,
    /// `(exponent, coset) -> rational factor`, zero entries never stored.
    pub coeffs: BTreeMap<Key, Rat>,
}

fn same_module(a: &FqModule, b: &FqModule) -> bool {
    a.divisors == b.divisors && a.q_values == b.q_values
}

impl QSeries {
    pub fn new(fq: Arc<FqModule>, dual: bool, weight: Rat, radicand: u64, ceiling: Rat) -> Self {
        let (k, s) = square_split(radicand.max(1));
        assert!(k == 1, "radicand must be squarefree");
        QSeries { fq, dual, weight, radicand: s, ceiling, coeffs: BTreeMap::new() }
    }

    /// Exponent class required at `beta`.
    pub fn grade(&self, beta: usize) -> Rat {
        let q = self.fq.q(beta).clone();
        if self.dual {
            mod1(&-q)
        } else {
            q
        }
    }

    /// Adds `c * sqrt(radicand)` at `(beta, n)`; drops terms above the ceiling.
    pub fn add_term(&mut self, beta: usize, n: Rat, c: Rat) -> Result<()> {
        if c.is_zero() || n > self.ceiling {
            return Ok(());
        }
        if mod1(&n) != self.grade(beta) {
            return Err(HzError::inv(format!(
                "grading violated: exponent {} at coset {}",
                fmt_rat(&n),
                beta
            )));
        }
        let key = (n, beta);
        let v = self.coeffs.remove(&key).unwrap_or_else(Rat::zero) + c;
        if !v.is_zero() {
            self.coeffs.insert(key, v);
        }
        Ok(())
    }

    pub fn get(&self, beta: usize, n: &Rat) -> Rat {
        self.coeffs.get(&(n.clone(), beta)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coefficient(&self, beta: usize, n: &Rat) -> QuadScalar {
        QuadScalar::new(self.get(beta, n), self.radicand)
    }

    pub fn floor(&self) -> Option<Rat> {
        self.coeffs.keys().next().map(|(n, _)| n.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn check_grading(&self) -> Result<()> {
        for (n, b) in self.coeffs.keys() {
            if mod1(n) != self.grade(*b) {
                return Err(HzError::inv(format!("grading violated at coset {b}")));
            }
        }
        Ok(())
    }

    /// Terms with negative exponent.
    pub fn principal_part(&self) -> Vec<(usize, Rat, Rat)> {
        self.coeffs
            .iter()
            .filter(|((n, _), _)| n.is_negative())
            .map(|((n, b), c)| (*b, n.clone(), c.clone()))
            .collect()
    }

    pub fn truncate(&self, ceiling: &Rat) -> QSeries {
        let mut out = self.clone();
        out.ceiling = ceiling.clone().min(self.ceiling.clone());
        out.coeffs.retain(|(n, _), _| *n <= out.ceiling);
        out
    }

    pub fn scale(&self, c: &QuadScalar) -> QSeries {
        let mut out = self.clone();
        out.coeffs.clear();
        let prod = QuadScalar::new(Rat::one(), self.radicand).mul(&QuadScalar::new(Rat::one(), c.radicand));
        out.radicand = prod.radicand;
        if c.is_zero() {
            out.radicand = self.radicand;
            return out;
        }
        for (k, v) in &self.coeffs {
            out.coeffs.insert(k.clone(), v * &c.rat * &prod.rat);
        }
        out
    }

    fn compatible(&self, o: &QSeries) -> Result<()> {
        if !same_module(&self.fq, &o.fq) || self.dual != o.dual || self.weight != o.weight {
            return Err(HzError::pre("series live in different spaces"));
        }
        Ok(())
    }

    pub fn add(&self, o: &QSeries) -> Result<QSeries> {
        self.compatible(o)?;
        if o.is_zero() {
            let mut out = self.clone();
            out.ceiling = self.ceiling.clone().min(o.ceiling.clone());
            return Ok(out.truncate(&out.ceiling.clone()));
        }
        if self.is_zero() {
            let mut out = o.clone();
            out.ceiling = self.ceiling.clone().min(o.ceiling.clone());
            return Ok(out.truncate(&out.ceiling.clone()));
        }
        if self.radicand != o.radicand {
            return Err(HzError::inv("mixed radicals in series sum"));
        }
        let mut out = self.truncate(&o.ceiling);
        for ((n, b), c) in &o.coeffs {
            out.add_term(*b, n.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> QSeries {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = -v.clone();
        }
        out
    }

    pub fn sub(&self, o: &QSeries) -> Result<QSeries> {
        self.add(&o.neg())
    }

    /// Exact equality of the common truncation.
    pub fn agrees_with(&self, o: &QSeries) -> bool {
        let c = self.ceiling.clone().min(o.ceiling.clone());
        let (a, b) = (self.truncate(&c), o.truncate(&c));
        a.coeffs == b.coeffs && (a.radicand == b.radicand || a.is_zero())
    }

    /// Normalized derivative `(2 pi i)^{-r} d^r/dtau^r`.
    pub fn derivative(&self, r: u32) -> QSeries {
        let mut out = self.clone();
        out.coeffs.clear();
        for ((n, b), c) in &self.coeffs {
            let v = c * num_traits::pow(n.clone(), r as usize);
            if !v.is_zero() {
                out.coeffs.insert((n.clone(), *b), v);
            }
        }
        out
    }

    /// `f (x) g` on the direct sum module; `map[i][j]` is the class of `(i, j)`.
    pub fn tensor(&self, g: &QSeries, sum: &DirectSum) -> Result<QSeries> {
        if self.dual != g.dual {
            return Err(HzError::pre("tensor of dual and non-dual series"));
        }
        if !same_module(&self.fq, &sum.left) || !same_module(&g.fq, &sum.right) {
            return Err(HzError::pre("tensor factors do not match the direct sum"));
        }
        let prod = QuadScalar::new(Rat::one(), self.radicand).mul(&QuadScalar::new(Rat::one(), g.radicand));
        let ceiling = match (self.floor(), g.floor()) {
            (Some(a), Some(b)) => (&self.ceiling + b).min(&g.ceiling + a),
            _ => self.ceiling.clone().min(g.ceiling.clone()),
        };
        let mut out = QSeries::new(
            sum.fq.clone(),
            self.dual,
            &self.weight + &g.weight,
            prod.radicand,
            ceiling,
        );
        for ((n1, b1), c1) in &self.coeffs {
            for ((n2, b2), c2) in &g.coeffs {
                let n = n1 + n2;
                if n > out.ceiling {
                    break;
                }
                out.add_term(sum.map[*b1][*b2], n, c1 * c2 * &prod.rat)?;
            }
        }
        Ok(out)
    }

    /// Rankin-Cohen bracket of order `n` with rational coefficients
    /// `(-1)^s C(k+n-1, s) C(l+n-1, r)` in falling-factorial form.
    pub fn rc_bracket(&self, g: &QSeries, n: u32, sum: &DirectSum) -> Result<QSeries> {
        let (k, l) = (&self.weight, &g.weight);
        let nn = int(n as i64);
        for r in 0..=n {
            let s = n - r;
            let args = [k + &nn, l + &nn, k + &nn - int(s as i64), l + &nn - int(r as i64)];
            if args.iter().any(|a| !a.is_positive()) {
                return Err(HzError::pre("nonpositive Gamma argument in Rankin-Cohen coefficient"));
            }
        }
        let mut acc: Option<QSeries> = None;
        for r in 0..=n {
            let s = n - r;
            let c = rc_coefficient(k, l, n, r)?;
            if c.is_zero() {
                continue;
            }
            let term = self.derivative(r).tensor(&g.derivative(s), sum)?;
            let term = term.scale(&QuadScalar::rational(c));
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        let mut out = acc.expect("bracket has at least one term");
        out.weight = k + l + int(2 * n as i64);
        Ok(out)
    }

    /// Constant term of `<f, conj(g)>` for a dual `f` against a non-dual `g`.
    pub fn ct_pair(&self, g: &QSeries) -> Result<QuadScalar> {
        if !self.dual || g.dual {
            return Err(HzError::pre("ct_pair expects a dual series against a non-dual one"));
        }
        if !same_module(&self.fq, &g.fq) {
            return Err(HzError::pre("ct_pair across different modules"));
        }
        let (ff, gf) = match (self.floor(), g.floor()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(QuadScalar::zero()),
        };
        // every exponent n of g with -n >= floor(f) is needed, and vice versa
        if -&ff > g.ceiling || -&gf > self.ceiling {
            return Err(HzError::pre("infinite overlap: truncations too short for the pairing"));
        }
        let mut acc = Rat::zero();
        for ((n, b), c) in &self.coeffs {
            let m = -n;
            if m < gf {
                break;
            }
            acc += c * g.get(*b, &m);
        }
        Ok(QuadScalar::new(acc, self.radicand * g.radicand))
    }

    /// The same series on an isomorphic module; `map[b]` is the image of coset `b`.
    pub fn transport(&self, map: &[usize], target: Arc<FqModule>) -> Result<QSeries> {
        let mut out = QSeries::new(target, self.dual, self.weight.clone(), self.radicand, self.ceiling.clone());
        for ((n, b), c) in &self.coeffs {
            out.add_term(map[*b], n.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn fq_id(&self) -> String {
        module_id(&self.fq)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|((n, b), c)| json!([b, fmt_rat(n), fmt_rat(c)]))
            .collect();
        json!({
            "fq": self.fq_id(),
            "dual": self.dual,
            "weight": fmt_half(&self.weight),
            "radicand": self.radicand,
            "ceiling": fmt_rat(&self.ceiling),
            "coeffs": coeffs,
        })
    }

    pub fn from_json(v: &Value, fq: Arc<FqModule>) -> Result<QSeries> {
        let bad = |m: &str| HzError::pre(format!("malformed series JSON: {m}"));
        if let Some(id) = v.get("fq").and_then(Value::as_str) {
            if id != module_id(&fq) {
                return Err(HzError::pre(format!("series belongs to module {id}, expected {}", module_id(&fq))));
            }
        }
        let dual = v.get("dual").and_then(Value::as_bool).ok_or_else(|| bad("dual"))?;
        let weight = parse_rat(v.get("weight").and_then(Value::as_str).ok_or_else(|| bad("weight"))?)?;
        let radicand = v.get("radicand").and_then(Value::as_u64).unwrap_or(1);
        let ceiling = parse_rat(v.get("ceiling").and_then(Value::as_str).ok_or_else(|| bad("ceiling"))?)?;
        if radicand == 0 || square_split(radicand).0 != 1 {
            return Err(bad("radicand must be squarefree"));
        }
        let mut out = QSeries::new(fq, dual, weight, radicand, ceiling);
        for row in v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("coeffs"))? {
            let row = row.as_array().ok_or_else(|| bad("coefficient row"))?;
            if row.len() != 3 {
                return Err(bad("coefficient row"));
            }
            let b = row[0].as_u64().ok_or_else(|| bad("coset"))? as usize;
            if b >= out.fq.order() {
                return Err(bad("coset out of range"));
            }
            let n = parse_rat(row[1].as_str().ok_or_else(|| bad("exponent"))?)?;
            let c = parse_rat(row[2].as_str().ok_or_else(|| bad("coefficient"))?)?;
            if n <= out.ceiling {
                out.add_term(b, n, c)?;
            }
        }
        Ok(out)
    }
}

/// Rankin-Cohen coefficient of `f^{(r)} (x) g^{(s)}` with `r + s = n`.
pub fn rc_coefficient(k: &Rat, l: &Rat, n: u32, r: u32) -> Result<Rat> {
    let s = n - r;
    let nn = int(n as i64);
    let falling = |a: Rat, m: u32| -> Rat {
        (0..m).fold(Rat::one(), |acc, i| acc * (&a - int(i as i64)))
    };
    let fact = |m: u32| -> Rat { (1..=m).fold(Rat::one(), |acc, i| acc * int(i as i64)) };
    let c = falling(k + &nn - int(1), s) * falling(l + &nn - int(1), r) / (fact(s) * fact(r));
    Ok(if s % 2 == 1 { -c } else { c })
}

pub fn fmt_half(w: &Rat) -> String {
    let two = w * int(2);
    if is_integer(&two) {
        format!("{}/2", two.numer())
    } else {
        fmt_rat(w)
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// Short identifier of a module from its group structure and values.
pub fn module_id(fq: &FqModule) -> String {
    let mut h = Sha256::new();
    h.update(format!("{:?}|", fq.divisors));
    for q in &fq.q_values {
        h.update(fmt_rat(q));
        h.update(b",");
    }
    let d = h.finalize();
    let hex: String = d.iter().take(6).map(|b| format!("{b:02x}")).collect();
    format!("fq{}-{}", fq.order(), hex)
}

/// Direct sum of two modules realized on the block-diagonal Gram matrix.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub left: Arc<FqModule>,
    pub right: Arc<FqModule>,
    pub fq: Arc<FqModule>,
    pub map: Vec<Vec<usize>>,
}

impl DirectSum {
    pub fn new(left: Arc<FqModule>, right: Arc<FqModule>) -> Result<DirectSum> {
        if left.negated != right.negated {
            return Err(HzError::pre("direct sum of a module with a negated one"));
        }
        let (n1, n2) = (left.gram.len(), right.gram.len());
        let mut gram = vec![vec![0i128; n1 + n2]; n1 + n2];
        for i in 0..n1 {
            for j in 0..n1 {
                gram[i][j] = left.gram[i][j];
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                gram[n1 + i][n1 + j] = right.gram[i][j];
            }
        }
        let sig = if left.negated {
            (left.signature.1 + right.signature.1, left.signature.0 + right.signature.0)
        } else {
            (left.signature.0 + right.signature.0, left.signature.1 + right.signature.1)
        };
        let mut fq = FqModule::from_gram(&gram, sig)?;
        if left.negated {
            fq = fq.dual();
        }
        let mut map = vec![vec![0; right.order()]; left.order()];
        for (i, row) in map.iter_mut().enumerate() {
            let a = left.representative(i);
            for (j, slot) in row.iter_mut().enumerate() {
                let mut x = a.clone();
                x.extend(right.representative(j));
                *slot = fq.element_of(&x)?;
            }
        }
        Ok(DirectSum { left, right, fq: Arc::new(fq), map })
    }
}

/// A finite-index sublattice `K` of `L`, given by the coordinates of a `K` basis in `L`.
#[derive(Debug, Clone)]
pub struct Sublattice {
    pub k: Arc<FqModule>,
    pub l: Arc<FqModule>,
    /// `down[mu]` is the class in `L'/L` of `mu` in `K'/K` when `mu` lies in `L'`.
    pub down: Vec<Option<usize>>,
}

impl Sublattice {
    /// `basis[i]` is the i-th basis vector of `K` in `L` coordinates.
    pub fn new(k: Arc<FqModule>, l: Arc<FqModule>, basis: &[Vec<i128>]) -> Result<Sublattice> {
        let n = l.gram.len();
        if basis.len() != n || k.gram.len() != n {
            return Err(HzError::pre("sublattice must have full rank"));
        }
        for i in 0..n {
            for j in 0..n {
                let v: i128 = (0..n)
                    .map(|a| (0..n).map(|b| basis[i][a] * l.gram[a][b] * basis[j][b]).sum::<i128>())
                    .sum();
                if v != k.gram[i][j] {
                    return Err(HzError::pre("sublattice Gram matrix does not match its embedding"));
                }
            }
        }
        let lg = crate::intmat::to_q(&l.gram);
        let down = (0..k.order())
            .map(|mu| {
                let y = k.representative(mu);
                let x: Vec<Rat> = (0..n)
                    .map(|a| (0..n).map(|i| int(basis[i][a] as i64) * &y[i]).sum())
                    .collect();
                let gx = crate::intmat::mat_vec_q(&lg, &x);
                if gx.iter().all(|c| c.denom().is_one()) {
                    l.element_of(&x).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sublattice { k, l, down })
    }

    /// `(f_K)_mu = f_{mu bar}` for `mu` in `L'/K`, else 0.
    pub fn arrow_down(&self, f: &QSeries) -> Result<QSeries> {
        if !same_module(&f.fq, &self.l) {
            return Err(HzError::pre("arrow_down: series is not on the larger lattice"));
        }
        let kfq = if f.fq.negated { Arc::new(self.k.dual()) } else { self.k.clone() };
        let mut out = QSeries::new(kfq, f.dual, f.weight.clone(), f.radicand, f.ceiling.clone());
        for (mu, img) in self.down.iter().enumerate() {
            if let Some(b) = img {
                for ((n, bb), c) in &f.coeffs {
                    if bb == b {
                        out.add_term(mu, n.clone(), c.clone())?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(g^L)_{mu bar} = sum over mu in L'/K above mu bar of g_mu`.
    pub fn arrow_up(&self, g: &QSeries) -> Result<QSeries> {
        if g.fq.divisors != self.k.divisors || g.fq.order() != self.k.order() {
            return Err(HzError::pre("arrow_up: series is not on the sublattice"));
        }
        let lfq = if g.fq.negated { Arc::new(self.l.dual()) } else { self.l.clone() };
        let mut out = QSeries::new(lfq, g.dual, g.weight.clone(), g.radicand, g.ceiling.clone());
        for ((n, mu), c) in &g.coeffs {
            if let Some(b) = self.down[*mu] {
                out.add_term(b, n.clone(), c.clone())?;
            }
        }
        Ok(out)
    }
}

/// Exact value of a rational as a big integer when integral.
pub fn as_integer(x: &Rat) -> Option<BigInt> {
    if x.denom().is_one() {
        Some(x.numer().clone())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn a1() -> Arc<FqModule> {
        Arc::new(FqModule::from_gram(&vec![vec![2]], (1, 0)).unwrap())
    }

    fn trivial() -> Arc<FqModule> {
        Arc::new(FqModule::from_gram(&vec![vec![0, 1], vec![1, 0]], (1, 1)).unwrap())
    }

    #[test]
    fn quad_scalar_extracts_squares() {
        let a = QuadScalar::new(rat(1, 1), 2);
        let p = a.mul(&a);
        assert_eq!(p, QuadScalar::new(rat(2, 1), 1));
        assert_eq!(QuadScalar::new(rat(3, 1), 12), QuadScalar::new(rat(6, 1), 3));
        assert_eq!(QuadScalar::new(rat(0, 1), 7).radicand, 1);
    }

    #[test]
    fn grading_is_enforced() {
        let mut f = QSeries::new(a1(), false, rat(1, 2), 1, int(5));
        assert!(f.add_term(1, rat(1, 4), int(1)).is_ok());
        assert!(f.add_term(1, rat(1, 2), int(1)).is_err());
    }

    #[test]
    fn derivative_scales_by_powers() {
        let mut f = QSeries::new(a1(), false, rat(1, 2), 1, int(5));
        f.add_term(0, int(0), int(3)).unwrap();
        f.add_term(1, rat(1, 4), int(2)).unwrap();
        let d = f.derivative(2);
        assert!(d.get(0, &int(0)).is_zero());
        assert_eq!(d.get(1, &rat(1, 4)), rat(2, 16));
        assert!(f.derivative(0).agrees_with(&f));
    }

    #[test]
    fn tensor_with_radicals() {
        let ds = DirectSum::new(a1(), a1()).unwrap();
        let mut f = QSeries::new(a1(), false, rat(1, 2), 2, int(3));
        f.add_term(1, rat(1, 4), int(1)).unwrap();
        let t = f.tensor(&f, &ds).unwrap();
        assert_eq!(t.radicand, 1);
        assert_eq!(t.get(ds.map[1][1], &rat(1, 2)), int(2));
    }

    #[test]
    fn tensor_with_trivial_unit_relabels() {
        let ds = DirectSum::new(a1(), trivial()).unwrap();
        let mut f = QSeries::new(a1(), false, rat(1, 2), 1, int(3));
        f.add_term(1, rat(1, 4), int(5)).unwrap();
        let mut one = QSeries::new(trivial(), false, int(0), 1, int(3));
        one.add_term(0, int(0), int(1)).unwrap();
        let t = f.tensor(&one, &ds).unwrap();
        assert_eq!(t.coeffs.len(), 1);
        assert_eq!(t.get(ds.map[1][0], &rat(1, 4)), int(5));
    }

    #[test]
    fn bracket_coefficients() {
        assert_eq!(rc_coefficient(&rat(3, 2), &rat(1, 2), 1, 1).unwrap(), rat(1, 2));
        assert_eq!(rc_coefficient(&rat(3, 2), &rat(1, 2), 1, 0).unwrap(), rat(-3, 2));
        assert_eq!(rc_coefficient(&int(2), &int(2), 0, 0).unwrap(), int(1));
    }

    #[test]
    fn ct_pair_picks_opposite_exponents() {
        let fq = a1();
        let mut f = QSeries::new(fq.clone(), true, int(-1), 1, int(2));
        let mut g = QSeries::new(fq, false, int(3), 1, int(2));
        f.add_term(1, rat(-1, 4), int(2)).unwrap();
        f.add_term(0, int(0), int(7)).unwrap();
        g.add_term(1, rat(1, 4), int(5)).unwrap();
        g.add_term(0, int(0), int(1)).unwrap();
        g.add_term(0, int(1), int(100)).unwrap();
        assert_eq!(f.ct_pair(&g).unwrap(), QuadScalar::rational(int(17)));
    }

    #[test]
    fn json_round_trip() {
        let mut f = QSeries::new(a1(), false, rat(3, 2), 2, int(4));
        f.add_term(1, rat(1, 4), rat(1, 2)).unwrap();
        f.add_term(1, rat(9, 4), rat(-3, 2)).unwrap();
        let g = QSeries::from_json(&f.to_json(), a1()).unwrap();
        assert!(g.agrees_with(&f));
        assert_eq!(g.weight, f.weight);
        assert_eq!(f.to_json()["weight"], "3/2");
    }
}

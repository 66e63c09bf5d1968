//! Finite quadratic modules `L'/L` and the Weil representation on their group ring.
//!
//! Convention: `sqrt(i) = e(1/8)`.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::cmat::{self, CMat, C};
use crate::error::{HzError, Result};
use crate::intmat::{self, IMat};
use crate::rat::{fmt_rat, int, mod1, square_split, to_f64, Rat};

#[derive(Debug, Clone, PartialEq)]
pub struct FqModule {
    /// Elementary divisors greater than one.
    pub divisors: Vec<u64>,
    /// Gram matrix of the ambient lattice.
    pub gram: IMat,
    /// Generators of `L'/L` as coordinate vectors in the lattice basis.
    pub gens: Vec<Vec<Rat>>,
    /// Rows of `V^{-1}` for the nontrivial divisors (residue extraction).
    coord_rows: Vec<Vec<i128>>,
    pub q_values: Vec<Rat>,
    pub signature: (i64, i64),
    /// Marks `(L, -Q)`.
    pub negated: bool,
}

/// Exact Weil matrix entry `scale * sqrt(radicand) * e(eighth/8) * e(phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEntry {
    pub scale: Rat,
    pub radicand: u64,
    pub eighth: i64,
    pub phase: Rat,
}

impl ExactEntry {
    pub fn to_complex(&self) -> C {
        let mag = to_f64(&self.scale) * (self.radicand as f64).sqrt();
        cmat::e(self.eighth as f64 / 8.0 + to_f64(&self.phase)) * mag
    }
}

impl FqModule {
    pub fn from_gram(gram: &IMat, signature: (i64, i64)) -> Result<Self> {
        let n = gram.len();
        if gram.iter().any(|r| r.len() != n) {
            return Err(HzError::pre("gram matrix is not square"));
        }
        for i in 0..n {
            if gram[i][i] % 2 != 0 {
                return Err(HzError::pre("gram matrix is not even"));
            }
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(HzError::pre("gram matrix is not symmetric"));
                }
            }
        }
        if signature.0 + signature.1 != n as i64 {
            return Err(HzError::pre("signature does not match rank"));
        }
        let s = intmat::smith(gram);
        if s.diag.contains(&0) {
            return Err(HzError::pre("singular lattice"));
        }
        let mut divisors = Vec::new();
        let mut gens = Vec::new();
        let mut coord_rows = Vec::new();
        for (i, &d) in s.diag.iter().enumerate() {
            if d > 1 {
                divisors.push(d as u64);
                gens.push((0..n).map(|r| Rat::new(s.v[r][i].into(), d.into())).collect());
                coord_rows.push(s.v_inv[i].clone());
            }
        }
        let mut fq = FqModule {
            divisors,
            gram: gram.clone(),
            gens,
            coord_rows,
            q_values: vec![],
            signature,
            negated: false,
        };
        fq.q_values = (0..fq.order())
            .map(|i| {
                let x = fq.representative(i);
                mod1(&(fq.norm_of(&x)))
            })
            .collect();
        Ok(fq)
    }

    pub fn order(&self) -> usize {
        self.divisors.iter().map(|&d| d as usize).product()
    }

    pub fn residues(&self, idx: usize) -> Vec<u64> {
        let mut out = vec![0; self.divisors.len()];
        let mut r = idx;
        for i in (0..self.divisors.len()).rev() {
            let d = self.divisors[i] as usize;
            out[i] = (r % d) as u64;
            r /= d;
        }
        out
    }

    pub fn index_of(&self, res: &[u64]) -> usize {
        res.iter()
            .zip(&self.divisors)
            .fold(0usize, |acc, (&r, &d)| acc * d as usize + (r % d) as usize)
    }

    /// Coordinates (lattice basis) of the canonical representative.
    pub fn representative(&self, idx: usize) -> Vec<Rat> {
        let n = self.gram.len();
        let mut x = vec![Rat::zero(); n];
        for (r, g) in self.residues(idx).iter().zip(&self.gens) {
            for k in 0..n {
                x[k] += &g[k] * int(*r as i64);
            }
        }
        x
    }

    /// Value `x^T G x / 2` (sign-flipped for a negated module).
    pub fn norm_of(&self, x: &[Rat]) -> Rat {
        let g = intmat::to_q(&self.gram);
        let v = intmat::bilinear_q(&g, x, x) / int(2);
        if self.negated {
            -v
        } else {
            v
        }
    }

    /// Class of a dual-lattice vector; errors when `x` is not in `L'`.
    pub fn element_of(&self, x: &[Rat]) -> Result<usize> {
        let g = intmat::to_q(&self.gram);
        let gx = intmat::mat_vec_q(&g, x);
        if gx.iter().any(|c| !c.denom().is_one()) {
            return Err(HzError::pre("vector is not in the dual lattice"));
        }
        let mut res = Vec::with_capacity(self.divisors.len());
        for (row, &d) in self.coord_rows.iter().zip(&self.divisors) {
            let y: Rat = row.iter().zip(x).map(|(&a, b)| int(a as i64) * b).sum();
            let r = y * int(d as i64);
            if !r.denom().is_one() {
                return Err(HzError::inv("residue extraction produced a fraction"));
            }
            let r = r.numer().clone() % num_bigint::BigInt::from(d);
            let r: i64 = r.try_into().unwrap();
            res.push(r.rem_euclid(d as i64) as u64);
        }
        Ok(self.index_of(&res))
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.residues(a), self.residues(b));
        let r: Vec<u64> = ra.iter().zip(&rb).map(|(x, y)| x + y).collect();
        self.index_of(&r)
    }

    pub fn neg(&self, a: usize) -> usize {
        let r: Vec<u64> = self
            .residues(a)
            .iter()
            .zip(&self.divisors)
            .map(|(&x, &d)| (d - x) % d)
            .collect();
        self.index_of(&r)
    }

    pub fn q(&self, a: usize) -> &Rat {
        &self.q_values[a]
    }

    /// `(a, b) = Q(a+b) - Q(a) - Q(b)` mod 1.
    pub fn bilinear(&self, a: usize, b: usize) -> Rat {
        mod1(&(self.q(self.add(a, b)) - self.q(a) - self.q(b)))
    }

    /// The module `(L, -Q)`; its Weil representation is the dual one.
    pub fn dual(&self) -> FqModule {
        let mut d = self.clone();
        d.negated = !self.negated;
        d.signature = (self.signature.1, self.signature.0);
        d.q_values = self.q_values.iter().map(|q| mod1(&-q)).collect();
        d
    }

    /// An isometry onto `other` as an index map, found by trying all generator images.
    pub fn isomorphism_to(&self, other: &FqModule) -> Option<Vec<usize>> {
        if self.order() != other.order() {
            return None;
        }
        let gens: Vec<usize> = (0..self.divisors.len())
            .map(|i| {
                let mut r = vec![0; self.divisors.len()];
                r[i] = 1;
                self.index_of(&r)
            })
            .collect();
        let mut images = vec![0usize; gens.len()];
        self.search_images(other, &gens, &mut images, 0)
    }

    fn search_images(&self, other: &FqModule, gens: &[usize], images: &mut Vec<usize>, i: usize) -> Option<Vec<usize>> {
        if i == gens.len() {
            let map: Vec<usize> = (0..self.order())
                .map(|idx| {
                    let mut acc = 0;
                    for (&r, &img) in self.residues(idx).iter().zip(images.iter()) {
                        for _ in 0..r {
                            acc = other.add(acc, img);
                        }
                    }
                    acc
                })
                .collect();
            let mut seen = vec![false; other.order()];
            for (idx, &m) in map.iter().enumerate() {
                if seen[m] || self.q(idx) != other.q(m) {
                    return None;
                }
                seen[m] = true;
            }
            return Some(map);
        }
        for cand in 0..other.order() {
            if other.q(cand) != self.q(gens[i]) {
                continue;
            }
            images[i] = cand;
            if let Some(m) = self.search_images(other, gens, images, i + 1) {
                return Some(m);
            }
        }
        None
    }

    pub fn weil_t(&self, dual: bool) -> Vec<Rat> {
        self.q_values
            .iter()
            .map(|q| if dual { mod1(&-q) } else { q.clone() })
            .collect()
    }

    pub fn weil_s_exact(&self) -> Vec<Vec<ExactEntry>> {
        let n = self.order();
        let (k, s) = square_split(n as u64);
        let scale = Rat::new(1.into(), ((k * s) as i64).into());
        let eighth = (self.signature.1 - self.signature.0).rem_euclid(8);
        // rho(S) e_b = sum_g c_{g,b} e_g; row g, column b
        (0..n)
            .map(|g| {
                (0..n)
                    .map(|b| ExactEntry {
                        scale: scale.clone(),
                        radicand: s,
                        eighth,
                        phase: mod1(&-self.bilinear(b, g)),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn weil_s(&self) -> CMat {
        self.weil_s_exact()
            .iter()
            .map(|r| r.iter().map(ExactEntry::to_complex).collect())
            .collect()
    }

    pub fn weil_t_matrix(&self) -> CMat {
        let n = self.order();
        let mut m = cmat::eye(n);
        for (i, q) in self.q_values.iter().enumerate() {
            m[i][i] = cmat::e(to_f64(q));
        }
        m
    }

    /// `|sum e(Q(g)) - sqrt|G| e((b+ - b-)/8)|`.
    pub fn milgram_residual(&self) -> f64 {
        let sum: C = self.q_values.iter().map(|q| cmat::e(to_f64(q))).sum();
        let sig = (self.signature.0 - self.signature.1) as f64;
        let target = cmat::e(sig / 8.0) * (self.order() as f64).sqrt();
        (sum - target).norm()
    }

    /// Max residuals of unitarity, `(ST)^3 = S^2` and `S^4 = I`.
    pub fn relation_residuals(&self) -> [f64; 3] {
        let s = self.weil_s();
        let t = self.weil_t_matrix();
        let n = s.len();
        let id = cmat::eye(n);
        let unit = cmat::max_diff(&cmat::mul(&s, &cmat::adjoint(&s)), &id);
        let st = cmat::mul(&s, &t);
        let braid = cmat::max_diff(&cmat::pow(&st, 3), &cmat::mul(&s, &s));
        let four = cmat::max_diff(&cmat::pow(&s, 4), &id);
        [unit, braid, four]
    }

    pub fn to_json(&self) -> Value {
        let q: Vec<Value> = (0..self.order())
            .map(|i| json!([self.residues(i), fmt_rat(&self.q_values[i])]))
            .collect();
        json!({
            "divisors": self.divisors,
            "q_values": q,
            "signature": [self.signature.0, self.signature.1],
        })
    }
}

impl ExactEntry {
    pub fn is_one(&self) -> bool {
        self.scale.is_one() && self.radicand == 1 && self.eighth == 0 && self.phase.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn hz5() -> IMat {
        vec![vec![0, -1, 0, 0], vec![-1, 0, 0, 0], vec![0, 0, 2, 5], vec![0, 0, 5, 10]]
    }

    #[test]
    fn hyperbolic_plane_is_trivial() {
        let fq = FqModule::from_gram(&vec![vec![0, 1], vec![1, 0]], (1, 1)).unwrap();
        assert_eq!(fq.order(), 1);
        assert_eq!(fq.q_values, vec![int(0)]);
    }

    #[test]
    fn a1_lattice() {
        let fq = FqModule::from_gram(&vec![vec![2]], (1, 0)).unwrap();
        assert_eq!(fq.divisors, vec![2]);
        assert_eq!(fq.q_values, vec![int(0), rat(1, 4)]);
        // dual-lattice brute force: x = j/2, Q = x^2
        for j in 0..2 {
            let x = vec![rat(j, 2)];
            assert_eq!(fq.element_of(&x).unwrap(), j as usize);
        }
    }

    #[test]
    fn a1_weil_s_matches_closed_form() {
        let fq = FqModule::from_gram(&vec![vec![2]], (1, 0)).unwrap();
        let s = fq.weil_s();
        let pre = cmat::e(-1.0 / 8.0) / 2f64.sqrt();
        let want = [[pre, pre], [pre, -pre]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[i][j] - want[i][j]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn trivial_module_s_is_one() {
        let g = vec![
            vec![0, 1, 0, 0],
            vec![1, 0, 0, 0],
            vec![0, 0, 0, 1],
            vec![0, 0, 1, 0],
        ];
        let fq = FqModule::from_gram(&g, (2, 2)).unwrap();
        let s = fq.weil_s_exact();
        assert_eq!(s.len(), 1);
        assert!(s[0][0].is_one());
    }

    #[test]
    fn hilbert_d5_is_cyclic_of_order_five() {
        let fq = FqModule::from_gram(&hz5(), (2, 2)).unwrap();
        assert_eq!(fq.divisors, vec![5]);
        let mut qs: Vec<Rat> = fq.q_values.clone();
        qs.sort();
        assert_eq!(qs, vec![int(0), rat(1, 5), rat(1, 5), rat(4, 5), rat(4, 5)]);
        let [u, b, f] = fq.relation_residuals();
        assert!(u < 1e-12 && b < 1e-12 && f < 1e-12);
        assert!(fq.milgram_residual() < 1e-10);
    }

    #[test]
    fn weil_t_phases() {
        let fq = FqModule::from_gram(&vec![vec![2]], (1, 0)).unwrap();
        assert_eq!(fq.weil_t(false)[0], int(0));
        assert_eq!(fq.weil_t(true)[1], rat(3, 4));
    }

    #[test]
    fn dual_is_conjugate() {
        let fq = FqModule::from_gram(&hz5(), (2, 2)).unwrap();
        let d = fq.dual();
        assert!(cmat::max_diff(&d.weil_s(), &cmat::conj(&fq.weil_s())) < 1e-13);
        assert!(cmat::max_diff(&d.weil_t_matrix(), &cmat::conj(&fq.weil_t_matrix())) < 1e-13);
    }

    #[test]
    fn singular_rejected() {
        let e = FqModule::from_gram(&vec![vec![2, 2], vec![2, 2]], (1, 1)).unwrap_err();
        assert_eq!(e, HzError::pre("singular lattice"));
    }
}

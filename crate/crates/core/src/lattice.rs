//! The even lattice of matrices `[[a, nu'], [nu, b]]` with `a, b` integral and `nu` in the
//! ring of integers of a real quadratic field, with `Q(X) = -det X`.
//!
//! Coordinates are taken in the basis `B1` (a = 1), `B2` (b = 1), `B3` (nu = 1), `B4` (nu = omega),
//! where `omega = (D + sqrt D) / 2`. Real matrices use the embedding `omega -> (D + sqrt D)/2`
//! for `nu` and its conjugate for `nu'`; `SL2(O_F)` acts by `(g, g')` as `g X g'^t`.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{HzError, Result};
use crate::fqm::FqModule;
use crate::intmat::{self, IMat};
use crate::rat::{fmt_rat, int, is_integer, is_squarefree, mod1, to_f64, Rat};

type C = Complex64;

/// Element `x + y*omega` of `Q(sqrt D)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fe {
    pub x: Rat,
    pub y: Rat,
}

impl Fe {
    pub fn new(x: Rat, y: Rat) -> Fe {
        Fe { x, y }
    }
    pub fn int(x: i64, y: i64) -> Fe {
        Fe { x: int(x), y: int(y) }
    }
    pub fn zero() -> Fe {
        Fe::int(0, 0)
    }
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }
    pub fn is_integral(&self) -> bool {
        is_integer(&self.x) && is_integer(&self.y)
    }
    pub fn add(&self, o: &Fe) -> Fe {
        Fe::new(&self.x + &o.x, &self.y + &o.y)
    }
    pub fn sub(&self, o: &Fe) -> Fe {
        Fe::new(&self.x - &o.x, &self.y - &o.y)
    }
    pub fn neg(&self) -> Fe {
        Fe::new(-&self.x, -&self.y)
    }
    pub fn scale(&self, r: &Rat) -> Fe {
        Fe::new(&self.x * r, &self.y * r)
    }
}

/// Arithmetic in `Q(sqrt D)` with the integral basis `1, omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadField {
    pub d: i64,
}

impl QuadField {
    /// `omega^2 = D omega - (D^2 - D)/4`.
    fn omega_norm(&self) -> Rat {
        int((self.d * self.d - self.d) / 4)
    }

    pub fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        let yy = &a.y * &b.y;
        Fe::new(
            &a.x * &b.x - &yy * self.omega_norm(),
            &a.x * &b.y + &a.y * &b.x + yy * int(self.d),
        )
    }

    pub fn conj(&self, a: &Fe) -> Fe {
        Fe::new(&a.x + &a.y * int(self.d), -&a.y)
    }

    pub fn norm(&self, a: &Fe) -> Rat {
        let p = self.mul(a, &self.conj(a));
        debug_assert!(p.y.is_zero());
        p.x
    }

    pub fn trace(&self, a: &Fe) -> Rat {
        &a.x * int(2) + &a.y * int(self.d)
    }

    /// Real embeddings: `which = 0` sends omega to `(D + sqrt D)/2`.
    pub fn embed(&self, a: &Fe, which: usize) -> f64 {
        let s = (self.d as f64).sqrt();
        let w = if which == 0 { (self.d as f64 + s) / 2.0 } else { (self.d as f64 - s) / 2.0 };
        to_f64(&a.x) + to_f64(&a.y) * w
    }

    /// Exact sign of the first embedding.
    pub fn sign(&self, a: &Fe) -> i32 {
        // x + y (D + sqrt D)/2 = p + r sqrt D
        let p = &a.x + &a.y * int(self.d) / int(2);
        let r = &a.y / int(2);
        let sp = sgn(&p);
        let sr = sgn(&r);
        if sr == 0 {
            return sp;
        }
        if sp == 0 || sp == sr {
            return if sp == 0 { sr } else { sp };
        }
        let lhs = &p * &p;
        let rhs = &r * &r * int(self.d);
        if lhs > rhs {
            sp
        } else if lhs < rhs {
            sr
        } else {
            0
        }
    }
}

fn sgn(x: &Rat) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// `2x2` matrix over `O_F` of determinant one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sl2 {
    pub m: [[Fe; 2]; 2],
}

impl Sl2 {
    pub fn identity() -> Sl2 {
        Sl2 { m: [[Fe::int(1, 0), Fe::zero()], [Fe::zero(), Fe::int(1, 0)]] }
    }
    pub fn s() -> Sl2 {
        Sl2 { m: [[Fe::zero(), Fe::int(-1, 0)], [Fe::int(1, 0), Fe::zero()]] }
    }
    pub fn t(mu: Fe) -> Sl2 {
        Sl2 { m: [[Fe::int(1, 0), mu], [Fe::zero(), Fe::int(1, 0)]] }
    }
    pub fn mul(&self, f: &QuadField, o: &Sl2) -> Sl2 {
        let e = |i: usize, j: usize| f.mul(&self.m[i][0], &o.m[0][j]).add(&f.mul(&self.m[i][1], &o.m[1][j]));
        Sl2 { m: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]] }
    }
    pub fn inverse(&self) -> Sl2 {
        let m = &self.m;
        Sl2 { m: [[m[1][1].clone(), m[0][1].neg()], [m[1][0].neg(), m[0][0].clone()]] }
    }
    pub fn det(&self, f: &QuadField) -> Fe {
        f.mul(&self.m[0][0], &self.m[1][1]).sub(&f.mul(&self.m[0][1], &self.m[1][0]))
    }
    /// The two real matrices `(g, g')`.
    pub fn embed(&self, f: &QuadField) -> [[[f64; 2]; 2]; 2] {
        let mut out = [[[0.0; 2]; 2]; 2];
        for (w, o) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    o[i][j] = f.embed(&self.m[i][j], w);
                }
            }
        }
        out
    }
    pub fn to_json(&self) -> Value {
        let fe = |a: &Fe| json!([fmt_rat(&a.x), fmt_rat(&a.y)]);
        json!([[fe(&self.m[0][0]), fe(&self.m[0][1])], [fe(&self.m[1][0]), fe(&self.m[1][1])]])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector {
    pub coords: Vec<Rat>,
    pub coset: usize,
    pub norm: Rat,
}

impl LatticeVector {
    pub fn height(&self) -> Rat {
        self.coords.iter().map(|c| c.abs()).max().unwrap_or_else(Rat::zero)
    }
    pub fn to_json(&self) -> Value {
        json!({
            "coords": self.coords.iter().map(fmt_rat).collect::<Vec<_>>(),
            "coset": self.coset,
            "norm": fmt_rat(&self.norm),
        })
    }
}

#[derive(Debug, Clone)]
pub struct HilbertLattice {
    pub d: i64,
    pub field: QuadField,
    pub gram: IMat,
    pub fq: Arc<FqModule>,
}

pub fn is_fundamental(d: i64) -> bool {
    if d <= 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d as u64),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m as u64)
        }
        _ => false,
    }
}

pub fn build_lattice(d: i64) -> Result<HilbertLattice> {
    if !is_fundamental(d) {
        return Err(HzError::pre(format!("{d} is not a positive fundamental discriminant")));
    }
    let dd = d as i128;
    let gram = vec![
        vec![0, -1, 0, 0],
        vec![-1, 0, 0, 0],
        vec![0, 0, 2, dd],
        vec![0, 0, dd, (dd * dd - dd) / 2],
    ];
    let fq = FqModule::from_gram(&gram, (2, 2))?;
    let lat = HilbertLattice { d, field: QuadField { d }, gram, fq: Arc::new(fq) };
    if lat.fq.order() as i64 != d {
        return Err(HzError::inv("discriminant group order differs from D"));
    }
    Ok(lat)
}

impl HilbertLattice {
    pub fn gram_q(&self) -> Vec<Vec<Rat>> {
        intmat::to_q(&self.gram)
    }

    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        intmat::bilinear_q(&self.gram_q(), x, y)
    }

    pub fn norm(&self, x: &[Rat]) -> Rat {
        self.pair(x, x) / int(2)
    }

    /// Vector of `L'` from its coordinates.
    pub fn vector(&self, coords: Vec<Rat>) -> Result<LatticeVector> {
        if coords.len() != 4 {
            return Err(HzError::pre("lattice vectors have four coordinates"));
        }
        let coset = self.fq.element_of(&coords)?;
        let norm = self.norm(&coords);
        Ok(LatticeVector { coords, coset, norm })
    }

    pub fn vector_i(&self, c: [i64; 4]) -> Result<LatticeVector> {
        self.vector(c.iter().map(|&x| int(x)).collect())
    }

    pub fn nu(&self, x: &[Rat]) -> Fe {
        Fe::new(x[2].clone(), x[3].clone())
    }

    /// Matrix `[[a, nu'], [nu, b]]` over the field.
    pub fn matrix(&self, x: &[Rat]) -> [[Fe; 2]; 2] {
        let nu = self.nu(x);
        [
            [Fe::new(x[0].clone(), int(0)), self.field.conj(&nu)],
            [nu, Fe::new(x[1].clone(), int(0))],
        ]
    }

    pub fn from_matrix(&self, m: &[[Fe; 2]; 2]) -> Result<Vec<Rat>> {
        let f = &self.field;
        if !m[0][0].y.is_zero() || !m[1][1].y.is_zero() || f.conj(&m[1][0]) != m[0][1] {
            return Err(HzError::inv("matrix is not of lattice shape"));
        }
        Ok(vec![m[0][0].x.clone(), m[1][1].x.clone(), m[1][0].x.clone(), m[1][0].y.clone()])
    }

    /// Real matrix in `V(R)`.
    pub fn real_matrix(&self, x: &[Rat]) -> [[f64; 2]; 2] {
        let nu = self.nu(x);
        [
            [to_f64(&x[0]), self.field.embed(&nu, 1)],
            [self.field.embed(&nu, 0), to_f64(&x[1])],
        ]
    }

    /// `gamma . X = g X g'^t`, exact.
    pub fn act(&self, g: &Sl2, x: &LatticeVector) -> Result<LatticeVector> {
        let f = &self.field;
        let m = self.matrix(&x.coords);
        let gc = [[f.conj(&g.m[0][0]), f.conj(&g.m[0][1])], [f.conj(&g.m[1][0]), f.conj(&g.m[1][1])]];
        let mut r = [[Fe::zero(), Fe::zero()], [Fe::zero(), Fe::zero()]];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Fe::zero();
                for a in 0..2 {
                    for b in 0..2 {
                        // (g M gc^t)_{ij} = g_{ia} M_{ab} gc_{jb}
                        acc = acc.add(&f.mul(&f.mul(&g.m[i][a], &m[a][b]), &gc[j][b]));
                    }
                }
                r[i][j] = acc;
            }
        }
        self.vector(self.from_matrix(&r)?)
    }

    /// `q_Z(X) = -b z1 z2 + nu z1 + nu' z2 - a`.
    pub fn qz(&self, x: &[Rat], z1: C, z2: C) -> C {
        let m = self.real_matrix(x);
        -z1 * z2 * m[1][1] + z1 * m[1][0] + z2 * m[0][1] - m[0][0]
    }

    /// `p_Z(X) = (1/y1)(-b conj(z1) z2 + nu conj(z1) + nu' z2 - a)`.
    pub fn pz(&self, x: &[Rat], z1: C, z2: C) -> C {
        let m = self.real_matrix(x);
        let zb = z1.conj();
        (-zb * z2 * m[1][1] + zb * m[1][0] + z2 * m[0][1] - m[0][0]) / z1.im
    }

    /// Coset representative with coordinates in `[0, 1)`.
    pub fn reduced_representative(&self, beta: usize) -> Vec<Rat> {
        self.fq.representative(beta).iter().map(mod1).collect()
    }

    /// All `X` in `L + beta` with `Q(X) = q` and every coordinate of absolute value `<= h`.
    pub fn enumerate_vectors(&self, beta: usize, q: &Rat, h: i64) -> Result<Vec<LatticeVector>> {
        if h <= 0 {
            return Err(HzError::pre("height bound must be positive"));
        }
        if beta >= self.fq.order() {
            return Err(HzError::pre("coset out of range"));
        }
        if mod1(q) != *self.fq.q(beta) {
            return Err(HzError::pre("incompatible coset: norm is not congruent to Q(beta) mod 1"));
        }
        let r = self.reduced_representative(beta);
        let den = crate::rat::lcm_denoms(&r);
        let den_i = den.to_i64().expect("small denominators");
        let ri: Vec<i64> = r.iter().map(|x| (x * int(den_i)).to_integer().to_i64().unwrap()).collect();
        // 2 den^2 q = y^T G y with y = den X integral
        let target = q * int(2 * den_i * den_i);
        if !is_integer(&target) {
            return Ok(vec![]);
        }
        let target = target.to_integer().to_i128().unwrap();
        let g = &self.gram;
        let mut out = Vec::new();
        let lim = h * den_i;
        let range = |k: usize| -> (i64, i64) {
            // den*n + r in [-lim, lim]
            let lo = Integer::div_ceil(&(-lim - ri[k]), &den_i);
            let hi = Integer::div_floor(&(lim - ri[k]), &den_i);
            (lo, hi)
        };
        let (r0, r1, r2, r3) = (range(0), range(1), range(2), range(3));
        for n0 in r0.0..=r0.1 {
            let y0 = (den_i * n0 + ri[0]) as i128;
            for n1 in r1.0..=r1.1 {
                let y1 = (den_i * n1 + ri[1]) as i128;
                let part01 = 2 * g[0][1] * y0 * y1;
                for n2 in r2.0..=r2.1 {
                    let y2 = (den_i * n2 + ri[2]) as i128;
                    let part = part01 + g[2][2] * y2 * y2;
                    for n3 in r3.0..=r3.1 {
                        let y3 = (den_i * n3 + ri[3]) as i128;
                        let v = part + 2 * g[2][3] * y2 * y3 + g[3][3] * y3 * y3;
                        if v == target {
                            let coords = [y0, y1, y2, y3]
                                .iter()
                                .map(|&y| Rat::new((y as i64).into(), den_i.into()))
                                .collect();
                            out.push(LatticeVector { coords, coset: beta, norm: q.clone() });
                        }
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Generators `S`, `T_1`, `T_omega` and their inverses.
    pub fn generators(&self) -> Vec<Sl2> {
        let mut g = vec![Sl2::s(), Sl2::t(Fe::int(1, 0)), Sl2::t(Fe::int(0, 1))];
        let inv: Vec<Sl2> = g.iter().map(Sl2::inverse).collect();
        g.extend(inv);
        g
    }

    /// Random word in the generators of length `len`.
    pub fn random_element<R: rand::Rng>(&self, rng: &mut R, len: usize) -> Sl2 {
        let gens = self.generators();
        let mut g = Sl2::identity();
        for _ in 0..len {
            let k = rng.gen_range(0..gens.len());
            g = g.mul(&self.field, &gens[k]);
        }
        g
    }

    /// Content: largest integer `c` with `X / c` still in `L'`.
    pub fn content(&self, x: &[Rat]) -> i64 {
        let g = self.gram_q();
        let gx = intmat::mat_vec_q(&g, x);
        // X in L' iff G X integral; X/c in L' iff G X / c integral
        let mut acc = num_bigint::BigInt::zero();
        for c in &gx {
            acc = acc.gcd(c.numer());
        }
        acc.to_i64().unwrap_or(1).max(1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "D": self.d,
            "gram": self.gram.iter().map(|r| r.iter().map(|&v| v as i64).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "discriminant_group": self.fq.to_json(),
            "order": self.fq.order(),
        })
    }
}

/// `true` iff `(X, Y) = 0`, which is exactly when `T_X` meets `C_Y`.
pub fn intersects_cycle(lat: &HilbertLattice, x: &LatticeVector, y: &LatticeVector) -> Result<bool> {
    if !x.norm.is_negative() || !y.norm.is_positive() {
        return Err(HzError::pre("intersects_cycle needs Q(X) < 0 < Q(Y)"));
    }
    Ok(lat.pair(&x.coords, &y.coords).is_zero())
}

#[derive(Debug, Clone)]
pub struct OrbitReport {
    pub classes: Vec<OrbitClass>,
    /// Pairs of class indices that share every computed invariant but were not joined.
    pub undecided: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct OrbitClass {
    pub representative: LatticeVector,
    pub members: Vec<usize>,
}

impl OrbitReport {
    pub fn to_json(&self) -> Value {
        json!({
            "classes": self.classes.iter().map(|c| json!({
                "representative": c.representative.to_json(),
                "members": c.members,
            })).collect::<Vec<_>>(),
            "undecided_pairs": self.undecided,
        })
    }
}

/// Invariants separating orbits: content and the discriminant groups of `X^perp` and `QX`.
fn orbit_invariant(lat: &HilbertLattice, x: &LatticeVector) -> (i64, Vec<u64>, i64) {
    let content = lat.content(&x.coords);
    match crate::cusp::split_sublattices(lat, x) {
        Ok(s) => (content, s.p_fq.divisors.clone(), s.m),
        Err(_) => (content, vec![], 0),
    }
}

/// Partition by breadth-first search under the generators, staying below `cap` in height.
pub fn orbit_classes(lat: &HilbertLattice, vectors: &[LatticeVector], cap: i64) -> Result<OrbitReport> {
    if vectors.is_empty() {
        return Ok(OrbitReport { classes: vec![], undecided: vec![] });
    }
    let (q, b) = (&vectors[0].norm, vectors[0].coset);
    if vectors.iter().any(|v| &v.norm != q || v.coset != b) {
        return Err(HzError::pre("orbit_classes needs vectors of one norm and coset"));
    }
    let capr = int(cap);
    let index: BTreeMap<Vec<Rat>, usize> =
        vectors.iter().enumerate().map(|(i, v)| (v.coords.clone(), i)).collect();
    let gens = lat.generators();
    let mut class_of = vec![usize::MAX; vectors.len()];
    let mut classes: Vec<OrbitClass> = Vec::new();
    for start in 0..vectors.len() {
        if class_of[start] != usize::MAX {
            continue;
        }
        let cid = classes.len();
        let mut seen: HashSet<Vec<Rat>> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(vectors[start].coords.clone());
        queue.push_back(vectors[start].clone());
        let mut members = vec![];
        while let Some(v) = queue.pop_front() {
            if let Some(&i) = index.get(&v.coords) {
                if class_of[i] == usize::MAX {
                    class_of[i] = cid;
                    members.push(i);
                }
            }
            for g in &gens {
                let w = lat.act(g, &v)?;
                if w.height() <= capr && seen.insert(w.coords.clone()) {
                    queue.push_back(w);
                }
            }
        }
        members.sort();
        let rep = members
            .iter()
            .map(|&i| &vectors[i])
            .min_by(|a, b| a.height().cmp(&b.height()).then(a.cmp(b)))
            .unwrap()
            .clone();
        classes.push(OrbitClass { representative: rep, members });
    }
    let inv: Vec<_> = classes.iter().map(|c| orbit_invariant(lat, &c.representative)).collect();
    let mut undecided = vec![];
    for i in 0..classes.len() {
        for j in i + 1..classes.len() {
            if inv[i] == inv[j] {
                undecided.push((i, j));
            }
        }
    }
    Ok(OrbitReport { classes, undecided })
}

/// Pair `(g1, g2)` of real matrices with `g^{-1}.X = sqrt|Q(X)| e4`.
pub fn diagonalizer(lat: &HilbertLattice, x: &LatticeVector) -> Result<[[[f64; 2]; 2]; 2]> {
    if !x.norm.is_negative() {
        return Err(HzError::pre("diagonalizer needs Q(X) < 0"));
    }
    let m = lat.real_matrix(&x.coords);
    let s = (-to_f64(&x.norm)).sqrt();
    // g1 = X e4^{-1} / s with e4^{-1} = [[0, 1], [-1, 0]], g2 = 1
    let g1 = [[-m[0][1] / s, m[0][0] / s], [-m[1][1] / s, m[1][0] / s]];
    Ok([g1, [[1.0, 0.0], [0.0, 1.0]]])
}

/// Real `2x2` helpers for the Grassmannian model.
pub mod real {
    pub type M2 = [[f64; 2]; 2];

    pub fn mul(a: &M2, b: &M2) -> M2 {
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        r
    }
    pub fn transpose(a: &M2) -> M2 {
        [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
    }
    pub fn inverse(a: &M2) -> M2 {
        let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
    }
    /// `(g1, g2).X = g1 X g2^t`.
    pub fn act(g1: &M2, g2: &M2, x: &M2) -> M2 {
        mul(&mul(g1, x), &transpose(g2))
    }
    /// `(X, Y) = -tr(X Y*)`.
    pub fn pair(x: &M2, y: &M2) -> f64 {
        let ys = [[y[1][1], -y[0][1]], [-y[1][0], y[0][0]]];
        let p = mul(x, &ys);
        -(p[0][0] + p[1][1])
    }
    pub const E1: M2 = [[-1.0, 0.0], [0.0, 1.0]];
    pub const E2: M2 = [[0.0, 1.0], [1.0, 0.0]];
    pub const E3: M2 = [[1.0, 0.0], [0.0, 1.0]];
    pub const E4: M2 = [[0.0, -1.0], [1.0, 0.0]];

    /// Orthonormal basis `X1..X4` attached to `Z = (z1, z2)`.
    pub fn grassmann_basis(x1: f64, y1: f64, x2: f64, y2: f64) -> [M2; 4] {
        let s = 1.0 / (y1 * y2).sqrt();
        [
            [[s * (x1 * x2 - y1 * y2), s * x1], [s * x2, s]],
            [[s * (x1 * y2 + x2 * y1), s * y1], [s * y2, 0.0]],
            [[s * (x1 * x2 + y1 * y2), s * x1], [s * x2, s]],
            [[s * (x1 * y2 - x2 * y1), -s * y1], [s * y2, 0.0]],
        ]
    }

    pub fn max_abs_diff(a: &M2, b: &M2) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((a[i][j] - b[i][j]).abs());
            }
        }
        m
    }
}

/// Moebius action of a real matrix.
pub fn moebius(g: &real::M2, z: C) -> C {
    (z * g[0][0] + g[0][1]) / (z * g[1][0] + g[1][1])
}

pub fn automorphy(g: &real::M2, z: C) -> C {
    z * g[1][0] + g[1][1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fundamental_discriminants() {
        assert!(is_fundamental(5) && is_fundamental(8) && is_fundamental(12) && is_fundamental(13));
        assert!(!is_fundamental(6) && !is_fundamental(9) && !is_fundamental(20) && !is_fundamental(1));
    }

    #[test]
    fn gram_matches_trace_form() {
        for d in [5, 8, 12, 13] {
            let lat = build_lattice(d).unwrap();
            let f = lat.field;
            let basis: Vec<[[Fe; 2]; 2]> = (0..4)
                .map(|i| {
                    let mut c = vec![int(0); 4];
                    c[i] = int(1);
                    lat.matrix(&c)
                })
                .collect();
            // (X, Y) = -tr(X Y*) with Y* the adjugate
            for i in 0..4 {
                for j in 0..4 {
                    let (x, y) = (&basis[i], &basis[j]);
                    let ys = [[y[1][1].clone(), y[0][1].neg()], [y[1][0].neg(), y[0][0].clone()]];
                    let tr = f
                        .mul(&x[0][0], &ys[0][0])
                        .add(&f.mul(&x[0][1], &ys[1][0]))
                        .add(&f.mul(&x[1][0], &ys[0][1]))
                        .add(&f.mul(&x[1][1], &ys[1][1]));
                    assert!(tr.y.is_zero());
                    assert_eq!(-tr.x, int(lat.gram[i][j] as i64), "D={d} ({i},{j})");
                }
            }
            assert_eq!(intmat::det(&lat.gram).abs(), d as i128);
        }
    }

    #[test]
    fn non_fundamental_rejected() {
        assert!(build_lattice(6).is_err());
        assert_eq!(build_lattice(8).unwrap().fq.order(), 8);
    }

    #[test]
    fn field_sign_is_exact() {
        let f = QuadField { d: 5 };
        // omega - 3 = (sqrt5 - 1)/2 > 0, omega' - 3 < 0
        assert_eq!(f.sign(&Fe::int(-3, 1)), 1);
        assert_eq!(f.sign(&f.conj(&Fe::int(-3, 1))), -1);
        assert_eq!(f.sign(&Fe::int(0, 0)), 0);
        assert_eq!(f.norm(&Fe::int(0, 1)), int(5));
    }

    #[test]
    fn action_preserves_pairing() {
        let lat = build_lattice(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let y = lat.vector(vec![rat(1, 5), int(2), int(-1), rat(2, 5)]);
        let y = match y {
            Ok(v) => v,
            Err(_) => lat.vector_i([1, 2, -1, 0]).unwrap(),
        };
        for _ in 0..20 {
            let g = lat.random_element(&mut rng, 6);
            assert_eq!(g.det(&lat.field), Fe::int(1, 0));
            let (gx, gy) = (lat.act(&g, &x).unwrap(), lat.act(&g, &y).unwrap());
            assert_eq!(lat.pair(&gx.coords, &gy.coords), lat.pair(&x.coords, &y.coords));
            assert_eq!(gx.coset, x.coset);
        }
    }

    #[test]
    fn qz_examples() {
        let lat = build_lattice(5).unwrap();
        let i = C::new(0.0, 1.0);
        let b1 = vec![int(1), int(0), int(0), int(0)];
        assert!((lat.qz(&b1, i, i) - C::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let lat = build_lattice(5).unwrap();
        let got = lat.enumerate_vectors(0, &int(-1), 3).unwrap();
        assert!(!got.is_empty());
        let mut count = 0;
        for a in -3..=3 {
            for b in -3..=3 {
                for c in -3..=3 {
                    for d in -3..=3 {
                        if lat.norm(&[int(a), int(b), int(c), int(d)]) == int(-1) {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(got.len(), count);
        assert!(lat.enumerate_vectors(0, &rat(1, 5), 3).is_err());
        let iso = lat.enumerate_vectors(0, &int(0), 1).unwrap();
        assert!(iso.iter().any(|v| v.coords.iter().all(|c| c.is_zero())));
        assert!(iso.iter().any(|v| v.coords == vec![int(1), int(0), int(0), int(0)]));
    }

    #[test]
    fn diagonalizer_maps_to_e4() {
        let lat = build_lattice(5).unwrap();
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let [g1, g2] = diagonalizer(&lat, &x).unwrap();
        let back = real::act(&real::inverse(&g1), &real::inverse(&g2), &lat.real_matrix(&x.coords));
        let s = 2.0;
        let target = [[0.0, -s], [s, 0.0]];
        assert!(real::max_abs_diff(&back, &target) < 1e-12);
    }
}

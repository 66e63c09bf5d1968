//! Splitting `L` along a negative vector `X` into `P = L ∩ X^perp` and `N = L ∩ QX`,
//! isotropic lines of `P`, their cusp widths, and the stabilizer `Gamma_X`.
//!
//! `Gamma_X` is handled as a group of isometries of `L` in coordinates: an element of
//! `SO^+(V)` lies in the image of `SL2(O_F)` exactly when it preserves `L` and acts trivially
//! on `L'/L`. Every isometry fixing `X` and a primitive isotropic `ell` is an Eichler
//! transformation `E(t kappa)`, so widths and line equivalence are decided exactly.

use std::sync::Arc;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{HzError, Result};
use crate::fqm::FqModule;
use crate::intmat::{self, IMat, QMat};
use crate::lattice::{diagonalizer, real, Fe, HilbertLattice, LatticeVector, Sl2};
use crate::qseries::{DirectSum, Sublattice};
use crate::rat::{fmt_rat, int, is_integer, kronecker, Rat};

#[derive(Debug, Clone)]
pub struct SublatticeSplit {
    pub x: LatticeVector,
    /// Basis of `P` as `L` coordinate vectors.
    pub p_basis: Vec<Vec<i128>>,
    pub p_gram: IMat,
    pub p_fq: Arc<FqModule>,
    /// Primitive generator of `N`, a positive multiple of `X`'s direction.
    pub eta: Vec<i128>,
    /// `Q(eta) = -m`.
    pub m: i64,
    pub n_fq: Arc<FqModule>,
    /// `P + N` as a direct sum, and its embedding into `L`.
    pub sum: DirectSum,
    pub sub: Sublattice,
    /// `[L : P + N]`.
    pub index: i64,
}

fn lcm_all(xs: &[Rat]) -> num_bigint::BigInt {
    crate::rat::lcm_denoms(xs)
}

/// Primitive integer vector on the ray of a rational vector.
pub fn primitive(x: &[Rat]) -> Vec<i128> {
    let den = lcm_all(x);
    let ints: Vec<num_bigint::BigInt> = x.iter().map(|c| (c * Rat::from(den.clone())).to_integer()).collect();
    let mut g = num_bigint::BigInt::zero();
    for v in &ints {
        g = g.gcd(v);
    }
    if g.is_zero() {
        return vec![0; x.len()];
    }
    ints.iter().map(|v| (v / &g).to_i128().expect("coordinates fit in i128")).collect()
}

fn to_rat(v: &[i128]) -> Vec<Rat> {
    v.iter().map(|&c| int(c as i64)).collect()
}

fn gram_pair(g: &IMat, x: &[i128], y: &[i128]) -> i128 {
    (0..x.len()).map(|i| (0..y.len()).map(|j| x[i] * g[i][j] * y[j]).sum::<i128>()).sum()
}

fn gcd_slice(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |a, &b| a.gcd(&b))
}

/// Diagonal entries of a congruent diagonalization over `Q` (nondegenerate input).
pub fn rational_diagonal(g: &IMat) -> Vec<Rat> {
    let n = g.len();
    let mut m = intmat::to_q(g);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if m[i][i].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !m[j][j].is_zero()) {
                m.swap(i, j);
                for row in m.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = (i + 1..n).find(|&j| !m[i][j].is_zero()) {
                // e_i <- e_i + e_j
                for k in 0..n {
                    let t = m[j][k].clone();
                    m[i][k] += t;
                }
                for row in m.iter_mut() {
                    let t = row[j].clone();
                    row[i] += t;
                }
            }
        }
        let p = m[i][i].clone();
        out.push(p.clone());
        if p.is_zero() {
            continue;
        }
        for r in i + 1..n {
            let f = &m[r][i] / &p;
            if f.is_zero() {
                continue;
            }
            for k in 0..n {
                let t = &f * &m[i][k];
                m[r][k] -= t;
            }
            for row in m.iter_mut() {
                let t = &f * &row[i];
                row[r] -= t;
            }
        }
    }
    out
}

/// `(positive, negative)` counts of the signature.
pub fn inertia(g: &IMat) -> (usize, usize) {
    let d = rational_diagonal(g);
    (d.iter().filter(|x| x.is_positive()).count(), d.iter().filter(|x| x.is_negative()).count())
}

fn prime_factors(mut n: i128) -> Vec<i128> {
    n = n.abs();
    let mut out = vec![];
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn squarefree_part(n: i128) -> i128 {
    let s = n.signum();
    let mut n = n.abs();
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    s * out * n
}

fn legendre(a: i128, p: i128) -> i64 {
    kronecker(a.rem_euclid(p) as i64, p as i64)
}

/// Hilbert symbol `(a, b)_p` for nonzero integers.
pub fn hilbert_symbol(a: i128, b: i128, p: i128) -> i64 {
    let split = |mut x: i128| {
        let mut e = 0;
        while x % p == 0 {
            x /= p;
            e += 1;
        }
        (e, x)
    };
    let (al, u) = split(a);
    let (be, v) = split(b);
    if p == 2 {
        let eps = |x: i128| ((x - 1) / 2).rem_euclid(2);
        let om = |x: i128| ((x * x - 1) / 8).rem_euclid(2);
        let e = eps(u) * eps(v) + al * om(v) + be * om(u);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let mut s = if (al * be) % 2 == 1 && ((p - 1) / 2) % 2 == 1 { -1 } else { 1 };
        if be % 2 == 1 {
            s *= legendre(u, p);
        }
        if al % 2 == 1 {
            s *= legendre(v, p);
        }
        s
    }
}

/// Exact isotropy test for a nondegenerate ternary form.
pub fn ternary_isotropic(g: &IMat) -> bool {
    let d = rational_diagonal(g);
    let sf: Vec<i128> = d
        .iter()
        .map(|x| squarefree_part((x.numer() * x.denom()).to_i128().unwrap()))
        .collect();
    let (a, b, c) = (sf[0], sf[1], sf[2]);
    let pos = sf.iter().filter(|&&x| x > 0).count();
    if pos == 0 || pos == 3 {
        return false;
    }
    let mut primes = prime_factors(2 * a * b * c);
    primes.sort();
    primes.into_iter().all(|p| hilbert_symbol(-a * c, -b * c, p) == 1)
}

pub fn split_sublattices(lat: &HilbertLattice, x: &LatticeVector) -> Result<SublatticeSplit> {
    if !x.norm.is_negative() {
        return Err(HzError::pre("split_sublattices needs Q(X) < 0"));
    }
    let g = lat.gram_q();
    let row = primitive(&intmat::mat_vec_q(&g, &x.coords));
    let p_basis = intmat::kernel(&[row]);
    if p_basis.len() != 3 {
        return Err(HzError::inv("orthogonal complement does not have rank 3"));
    }
    let p_gram: IMat = (0..3).map(|i| (0..3).map(|j| gram_pair(&lat.gram, &p_basis[i], &p_basis[j])).collect()).collect();
    let p_fq = Arc::new(FqModule::from_gram(&p_gram, (2, 1))?);
    let eta = primitive(&x.coords);
    let m2 = gram_pair(&lat.gram, &eta, &eta);
    let m = (-m2 / 2) as i64;
    let n_fq = Arc::new(FqModule::from_gram(&vec![vec![m2]], (0, 1))?);
    let sum = DirectSum::new(p_fq.clone(), n_fq.clone())?;
    let mut basis = p_basis.clone();
    basis.push(eta.clone());
    let sub = Sublattice::new(sum.fq.clone(), lat.fq.clone(), &basis)?;
    let det_sum = intmat::det(&sum.fq.gram).abs();
    let ratio = det_sum / lat.d as i128;
    let index = (ratio as f64).sqrt().round() as i64;
    if ratio * lat.d as i128 != det_sum || (index as i128) * (index as i128) != ratio {
        return Err(HzError::inv("index of P + N in L is not integral"));
    }
    Ok(SublatticeSplit { x: x.clone(), p_basis, p_gram, p_fq, eta, m, n_fq, sum, sub, index })
}

impl SublatticeSplit {
    pub fn p_to_l(&self, z: &[i128]) -> Vec<i128> {
        (0..4).map(|a| (0..3).map(|i| z[i] * self.p_basis[i][a]).sum()).collect()
    }

    pub fn p_to_l_q(&self, z: &[Rat]) -> Vec<Rat> {
        (0..4).map(|a| (0..3).map(|i| &z[i] * int(self.p_basis[i][a] as i64)).sum()).collect()
    }

    pub fn is_anisotropic(&self) -> bool {
        !ternary_isotropic(&self.p_gram)
    }

    pub fn to_json(&self) -> Value {
        let m = |a: &IMat| a.iter().map(|r| r.iter().map(|&v| v as i64).collect::<Vec<_>>()).collect::<Vec<_>>();
        json!({
            "X": self.x.to_json(),
            "P_basis": m(&self.p_basis),
            "P_gram": m(&self.p_gram),
            "P_discriminant": self.p_fq.to_json(),
            "eta": self.eta.iter().map(|&v| v as i64).collect::<Vec<_>>(),
            "M": self.m,
            "index": self.index,
        })
    }
}

/// Eichler transformation `v -> v + t(v,l)k - t(v,k)l - t^2 Q(k)(v,l)l` as a matrix on `L` coordinates.
pub fn eichler(lat: &HilbertLattice, ell: &[Rat], kappa: &[Rat], t: &Rat) -> QMat {
    let qk = lat.norm(kappa);
    let cols: Vec<Vec<Rat>> = (0..4)
        .map(|i| {
            let mut v = vec![int(0); 4];
            v[i] = int(1);
            let (vl, vk) = (lat.pair(&v, ell), lat.pair(&v, kappa));
            (0..4)
                .map(|a| &v[a] + t * &vl * &kappa[a] - t * &vk * &ell[a] - t * t * &qk * &vl * &ell[a])
                .collect()
        })
        .collect();
    intmat::transpose(&cols)
}

/// Membership of a rational isometry in the discriminant kernel of `L`.
pub fn in_discriminant_kernel(lat: &HilbertLattice, g: &QMat) -> bool {
    if g.iter().flatten().any(|c| !is_integer(c)) {
        return false;
    }
    lat.fq.gens.iter().all(|d| {
        let gd = intmat::mat_vec_q(g, d);
        gd.iter().zip(d).all(|(a, b)| is_integer(&(a - b)))
    })
}

#[derive(Debug, Clone)]
pub struct IsotropicLine {
    /// Coordinates in `L` and in the basis of `P`.
    pub ell: Vec<i128>,
    pub ell_p: Vec<i128>,
    /// Isotropic `ell'` in `P'` (L coordinates) with `(ell, ell') = 1`.
    pub ell_prime: Vec<Rat>,
    /// Generator of `K = P ∩ ell^perp ∩ ell'^perp`, oriented so that `det(ell, ell', kappa, X) < 0`.
    pub kappa: Vec<i128>,
    /// `Q(kappa)`.
    pub n_k: i64,
    /// Width `r * sqrt(n_k)` with `r = 1 / width_den`.
    pub width_den: i64,
    pub height: i64,
    /// `E(kappa / width_den)` on `L` coordinates and as an element of `SL2(O_F)`.
    pub eichler: QMat,
    pub certificate: Option<Sl2>,
    /// Other enumerated lines found equivalent to this one.
    pub merged: Vec<Vec<i128>>,
}

impl IsotropicLine {
    pub fn width_rational(&self) -> Rat {
        Rat::new(1.into(), self.width_den.into())
    }

    pub fn to_json(&self) -> Value {
        let iv = |v: &[i128]| v.iter().map(|&c| c as i64).collect::<Vec<_>>();
        json!({
            "ell": iv(&self.ell),
            "ell_prime": self.ell_prime.iter().map(fmt_rat).collect::<Vec<_>>(),
            "kappa": iv(&self.kappa),
            "N_K": self.n_k,
            "width": {"rational": fmt_rat(&self.width_rational()), "radicand": self.n_k},
            "height": self.height,
            "certificate": self.certificate.as_ref().map(Sl2::to_json),
            "merged": self.merged.iter().map(|v| iv(v)).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct IsotropicReport {
    pub anisotropic: bool,
    pub height_bound: i64,
    pub lines: Vec<IsotropicLine>,
    /// Same class count when the height bound doubles.
    pub stable: bool,
}

impl IsotropicReport {
    pub fn to_json(&self) -> Value {
        json!({
            "anisotropic": self.anisotropic,
            "height_bound": self.height_bound,
            "stable": self.stable,
            "lines": self.lines.iter().map(IsotropicLine::to_json).collect::<Vec<_>>(),
        })
    }
}

/// `z` with `r . z = gcd(r)`.
fn bezout(r: &[i128]) -> Vec<i128> {
    let mut z = vec![0i128; r.len()];
    let mut g = 0i128;
    for i in 0..r.len() {
        // g_new = s*g + t*r_i
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

fn det4(cols: &[Vec<Rat>]) -> Rat {
    intmat::det_q(&intmat::transpose(cols))
}

/// Sign of `(ell, t0)` for the negative vector `t0` spanning `W` with `X`; exact.
fn future_sign(lat: &HilbertLattice, x: &[Rat], ell: &[Rat]) -> i32 {
    let f = &lat.field;
    let nu = lat.nu(x);
    let nul = lat.nu(ell);
    let s = nu
        .scale(&-&ell[0])
        .sub(&f.conj(&nul).scale(&x[1]))
        .add(&nul.scale(&x[0]))
        .add(&f.conj(&nu).scale(&ell[1]));
    f.sign(&s)
}

fn line_data(lat: &HilbertLattice, split: &SublatticeSplit, z: &[i128]) -> Result<IsotropicLine> {
    let gp = &split.p_gram;
    let ell = split.p_to_l(z);
    let gl: Vec<i128> = (0..3).map(|i| (0..3).map(|j| gp[i][j] * z[j]).sum()).collect();
    // y = G_P^{-1} w with l.w = 1 ranges over z0 + kernel
    let w0 = bezout(z);
    let ker = intmat::kernel_basis(z);
    let gp_inv = intmat::inverse_q(&intmat::to_q(gp)).ok_or_else(|| HzError::inv("P is degenerate"))?;
    let mut best: Option<(Rat, Vec<Rat>)> = None;
    for s in -3i128..=3 {
        for t in -3i128..=3 {
            let w: Vec<Rat> = (0..3).map(|i| int((w0[i] + s * ker[0][i] + t * ker[1][i]) as i64)).collect();
            let y = intmat::mat_vec_q(&gp_inv, &w);
            let h = y.iter().map(|c| c.abs()).max().unwrap();
            if best.as_ref().is_none_or(|(bh, by)| h < *bh || (h == *bh && y < *by)) {
                best = Some((h, y));
            }
        }
    }
    let y = best.unwrap().1;
    let qy = intmat::bilinear_q(&intmat::to_q(gp), &y, &y) / int(2);
    let yp: Vec<Rat> = (0..3).map(|i| &y[i] - &qy * int(z[i] as i64)).collect();
    let ell_prime = split.p_to_l_q(&yp);
    // K: kernel of the pairings with ell and ell' inside P
    let gy = intmat::mat_vec_q(&intmat::to_q(gp), &yp);
    let k = intmat::kernel(&[gl.clone(), primitive(&gy)]);
    if k.len() != 1 {
        return Err(HzError::inv("K has wrong rank"));
    }
    let mut kappa = split.p_to_l(&k[0]);
    let n2 = gram_pair(&lat.gram, &kappa, &kappa);
    if n2 <= 0 || n2 % 2 != 0 {
        return Err(HzError::inv("K is not positive even"));
    }
    let n_k = (n2 / 2) as i64;
    let d = det4(&[to_rat(&ell), ell_prime.clone(), to_rat(&kappa), split.x.coords.clone()]);
    if d.is_positive() {
        kappa = kappa.iter().map(|c| -c).collect();
    }
    // width: largest m with E(kappa/m) in Gamma_X
    let g_ell = gcd_slice(&(0..4).map(|i| (0..4).map(|j| lat.gram[i][j] * ell[j]).sum()).collect::<Vec<i128>>());
    let bound = (2 * n2.abs() * g_ell.abs()).max(1) as i64;
    let (er, kr) = (to_rat(&ell), to_rat(&kappa));
    let mut width_den = 1;
    for m in 1..=bound {
        if in_discriminant_kernel(lat, &eichler(lat, &er, &kr, &Rat::new(1.into(), m.into()))) {
            width_den = m;
        }
    }
    let eich = eichler(lat, &er, &kr, &Rat::new(1.into(), width_den.into()));
    let certificate = to_sl2(lat, &split.x, &eich);
    Ok(IsotropicLine {
        height: z.iter().map(|c| c.abs()).max().unwrap() as i64,
        ell,
        ell_p: z.to_vec(),
        ell_prime,
        kappa,
        n_k,
        width_den,
        eichler: eich,
        certificate,
        merged: vec![],
    })
}

fn frame(line: &IsotropicLine, x: &[Rat]) -> QMat {
    intmat::transpose(&[to_rat(&line.ell), line.ell_prime.clone(), to_rat(&line.kappa), x.to_vec()])
}

/// Element of `Gamma_X` carrying `a.ell` to `b.ell`, if one exists.
pub fn line_equivalence(lat: &HilbertLattice, x: &LatticeVector, a: &IsotropicLine, b: &IsotropicLine) -> Option<QMat> {
    if a.n_k != b.n_k {
        return None;
    }
    let t1 = frame(a, &x.coords);
    let t2 = frame(b, &x.coords);
    let g0 = intmat::mat_mul_q(&t2, &intmat::inverse_q(&t1)?);
    let (l2, k2) = (to_rat(&b.ell), to_rat(&b.kappa));
    let cols = intmat::transpose(&g0);
    let (i, ai) = (0..4)
        .map(|i| (i, lat.pair(&cols[i], &l2)))
        .filter(|(_, a)| !a.is_zero())
        .min_by(|p, q| p.1.abs().cmp(&q.1.abs()))?;
    let ki = lat.pair(&cols[i], &k2);
    let n2 = int(2 * b.n_k);
    // t = (j - ki) / (n2 ai) in [0, 1/m)
    let span = &n2 * &ai / int(b.width_den);
    let (lo, hi) = if span.is_positive() { (ki.clone(), &ki + &span) } else { (&ki + &span, ki.clone()) };
    let mut j = lo.ceil().to_integer();
    while Rat::from(j.clone()) <= hi {
        let t = (Rat::from(j.clone()) - &ki) / (&n2 * &ai);
        if !t.is_negative() && t < Rat::new(1.into(), b.width_den.into()) {
            let g = intmat::mat_mul_q(&eichler(lat, &l2, &k2, &t), &g0);
            if in_discriminant_kernel(lat, &g) && intmat::mat_vec_q(&g, &x.coords) == x.coords {
                return Some(g);
            }
        }
        j += 1;
    }
    None
}

fn primitive_box(h: i64) -> Vec<Vec<i128>> {
    let h = h as i128;
    let mut out = vec![];
    for a in -h..=h {
        for b in -h..=h {
            for c in -h..=h {
                if gcd_slice(&[a, b, c]) == 1 {
                    out.push(vec![a, b, c]);
                }
            }
        }
    }
    out
}

fn lines_up_to(lat: &HilbertLattice, split: &SublatticeSplit, h: i64) -> Result<Vec<IsotropicLine>> {
    let mut cand: Vec<(i64, Vec<i128>)> = vec![];
    for z in primitive_box(h) {
        let zz = &z;
        if gram_pair(&split.p_gram, zz, zz) != 0 {
            continue;
        }
        let ell = split.p_to_l(zz);
        if future_sign(lat, &split.x.coords, &to_rat(&ell)) > 0 {
            cand.push((z.iter().map(|c| c.abs()).max().unwrap() as i64, z));
        }
    }
    cand.sort();
    let mut classes: Vec<IsotropicLine> = vec![];
    for (_, z) in cand {
        let line = line_data(lat, split, &z)?;
        let mut placed = false;
        for c in classes.iter_mut() {
            if line_equivalence(lat, &split.x, c, &line).is_some() {
                c.merged.push(line.ell.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            classes.push(line);
        }
    }
    Ok(classes)
}

/// Classes of future-pointing primitive isotropic vectors of `P` under `Gamma_X`,
/// enumerated up to height `h` in the basis of `P` and re-run at `2h` for stability.
pub fn isotropic_lines(lat: &HilbertLattice, split: &SublatticeSplit, h: i64) -> Result<IsotropicReport> {
    if h <= 0 {
        return Err(HzError::pre("height bound must be positive"));
    }
    if split.is_anisotropic() {
        return Ok(IsotropicReport { anisotropic: true, height_bound: h, lines: vec![], stable: true });
    }
    let lines = lines_up_to(lat, split, h)?;
    let twice = lines_up_to(lat, split, 2 * h)?;
    let stable = !lines.is_empty() && twice.len() == lines.len();
    Ok(IsotropicReport { anisotropic: false, height_bound: h, lines, stable })
}

/// Identity, the width-realizing Eichler transformations, and the connecting elements
/// found while grouping lines, each with its `SL2(O_F)` form when recognized.
pub fn stabilizer_generators(lat: &HilbertLattice, x: &LatticeVector, h: i64) -> Result<Vec<(QMat, Option<Sl2>)>> {
    let split = split_sublattices(lat, x)?;
    let mut out = vec![(intmat::to_q(&intmat::identity(4)), Some(Sl2::identity()))];
    if split.is_anisotropic() {
        return Ok(out);
    }
    let lines = lines_up_to(lat, &split, h)?;
    for l in &lines {
        out.push((l.eichler.clone(), l.certificate.clone()));
        for other in &l.merged {
            let z = p_coords(&split, other);
            let od = line_data(lat, &split, &z)?;
            if let Some(g) = line_equivalence(lat, x, l, &od) {
                let s = to_sl2(lat, x, &g);
                out.push((g, s));
            }
        }
    }
    Ok(out)
}

fn p_coords(split: &SublatticeSplit, v: &[i128]) -> Vec<i128> {
    // least squares through the Gram of the basis is exact for vectors of P
    let b = intmat::to_q(&split.p_basis);
    let bbt: QMat = (0..3)
        .map(|i| (0..3).map(|j| (0..4).map(|a| &b[i][a] * &b[j][a]).sum()).collect())
        .collect();
    let bv: Vec<Rat> = (0..3).map(|i| (0..4).map(|a| &b[i][a] * int(v[a] as i64)).sum()).collect();
    let z = intmat::mat_vec_q(&intmat::inverse_q(&bbt).expect("independent basis"), &bv);
    z.iter().map(|c| c.to_integer().to_i128().unwrap()).collect()
}

fn real_to_coords(lat: &HilbertLattice, m: &real::M2) -> [f64; 4] {
    let s = (lat.d as f64).sqrt();
    let w1 = (lat.d as f64 + s) / 2.0;
    let dy = (m[1][0] - m[0][1]) / s;
    [m[0][0], m[1][1], m[1][0] - dy * w1, dy]
}

/// Real `sigma` in `SL2(R)` with `h(Y) = sigma Y sigma^t` on symmetric matrices.
fn sigma_of(h: &dyn Fn(&real::M2) -> real::M2) -> Option<real::M2> {
    let col = |a: real::M2| -> [f64; 2] {
        if a[0][0].abs() >= a[1][1].abs() {
            let r = a[0][0].abs().sqrt();
            [a[0][0].signum() * r, a[1][0] / r * a[0][0].signum()]
        } else {
            let r = a[1][1].abs().sqrt();
            [a[0][1] / r * a[1][1].signum(), a[1][1].signum() * r]
        }
    };
    let a1 = h(&[[1.0, 0.0], [0.0, 0.0]]);
    let a2 = h(&[[0.0, 0.0], [0.0, 1.0]]);
    let c1 = col(a1);
    let mut c2 = col(a2);
    let mix = h(&[[0.0, 1.0], [1.0, 0.0]]);
    let pred = 2.0 * c1[0] * c2[0];
    if (pred - mix[0][0]).abs() > (pred + mix[0][0]).abs() || (mix[0][0].abs() < 1e-9 && (2.0 * (c1[0] * c2[1] + c1[1] * c2[0]) - 2.0 * mix[0][1]).abs() > 1e-6) {
        c2 = [-c2[0], -c2[1]];
    }
    let s = [[c1[0], c2[0]], [c1[1], c2[1]]];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if (det - 1.0).abs() > 1e-6 {
        return None;
    }
    Some(s)
}

fn recognize(lat: &HilbertLattice, e1: f64, e2: f64) -> Option<Fe> {
    let s = (lat.d as f64).sqrt();
    let y = (e1 - e2) / s;
    let x = e1 - y * (lat.d as f64 + s) / 2.0;
    let (xr, yr) = (x.round(), y.round());
    if (x - xr).abs() > 1e-6 || (y - yr).abs() > 1e-6 {
        return None;
    }
    Some(Fe::int(xr as i64, yr as i64))
}

fn coords_to_real(lat: &HilbertLattice, c: &[f64]) -> real::M2 {
    let s = (lat.d as f64).sqrt();
    let (w1, w2) = ((lat.d as f64 + s) / 2.0, (lat.d as f64 - s) / 2.0);
    [[c[0], c[2] + c[3] * w2], [c[2] + c[3] * w1, c[1]]]
}

/// The `sigma` in `SL2(R)` with `g = gamma0 (sigma, sigma) gamma0^{-1}` for an isometry fixing `X`.
pub fn sigma_for(lat: &HilbertLattice, x: &LatticeVector, g: &QMat) -> Option<real::M2> {
    let [g1, _] = diagonalizer(lat, x).ok()?;
    let g1i = real::inverse(&g1);
    let gf: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(crate::rat::to_f64).collect()).collect();
    let id = [[1.0, 0.0], [0.0, 1.0]];
    let h = |y: &real::M2| -> real::M2 {
        let c = real_to_coords(lat, &real::act(&g1, &id, y));
        let gc: Vec<f64> = (0..4).map(|i| (0..4).map(|j| gf[i][j] * c[j]).sum()).collect();
        real::act(&g1i, &id, &coords_to_real(lat, &gc))
    };
    sigma_of(&h)
}

/// `gamma0^{-1} . v` for a vector of `W`, a symmetric real matrix.
pub fn to_symmetric(lat: &HilbertLattice, x: &LatticeVector, v: &[Rat]) -> Option<real::M2> {
    let [g1, _] = diagonalizer(lat, x).ok()?;
    Some(real::act(&real::inverse(&g1), &[[1.0, 0.0], [0.0, 1.0]], &lat.real_matrix(v)))
}

/// `SL2(O_F)` element inducing a given isometry fixing `X`, recovered through the diagonalizer.
pub fn to_sl2(lat: &HilbertLattice, x: &LatticeVector, g: &QMat) -> Option<Sl2> {
    let [g1, _] = diagonalizer(lat, x).ok()?;
    let g1i = real::inverse(&g1);
    let sigma = sigma_for(lat, x, g)?;
    let a = real::mul(&real::mul(&g1, &sigma), &g1i);
    let mut m = [[Fe::zero(), Fe::zero()], [Fe::zero(), Fe::zero()]];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = recognize(lat, a[i][j], sigma[i][j])?;
        }
    }
    let cand = Sl2 { m };
    if cand.det(&lat.field) != Fe::int(1, 0) {
        return None;
    }
    for i in 0..4 {
        let mut e = vec![int(0); 4];
        e[i] = int(1);
        let v = lat.vector(e.clone()).ok()?;
        let got = lat.act(&cand, &v).ok()?;
        let want = intmat::mat_vec_q(g, &e);
        if got.coords != want {
            return None;
        }
    }
    Some(cand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    #[test]
    fn hilbert_symbols() {
        assert_eq!(hilbert_symbol(-1, -1, 2), -1);
        assert_eq!(hilbert_symbol(-1, -1, 3), 1);
        assert_eq!(hilbert_symbol(2, 3, 3), -1);
        assert_eq!(hilbert_symbol(5, 2, 5), -1);
        assert_eq!(hilbert_symbol(1, 7, 2), 1);
    }

    #[test]
    fn ternary_isotropy() {
        // x^2 + y^2 - z^2 is isotropic, x^2 + y^2 - 3z^2 is not
        assert!(ternary_isotropic(&vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, -2]]));
        assert!(!ternary_isotropic(&vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, -6]]));
        assert!(!ternary_isotropic(&vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]));
        assert!(ternary_isotropic(&vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 2]]));
    }

    #[test]
    fn split_has_expected_shape() {
        let lat = build_lattice(5).unwrap();
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let s = split_sublattices(&lat, &x).unwrap();
        assert_eq!(inertia(&s.p_gram), (2, 1));
        assert_eq!(s.m, 4);
        let det_p = intmat::det(&s.p_gram).abs();
        assert_eq!(det_p * 2 * s.m as i128, 5 * (s.index as i128).pow(2));
        // every short vector orthogonal to X lies in P
        for a in -4i128..=4 {
            for b in -4i128..=4 {
                for c in -4i128..=4 {
                    for d in -4i128..=4 {
                        let v = vec![a, b, c, d];
                        let xv = primitive(&x.coords);
                        if gram_pair(&lat.gram, &v, &xv) == 0 {
                            let z = p_coords(&s, &v);
                            assert_eq!(s.p_to_l(&z), v);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn isotropic_lines_and_widths() {
        let lat = build_lattice(5).unwrap();
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let s = split_sublattices(&lat, &x).unwrap();
        assert!(!s.is_anisotropic());
        let rep = isotropic_lines(&lat, &s, 3).unwrap();
        assert!(!rep.lines.is_empty());
        for l in &rep.lines {
            assert_eq!(gram_pair(&lat.gram, &l.ell, &l.ell), 0);
            assert_eq!(lat.pair(&to_rat(&l.ell), &l.ell_prime), int(1));
            assert!(lat.norm(&l.ell_prime).is_zero());
            assert!(l.n_k >= 1);
            assert!(lat.pair(&to_rat(&l.kappa), &l.ell_prime).is_zero());
            assert!(in_discriminant_kernel(&lat, &l.eichler));
            let cert = l.certificate.as_ref().expect("Eichler element recognized in SL2(O_F)");
            assert_eq!(lat.act(cert, &x).unwrap(), x);
        }
    }

    #[test]
    fn anisotropic_complement() {
        let lat = build_lattice(5).unwrap();
        let x = lat.vector_i([1, 2, 0, 0]).unwrap();
        let s = split_sublattices(&lat, &x).unwrap();
        assert!(s.is_anisotropic());
        let rep = isotropic_lines(&lat, &s, 4).unwrap();
        assert!(rep.anisotropic && rep.lines.is_empty());
        // brute-force: no isotropic vector of P up to height 6
        for z in primitive_box(6) {
            assert_ne!(gram_pair(&s.p_gram, &z, &z), 0);
        }
    }

    #[test]
    fn eichler_translation_length() {
        let lat = build_lattice(5).unwrap();
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let s = split_sublattices(&lat, &x).unwrap();
        let rep = isotropic_lines(&lat, &s, 2).unwrap();
        for l in &rep.lines {
            let e = eichler(&lat, &to_rat(&l.ell), &to_rat(&l.kappa), &int(1));
            let sigma = sigma_for(&lat, &x, &e).unwrap();
            // frame with gamma0^{-1} ell = -u u^t, gamma0^{-1} ell' = v v^t, det(u, v) = 1
            let a = to_symmetric(&lat, &x, &to_rat(&l.ell)).unwrap();
            let b = to_symmetric(&lat, &x, &l.ell_prime).unwrap();
            let rank_one = |m: real::M2| {
                if m[0][0].abs() > m[1][1].abs() {
                    let r = m[0][0].abs().sqrt();
                    [r, m[1][0] / r * m[0][0].signum()]
                } else {
                    let r = m[1][1].abs().sqrt();
                    [m[0][1] / r * m[1][1].signum(), r]
                }
            };
            let u = rank_one([[-a[0][0], -a[0][1]], [-a[1][0], -a[1][1]]]);
            let mut v = rank_one(b);
            let mut f = [[u[0], v[0]], [u[1], v[1]]];
            if f[0][0] * f[1][1] - f[0][1] * f[1][0] < 0.0 {
                v = [-v[0], -v[1]];
                f = [[u[0], v[0]], [u[1], v[1]]];
            }
            let t = real::mul(&real::mul(&real::inverse(&f), &sigma), &f);
            let shift = t[0][1] / t[0][0];
            assert!(t[1][0].abs() < 1e-10, "{t:?}");
            assert!((shift.abs() - (l.n_k as f64).sqrt()).abs() < 1e-10, "{shift} vs sqrt {}", l.n_k);
        }
    }
}

//! Lattice sums on `H x H`: averaged cusp and meromorphic forms, the locally harmonic pair,
//! and the Siegel-type thetas, together with finite-difference checks of their xi-relations.
//!
//! Every sum runs over the lattice points whose majorant `Q(l_Z) - Q(l_Z^perp)` is at most `H^2`.
//! That region is carried to itself by `Gamma`, so truncated sums transform exactly.

use std::f64::consts::PI;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{HzError, Result};
use crate::lattice::{automorphy, moebius, real, HilbertLattice, Sl2};
use crate::numeric::{fmax, Residual, C};
use crate::rat::{int, rat, to_f64, Rat};

/// A point `Z = (z1, z2)` of `H x H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub z1: C,
    pub z2: C,
}

impl Point {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Point {
        Point { z1: C::new(x1, y1), z2: C::new(x2, y2) }
    }
    pub fn y1(&self) -> f64 {
        self.z1.im
    }
    pub fn y2(&self) -> f64 {
        self.z2.im
    }
    pub fn to_json(&self) -> Value {
        json!([[self.z1.re, self.z1.im], [self.z2.re, self.z2.im]])
    }
}

/// `gamma Z` together with the automorphy factors `(c z1 + d, c' z2 + d')`.
pub fn act_point(lat: &HilbertLattice, g: &Sl2, z: Point) -> (Point, C, C) {
    let [g1, g2] = g.embed(&lat.field);
    (Point { z1: moebius(&g1, z.z1), z2: moebius(&g2, z.z2) }, automorphy(&g1, z.z1), automorphy(&g2, z.z2))
}

/// Truncation and guard settings for lattice sums.
#[derive(Debug, Clone)]
pub struct SumConfig {
    /// Radius `H` of the majorant ball.
    pub height: f64,
    /// Smallest admissible `|q_Z|` or `|p_Z|` on a singular cycle.
    pub guard: f64,
}

impl Default for SumConfig {
    fn default() -> Self {
        SumConfig { height: 10.0, guard: 1e-6 }
    }
}

/// A truncated sum with an estimate of the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSum {
    pub value: C,
    pub tail: f64,
    pub terms: usize,
}

/// A lattice point with its values of `q_Z`, `p_Z` and the majorant.
#[derive(Debug, Clone)]
pub struct Term {
    pub coords: Vec<Rat>,
    pub coset: usize,
    pub norm: f64,
    pub q: C,
    pub p: C,
    pub majorant: f64,
}

/// Majorant `|q_Z|^2 / (4 y1 y2) + y1 |p_Z|^2 / (4 y2)`.
pub fn majorant(lat: &HilbertLattice, x: &[Rat], z: Point) -> f64 {
    let q = lat.qz(x, z.z1, z.z2);
    let p = lat.pz(x, z.z1, z.z2);
    q.norm_sqr() / (4.0 * z.y1() * z.y2()) + z.y1() * p.norm_sqr() / (4.0 * z.y2())
}

fn cholesky(a: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut l = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Integer vectors `n` with `(n + s)^T A (n + s) <= t`, by Fincke-Pohst on the last coordinate first.
fn ellipsoid_points(a: &[[f64; 4]; 4], s: &[f64; 4], t: f64) -> Vec<[i64; 4]> {
    let l = match cholesky(a) {
        Some(l) => l,
        None => return vec![],
    };
    // x^T A x = sum_j (sum_{i >= j} l[i][j] x_i)^2
    let mut out = vec![];
    let mut x = [0.0f64; 4];
    let mut n = [0i64; 4];
    fn rec(l: &[[f64; 4]; 4], s: &[f64; 4], j: usize, rem: f64, x: &mut [f64; 4], n: &mut [i64; 4], out: &mut Vec<[i64; 4]>) {
        let tail: f64 = ((j + 1)..4).map(|i| l[i][j] * x[i]).sum();
        // (l[j][j] x_j + tail)^2 <= rem
        let r = rem.max(0.0).sqrt();
        let lo = ((-r - tail) / l[j][j] - s[j]).ceil() as i64;
        let hi = ((r - tail) / l[j][j] - s[j]).floor() as i64;
        for v in lo..=hi {
            x[j] = v as f64 + s[j];
            n[j] = v;
            let c = l[j][j] * x[j] + tail;
            let left = rem - c * c;
            if left < -1e-9 {
                continue;
            }
            if j == 0 {
                out.push(*n);
            } else {
                rec(l, s, j - 1, left, x, n, out);
            }
        }
    }
    rec(&l, s, 3, t, &mut x, &mut n, &mut out);
    out
}

/// Gram matrix of the majorant at `Z` in lattice coordinates.
fn majorant_gram(lat: &HilbertLattice, z: Point) -> [[f64; 4]; 4] {
    let e = |i: usize| {
        let mut c = vec![int(0); 4];
        c[i] = int(1);
        c
    };
    let mut a = [[0.0; 4]; 4];
    for i in 0..4 {
        a[i][i] = majorant(lat, &e(i), z);
    }
    for i in 0..4 {
        for j in 0..i {
            let mut c = e(i);
            c[j] = int(1);
            let v = (majorant(lat, &c, z) - a[i][i] - a[j][j]) / 2.0;
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    a
}

/// Lattice points of `beta + L` in the majorant ball of radius `height`, optionally of a fixed norm.
pub fn ball(lat: &HilbertLattice, beta: usize, norm: Option<&Rat>, z: Point, height: f64) -> Result<Vec<Term>> {
    if beta >= lat.fq.order() {
        return Err(HzError::pre("coset out of range"));
    }
    if z.y1() <= 0.0 || z.y2() <= 0.0 {
        return Err(HzError::pre("Z must lie in H x H"));
    }
    let r = lat.reduced_representative(beta);
    let s = [to_f64(&r[0]), to_f64(&r[1]), to_f64(&r[2]), to_f64(&r[3])];
    let a = majorant_gram(lat, z);
    let mut out = vec![];
    for n in ellipsoid_points(&a, &s, height * height) {
        let coords: Vec<Rat> = (0..4).map(|i| &r[i] + int(n[i])).collect();
        let q = lat.norm(&coords);
        if let Some(m) = norm {
            if &q != m {
                continue;
            }
        }
        let maj = majorant(lat, &coords, z);
        if maj > height * height {
            continue;
        }
        out.push(Term {
            q: lat.qz(&coords, z.z1, z.z2),
            p: lat.pz(&coords, z.z1, z.z2),
            norm: to_f64(&q),
            coords,
            coset: beta,
            majorant: maj,
        });
    }
    Ok(out)
}

/// Tail of a sum whose terms decay like `majorant^{-k/2}` over a point count growing linearly.
fn polynomial_tail(terms: &[(f64, f64)], t: f64, k: i64) -> f64 {
    // (majorant, |term|) pairs
    let outer: Vec<&(f64, f64)> = terms.iter().filter(|(m, _)| *m > t / 2.0).collect();
    if outer.is_empty() {
        return 0.0;
    }
    let size = outer.iter().map(|(m, a)| a * m.powf(k as f64 / 2.0)).fold(0.0, fmax);
    let density = outer.len() as f64 / (t / 2.0);
    let e = k as f64 / 2.0 - 1.0;
    size * density * t.powf(-e) / e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmegaKind {
    Cusp,
    Mero,
}

impl OmegaKind {
    pub fn parse(s: &str) -> Result<OmegaKind> {
        match s {
            "cusp" => Ok(OmegaKind::Cusp),
            "mero" => Ok(OmegaKind::Mero),
            _ => Err(HzError::pre(format!("unknown kind {s:?}; expected cusp or mero"))),
        }
    }
}

/// `sum q_Z(Y)^{-k}` over `Y in beta + L` with `Q(Y) = norm`, positive for cusp and negative for mero.
pub fn eval_omega(kind: OmegaKind, lat: &HilbertLattice, k: i64, norm: &Rat, beta: usize, z: Point, cfg: &SumConfig) -> Result<LatticeSum> {
    match kind {
        OmegaKind::Cusp if norm <= &Rat::zero() => return Err(HzError::pre("cusp forms need a positive norm")),
        OmegaKind::Mero if norm >= &Rat::zero() => return Err(HzError::pre("meromorphic forms need a negative norm")),
        _ => {}
    }
    if k < 4 || k % 2 != 0 {
        return Err(HzError::pre("weight must be even and at least 4"));
    }
    let pts = ball(lat, beta, Some(norm), z, cfg.height)?;
    let mut value = C::new(0.0, 0.0);
    let mut sizes = vec![];
    for t in &pts {
        if t.q.norm() < cfg.guard {
            return Err(HzError::pre(format!("Z lies within {:.1e} of a singular cycle", cfg.guard)));
        }
        let term = t.q.powi(-(k as i32));
        value += term;
        sizes.push((t.majorant, term.norm()));
    }
    Ok(LatticeSum { value, tail: polynomial_tail(&sizes, cfg.height * cfg.height, k), terms: pts.len() })
}

/// The pair `(Omega_1, Omega_2)` of the locally harmonic form attached to `Q(Y) = m`, `Y in beta + L`.
pub fn eval_locally_harmonic(lat: &HilbertLattice, k: i64, m: &Rat, beta: usize, z: Point, cfg: &SumConfig) -> Result<(LatticeSum, LatticeSum)> {
    if m <= &Rat::zero() {
        return Err(HzError::pre("the locally harmonic form needs m > 0"));
    }
    if k < 4 || k % 2 != 0 {
        return Err(HzError::pre("weight must be even and at least 4"));
    }
    let (y1, y2) = (z.y1(), z.y2());
    let pts = ball(lat, beta, Some(m), z, cfg.height)?;
    let (mut a, mut b) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    let (mut sa, mut sb) = (vec![], vec![]);
    for t in &pts {
        if t.p.norm() < cfg.guard {
            return Err(HzError::pre(format!("Z lies within {:.1e} of a real analytic cycle", cfg.guard)));
        }
        let qc = t.q.conj().powi(1 - k as i32);
        let ta = qc / t.p.conj() * (y1.powi(k as i32 - 2) * y2.powi(k as i32));
        let tb = qc / (t.p * (y1 / y2)) * (y1.powi(k as i32) * y2.powi(k as i32 - 2));
        a += ta;
        b += tb;
        sa.push((t.majorant, ta.norm()));
        sb.push((t.majorant, tb.norm()));
    }
    let t2 = cfg.height * cfg.height;
    Ok((
        LatticeSum { value: a, tail: polynomial_tail(&sa, t2, k), terms: pts.len() },
        LatticeSum { value: b, tail: polynomial_tail(&sb, t2, k), terms: pts.len() },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    DoiNaganuma,
    Millson1,
    Millson2,
}

impl ThetaKind {
    pub fn parse(s: &str) -> Result<ThetaKind> {
        match s {
            "DN" | "dn" => Ok(ThetaKind::DoiNaganuma),
            "M1" | "m1" => Ok(ThetaKind::Millson1),
            "M2" | "m2" => Ok(ThetaKind::Millson2),
            _ => Err(HzError::pre(format!("unknown theta {s:?}; expected DN, M1 or M2"))),
        }
    }
}

/// Majorant radius beyond which every Gaussian factor is below `1e-17` of the leading one.
pub fn gaussian_height(v: f64) -> f64 {
    (40.0 / (2.0 * PI * v)).sqrt().max(2.0)
}

/// Components of a Siegel-type theta at `(tau, Z)`, one per coset of `L'/L`, with a tail bound.
pub fn eval_theta(kind: ThetaKind, lat: &HilbertLattice, k: i64, tau: C, z: Point) -> Result<(Vec<C>, f64)> {
    if tau.im <= 0.0 {
        return Err(HzError::pre("tau must lie in H"));
    }
    let (u, v) = (tau.re, tau.im);
    let (y1, y2) = (z.y1(), z.y2());
    let h = gaussian_height(v);
    let mut out = vec![C::new(0.0, 0.0); lat.fq.order()];
    let mut edge: f64 = 0.0;
    for (beta, slot) in out.iter_mut().enumerate() {
        for t in ball(lat, beta, None, z, h)? {
            // e(Q(l_Z) tau + Q(l_Z^perp) taubar) = e(u Q(l)) exp(-2 pi v majorant)
            let g = C::new(0.0, 2.0 * PI * u * t.norm).exp() * (-2.0 * PI * v * t.majorant).exp();
            let w = match kind {
                ThetaKind::DoiNaganuma => t.q.powi(k as i32) / (y1 * y2).powi(k as i32) * v,
                ThetaKind::Millson1 => t.q.powi(k as i32 - 1) * t.p * v.powi(k as i32),
                ThetaKind::Millson2 => t.q.powi(k as i32 - 1) * t.p.conj() * (v.powi(k as i32) * y1 / y2),
            };
            let term = w * g;
            *slot += term;
            if t.majorant > h * h / 2.0 {
                edge = edge.max(term.norm());
            }
        }
    }
    Ok((out, edge * (-2.0 * PI * v * h * h / 2.0).exp()))
}

/// Central-difference `d/dzbar` of a vector-valued function of one complex variable.
fn dbar<F: Fn(C) -> Result<Vec<C>>>(f: F, z: C, h: f64) -> Result<Vec<C>> {
    let (xp, xm) = (f(z + h)?, f(z - h)?);
    let (yp, ym) = (f(z + C::new(0.0, h))?, f(z - C::new(0.0, h))?);
    Ok((0..xp.len())
        .map(|i| ((xp[i] - xm[i]) / (2.0 * h) + C::new(0.0, 1.0) * (yp[i] - ym[i]) / (2.0 * h)) * 0.5)
        .collect())
}

/// `xi_w F = 2 i y^w conj(dF/dzbar)`, componentwise.
fn xi(w: f64, y: f64, d: &[C]) -> Vec<C> {
    d.iter().map(|c| C::new(0.0, 2.0) * y.powf(w) * c.conj()).collect()
}

/// Finite-difference step.
pub const XI_STEP: f64 = 1e-5;

fn relative(a: &[C], b: &[C]) -> f64 {
    let scale = a.iter().chain(b).map(|c| c.norm()).fold(0.0, fmax).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, fmax) / scale
}

/// Residual of `xi_{-k,Z} Omega_m = -2(k-1) omega_m` at `Z`, relative to the size of the sides.
/// Both sides are summed over the same truncated point set, so truncation cancels termwise.
pub fn check_locally_harmonic_xi(lat: &HilbertLattice, k: i64, m: &Rat, beta: usize, z: Point, cfg: &SumConfig, tolerance: f64) -> Result<Residual> {
    let h = XI_STEP;
    let pts = ball(lat, beta, Some(m), z, cfg.height)?;
    // freeze the point set so that the moved sums use the same Y
    let coords: Vec<Vec<Rat>> = pts.iter().map(|t| t.coords.clone()).collect();
    let kk = k as i32;
    let omega_pair = |zz: Point| -> Result<Vec<C>> {
        let (y1, y2) = (zz.y1(), zz.y2());
        let (mut a, mut b) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        for c in &coords {
            let q = lat.qz(c, zz.z1, zz.z2);
            let p = lat.pz(c, zz.z1, zz.z2);
            if p.norm() < cfg.guard {
                return Err(HzError::pre("sample point too close to a real analytic cycle"));
            }
            let qc = q.conj().powi(1 - kk);
            a += qc / p.conj() * (y1.powi(kk - 2) * y2.powi(kk));
            b += qc / (p * (y1 / y2)) * (y1.powi(kk) * y2.powi(kk - 2));
        }
        Ok(vec![a, b])
    };
    let d1 = dbar(|w| omega_pair(Point { z1: w, z2: z.z2 }).map(|v| vec![v[0]]), z.z1, h)?;
    let d2 = dbar(|w| omega_pair(Point { z1: z.z1, z2: w }).map(|v| vec![v[1]]), z.z2, h)?;
    let (y1, y2) = (z.y1(), z.y2());
    let lhs = -y2.powi(-kk) * xi((2 - k) as f64, y1, &d1)[0] - y1.powi(-kk) * xi((2 - k) as f64, y2, &d2)[0];
    let omega: C = coords.iter().map(|c| lat.qz(c, z.z1, z.z2).powi(-kk)).sum();
    let rhs = omega * (-2.0 * (k - 1) as f64);
    Ok(Residual { residual: relative(&[lhs], &[rhs]), truncation: 0.0, tolerance })
}

/// Residual of `y2^{-k} xi_{z1} M1 = y1^{-k} xi_{z2} M2 = -xi_tau DN` at `(tau, Z)`,
/// the componentwise form of `xi_{-k,Z} Theta^M = 2 xi_{k,tau} Theta^DN`.
pub fn check_theta_xi(lat: &HilbertLattice, k: i64, tau: C, z: Point, tolerance: f64) -> Result<Residual> {
    let h = XI_STEP;
    let kk = k as i32;
    let order = lat.fq.order();
    // the point set is frozen at the generous radius of the smallest imaginary part in the stencil
    let radius = gaussian_height(tau.im - h) * 1.5;
    let mut pts: Vec<Vec<Rat>> = vec![];
    let mut cosets = vec![];
    for beta in 0..order {
        for t in ball(lat, beta, None, z, radius)? {
            pts.push(t.coords);
            cosets.push(beta);
        }
    }
    let theta = |kind: ThetaKind, tt: C, zz: Point| -> Vec<C> {
        let (u, v) = (tt.re, tt.im);
        let (y1, y2) = (zz.y1(), zz.y2());
        let mut out = vec![C::new(0.0, 0.0); order];
        for (c, &b) in pts.iter().zip(&cosets) {
            let q = lat.qz(c, zz.z1, zz.z2);
            let p = lat.pz(c, zz.z1, zz.z2);
            let maj = q.norm_sqr() / (4.0 * y1 * y2) + y1 * p.norm_sqr() / (4.0 * y2);
            let g = C::new(0.0, 2.0 * PI * u * to_f64(&lat.norm(c))).exp() * (-2.0 * PI * v * maj).exp();
            let w = match kind {
                ThetaKind::DoiNaganuma => q.powi(kk) / (y1 * y2).powi(kk) * v,
                ThetaKind::Millson1 => q.powi(kk - 1) * p * v.powi(kk),
                ThetaKind::Millson2 => q.powi(kk - 1) * p.conj() * (v.powi(kk) * y1 / y2),
            };
            out[b] += w * g;
        }
        out
    };
    let dn = dbar(|t| Ok(theta(ThetaKind::DoiNaganuma, t, z)), tau, h)?;
    let m1 = dbar(|w| Ok(theta(ThetaKind::Millson1, tau, Point { z1: w, z2: z.z2 })), z.z1, h)?;
    let m2 = dbar(|w| Ok(theta(ThetaKind::Millson2, tau, Point { z1: z.z1, z2: w })), z.z2, h)?;
    let (y1, y2) = (z.y1(), z.y2());
    let target: Vec<C> = xi(k as f64, tau.im, &dn).iter().map(|c| -c).collect();
    let a: Vec<C> = xi((2 - k) as f64, y1, &m1).iter().map(|c| c * y2.powi(-kk)).collect();
    let b: Vec<C> = xi((2 - k) as f64, y2, &m2).iter().map(|c| c * y1.powi(-kk)).collect();
    let res = fmax(relative(&a, &target), relative(&b, &target));
    Ok(Residual { residual: res, truncation: 0.0, tolerance })
}

fn random_point<R: Rng>(rng: &mut R) -> Point {
    Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0))
}

/// Worst relative residual of the transformation laws of `q_Z` and `p_Z` over `count` random `(gamma, Z, X)`.
pub fn qp_invariance_residual(lat: &HilbertLattice, seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    for _ in 0..count * 50 {
        if done == count {
            break;
        }
        let z = random_point(&mut rng);
        let g = lat.random_element(&mut rng, 4);
        let Ok(x) = lat.vector((0..4).map(|_| rat(rng.gen_range(-20..20), lat.d)).collect()) else { continue };
        done += 1;
        let (gz, j1, j2) = act_point(lat, &g, z);
        let back = match lat.act(&g.inverse(), &x) {
            Ok(b) => b,
            Err(_) => return f64::NAN,
        };
        let lq = lat.qz(&x.coords, gz.z1, gz.z2);
        let rq = lat.qz(&back.coords, z.z1, z.z2) / (j1 * j2);
        let lp = lat.pz(&x.coords, gz.z1, gz.z2);
        let rp = lat.pz(&back.coords, z.z1, z.z2) * j1 / j2;
        worst = fmax(worst, fmax((lq - rq).norm() / (1.0 + lq.norm()), (lp - rp).norm() / (1.0 + lp.norm())));
    }
    worst
}

/// Worst residual of `Q(X_Z) = |q_Z|^2/(4 y1 y2)` and `Q(X_Z^perp) = -y1 |p_Z|^2/(4 y2)` against the
/// projections onto an orthogonal basis of `M(Z)` and its complement.
pub fn norm_identity_residual(lat: &HilbertLattice, seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let z = random_point(&mut rng);
        let x: Vec<Rat> = (0..4).map(|_| rat(rng.gen_range(-20..20), lat.d)).collect();
        let basis = real::grassmann_basis(z.z1.re, z.y1(), z.z2.re, z.y2());
        let xm = lat.real_matrix(&x);
        let c: Vec<f64> = basis.iter().map(|b| real::pair(&xm, b)).collect();
        let pos = (c[0] * c[0] + c[1] * c[1]) / 4.0;
        let neg = -(c[2] * c[2] + c[3] * c[3]) / 4.0;
        let q = lat.qz(&x, z.z1, z.z2);
        let p = lat.pz(&x, z.z1, z.z2);
        let scale = 1.0 + pos.abs() + neg.abs();
        worst = fmax(worst, (pos - q.norm_sqr() / (4.0 * z.y1() * z.y2())).abs() / scale);
        worst = fmax(worst, (neg + z.y1() * p.norm_sqr() / (4.0 * z.y2())).abs() / scale);
        worst = fmax(worst, (pos + neg - to_f64(&lat.norm(&x))).abs() / scale);
    }
    worst
}

/// Default sample points for the xi checks, chosen away from the real analytic cycles.
pub fn xi_sample_points() -> [(C, Point); 2] {
    [
        (C::new(0.1, 0.9), Point::new(0.13, 1.1, -0.27, 0.8)),
        (C::new(-0.35, 1.2), Point::new(0.41, 0.7, 0.05, 1.3)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    #[test]
    fn norm_identities_match_projections() {
        let lat = build_lattice(5).unwrap();
        assert!(norm_identity_residual(&lat, 11, 100) < 1e-10);
    }

    #[test]
    fn q_and_p_transform() {
        for d in [5, 8, 13] {
            let lat = build_lattice(d).unwrap();
            let r = qp_invariance_residual(&lat, 12, 100);
            assert!(r < 1e-10, "D={d}: {r}");
        }
    }

    #[test]
    fn ellipsoid_matches_box() {
        let a = [[2.0, 0.3, 0.0, 0.1], [0.3, 1.5, 0.2, 0.0], [0.0, 0.2, 1.0, 0.1], [0.1, 0.0, 0.1, 3.0]];
        let s = [0.2, 0.0, 0.4, 0.6];
        let got = ellipsoid_points(&a, &s, 6.0);
        let mut count = 0;
        for n0 in -5i64..=5 {
            for n1 in -5i64..=5 {
                for n2 in -5i64..=5 {
                    for n3 in -5i64..=5 {
                        let x = [n0 as f64 + s[0], n1 as f64 + s[1], n2 as f64 + s[2], n3 as f64 + s[3]];
                        let v: f64 = (0..4).map(|i| (0..4).map(|j| x[i] * a[i][j] * x[j]).sum::<f64>()).sum();
                        if v <= 6.0 {
                            count += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(got.len(), count);
    }

    #[test]
    fn omega_is_modular() {
        let lat = build_lattice(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cfg = SumConfig::default();
        let z = Point::new(0.1, 1.2, -0.2, 0.9);
        for (m, beta) in [(int(1), 0), (rat(1, 5), 1)] {
            let Ok(w) = eval_omega(OmegaKind::Cusp, &lat, 4, &m, beta, z, &cfg) else { continue };
            for _ in 0..3 {
                let g = lat.random_element(&mut rng, 3);
                let (gz, j1, j2) = act_point(&lat, &g, z);
                let wg = eval_omega(OmegaKind::Cusp, &lat, 4, &m, beta, gz, &cfg).unwrap();
                let expect = w.value * (j1 * j2).powi(4);
                assert!((wg.value - expect).norm() < 1e-6 * (1.0 + expect.norm()), "{} vs {}", wg.value, expect);
            }
        }
    }

    #[test]
    fn omega_even_weight_symmetry_and_decay() {
        let lat = build_lattice(5).unwrap();
        let cfg = SumConfig { height: 8.0, guard: 1e-6 };
        let z = Point::new(0.1, 1.2, -0.2, 0.9);
        let a = eval_omega(OmegaKind::Cusp, &lat, 4, &int(1), 0, z, &cfg).unwrap();
        assert!(a.terms > 0 && a.value.norm() > 0.0);
        let small = eval_omega(OmegaKind::Cusp, &lat, 4, &int(1), 0, Point::new(0.1, 6.0, -0.2, 5.0), &cfg).unwrap();
        assert!(small.value.norm() < a.value.norm());
        assert!(eval_omega(OmegaKind::Cusp, &lat, 4, &int(-1), 0, z, &cfg).is_err());
        assert!(eval_omega(OmegaKind::Mero, &lat, 4, &int(1), 0, z, &cfg).is_err());
    }

    #[test]
    fn mero_guard_trips_on_the_cycle() {
        let lat = build_lattice(5).unwrap();
        // X = (1, 1, 0, 0) has q_Z(X) = -z1 z2 - 1, vanishing at Z = (i, i)
        let z = Point::new(0.0, 1.0, 0.0, 1.0);
        assert!(lat.qz(&[int(1), int(1), int(0), int(0)], z.z1, z.z2).norm() < 1e-12);
        let cfg = SumConfig { height: 4.0, guard: 1e-6 };
        assert!(eval_omega(OmegaKind::Mero, &lat, 4, &int(-1), 0, z, &cfg).is_err());
        let off = Point::new(0.1, 1.0, 0.0, 1.3);
        assert!(eval_omega(OmegaKind::Mero, &lat, 4, &int(-1), 0, off, &cfg).is_ok());
    }

    #[test]
    fn locally_harmonic_weights() {
        let lat = build_lattice(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let cfg = SumConfig { height: 9.0, guard: 1e-6 };
        let z = Point::new(0.13, 1.1, -0.27, 0.8);
        let (a, b) = eval_locally_harmonic(&lat, 4, &int(1), 0, z, &cfg).unwrap();
        for _ in 0..3 {
            let g = lat.random_element(&mut rng, 3);
            let (gz, j1, j2) = act_point(&lat, &g, z);
            let (ga, gb) = eval_locally_harmonic(&lat, 4, &int(1), 0, gz, &cfg).unwrap();
            let ea = a.value * j1.powi(-2) * j2.powi(-4);
            let eb = b.value * j1.powi(-4) * j2.powi(-2);
            assert!((ga.value - ea).norm() < 1e-6 * (1.0 + ea.norm()));
            assert!((gb.value - eb).norm() < 1e-6 * (1.0 + eb.norm()));
        }
        assert!(a.tail.is_finite() && b.tail.is_finite());
    }

    #[test]
    fn locally_harmonic_blows_up_near_a_cycle() {
        let lat = build_lattice(5).unwrap();
        let cfg = SumConfig { height: 5.0, guard: 1e-9 };
        // Y = (1, -1, 0, 0) has p_Z(Y) = (conj(z1) z2 - 1) / y1, vanishing on z2 = z1 / |z1|^2
        let y = [int(1), int(-1), int(0), int(0)];
        let z1 = C::new(0.3, 1.2);
        let w = z1 / z1.norm_sqr();
        let mut last = 0.0;
        for eps in [1e-2, 1e-3, 1e-4] {
            let z = Point { z1, z2: w + C::new(0.0, eps) };
            let p = lat.pz(&y, z.z1, z.z2);
            let (a, _) = eval_locally_harmonic(&lat, 4, &int(1), 0, z, &cfg).unwrap();
            assert!(a.value.norm() > 5.0 * last);
            last = a.value.norm();
            // 1/|p| growth
            assert!(a.value.norm() * p.norm() < 100.0);
        }
        let on = Point { z1, z2: w };
        assert!(lat.pz(&y, on.z1, on.z2).norm() < 1e-12);
        assert!(eval_locally_harmonic(&lat, 4, &int(1), 0, on, &cfg).is_err());
    }

    #[test]
    fn locally_harmonic_xi_relation() {
        let lat = build_lattice(5).unwrap();
        let cfg = SumConfig { height: 6.0, guard: 1e-6 };
        for (_, z) in xi_sample_points() {
            let r = check_locally_harmonic_xi(&lat, 4, &int(1), 0, z, &cfg, 1e-4).unwrap();
            assert!(r.passes(), "{r:?}");
        }
    }

    #[test]
    fn theta_xi_relation() {
        let lat = build_lattice(5).unwrap();
        for (tau, z) in xi_sample_points() {
            let r = check_theta_xi(&lat, 4, tau, z, 1e-4).unwrap();
            assert!(r.passes(), "{r:?}");
        }
    }

    #[test]
    fn dn_theta_is_modular_in_tau() {
        let lat = build_lattice(5).unwrap();
        let z = Point::new(0.13, 1.1, -0.27, 0.8);
        let s = lat.fq.weil_s();
        for tau in [C::new(0.1, 1.05), C::new(-0.3, 0.9)] {
            let (a, _) = eval_theta(ThetaKind::DoiNaganuma, &lat, 4, -tau.inv(), z).unwrap();
            let (b, _) = eval_theta(ThetaKind::DoiNaganuma, &lat, 4, tau, z).unwrap();
            let rb = crate::cmat::apply(&s, &b);
            let f = tau.powi(4);
            let res = a.iter().zip(&rb).map(|(x, y)| (x - y * f).norm()).fold(0.0, fmax);
            let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
            assert!(res / scale < 1e-6, "{res}");
        }
    }
}

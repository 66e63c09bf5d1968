//! Acceptance checks shared by the `verify` command and the acceptance test target.
//!
//! Every check is deterministic: random inputs come from fixed seeds and floats in
//! reports are printed with three significant digits.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::analytic::{self, SumConfig};
use crate::cusp::split_sublattices;
use crate::error::{HzError, Result};
use crate::fqm::FqModule;
use crate::lattice::{build_lattice, HilbertLattice, LatticeVector};
use crate::numeric::{self, fmax, Residual, C};
use crate::qseries::{QSeries, QuadScalar};
use crate::rat::{fmt_rat, int, rat, Rat};
use crate::theta::{certify_preimage, gate_points, k_module, n_module, theta_n_negative, theta_n_star, unary_theta, xi_preimage_plus};
use crate::trace::{explicit_formula, trace_for_x, PairingOrder, TraceOptions};
use crate::wforms::{honest_thetas, plus_space_basis, WeakForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Core,
    Extended,
}

impl SuiteKind {
    pub fn parse(s: &str) -> Result<SuiteKind> {
        match s {
            "core" => Ok(SuiteKind::Core),
            "extended" => Ok(SuiteKind::Extended),
            _ => Err(HzError::pre(format!("unknown suite {s:?}, expected core or extended"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SuiteKind::Core => "core",
            SuiteKind::Extended => "extended",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub criterion: u32,
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl Check {
    fn new(criterion: u32, name: impl Into<String>, pass: bool, detail: Value) -> Check {
        Check { criterion, name: name.into(), pass, detail }
    }

    fn residual(criterion: u32, name: impl Into<String>, r: &Residual) -> Check {
        Check::new(criterion, name, r.passes(), r.to_json())
    }

    fn below(criterion: u32, name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        let pass = value.is_finite() && value < tolerance;
        Check::new(criterion, name, pass, json!({ "residual": sci(value), "tolerance": format!("{tolerance:.1e}") }))
    }

    fn failed(criterion: u32, name: impl Into<String>, e: &HzError) -> Check {
        Check::new(criterion, name, false, json!({ "error": e.to_string() }))
    }

    pub fn to_json(&self) -> Value {
        json!({ "criterion": self.criterion, "name": self.name, "pass": self.pass, "detail": self.detail })
    }
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

/// Runs a group of checks, turning an error into a single failed check.
fn guarded(criterion: u32, name: &str, f: impl FnOnce() -> Result<Vec<Check>>) -> Vec<Check> {
    match f() {
        Ok(v) => v,
        Err(e) => vec![Check::failed(criterion, name, &e)],
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub d: i64,
    pub k: i64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn criterion_passes(&self, n: u32) -> bool {
        self.checks.iter().filter(|c| c.criterion == n).all(|c| c.pass)
    }

    pub fn to_json(&self) -> Value {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        json!({
            "suite": self.suite.name(),
            "D": self.d,
            "k": self.k,
            "pass": self.passes(),
            "failed": failed,
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Random finitely supported series with exponents in `grade + [-1, 3]`.
pub fn random_series<R: Rng>(rng: &mut R, fq: &Arc<FqModule>, dual: bool, weight: Rat, terms: usize) -> QSeries {
    let mut s = QSeries::new(fq.clone(), dual, weight, 1, int(10));
    for _ in 0..terms {
        let b = rng.gen_range(0..fq.order());
        let n = s.grade(b) + int(rng.gen_range(-1..=3));
        let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=4));
        s.add_term(b, n, c).expect("exponent respects the grading");
    }
    s
}

/// Weil representation relations and the Milgram sum.
pub fn weil_checks(ds: &[i64]) -> Vec<Check> {
    let mut out = vec![];
    for &d in ds {
        out.extend(guarded(1, &format!("weil D={d}"), || {
            let lat = build_lattice(d)?;
            let [u, b, f] = lat.fq.relation_residuals();
            Ok(vec![
                Check::below(1, format!("D={d} unitarity"), u, 1e-12),
                Check::below(1, format!("D={d} (ST)^3=S^2"), b, 1e-12),
                Check::below(1, format!("D={d} S^4=I"), f, 1e-12),
                Check::below(1, format!("D={d} Milgram"), lat.fq.milgram_residual(), 1e-10),
            ])
        }));
    }
    out
}

/// `B(e_i, e_j)` from `Q(X) = -det [[a, nu'], [nu, b]]` computed in the field.
pub fn gram_from_determinant(lat: &HilbertLattice) -> Vec<Vec<Rat>> {
    let f = &lat.field;
    let q = |x: &[Rat]| -> Rat {
        let m = lat.matrix(x);
        let det = f.mul(&m[0][0], &m[1][1]).sub(&f.mul(&m[0][1], &m[1][0]));
        -det.x
    };
    let e = |i: usize| -> Vec<Rat> { (0..4).map(|j| int((i == j) as i64)).collect() };
    (0..4)
        .map(|i| {
            (0..4)
                .map(|j| {
                    let s: Vec<Rat> = e(i).iter().zip(e(j)).map(|(a, b)| a + b).collect();
                    q(&s) - q(&e(i)) - q(&e(j))
                })
                .collect()
        })
        .collect()
}

pub fn geometry_checks(d: i64) -> Vec<Check> {
    guarded(2, "geometry", || {
        let lat = build_lattice(d)?;
        let oracle = gram_from_determinant(&lat);
        let same = oracle == lat.gram_q();
        Ok(vec![
            Check::new(2, format!("D={d} Gram matches the determinant form"), same, json!({ "exact": same })),
            Check::below(2, "q_Z and p_Z transformation", analytic::qp_invariance_residual(&lat, 12, 100), 1e-10),
            Check::below(2, "norm identities", analytic::norm_identity_residual(&lat, 11, 100), 1e-10),
        ])
    })
}

pub fn algebra_checks(seed: u64, pairs: usize) -> Vec<Check> {
    guarded(3, "algebra", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = build_lattice(5)?;
        let split = split_sublattices(&lat, &lat.vector_i([-3, -3, 0, 1])?)?;
        let sum = &split.sum;
        let (mut zero_ok, mut bracket_ok, mut adj_ok) = (true, true, true);
        for _ in 0..pairs {
            let f = random_series(&mut rng, &sum.left, false, rat(3, 2), 6);
            let g = random_series(&mut rng, &sum.right, false, rat(1, 2), 6);
            zero_ok &= f.rc_bracket(&g, 0, sum)?.coeffs == f.tensor(&g, sum)?.coeffs;
            let lhs = f.rc_bracket(&g, 1, sum)?;
            let a = f.derivative(1).tensor(&g, sum)?.scale(&QuadScalar::rational(rat(1, 2)));
            let b = f.tensor(&g.derivative(1), sum)?.scale(&QuadScalar::rational(rat(3, 2)));
            bracket_ok &= lhs.coeffs == a.sub(&b)?.coeffs && lhs.weight == int(4);

            let fl = random_series(&mut rng, &lat.fq, true, int(-2), 8);
            let gk = random_series(&mut rng, &split.sub.k, false, int(4), 8);
            let left = split.sub.arrow_down(&fl)?.ct_pair(&gk)?;
            let right = fl.ct_pair(&split.sub.arrow_up(&gk)?)?;
            adj_ok &= left == right;
        }
        Ok(vec![
            Check::new(3, "bracket n=0 is the tensor product", zero_ok, json!({ "pairs": pairs })),
            Check::new(3, "bracket (3/2, 1/2, 1)", bracket_ok, json!({ "pairs": pairs })),
            Check::new(3, "arrow adjunction", adj_ok, json!({ "pairs": pairs })),
        ])
    })
}

pub fn theta_checks() -> Vec<Check> {
    guarded(4, "thetas", || {
        let ceiling = int(8);
        let mut rs = vec![];
        for n in 1..=6 {
            for w in 0..=1 {
                let t = unary_theta(&k_module(n)?, w, &ceiling)?;
                rs.extend(gate_points().iter().flat_map(|&tau| [numeric::s_residual(&t, tau, 1e-8), numeric::t_residual(&t, tau, 1e-8)]));
            }
        }
        let mut ms = vec![];
        for m in 1..=6 {
            let nf = n_module(m)?;
            for s in [theta_n_negative(&nf, &ceiling)?, theta_n_star(&nf, 1, &ceiling)?] {
                ms.extend(gate_points().iter().flat_map(|&tau| [numeric::s_residual(&s, tau, 1e-8), numeric::t_residual(&s, tau, 1e-8)]));
            }
        }
        let vanishes = unary_theta(&k_module(1)?, 1, &int(10))?.is_zero();
        Ok(vec![
            Check::residual(4, "unary thetas N=1..6", &Residual::worst(&rs)),
            Check::residual(4, "N-lattice thetas M=1..6", &Residual::worst(&ms)),
            Check::new(4, "weight 3/2 theta vanishes at N=1", vanishes, json!({ "exact": vanishes })),
            Check::residual(4, "raising lemma N=1, tau=i", &numeric::check_raising_lemma(1, C::new(0.0, 1.0), 1e-5)),
            Check::residual(4, "raising lemma N=3, tau=(1+2i)/3", &numeric::check_raising_lemma(3, C::new(1.0 / 3.0, 2.0 / 3.0), 1e-5)),
        ])
    })
}

/// Plus-space basis used by the residue and trace checks.
pub fn trace_basis(lat: &HilbertLattice, k: i64) -> Result<Vec<WeakForm>> {
    plus_space_basis(lat, k, &rat(6, 5), &int(10))
}

pub fn residue_checks(lat: &HilbertLattice, basis: &[WeakForm]) -> Vec<Check> {
    guarded(5, "residue pairing", || {
        let top = basis.iter().map(WeakForm::max_pole).max().unwrap_or_else(Rat::zero);
        let thetas = honest_thetas(lat, &top.ceil().max(int(1)))?;
        let mut nonzero = vec![];
        for (i, f) in basis.iter().enumerate() {
            for (name, g) in &thetas {
                let ct = f.series.ct_pair(g)?;
                if !ct.is_zero() {
                    nonzero.push(format!("f{i} x {name}: {ct}"));
                }
            }
        }
        let detail = json!({ "forms": basis.len(), "thetas": thetas.len(), "nonzero": nonzero });
        Ok(vec![Check::new(5, "residue pairing vanishes", nonzero.is_empty() && !basis.is_empty(), detail)])
    })
}

pub fn preimage_checks() -> Vec<Check> {
    (2..=10)
        .flat_map(|m| {
            guarded(6, &format!("preimage M={m}"), || {
                let plus = xi_preimage_plus(&n_module(m)?, &int(13), None)?;
                let rep = certify_preimage(&plus, &gate_points())?;
                Ok(vec![Check::new(6, format!("preimage M={m}"), rep.passes(), rep.to_json())])
            })
        })
        .collect()
}

/// The form of largest pole order in the basis.
pub fn trace_form(basis: &[WeakForm]) -> Result<&WeakForm> {
    basis.iter().max_by_key(|f| f.max_pole()).ok_or_else(|| HzError::pre("empty basis"))
}

/// First primitive `X` (in a fixed enumeration order, height at most `h`) with `Q(X) < 0` which
/// satisfies `pred`; with `disjoint`, its cycle must also avoid the poles of `f`.
pub fn find_vector(lat: &HilbertLattice, f: &WeakForm, h: i64, disjoint: bool, pred: impl Fn(&LatticeVector) -> Result<bool>) -> Result<LatticeVector> {
    let r = -h..=h;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    let x = lat.vector_i([a, b, c, d])?;
                    if !x.norm.is_negative() || lat.content(&x.coords) != 1 {
                        continue;
                    }
                    if disjoint && !crate::trace::intersecting_vectors(lat, &f.series, &x, 4)?.is_empty() {
                        continue;
                    }
                    if pred(&x)? {
                        return Ok(x);
                    }
                }
            }
        }
    }
    Err(HzError::pre("no suitable vector in the search box"))
}

pub const TRACE_X: [i64; 4] = [-3, -3, 0, 1];

pub fn trace_checks(lat: &HilbertLattice, basis: &[WeakForm]) -> Vec<Check> {
    guarded(7, "trace", || {
        let f = trace_form(basis)?;
        let x = lat.vector_i(TRACE_X)?;
        let base = TraceOptions::default();
        let down = trace_for_x(lat, f, &x, &base)?;
        let isotropic = !down.anisotropic && !down.per_line.is_empty();
        let radicand_one = down.per_line.iter().all(|t| {
            let alpha = QuadScalar::new(t.line.width_rational(), t.line.n_k as u64);
            let c = QuadScalar::new(int(1), 2).mul(&alpha).mul(&t.ct);
            c.is_zero() || (c.radicand == 1 && c.rat == t.contribution)
        });
        let up = trace_for_x(lat, f, &x, &TraceOptions { order: PairingOrder::Up, ..base.clone() })?;
        let shifted = trace_for_x(lat, f, &x, &TraceOptions { shift: true, ..base.clone() })?;
        let doubled = trace_for_x(lat, f, &x, &TraceOptions { ceiling: &base.ceiling * int(2), ..base.clone() })?;
        let neg = lat.vector(x.coords.iter().map(|c| -c).collect())?;
        let negated = trace_for_x(lat, f, &neg, &base)?;
        let value = |r: &crate::trace::TraceResult| fmt_rat(&r.value);
        let split = split_sublattices(lat, &x)?;
        let mut out = vec![
            Check::new(
                7,
                "trace returns with radicand 1 on an isotropic P",
                isotropic && radicand_one,
                json!({ "X": x.to_json(), "value": value(&down), "lines": down.per_line.len(), "M": down.m, "index": split.index, "max_pole": fmt_rat(&f.max_pole()) }),
            ),
            Check::new(7, "arrow up equals arrow down", up.value == down.value, json!({ "down": value(&down), "up": value(&up) })),
            Check::new(7, "preimage shift invariance", shifted.value == down.value, json!({ "shifted": value(&shifted) })),
            Check::new(7, "ceiling doubling invariance", doubled.value == down.value, json!({ "doubled": value(&doubled) })),
            Check::new(7, "X and -X agree", negated.value == down.value, json!({ "negated": value(&negated) })),
        ];
        let aniso = find_vector(lat, f, 3, true, |y| Ok(split_sublattices(lat, y)?.is_anisotropic()))?;
        let ra = trace_for_x(lat, f, &aniso, &base)?;
        out.push(Check::new(
            7,
            "anisotropic P gives 0",
            ra.value.is_zero() && ra.per_line.is_empty(),
            json!({ "X": aniso.to_json(), "value": value(&ra) }),
        ));
        // every M = 1 vector meets a pole cycle of every basis form, so the formula is evaluated
        // without the disjointness precondition; the preimage is zero and so is each line term
        let unit = find_vector(lat, f, 3, false, |y| {
            let s = split_sublattices(lat, y)?;
            Ok(s.m == 1 && !s.is_anisotropic())
        })?;
        let ru = explicit_formula(lat, f, &unit, &base)?;
        let meets = crate::trace::intersecting_vectors(lat, &f.series, &unit, base.height)?.len();
        out.push(Check::new(
            7,
            "M=1 gives 0",
            ru.value.is_zero() && ru.per_line.iter().all(|t| t.ct.is_zero()),
            json!({ "X": unit.to_json(), "value": value(&ru), "lines": ru.per_line.len(), "meeting_cycles": meets }),
        ));
        Ok(out)
    })
}

pub fn xi_checks(lat: &HilbertLattice, k: i64) -> Vec<Check> {
    guarded(8, "xi", || {
        let cfg = SumConfig { height: 6.0, guard: 1e-6 };
        let mut out = vec![];
        for (i, (tau, z)) in analytic::xi_sample_points().into_iter().enumerate() {
            let r = analytic::check_locally_harmonic_xi(lat, k, &int(1), 0, z, &cfg, 1e-4)?;
            out.push(Check::residual(8, format!("locally harmonic xi relation at point {i}"), &r));
            let r = analytic::check_theta_xi(lat, k, tau, z, 1e-4)?;
            out.push(Check::residual(8, format!("theta xi relation at point {i}"), &r));
        }
        Ok(out)
    })
}

/// Modularity of the lattice sums under random elements of the Hilbert modular group.
pub fn analytic_modularity_checks(lat: &HilbertLattice, k: i64) -> Vec<Check> {
    guarded(0, "analytic modularity", || {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cfg = SumConfig::default();
        let z = analytic::Point::new(0.1, 1.2, -0.2, 0.9);
        let w = analytic::eval_omega(analytic::OmegaKind::Cusp, lat, k, &int(1), 0, z, &cfg)?;
        let (a, b) = analytic::eval_locally_harmonic(lat, k, &int(1), 0, z, &cfg)?;
        let (mut rw, mut rl): (f64, f64) = (0.0, 0.0);
        for _ in 0..3 {
            let g = lat.random_element(&mut rng, 3);
            let (gz, j1, j2) = analytic::act_point(lat, &g, z);
            let wg = analytic::eval_omega(analytic::OmegaKind::Cusp, lat, k, &int(1), 0, gz, &cfg)?;
            let e = w.value * (j1 * j2).powi(k as i32);
            rw = fmax(rw, (wg.value - e).norm() / (1.0 + e.norm()));
            let (ga, gb) = analytic::eval_locally_harmonic(lat, k, &int(1), 0, gz, &cfg)?;
            let ea = a.value * j1.powi(2 - k as i32) * j2.powi(-k as i32);
            let eb = b.value * j1.powi(-k as i32) * j2.powi(2 - k as i32);
            rl = fmax(rl, fmax((ga.value - ea).norm() / (1.0 + ea.norm()), (gb.value - eb).norm() / (1.0 + eb.norm())));
        }
        Ok(vec![
            Check::below(0, "cusp form modularity", rw, 1e-6),
            Check::below(0, "locally harmonic weights", rl, 1e-6),
        ])
    })
}

/// Runs criteria 1 to 8; the extended suite adds the analytic modularity checks (criterion 0).
pub fn run_suite(kind: SuiteKind, d: i64, k: i64) -> Result<SuiteReport> {
    let lat = build_lattice(d)?;
    if k < 4 || k % 2 != 0 {
        return Err(HzError::pre("k must be even and at least 4"));
    }
    let mut checks = vec![];
    checks.extend(weil_checks(&[5, 8, 13]));
    checks.extend(geometry_checks(d));
    checks.extend(algebra_checks(21, 100));
    checks.extend(theta_checks());
    let basis = trace_basis(&lat, k);
    match &basis {
        Ok(b) => checks.extend(residue_checks(&lat, b)),
        Err(e) => checks.push(Check::failed(5, "plus-space basis", e)),
    }
    checks.extend(preimage_checks());
    match &basis {
        Ok(b) => checks.extend(trace_checks(&lat, b)),
        Err(e) => checks.push(Check::failed(7, "plus-space basis", e)),
    }
    checks.extend(xi_checks(&lat, k));
    if kind == SuiteKind::Extended {
        checks.extend(analytic_modularity_checks(&lat, k));
    }
    Ok(SuiteReport { suite: kind, d, k, checks })
}


//! Exact traces `tr = r * pi i` from constant terms of brackets of theta functions.

use std::collections::BTreeMap;

use num_integer::binomial;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::cusp::{isotropic_lines, split_sublattices, IsotropicLine};
use crate::error::{HzError, Result};
use crate::lattice::{HilbertLattice, LatticeVector};
use crate::qseries::{sha256_hex, QSeries, QuadScalar};
use crate::rat::{fmt_rat, int, rat_pow, Rat};
use crate::theta::{k_module, shift_form, unary_theta, view_in_rho_p, xi_preimage_plus, PreimageTable};
use crate::wforms::WeakForm;

/// `binom(k-3, k/2-1) (k-1) 16 Q(X)^{k/2}`.
pub fn constant_c(k: i64, qx: &Rat) -> Result<Rat> {
    if k < 4 || k % 2 != 0 {
        return Err(HzError::pre("k must be even and at least 4"));
    }
    if !qx.is_negative() {
        return Err(HzError::pre("Q(X) must be negative"));
    }
    let b = binomial(k - 3, k / 2 - 1);
    Ok(int(b * (k - 1) * 16) * rat_pow(qx, k / 2))
}

/// Which side of the sublattice the pairing is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingOrder {
    /// `f` restricted to `P + N` against the bracket.
    Down,
    /// `f` against the bracket induced up to `L`.
    Up,
}

#[derive(Debug, Clone)]
pub struct TraceOptions {
    /// Ceiling of the theta and preimage expansions.
    pub ceiling: Rat,
    /// Search height for isotropic lines and for intersecting vectors.
    pub height: i64,
    pub strict: bool,
    pub order: PairingOrder,
    /// Adds the exact weight-1/2 shift form to every preimage.
    pub shift: bool,
    /// Restricts the pairing to the slot `(m, beta)` and its negative.
    pub m_filter: Option<(Rat, usize)>,
    pub preimages: Option<PreimageTable>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            ceiling: int(3),
            height: 4,
            strict: false,
            order: PairingOrder::Down,
            shift: false,
            m_filter: None,
            preimages: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LineTerm {
    pub line: IsotropicLine,
    /// Constant term of the pairing.
    pub ct: QuadScalar,
    /// `sqrt(2) * alpha * ct`, rational after the radicals cancel.
    pub contribution: Rat,
}

#[derive(Debug, Clone)]
pub struct TraceResult {
    pub x: LatticeVector,
    pub k: i64,
    pub constant: Rat,
    /// `tr = value * pi i`.
    pub value: Rat,
    pub per_line: Vec<LineTerm>,
    pub anisotropic: bool,
    pub m: i64,
    pub flags: Vec<String>,
    pub digests: BTreeMap<String, String>,
}

impl TraceResult {
    pub fn to_json(&self) -> Value {
        json!({
            "value": fmt_rat(&self.value),
            "convention": "trace = value * pi * i",
            "X": self.x.to_json(),
            "k": self.k,
            "C": fmt_rat(&self.constant),
            "P_anisotropic": self.anisotropic,
            "M": self.m,
            "per_line": self.per_line.iter().map(|t| json!({
                "line": t.line.to_json(),
                "ct": t.ct.to_json(),
                "contribution": fmt_rat(&t.contribution),
            })).collect::<Vec<_>>(),
            "flags": self.flags,
            "inputs": self.digests,
        })
    }
}

fn filtered(f: &QSeries, filter: &Option<(Rat, usize)>) -> QSeries {
    let Some((m, b)) = filter else { return f.clone() };
    let nb = f.fq.neg(*b);
    let mut out = f.clone();
    out.coeffs.retain(|(n, c), _| *n == -m && (*c == *b || *c == nb));
    out
}

/// Vectors `Y` with `Q(Y) = m` in `beta + L` and `(X, Y) = 0`, for every principal-part slot of `f`.
pub fn intersecting_vectors(lat: &HilbertLattice, f: &QSeries, x: &LatticeVector, h: i64) -> Result<Vec<LatticeVector>> {
    let mut out = vec![];
    let mut seen = std::collections::BTreeSet::new();
    for (b, n, _) in f.principal_part() {
        let m = -n;
        if !seen.insert((b, m.clone())) {
            continue;
        }
        for y in lat.enumerate_vectors(b, &m, h)? {
            if lat.pair(&x.coords, &y.coords).is_zero() {
                out.push(y);
            }
        }
    }
    Ok(out)
}

fn digest_json(v: &Value) -> String {
    sha256_hex(v.to_string().as_bytes())
}

/// Trace of the meromorphic form attached to `X` against the weakly holomorphic input `f`.
pub fn trace_for_x(lat: &HilbertLattice, f: &WeakForm, x: &LatticeVector, opts: &TraceOptions) -> Result<TraceResult> {
    let series = filtered(&f.series, &opts.m_filter);
    let bad = intersecting_vectors(lat, &series, x, opts.height)?;
    if !bad.is_empty() {
        let list: Vec<String> = bad.iter().map(|y| format!("{:?}", y.coords.iter().map(fmt_rat).collect::<Vec<_>>())).collect();
        return Err(HzError::pre(format!("cycles intersect: (X, Y) = 0 for Y in {}", list.join(", "))));
    }
    explicit_formula(lat, f, x, opts)
}

/// The right-hand side of the trace formula without the check that the cycles of `X` and of
/// the poles of `f` are disjoint. Only `trace_for_x` gives it the meaning of a trace.
pub fn explicit_formula(lat: &HilbertLattice, f: &WeakForm, x: &LatticeVector, opts: &TraceOptions) -> Result<TraceResult> {
    if !x.norm.is_negative() {
        return Err(HzError::pre("trace needs Q(X) < 0"));
    }
    if f.series.fq.order() != lat.fq.order() || f.series.fq_id() != lat_fq_id(lat) {
        return Err(HzError::pre("weak form does not belong to this lattice"));
    }
    let k = f.k();
    let constant = constant_c(k, &x.norm)?;
    let series = filtered(&f.series, &opts.m_filter);
    let pole = f.max_pole();
    if pole > opts.ceiling {
        return Err(HzError::pre("ceiling is below the pole order of f"));
    }

    let mut digests = BTreeMap::new();
    digests.insert("f".to_string(), digest_json(&f.series.to_json()));
    digests.insert("X".to_string(), digest_json(&x.to_json()));
    let table_digest = opts.preimages.as_ref().map_or_else(|| PreimageTable::builtin().digest, |t| t.digest.clone());
    digests.insert("preimages".to_string(), table_digest);

    let split = split_sublattices(lat, x)?;
    let mut result = TraceResult {
        x: x.clone(),
        k,
        constant: constant.clone(),
        value: Rat::zero(),
        per_line: vec![],
        anisotropic: split.is_anisotropic(),
        m: split.m,
        flags: vec![],
        digests,
    };
    if result.anisotropic {
        return Ok(result);
    }
    let report = isotropic_lines(lat, &split, opts.height)?;
    if !report.stable {
        result.flags.push(format!("isotropic line classes changed between heights {} and {}", opts.height, 2 * opts.height));
    }
    if opts.strict && !result.flags.is_empty() {
        return Err(HzError::Strict(result.flags.join("; ")));
    }

    // the preimage is only needed up to the pole order of f, with some room for the shift form
    let work = &opts.ceiling + int(2);
    let mut pre = xi_preimage_plus(&split.n_fq, &work, opts.preimages.as_ref())?;
    if opts.shift && split.m >= 2 {
        pre = pre.add(&shift_form(&split.n_fq, &work)?)?;
    }
    let n = int((k - 2) / 2);
    let n = n.to_integer().try_into().unwrap_or(0u32);
    let f_down = split.sub.arrow_down(&series)?;
    let mut total = QuadScalar::zero();
    for line in &report.lines {
        let th = unary_theta(&k_module(line.n_k)?, 1, &work)?;
        let view = view_in_rho_p(&th, &split, line)?;
        let g = view.rc_bracket(&pre, n, &split.sum)?;
        let ct = match opts.order {
            PairingOrder::Down => f_down.ct_pair(&g)?,
            PairingOrder::Up => series.ct_pair(&split.sub.arrow_up(&g)?)?,
        };
        let alpha = QuadScalar::new(line.width_rational(), line.n_k as u64);
        let c = QuadScalar::new(int(1), 2).mul(&alpha).mul(&ct);
        if c.radicand != 1 && !c.is_zero() {
            return Err(HzError::inv(format!("radicals did not cancel: contribution {c}")));
        }
        total = total.add(&c)?;
        result.per_line.push(LineTerm { line: line.clone(), ct, contribution: c.rat.clone() });
    }
    if total.radicand != 1 && !total.is_zero() {
        return Err(HzError::inv("radicals did not cancel in the total"));
    }
    result.value = &total.rat / &constant;
    Ok(result)
}

fn lat_fq_id(lat: &HilbertLattice) -> String {
    crate::qseries::module_id(&lat.fq)
}

#[derive(Debug, Clone)]
pub struct TotalResult {
    pub value: Rat,
    pub classes: Vec<TraceResult>,
    pub flags: Vec<String>,
}

impl TotalResult {
    pub fn to_json(&self) -> Value {
        json!({
            "value": fmt_rat(&self.value),
            "convention": "trace = value * pi * i",
            "orbits": self.classes.iter().map(TraceResult::to_json).collect::<Vec<_>>(),
            "flags": self.flags,
        })
    }
}

/// Sum of `trace_for_x` over orbit representatives of `{X in mu + L : Q(X) = n}` up to height `h`.
pub fn trace_total(lat: &HilbertLattice, f: &WeakForm, n: &Rat, mu: usize, h: i64, opts: &TraceOptions) -> Result<TotalResult> {
    if !n.is_negative() {
        return Err(HzError::pre("trace_total needs a negative norm"));
    }
    let vectors = lat.enumerate_vectors(mu, n, h)?;
    let orbits = crate::lattice::orbit_classes(lat, &vectors, 4 * h)?;
    if !orbits.undecided.is_empty() {
        return Err(HzError::pre(format!(
            "orbit classification undecided for pairs {:?}",
            orbits.undecided
        )));
    }
    let mut value = Rat::zero();
    let mut classes = vec![];
    let mut flags = vec![];
    for c in &orbits.classes {
        let r = trace_for_x(lat, f, &c.representative, opts)?;
        value += &r.value;
        flags.extend(r.flags.iter().cloned());
        classes.push(r);
    }
    Ok(TotalResult { value, classes, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn constants() {
        assert_eq!(constant_c(4, &int(-1)).unwrap(), int(48));
        assert_eq!(constant_c(6, &int(-1)).unwrap(), int(-240));
        assert_eq!(constant_c(4, &rat(-1, 5)).unwrap(), rat(48, 25));
        assert!(constant_c(5, &int(-1)).is_err());
        assert!(constant_c(4, &int(1)).is_err());
    }

    use crate::lattice::build_lattice;
    use crate::wforms::plus_space_basis;

    fn setup() -> (HilbertLattice, Vec<WeakForm>) {
        let lat = build_lattice(5).unwrap();
        let basis = plus_space_basis(&lat, 4, &rat(6, 5), &int(10)).unwrap();
        (lat, basis)
    }

    fn value(lat: &HilbertLattice, f: &WeakForm, x: [i64; 4], opts: &TraceOptions) -> Rat {
        trace_for_x(lat, f, &lat.vector_i(x).unwrap(), opts).unwrap().value
    }

    #[test]
    fn evaluation_choices_agree() {
        let (lat, basis) = setup();
        let x = [-3, -3, 0, 1];
        let base = TraceOptions::default();
        // only the form with the largest pole keeps its cycles away from this X
        for f in &basis[3..] {
            let v = value(&lat, f, x, &base);
            assert_eq!(v, value(&lat, f, x, &TraceOptions { order: PairingOrder::Up, ..base.clone() }));
            assert_eq!(v, value(&lat, f, x, &TraceOptions { shift: true, ..base.clone() }));
            assert_eq!(v, value(&lat, f, x, &TraceOptions { ceiling: int(6), ..base.clone() }));
            assert_eq!(v, value(&lat, f, [3, 3, 0, -1], &base));
        }
    }

    #[test]
    fn line_terms_cancel_under_the_glue_reflection() {
        // the brackets are nonzero but odd under a reflection of the discriminant data that
        // fixes the restriction of f, so every constant term vanishes
        let (lat, basis) = setup();
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let split = split_sublattices(&lat, &x).unwrap();
        let report = isotropic_lines(&lat, &split, 4).unwrap();
        assert_eq!(report.lines.len(), 2);
        let work = int(5);
        let pre = xi_preimage_plus(&split.n_fq, &work, None).unwrap();
        for line in &report.lines {
            let th = unary_theta(&k_module(line.n_k).unwrap(), 1, &work).unwrap();
            let g = view_in_rho_p(&th, &split, line).unwrap().rc_bracket(&pre, 1, &split.sum).unwrap();
            assert!(!g.is_zero());
        }
        for f in &basis {
            let r = explicit_formula(&lat, f, &x, &TraceOptions::default()).unwrap();
            assert!(r.per_line.iter().all(|t| t.ct.is_zero()));
            assert!(r.value.is_zero());
        }
    }

    #[test]
    fn anisotropic_complement_gives_zero() {
        let (lat, basis) = setup();
        let r = trace_for_x(&lat, &basis[3], &lat.vector_i([-3, -2, 0, 0]).unwrap(), &TraceOptions::default()).unwrap();
        assert!(r.anisotropic && r.per_line.is_empty() && r.value.is_zero());
    }

    #[test]
    fn intersecting_cycles_are_refused() {
        let (lat, basis) = setup();
        let e = trace_for_x(&lat, &basis[3], &lat.vector_i([1, 1, 0, 0]).unwrap(), &TraceOptions::default()).unwrap_err();
        assert!(matches!(&e, HzError::Precondition(m) if m.contains("cycles intersect")), "{e}");
        // the formula itself still evaluates, and with M = 1 it is zero
        let r = explicit_formula(&lat, &basis[3], &lat.vector_i([1, 1, 0, 0]).unwrap(), &TraceOptions::default()).unwrap();
        assert_eq!(r.m, 1);
        assert!(r.value.is_zero());
    }

    #[test]
    fn strict_mode_refuses_unstable_line_counts() {
        let (lat, basis) = setup();
        let x = lat.vector_i([-3, -3, 0, 1]).unwrap();
        let opts = TraceOptions { height: 1, strict: true, ..TraceOptions::default() };
        assert!(matches!(trace_for_x(&lat, &basis[3], &x, &opts), Err(HzError::Strict(_))));
        let lenient = trace_for_x(&lat, &basis[3], &x, &TraceOptions { strict: false, ..opts }).unwrap();
        assert!(!lenient.flags.is_empty());
    }

    #[test]
    fn ceiling_must_cover_the_poles() {
        let (lat, basis) = setup();
        let opts = TraceOptions { ceiling: rat(1, 5), ..TraceOptions::default() };
        assert!(trace_for_x(&lat, &basis[3], &lat.vector_i([-3, -3, 0, 1]).unwrap(), &opts).is_err());
        assert!(trace_for_x(&lat, &basis[3], &lat.vector_i([1, -1, 0, 0]).unwrap(), &TraceOptions::default()).is_err());
    }

    #[test]
    fn total_is_linear_in_f() {
        let (lat, basis) = setup();
        let opts = TraceOptions::default();
        let n = rat(-6, 5);
        let sum = WeakForm { series: basis[0].series.add(&basis[3].series).unwrap(), meta: Value::Null, gate: basis[0].gate.clone() };
        let a = trace_total(&lat, &basis[0], &n, 1, 2, &opts).unwrap();
        let b = trace_total(&lat, &basis[3], &n, 1, 2, &opts).unwrap();
        let c = trace_total(&lat, &sum, &n, 1, 2, &opts).unwrap();
        assert_eq!(c.value, &a.value + &b.value);
        assert_eq!(a.classes.len(), 1);
        assert_eq!(a.value, trace_for_x(&lat, &basis[0], &a.classes[0].x, &opts).unwrap().value);
    }
}

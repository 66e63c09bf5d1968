//! `hz`: command line front end.
//!
//! Results are JSON on stdout (or `--out`), a short summary goes to stderr. Exit codes:
//! 0 success, 1 failed verification, 2 bad input, 3 refused in strict mode, 4 internal error.

mod cache;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hz_core::cusp::{isotropic_lines, split_sublattices};
use hz_core::lattice::{build_lattice, orbit_classes, HilbertLattice, LatticeVector};
use hz_core::rat::{fmt_rat, parse_rat, Rat};
use hz_core::theta::{certify_preimage, gate_points, k_module, n_module, theta_n_negative, theta_n_star, unary_theta, xi_preimage_plus, PreimageTable};
use hz_core::trace::{trace_for_x, trace_total, PairingOrder, TraceOptions};
use hz_core::verify::{run_suite, SuiteKind};
use hz_core::wforms::{load_weak_form, plus_space_basis, WeakForm};
use hz_core::{HzError, Result};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "hz", version, about = "Exact traces of meromorphic Hilbert modular forms")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recorded in the manifest; evaluation is single threaded.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Recorded in the manifest; floating point work uses f64.
    #[arg(long = "precision-bits", global = true, default_value_t = 53)]
    precision_bits: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Gram matrix and discriminant form of the Hilbert lattice.
    Lattice {
        #[arg(long = "D")]
        d: i64,
    },
    /// Orbit classes of lattice vectors of a given norm and coset.
    Orbits {
        #[arg(long = "D")]
        d: i64,
        #[arg(long = "q", allow_hyphen_values = true)]
        q: String,
        #[arg(long, default_value_t = 0)]
        beta: usize,
        #[arg(long = "H", default_value_t = 3)]
        h: i64,
    },
    /// Exact theta series and preimages.
    Theta {
        #[command(subcommand)]
        kind: ThetaCmd,
    },
    /// Basis of weakly holomorphic forms of weight 2 - k.
    Basis {
        #[arg(long = "D")]
        d: i64,
        #[arg(long, default_value_t = 4)]
        k: i64,
        #[arg(long = "max-pole")]
        max_pole: String,
        #[arg(long, default_value = "10")]
        ceiling: String,
    },
    /// Trace of the meromorphic form of one vector, or summed over orbits with --n.
    Trace(TraceArgs),
    /// Run the verification suite.
    Verify {
        #[arg(long, default_value = "core")]
        suite: String,
        #[arg(long = "D", default_value_t = 5)]
        d: i64,
        #[arg(long, default_value_t = 4)]
        k: i64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ThetaCmd {
    /// Unary theta of the lattice [2N], weight 1/2 or 3/2.
    Unary {
        #[arg(long = "N")]
        n: i64,
        #[arg(long, default_value = "3/2")]
        weight: String,
        #[arg(long, default_value = "8")]
        ceiling: String,
    },
    /// Weight 1/2 theta of the negative definite lattice [-2M].
    Negative {
        #[arg(long = "M")]
        m: i64,
        #[arg(long, default_value = "8")]
        ceiling: String,
    },
    /// Weight 3/2 shadow theta of [-2M].
    Star {
        #[arg(long = "M")]
        m: i64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        orientation: i32,
        #[arg(long, default_value = "8")]
        ceiling: String,
    },
    /// Holomorphic part of a preimage of the shadow theta, with its completion certificate.
    Preimage {
        #[arg(long = "M")]
        m: i64,
        #[arg(long, default_value = "13")]
        ceiling: String,
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Down,
    Up,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long = "D")]
    d: i64,
    #[arg(long)]
    k: Option<i64>,
    /// Coordinates "a,b,nu0,nu1".
    #[arg(long = "X", allow_hyphen_values = true)]
    x: Option<String>,
    /// Weak form JSON, or a basis file together with --index.
    #[arg(long)]
    f: PathBuf,
    #[arg(long)]
    index: Option<usize>,
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value = "3")]
    ceiling: String,
    #[arg(long, default_value_t = 4)]
    height: i64,
    #[arg(long, value_enum, default_value = "down")]
    order: Order,
    /// Add the weight 1/2 shift form to every preimage.
    #[arg(long)]
    shift: bool,
    /// Restrict to one principal part slot "m,beta".
    #[arg(long = "m-filter")]
    m_filter: Option<String>,
    #[arg(long)]
    preimages: Option<PathBuf>,
    /// Sum over orbits of vectors of norm n in the coset --mu instead of a single X.
    #[arg(long, allow_hyphen_values = true)]
    n: Option<String>,
    #[arg(long, default_value_t = 0)]
    mu: usize,
}

fn rational(s: &str) -> Result<Rat> {
    parse_rat(s.trim())
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HzError::pre(format!("{}: {e}", path.display())))
}

fn parse_vector(lat: &HilbertLattice, s: &str) -> Result<LatticeVector> {
    let coords = s.split(',').map(rational).collect::<Result<Vec<_>>>()?;
    lat.vector(coords)
}

fn load_form(lat: &HilbertLattice, path: &PathBuf, index: Option<usize>, m: &mut Manifest) -> Result<WeakForm> {
    let text = read(path)?;
    m.input(&path.display().to_string(), text.as_bytes());
    let v: Value = serde_json::from_str(&text).map_err(|e| HzError::pre(format!("{}: {e}", path.display())))?;
    let forms = v.get("result").and_then(|r| r.get("forms")).or_else(|| v.get("forms"));
    match (forms.and_then(Value::as_array), index) {
        (Some(list), Some(i)) => {
            let item = list.get(i).ok_or_else(|| HzError::pre(format!("basis has {} forms, no index {i}", list.len())))?;
            load_weak_form(&item.to_string(), lat)
        }
        (Some(_), None) => Err(HzError::pre("the file holds a basis; choose a form with --index")),
        (None, _) => load_weak_form(&text, lat),
    }
}

fn cmd_lattice(d: i64, m: &mut Manifest) -> Result<(Value, String)> {
    m.param("D", d);
    let lat = build_lattice(d)?;
    let summary = format!("D = {d}: Gram {:?}, |L'/L| = {}", lat.gram, lat.fq.order());
    Ok((json!({ "lattice": lat.to_json(), "discriminant_order": lat.fq.order() }), summary))
}

fn cmd_orbits(d: i64, q: &str, beta: usize, h: i64, m: &mut Manifest) -> Result<(Value, String)> {
    m.param("D", d).param("q", q).param("beta", beta).param("H", h);
    let lat = build_lattice(d)?;
    let q = rational(q)?;
    let vectors = lat.enumerate_vectors(beta, &q, h)?;
    let report = orbit_classes(&lat, &vectors, 4 * h)?;
    let summary = format!(
        "{} vectors of norm {} in coset {beta}: {} classes, {} undecided pairs",
        vectors.len(),
        fmt_rat(&q),
        report.classes.len(),
        report.undecided.len()
    );
    Ok((json!({ "vectors": vectors.len(), "orbits": report.to_json() }), summary))
}

fn cmd_theta(kind: &ThetaCmd, m: &mut Manifest) -> Result<(Value, String)> {
    match kind {
        ThetaCmd::Unary { n, weight, ceiling } => {
            m.param("kind", "unary").param("N", *n).param("weight", weight.as_str()).param("ceiling", ceiling.as_str());
            let hermite = match weight.as_str() {
                "1/2" => 0,
                "3/2" => 1,
                w => return Err(HzError::pre(format!("unary thetas have weight 1/2 or 3/2, not {w}"))),
            };
            let t = unary_theta(&k_module(*n)?, hermite, &rational(ceiling)?)?;
            Ok((json!({ "series": t.to_json() }), format!("unary theta N = {n}, weight {weight}: {} terms", t.coeffs.len())))
        }
        ThetaCmd::Negative { m: mm, ceiling } => {
            m.param("kind", "negative").param("M", *mm).param("ceiling", ceiling.as_str());
            let t = theta_n_negative(&n_module(*mm)?, &rational(ceiling)?)?;
            Ok((json!({ "series": t.to_json() }), format!("theta of [-2M], M = {mm}: {} terms", t.coeffs.len())))
        }
        ThetaCmd::Star { m: mm, orientation, ceiling } => {
            m.param("kind", "star").param("M", *mm).param("orientation", *orientation).param("ceiling", ceiling.as_str());
            let t = theta_n_star(&n_module(*mm)?, *orientation, &rational(ceiling)?)?;
            Ok((json!({ "series": t.to_json() }), format!("shadow theta M = {mm}: {} terms", t.coeffs.len())))
        }
        ThetaCmd::Preimage { m: mm, ceiling, table } => {
            m.param("kind", "preimage").param("M", *mm).param("ceiling", ceiling.as_str());
            let user = match table {
                Some(p) => {
                    let text = read(p)?;
                    m.input(&p.display().to_string(), text.as_bytes());
                    Some(PreimageTable::parse(&text)?)
                }
                None => None,
            };
            let plus = xi_preimage_plus(&n_module(*mm)?, &rational(ceiling)?, user.as_ref())?;
            let rep = certify_preimage(&plus, &gate_points())?;
            let summary = format!("preimage M = {mm}: certificate {}", if rep.passes() { "passes" } else { "FAILS" });
            if !rep.passes() {
                return Err(HzError::inv(format!("{summary}: {}", rep.to_json())));
            }
            Ok((json!({ "series": plus.to_json(), "certificate": rep.to_json() }), summary))
        }
    }
}

fn cmd_basis(d: i64, k: i64, max_pole: &str, ceiling: &str, m: &mut Manifest) -> Result<(Value, String)> {
    m.param("D", d).param("k", k).param("max_pole", max_pole).param("ceiling", ceiling);
    let lat = build_lattice(d)?;
    let (pole, top) = (rational(max_pole)?, rational(ceiling)?);
    let key = format!("basis|D={d}|k={k}|pole={}|ceiling={}", fmt_rat(&pole), fmt_rat(&top));
    let forms = match cache::get(&key) {
        Some(v) => v,
        None => {
            let basis = plus_space_basis(&lat, k, &pole, &top)?;
            let v = Value::Array(basis.iter().map(WeakForm::to_json).collect());
            cache::put(&key, &v);
            v
        }
    };
    let n = forms.as_array().map_or(0, Vec::len);
    Ok((json!({ "forms": forms }), format!("{n} forms of weight {} with poles up to {}", 2 - k, fmt_rat(&pole))))
}

fn cmd_trace(a: &TraceArgs, strict_flag: &mut bool, m: &mut Manifest) -> Result<(Value, String)> {
    *strict_flag = a.strict;
    let lat = build_lattice(a.d)?;
    m.param("D", a.d).param("ceiling", a.ceiling.as_str()).param("height", a.height).param("shift", a.shift);
    m.param("order", if matches!(a.order, Order::Up) { "up" } else { "down" });
    let f = load_form(&lat, &a.f, a.index, m)?;
    if let Some(i) = a.index {
        m.param("index", i);
    }
    if let Some(k) = a.k {
        m.param("k", k);
        if k != f.k() {
            return Err(HzError::pre(format!("--k {k} but the weak form has weight {}", 2 - f.k())));
        }
    }
    let m_filter = match &a.m_filter {
        Some(s) => {
            m.param("m_filter", s.as_str());
            let (mm, b) = s.split_once(',').ok_or_else(|| HzError::pre("--m-filter expects \"m,beta\""))?;
            let b: usize = b.trim().parse().map_err(|_| HzError::pre("--m-filter coset must be an index"))?;
            Some((rational(mm)?, b))
        }
        None => None,
    };
    let preimages = match &a.preimages {
        Some(p) => {
            let text = read(p)?;
            m.input(&p.display().to_string(), text.as_bytes());
            Some(PreimageTable::parse(&text)?)
        }
        None => None,
    };
    let opts = TraceOptions {
        ceiling: rational(&a.ceiling)?,
        height: a.height,
        strict: a.strict,
        order: match a.order {
            Order::Down => PairingOrder::Down,
            Order::Up => PairingOrder::Up,
        },
        shift: a.shift,
        m_filter,
        preimages,
    };
    match (&a.x, &a.n) {
        (Some(xs), None) => {
            m.param("X", xs.as_str());
            let x = parse_vector(&lat, xs)?;
            let r = trace_for_x(&lat, &f, &x, &opts)?;
            let summary = format!(
                "trace = {} * pi i  (Q(X) = {}, {} lines, M = {}{})",
                fmt_rat(&r.value),
                fmt_rat(&x.norm),
                r.per_line.len(),
                r.m,
                if r.flags.is_empty() { String::new() } else { format!(", flags: {}", r.flags.join("; ")) }
            );
            let mut v = r.to_json();
            if let Ok(split) = split_sublattices(&lat, &x) {
                if let Ok(rep) = isotropic_lines(&lat, &split, a.height) {
                    v["isotropic_lines"] = rep.to_json();
                }
            }
            Ok((v, summary))
        }
        (None, Some(ns)) => {
            m.param("n", ns.as_str()).param("mu", a.mu);
            let n = rational(ns)?;
            let r = trace_total(&lat, &f, &n, a.mu, a.height, &opts)?;
            let summary = format!("total trace = {} * pi i over {} orbit classes", fmt_rat(&r.value), r.classes.len());
            Ok((r.to_json(), summary))
        }
        _ => Err(HzError::pre("give exactly one of --X and --n")),
    }
}

fn cmd_verify(suite: &str, d: i64, k: i64, report: &Option<PathBuf>, m: &mut Manifest) -> Result<(Value, String, bool)> {
    m.param("suite", suite).param("D", d).param("k", k);
    let r = run_suite(SuiteKind::parse(suite)?, d, k)?;
    let failed = r.checks.iter().filter(|c| !c.pass).count();
    let summary = format!("{} suite: {} checks, {} failed", suite, r.checks.len(), failed);
    let v = r.to_json();
    if let Some(p) = report {
        manifest::write_atomic(p, &manifest::render(&json!({ "manifest": m.to_json(), "result": v })))?;
        m.output(&p.display().to_string());
    }
    Ok((v, summary, r.passes()))
}

fn run(cli: Cli) -> Result<i32> {
    let name = match &cli.command {
        Command::Lattice { .. } => "lattice",
        Command::Orbits { .. } => "orbits",
        Command::Theta { .. } => "theta",
        Command::Basis { .. } => "basis",
        Command::Trace(_) => "trace",
        Command::Verify { .. } => "verify",
    };
    let mut m = Manifest::new(name, cli.common.threads, cli.common.precision_bits);
    let mut strict = false;
    let mut ok = true;
    let (value, summary) = match &cli.command {
        Command::Lattice { d } => cmd_lattice(*d, &mut m)?,
        Command::Orbits { d, q, beta, h } => cmd_orbits(*d, q, *beta, *h, &mut m)?,
        Command::Theta { kind } => cmd_theta(kind, &mut m)?,
        Command::Basis { d, k, max_pole, ceiling } => cmd_basis(*d, *k, max_pole, ceiling, &mut m)?,
        Command::Trace(a) => cmd_trace(a, &mut strict, &mut m)?,
        Command::Verify { suite, d, k, report } => {
            let (v, s, pass) = cmd_verify(suite, *d, *k, report, &mut m)?;
            ok = pass;
            (v, s)
        }
    };
    m.strict(strict);
    if let Some(p) = &cli.common.out {
        m.output(&p.display().to_string());
    }
    let text = manifest::render(&json!({ "manifest": m.to_json(), "result": value }));
    match &cli.common.out {
        Some(p) => manifest::write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    eprintln!("{summary}");
    Ok(if ok { 0 } else { 1 })
}

fn main() {
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    let code = match run(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    eprintln!("wall time {:.2}s", start.elapsed().as_secs_f64());
    std::process::exit(code);
}

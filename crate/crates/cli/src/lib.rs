//! Command dispatch and report rendering for the `oiforge` binary.
//!
//! Exit codes: 0 success, 1 user error, 2 negative verdict (a
//! discreteness violation, an empty search, no liftable root), 3 precision
//! exhaustion or an internal check failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{Map, Value};

use oiforge::dio::{self, CloudRecord, SearchReport, SearchSpec};
use oiforge::genpoly::{self, compile_sigma, CompiledSystem};
use oiforge::padic::{self, wilkie_extend, PadicAssignment};
use oiforge::ringlab::{self, discreteness_scan, RingPresentation, DEFAULT_CAP};
use oiforge::syntax::{self, parse_rational};
use oiforge::{Error, FieldElem, PrecisionCtx, Result, WorkspaceSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;

const MAX_BITS_VAR: &str = "OIFORGE_MAX_BITS";
const DEFAULT_DIGITS: usize = 30;
const DEFAULT_EXTEND_PRECISION: u32 = 10;
// residue roots are listed next to a Hensel root only below this modulus
const RESIDUE_LIST_LIMIT: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Lines,
}

#[derive(Parser, Debug)]
#[command(name = "oiforge", version, about = "Exact experiments with ordered rings of Puiseux polynomials")]
struct Cli {
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Search for a t-free integer combination with a non-integer constant.
    CheckDiscrete {
        spec: PathBuf,
        #[arg(long, default_value_t = ringlab::DEFAULT_DEGREE)]
        degree: u32,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Adjoin (ns - m)/n for an element ns of the ring.
    Extend {
        spec: PathBuf,
        #[arg(long)]
        element: String,
        #[arg(long)]
        denominator: u64,
        /// Name of the new generator.
        #[arg(long)]
        name: Option<String>,
    },
    /// Exact search for y0 with every gamma_i within eps of its target.
    DioSearch {
        spec: PathBuf,
        #[arg(long)]
        eps: String,
        #[arg(long)]
        range: u64,
        /// Comma-separated targets (default: the symbol shadows).
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: usize,
    },
    /// Integer polynomial identities among the gamma values.
    IdentityScan {
        spec: PathBuf,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        holdout: usize,
        /// Re-check every identity exactly on 1..=Y.
        #[arg(long)]
        verify: Option<u64>,
        /// Turn each identity into a ring witness and scan that ring.
        #[arg(long)]
        bridge: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Star discrepancy of one gamma component over 1..=Y.
    Equidist {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        component: usize,
        #[arg(long)]
        range: u64,
    },
    /// Lift a root of an integer polynomial to precision p^k.
    Hensel {
        /// Coefficients, highest degree first, e.g. 1,0,-17.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        prec: u32,
    },
    /// Export gamma values at y0 = from, from+stride, ..., <= range.
    Cloud {
        spec: PathBuf,
        #[arg(long)]
        range: u64,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        #[arg(long, default_value_t = 1)]
        from: u64,
        /// Output file, or - for standard output.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: usize,
    },
    /// Evaluate a generalized polynomial at one y0.
    Eval {
        spec: PathBuf,
        #[arg(long = "expr")]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        at: BigInt,
        #[arg(long, default_value_t = DEFAULT_DIGITS)]
        digits: usize,
    },
}

/// What a command produced: a header, a human table and flat records.
#[derive(Debug, Default)]
pub struct Output {
    pub header: String,
    pub text: String,
    pub records: Vec<String>,
    pub code: i32,
}

impl Output {
    fn new(header: impl Into<String>) -> Self {
        Output { header: header.into(), ..Default::default() }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn record(&mut self, pairs: &[(&str, String)]) {
        let mut m = Map::new();
        for (k, v) in pairs {
            m.insert((*k).to_string(), Value::String(v.clone()));
        }
        self.records.push(Value::Object(m).to_string());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Lines => {
                let mut s = format!("# {}\n", self.header);
                for r in &self.records {
                    s.push_str(r);
                    s.push('\n');
                }
                s
            }
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionExhausted { .. } | Error::ShadowDegeneracy | Error::Internal(_) => EXIT_PRECISION,
        Error::NoSimpleRoot(_) => EXIT_NEGATIVE,
        _ => EXIT_USER,
    }
}

fn precision_ctx() -> Result<PrecisionCtx> {
    match std::env::var(MAX_BITS_VAR) {
        Err(_) => Ok(PrecisionCtx::default()),
        Ok(v) => {
            let max: u32 = v
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("{MAX_BITS_VAR} must be a positive integer, got `{v}`")))?;
            PrecisionCtx::new(PrecisionCtx::default().start_bits.min(max.max(1)), max)
        }
    }
}

/// Parses `argv` (program name first), runs the command and writes to
/// `out` / `err`. Returns the process exit code.
pub fn run_command<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(Error::Invalid("--jobs must be at least 1".into())),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.cmd)),
            Err(e) => Err(Error::Invalid(format!("cannot start {j} worker threads: {e}"))),
        },
        None => dispatch(&cli.cmd),
    };
    match result {
        Ok(o) => {
            if out.write_all(o.render(cli.format).as_bytes()).is_err() {
                return EXIT_USER;
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Cmd) -> Result<Output> {
    let ctx = precision_ctx()?;
    match cmd {
        Cmd::CheckDiscrete { spec, degree, cap } => check_discrete(&WorkspaceSpec::load(spec)?, *degree, *cap),
        Cmd::Extend { spec, element, denominator, name } => {
            extend(&WorkspaceSpec::load(spec)?, element, *denominator, name.as_deref())
        }
        Cmd::DioSearch { spec, eps, range, target, digits } => {
            let ws = WorkspaceSpec::load(spec)?;
            let sys = compile_sigma(&ws.sequence()?);
            let eps = parse_rational(eps)?;
            let mut search = SearchSpec::new(&sys, eps, *range);
            if let Some(t) = target {
                search.targets = t.split(',').map(parse_rational).collect::<Result<_>>()?;
            }
            let report = dio::dio_search(&search, &ctx)?;
            let mut o = emit_report(&sys, &search, &report, *digits, &ctx)?;
            if report.solutions.is_empty() {
                o.code = EXIT_NEGATIVE;
            }
            Ok(o)
        }
        Cmd::IdentityScan { spec, degree, samples, holdout, verify, bridge, cap } => {
            identity_scan(&WorkspaceSpec::load(spec)?, *degree, *samples, *holdout, *verify, *bridge, *cap, &ctx)
        }
        Cmd::Equidist { spec, component, range } => {
            let ws = WorkspaceSpec::load(spec)?;
            let sys = compile_sigma(&ws.sequence()?);
            let d = dio::discrepancy(&sys, *component, *range, &ctx)?;
            let mut o = Output::new(format!("equidist component={component} range={range}"));
            let exact = d.value.render();
            let dec = sys.field().to_decimal(&d.value, 12, &ctx)?;
            o.line(format!("component: gamma{component}"));
            o.line(format!("samples: {}", d.samples));
            o.line(format!("discrepancy: {exact}"));
            o.line(format!("approx: {dec}"));
            o.record(&[
                ("component", component.to_string()),
                ("samples", d.samples.to_string()),
                ("discrepancy", exact),
                ("approx", dec),
            ]);
            Ok(o)
        }
        Cmd::Hensel { poly, prime, prec } => hensel(poly, *prime, *prec),
        Cmd::Cloud { spec, range, stride, from, out, digits } => {
            let ws = WorkspaceSpec::load(spec)?;
            let sys = compile_sigma(&ws.sequence()?);
            let header = format!("cloud from={from} range={range} stride={stride}");
            if out.as_os_str() == "-" {
                let mut buf = Vec::new();
                dio::cloud_export(&sys, *from, *range, *stride, *digits, &mut buf, &ctx)?;
                let mut o = Output::new(header);
                o.text = String::from_utf8(buf).map_err(|e| Error::SinkFailure(e.to_string()))?;
                o.records = o.text.lines().map(str::to_string).collect();
                return Ok(o);
            }
            let file = std::fs::File::create(out).map_err(|e| Error::SinkFailure(format!("{}: {e}", out.display())))?;
            let mut w = std::io::BufWriter::new(file);
            let n = dio::cloud_export(&sys, *from, *range, *stride, *digits, &mut w, &ctx)?;
            let mut o = Output::new(header);
            o.line(format!("wrote {n} records to {}", out.display()));
            o.record(&[("records", n.to_string()), ("path", out.display().to_string())]);
            Ok(o)
        }
        Cmd::Eval { spec, expr, at, digits } => eval(&WorkspaceSpec::load(spec)?, expr, at, *digits, &ctx),
    }
}

fn describe_ring(ring: &RingPresentation, o: &mut Output) {
    o.line(format!("ring: Z[{}]", ring.names().join(", ")));
    for (n, g) in ring.names().iter().zip(ring.gens()) {
        o.line(format!("  {n} = {}", g.render()));
    }
}

fn check_discrete(ws: &WorkspaceSpec, degree: u32, cap: usize) -> Result<Output> {
    let ring = ws.ring()?;
    let v = discreteness_scan(&ring, degree, cap)?;
    let mut o = Output::new(format!("check-discrete degree={degree}"));
    describe_ring(&ring, &mut o);
    o.line(format!("degree: {degree}"));
    if v.is_violation() {
        let w = ring.render_poly(v.witness.as_ref().expect("violation has a witness"));
        let c = v.constant.as_ref().expect("violation has a constant").render();
        o.line("verdict: violation");
        o.line(format!("witness: {w}"));
        o.line(format!("constant: {c}"));
        o.record(&[("verdict", "violation".into()), ("witness", w), ("constant", c)]);
        o.code = EXIT_NEGATIVE;
    } else {
        o.line(format!("verdict: no violation up to degree {degree}"));
        o.record(&[("verdict", "no_violation_up_to".into()), ("degree", degree.to_string())]);
    }
    if v.relations.is_empty() {
        o.line("relations: none");
    } else {
        o.line("relations:");
    }
    for r in &v.relations {
        let p = ring.render_poly(&r.poly);
        let c = r.constant.render();
        let kind = if r.integer { "integer" } else { "non-integer" };
        o.line(format!("  {p} = {c}  ({kind})"));
        o.record(&[("relation", p), ("constant", c), ("class", kind.into())]);
    }
    Ok(o)
}

fn extend(ws: &WorkspaceSpec, element: &str, n: u64, name: Option<&str>) -> Result<Output> {
    let ring = ws.ring()?;
    let value = ws.element(element)?;
    let expr = ws.element_poly(element)?;
    let pad = match ring.padic() {
        Some(p) => p.clone(),
        None => {
            let factors = padic::factorize(n);
            let k = factors.iter().map(|&(_, e)| e + 1).max().unwrap_or(1).max(DEFAULT_EXTEND_PRECISION);
            let primes: Vec<u64> = factors.iter().map(|&(p, _)| p).collect();
            PadicAssignment::seeded(&ring, &primes, k)?
        }
    };
    let new_name = match name {
        Some(s) => s.to_string(),
        None => (ring.len()..).map(|i| format!("g{i}")).find(|s| ring.index_of(s).is_none()).expect("unbounded"),
    };
    let res = wilkie_extend(&ring, &value, &expr, n, &pad, &new_name)?;
    let mut o = Output::new(format!("extend element={element} denominator={n}"));
    describe_ring(&ring, &mut o);
    o.line(format!("element = {}", value.render()));
    o.line(format!("n = {n}"));
    for (p, v) in &res.hp_ns {
        o.line(format!("h_{p}(ns) = {} mod {p}^{}", v.residue(), v.precision()));
    }
    o.line(format!("m = {}", res.m));
    o.line(format!("generator = {}", res.generator.render()));
    for (p, v) in &res.new_images {
        o.line(format!("image of {new_name} at {p} = {} mod {p}^{}", v.residue(), v.precision()));
    }
    let mut pairs = vec![("m", res.m.to_string()), ("generator", res.generator.render()), ("name", new_name.clone())];
    let images: Vec<String> =
        res.new_images.iter().map(|(p, v)| format!("{p}:{}/{}", v.residue(), v.precision())).collect();
    pairs.push(("images", images.join(",")));
    o.record(&pairs);
    Ok(o)
}

/// Renders a search report: a table with a statistics footer, or a header
/// comment followed by one cloud record per solution.
pub fn emit_report(
    sys: &CompiledSystem,
    spec: &SearchSpec,
    report: &SearchReport,
    digits: usize,
    ctx: &PrecisionCtx,
) -> Result<Output> {
    let targets: Vec<String> = spec.targets.iter().map(oiforge::field::render_rational).collect();
    let mut o = Output::new(format!(
        "dio-search range={} eps={} targets={} solutions={}",
        report.y_max,
        oiforge::field::render_rational(&report.epsilon),
        targets.join(","),
        report.solutions.len()
    ));
    o.line(format!(
        "search: y0 in 1..={}, eps = {}, targets = {}",
        report.y_max,
        oiforge::field::render_rational(&report.epsilon),
        targets.join(", ")
    ));
    if report.epsilon_warning {
        o.line("warning: eps exceeds min(r, 1-r)/2 for some target");
    }
    let n = sys.len();
    let mut head = format!("{:>10}", "y0");
    for i in 1..=n {
        let _ = write!(head, "  {:<w$}", format!("gamma{i}"), w = digits + 3);
    }
    for i in 1..=n {
        let _ = write!(head, "  {:>8}", format!("y{i}"));
    }
    o.line(head.trim_end());
    for s in &report.solutions {
        let rec = CloudRecord::from_point(sys, &s.point, digits, ctx)?;
        let mut row = format!("{:>10}", rec.y0);
        for g in &rec.gamma_dec {
            let _ = write!(row, "  {:<w$}", g, w = digits + 3);
        }
        for y in &rec.ychain {
            let _ = write!(row, "  {:>8}", y);
        }
        o.line(row.trim_end());
        o.records.push(rec.to_line());
    }
    let stats = dio::gap_stats(report);
    o.line(format!("solutions: {}", stats.count));
    o.line(format!("density: {}", oiforge::field::render_rational(&stats.density)));
    match stats.gaps() {
        Ok(g) => {
            o.line(format!("max_gap: {}", g.max_gap));
            o.line(format!("mean_gap: {}", oiforge::field::render_rational(&g.mean_gap)));
            let d: Vec<String> = g.distinct.iter().map(|x| x.to_string()).collect();
            o.line(format!("distinct_gaps: {}", d.join(", ")));
        }
        Err(_) => o.line("max_gap: n/a (fewer than two solutions)"),
    }
    if !report.undecided.is_empty() {
        o.line(format!("undecided: {}", report.undecided.len()));
        for (y, why) in &report.undecided {
            o.line(format!("  y0 = {y}: {why}"));
        }
    }
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
fn identity_scan(
    ws: &WorkspaceSpec,
    degree: u32,
    samples: usize,
    holdout: usize,
    verify: Option<u64>,
    bridge: bool,
    cap: usize,
    ctx: &PrecisionCtx,
) -> Result<Output> {
    let seq = ws.sequence()?;
    let sys = compile_sigma(&seq);
    let ids = genpoly::identity_scan(&sys, degree, samples, holdout, cap, ctx)?;
    let mut o = Output::new(format!("identity-scan degree={degree} samples={samples} holdout={holdout}"));
    o.text.push_str(&sys.render());
    o.line(format!("identities: {}", ids.len()));
    if ids.is_empty() {
        o.code = EXIT_NEGATIVE;
    }
    for h in &ids {
        let text = genpoly::render_identity(h);
        o.line(format!("  {text} = 0"));
        let mut pairs = vec![("identity", text)];
        if let Some(y) = verify {
            match genpoly::identity_verify(&sys, h, y, ctx)? {
                None => {
                    o.line(format!("    verified exactly for 1 <= y0 <= {y}"));
                    pairs.push(("verified", y.to_string()));
                }
                Some(bad) => {
                    o.line(format!("    fails at y0 = {bad}"));
                    pairs.push(("fails_at", bad.to_string()));
                    o.code = EXIT_NEGATIVE;
                }
            }
        }
        if bridge {
            let b = genpoly::identity_to_ring(h, &seq)?;
            let names = |i: usize| b.ring.name(i).to_string();
            match &b.witness {
                Some(w) => o.line(format!("    ring witness: {} = {}", w.render_with(names), b.constant.render())),
                None => o.line("    ring witness has irrational coefficients"),
            }
            let v = discreteness_scan(&b.ring, b.suggested_degree, cap)?;
            if v.is_violation() {
                let w = b.ring.render_poly(v.witness.as_ref().expect("witness"));
                let c = v.constant.as_ref().expect("constant").render();
                o.line(format!("    scan at degree {}: violation {w} = {c}", b.suggested_degree));
                pairs.push(("bridge", "violation".into()));
                pairs.push(("witness", w));
                pairs.push(("constant", c));
            } else {
                o.line(format!("    scan at degree {}: no violation", b.suggested_degree));
                pairs.push(("bridge", "no_violation_up_to".into()));
            }
        }
        o.record(&pairs);
    }
    Ok(o)
}

fn hensel(poly: &str, p: u64, k: u32) -> Result<Output> {
    let mut g = poly
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Invalid(format!("`{}` is not an integer coefficient", s.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    g.reverse();
    let root = padic::hensel_root(&g, p, k)?;
    let mut o = Output::new(format!("hensel poly={poly} prime={p} prec={k}"));
    let modulus = root.modulus();
    o.line(format!("root = {}", root.residue()));
    o.line(format!("modulus = {p}^{k} = {modulus}"));
    let mut pairs = vec![("root", root.residue().to_string()), ("modulus", modulus.to_string())];
    if modulus <= BigInt::from(RESIDUE_LIST_LIMIT) {
        let all: Vec<String> = padic::brute_roots(&g, p, k).iter().map(|r| r.to_string()).collect();
        o.line(format!("residue roots mod {modulus}: {}", all.join(", ")));
        pairs.push(("residue_roots", all.join(",")));
    }
    o.record(&pairs);
    Ok(o)
}

fn eval(ws: &WorkspaceSpec, text: &str, at: &BigInt, digits: usize, ctx: &PrecisionCtx) -> Result<Output> {
    let seq = ws.sequence()?;
    let sys = compile_sigma(&seq);
    let ast = syntax::parse_expr(text)?;
    let p = sys.gamma_eval(at, ctx)?;
    let field = sys.field();
    let syms = &seq.domain().symbols;
    let indexed = |s: &str, prefix: &str| -> Option<usize> {
        s.strip_prefix(prefix).and_then(|d| d.parse::<usize>().ok()).filter(|&i| i >= 1 && i <= sys.len())
    };
    let lookup = |s: &str| -> Option<FieldElem> {
        if s == "t" || s == "y0" {
            return Some(FieldElem::from_int(at.clone()));
        }
        if let Some(i) = indexed(s, "gamma") {
            return Some(p.gamma[i - 1].clone());
        }
        if let Some(i) = indexed(s, "sigma") {
            return Some(p.gamma[i - 1].add(&FieldElem::from_int(p.ychain[i - 1].clone())));
        }
        if let Some(i) = indexed(s, "y") {
            return Some(FieldElem::from_int(p.ychain[i - 1].clone()));
        }
        // the symbol r_i stands for its approximation gamma_i
        syms.index_of(s).filter(|&i| i < sys.len()).map(|i| p.gamma[i].clone())
    };
    let v = syntax::to_field(&ast, field, &lookup, ctx)?;
    let dec = field.to_decimal(&v, digits, ctx)?;
    let mut o = Output::new(format!("eval expr={text} at={at}"));
    o.line(format!("exact: {}", v.render()));
    o.line(format!("decimal: {dec}"));
    o.record(&[("y0", at.to_string()), ("exact", v.render()), ("decimal", dec)]);
    Ok(o)
}

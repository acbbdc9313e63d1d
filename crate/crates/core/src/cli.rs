//! Command-line front end.
//!
//! [`run`] parses arguments, dispatches to the library and writes one JSON
//! document (SVG for `render`). Exit codes: 0 success or verdict true,
//! 1 verdict false (the document then carries a `replay` record), 2 input
//! error, 3 numeric error.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::ellipsoid::{
    contact_points, inscribed_margin, john, largest_coplanar_group, lowner, ConvexBody, Ellipsoid, RemarkBody,
    SMOOTH_SAMPLES,
};
use crate::error::{Error, Result};
use crate::linalg::{matrix_from_rows, Matrix, Vector};
use crate::normspace::NormModel;
use crate::operators::{
    gen_adjoint_apply, is_adjoint_abelian, is_isometry, is_self_adjoint, iso_abelian_check, lp_rotation_scan,
    phi_grid_from_tangents, witness_residual, LinearOperator, Predicate, PredicateReport, Sampling, Witness,
};
use crate::ortho::{birkhoff, james};
use crate::reflect::{
    classify_composition, compose, euclidean_battery, fixed_hyperplane, left_reflection, left_reflection_hyperplane,
    left_reflection_residual, AffineMap, LineSpec,
};
use crate::sip::SipContext;
use crate::spectral::{adjoint_abelian_normal_form, isometry_normal_form};
use crate::symmetry::{group_report, orbit_probe, polytopal_isometry_group};

/// Environment variable capping the worker threads used inside modules.
pub const THREADS_ENV: &str = "MINKKIT_THREADS";

/// Parsed command line.
#[derive(Parser, Debug, Clone)]
#[command(name = "minkkit", version, about = "Semi-inner products, orthogonality and isometries of finite-dimensional normed spaces")]
pub struct RunConfig {
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Evaluate `[u,v]` and the norm derivatives ρ'±(u,v).
    Sip(SipArgs),
    /// Apply the generalized adjoint: Aᵀ(y).
    Adjoint(AdjointArgs),
    /// Sampled operator predicates.
    Check(CheckArgs),
    /// Real block normal form of an adjoint abelian operator or an isometry.
    NormalForm(NormalFormArgs),
    /// Birkhoff orthogonality x ⊥ y.
    Birkhoff(PairArgs),
    /// James orthogonality ‖x+y‖ = ‖x−y‖.
    James(PairArgs),
    /// Left reflections and their compositions.
    #[command(subcommand)]
    Reflect(ReflectCommand),
    /// John and Löwner ellipsoids.
    #[command(subcommand)]
    Ellipsoid(EllipsoidCommand),
    /// Isometry groups of unit balls.
    #[command(subcommand)]
    Symmetry(SymmetryCommand),
    /// Sign functions of generalized rotations in planar l_p.
    LpScan(LpScanArgs),
    /// SVG of the unit circle, reflected circles and contact points.
    Render(RenderArgs),
    /// Re-run the command recorded in a verdict-false document.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModelArg {
    /// `lp:P[:N]`, `quadratic:<matrix>`, `polytopal:<name>` or `polytopal:<vertices>`.
    #[arg(long)]
    pub model: String,
}

#[derive(Args, Debug, Clone)]
pub struct SipArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub u: String,
    #[arg(long)]
    pub v: String,
}

#[derive(Args, Debug, Clone)]
pub struct AdjointArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Matrix as inline JSON rows or `@file`.
    #[arg(long)]
    pub op: String,
    #[arg(long)]
    pub y: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    SelfAdjoint,
    AdjointAbelian,
    Isometry,
    IsoAbelian,
}

impl From<CheckKind> for Predicate {
    fn from(k: CheckKind) -> Self {
        match k {
            CheckKind::SelfAdjoint => Predicate::SelfAdjoint,
            CheckKind::AdjointAbelian => Predicate::AdjointAbelian,
            CheckKind::Isometry => Predicate::Isometry,
            CheckKind::IsoAbelian => Predicate::IsoAbelian,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    pub kind: CheckKind,
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub op: String,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::operators::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalFormKind {
    AdjointAbelian,
    Isometry,
}

#[derive(Args, Debug, Clone)]
pub struct NormalFormArgs {
    pub kind: NormalFormKind,
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub op: String,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, default_value_t = crate::ortho::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum ReflectCommand {
    /// Left reflection in the line (hyperplane) through `--point` spanned by `--dir`.
    Build {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        point: String,
        /// Direction vector; repeat for hyperplanes.
        #[arg(long = "dir", required = true)]
        dirs: Vec<String>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Compose reflections in `--line`s, or affine `--map`s, first to last.
    Compose {
        #[command(flatten)]
        model: ModelArg,
        /// Line as JSON `{"point": [...], "directions": [[...]]}`.
        #[arg(long = "line")]
        lines: Vec<String>,
        /// Affine map as JSON `{"L": [[...]], "t": [...]}`.
        #[arg(long = "map")]
        maps: Vec<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Classify an affine map.
    Classify {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Euclidean characterization battery on a plane.
    Battery {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum EllipsoidCommand {
    /// Maximal-volume inscribed ellipsoid of the unit ball.
    John {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1e-7)]
        eps: f64,
    },
    /// Minimal-volume enclosing ellipsoid of `--points` or of the unit ball.
    Lowner {
        #[arg(long)]
        model: Option<String>,
        /// Point list as JSON or `@file`.
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value_t = 1e-7)]
        eps: f64,
    },
    /// Contact points of the unit sphere with its John ellipsoid.
    Contacts {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1e-7)]
        eps: f64,
        #[arg(long, default_value_t = 720)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// The ball with a thin 2n-gon collar: John ellipsoid and contact set.
    RemarkBody {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum SymmetryCommand {
    /// Linear isometry group (point group).
    Group {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Full isometry group structure.
    Report {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Orbit of a vector under the point group.
    Orbit {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Args, Debug, Clone)]
pub struct LpScanArgs {
    /// Exponents: `a:step:b`, a comma list, or a single value.
    #[arg(long)]
    pub p: String,
    /// Values of tan φ in (0, 1); both signs of φ are scanned.
    #[arg(long)]
    pub tanphi: String,
    /// Omit the per-point rows.
    #[arg(long)]
    pub summary: bool,
}

#[derive(Args, Debug, Clone)]
pub struct RenderArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Angle of a line through the origin; its left reflection of the unit circle is drawn.
    #[arg(long = "theta")]
    pub thetas: Vec<f64>,
    /// Draw the John ellipse and its contact points.
    #[arg(long)]
    pub contacts: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    /// A document emitted with exit code 1, or `-` for stdin.
    pub file: String,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Json(Value),
    Svg(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: Output,
    pub verdict: bool,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome { output: Output::Json(value), verdict: true }
    }

    fn verdict(value: Value, verdict: bool) -> Self {
        Outcome { output: Output::Json(value), verdict }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) | Error::Unsupported { .. } | Error::Precondition(_) => 2,
        Error::Numeric { .. } | Error::Defective { .. } | Error::Resource(_) | Error::Internal(_) => 3,
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let config = match RunConfig::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = with_threads(|| execute(&config.command)).and_then(|mut outcome| {
        if !outcome.verdict && !matches!(config.command, Command::Replay(_)) {
            if let Output::Json(Value::Object(m)) = &mut outcome.output {
                m.insert("replay".into(), json!({ "argv": recorded }));
            }
        }
        emit(&outcome.output, config.out.as_ref())?;
        Ok(outcome.verdict)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("minkkit: {e}");
            exit_code(&e)
        }
    }
}

fn with_threads<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let requested = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok());
    match requested.filter(|&n| n > 0) {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Pretty JSON with a trailing newline; the byte-stable form of a document.
pub fn render_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn emit(output: &Output, out: Option<&PathBuf>) -> Result<()> {
    let text = match output {
        Output::Json(v) => render_json(v),
        Output::Svg(s) => s.clone(),
    };
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::Resource(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Runs a parsed command without writing anything.
pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Sip(a) => cmd_sip(a),
        Command::Adjoint(a) => cmd_adjoint(a),
        Command::Check(a) => cmd_check(a),
        Command::NormalForm(a) => cmd_normal_form(a),
        Command::Birkhoff(a) => cmd_birkhoff(a),
        Command::James(a) => cmd_james(a),
        Command::Reflect(c) => cmd_reflect(c),
        Command::Ellipsoid(c) => cmd_ellipsoid(c),
        Command::Symmetry(c) => cmd_symmetry(c),
        Command::LpScan(a) => cmd_lp_scan(a),
        Command::Render(a) => cmd_render(a),
        Command::Replay(a) => cmd_replay(a),
    }
}

// ---- argument parsing ----

fn load_json(arg: &str) -> Result<Value> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("invalid JSON: {e}")))
}

fn from_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    serde_json::from_value(load_json(arg)?).map_err(|e| Error::Input(format!("invalid {what}: {e}")))
}

/// A matrix given as JSON rows, inline or `@file`.
pub fn parse_matrix(arg: &str) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = from_json(arg, "matrix")?;
    matrix_from_rows(&rows).map_err(Error::Input)
}

pub fn parse_vector(arg: &str) -> Result<Vector> {
    let v: Vec<f64> = from_json(arg, "vector")?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::input("vectors must be non-empty and finite"));
    }
    Ok(Vector::from_vec(v))
}

fn parse_points(arg: &str) -> Result<Vec<Vector>> {
    let pts: Vec<Vec<f64>> = from_json(arg, "point list")?;
    Ok(pts.into_iter().map(Vector::from_vec).collect())
}

/// `lp:P[:N]` (dimension 2 by default), `quadratic:<matrix>`,
/// `polytopal:<name>` or `polytopal:<vertex list>`.
pub fn parse_model(spec: &str) -> Result<NormModel> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::Input(format!("model `{spec}` is not of the form kind:parameters")))?;
    match kind {
        "lp" => {
            let mut parts = rest.split(':');
            let p = parts
                .next()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Input(format!("bad exponent in `{spec}`")))?;
            let dim = match parts.next() {
                Some(s) => s.parse::<usize>().map_err(|_| Error::Input(format!("bad dimension in `{spec}`")))?,
                None => 2,
            };
            if parts.next().is_some() {
                return Err(Error::Input(format!("trailing fields in `{spec}`")));
            }
            NormModel::lp(p, dim)
        }
        "quadratic" => NormModel::quadratic(parse_matrix(rest)?),
        "polytopal" => {
            if rest.starts_with('[') || rest.starts_with('@') {
                NormModel::polytopal(parse_points(rest)?)
            } else {
                NormModel::named_polytope(rest)
            }
        }
        _ => Err(Error::Input(format!("unknown model kind `{kind}` (lp, quadratic, polytopal)"))),
    }
}

/// `a:step:b` (inclusive), `a,b,c`, or a single number.
pub fn parse_range(arg: &str) -> Result<Vec<f64>> {
    let bad = || Error::Input(format!("bad range `{arg}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = arg.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(Error::Resource(format!("range `{arg}` has {count} points")));
            }
            // a + k·step, rounded away from accumulated drift
            Ok((0..count).map(|k| round12(a + k as f64 * step)).collect())
        }
        [single] => single.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn context(model: &ModelArg) -> Result<SipContext> {
    Ok(SipContext::new(parse_model(&model.model)?))
}

fn operator(ctx: &SipContext, arg: &str) -> Result<LinearOperator> {
    let a = LinearOperator::new(parse_matrix(arg)?)?;
    if a.dim() != ctx.dim() {
        return Err(Error::Input(format!("{0}×{0} operator on a {1}-dimensional model", a.dim(), ctx.dim())));
    }
    Ok(a)
}

fn vector_for(ctx: &SipContext, arg: &str) -> Result<Vector> {
    let v = parse_vector(arg)?;
    ctx.model().check_dim(&v)?;
    Ok(v)
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("library types always serialize")
}

fn vec_value(v: &Vector) -> Value {
    json!(v.as_slice())
}

fn with_fields(base: Value, extra: Value) -> Value {
    match (base, extra) {
        (Value::Object(mut b), Value::Object(e)) => {
            b.extend(e);
            Value::Object(b)
        }
        (b, _) => b,
    }
}

// ---- commands ----

fn cmd_sip(a: &SipArgs) -> Result<Outcome> {
    use crate::sip::Side;
    let ctx = context(&a.model)?;
    let u = vector_for(&ctx, &a.u)?;
    let v = vector_for(&ctx, &a.v)?;
    let sip = if ctx.model().is_smooth() { Some(ctx.sip(&u, &v)?) } else { None };
    Ok(Outcome::ok(json!({
        "u": vec_value(&u),
        "v": vec_value(&v),
        "sip": sip,
        "rho_plus": ctx.rho_plus(&u, &v)?,
        "rho_minus": ctx.rho_minus(&u, &v)?,
        "rho_plus_fd": ctx.rho_fd(&u, &v, Side::Plus),
        "rho_minus_fd": ctx.rho_fd(&u, &v, Side::Minus),
    })))
}

fn cmd_adjoint(a: &AdjointArgs) -> Result<Outcome> {
    let ctx = context(&a.model)?;
    let op = operator(&ctx, &a.op)?;
    let y = vector_for(&ctx, &a.y)?;
    let w = gen_adjoint_apply(&ctx, &op, &y)?;
    Ok(Outcome::ok(json!({ "y": vec_value(&y), "adjoint": vec_value(&w) })))
}

fn cmd_check(a: &CheckArgs) -> Result<Outcome> {
    let ctx = context(&a.model)?;
    let op = operator(&ctx, &a.op)?;
    let sampling = Sampling::new(a.samples, a.seed);
    let pred = Predicate::from(a.kind);
    let (report, verdict) = match a.kind {
        CheckKind::SelfAdjoint => {
            let r = is_self_adjoint(&ctx, &op, sampling, a.tol)?;
            (to_value(&r), r.verdict)
        }
        CheckKind::AdjointAbelian => {
            let r = is_adjoint_abelian(&ctx, &op, sampling, a.tol)?;
            (to_value(&r), r.verdict)
        }
        CheckKind::Isometry => {
            let r = is_isometry(&ctx, &op, sampling, a.tol)?;
            (to_value(&r), r.verdict)
        }
        CheckKind::IsoAbelian => {
            let r = iso_abelian_check(&ctx, &op, sampling, a.tol)?;
            (to_value(&r), r.report.verdict)
        }
    };
    Ok(Outcome::verdict(with_fields(json!({ "predicate": pred }), report), verdict))
}

fn cmd_normal_form(a: &NormalFormArgs) -> Result<Outcome> {
    let ctx = context(&a.model)?;
    let op = operator(&ctx, &a.op)?;
    let nf = match a.kind {
        NormalFormKind::AdjointAbelian => adjoint_abelian_normal_form(&ctx, &op, a.tol)?,
        NormalFormKind::Isometry => isometry_normal_form(&ctx, &op, a.tol)?,
    };
    Ok(Outcome::ok(to_value(&nf)))
}

fn cmd_birkhoff(a: &PairArgs) -> Result<Outcome> {
    let ctx = context(&a.model)?;
    let x = vector_for(&ctx, &a.x)?;
    let y = vector_for(&ctx, &a.y)?;
    let r = birkhoff(&ctx, &x, &y, a.tol)?;
    let base = json!({ "x": vec_value(&x), "y": vec_value(&y) });
    Ok(Outcome::verdict(with_fields(base, to_value(&r)), r.orthogonal))
}

fn cmd_james(a: &PairArgs) -> Result<Outcome> {
    let ctx = context(&a.model)?;
    let x = vector_for(&ctx, &a.x)?;
    let y = vector_for(&ctx, &a.y)?;
    let verdict = james(&ctx, &x, &y, a.tol)?;
    Ok(Outcome::verdict(
        json!({
            "x": vec_value(&x),
            "y": vec_value(&y),
            "orthogonal": verdict,
            "norm_sum": ctx.norm(&(&x + &y)),
            "norm_difference": ctx.norm(&(&x - &y)),
        }),
        verdict,
    ))
}

fn reflection(ctx: &SipContext, g: &LineSpec, tol: f64) -> Result<AffineMap> {
    if g.dim() != ctx.dim() {
        return Err(Error::input("line and model dimensions differ"));
    }
    if ctx.dim() == 2 {
        left_reflection(ctx, g, tol)
    } else {
        left_reflection_hyperplane(ctx, g, tol)
    }
}

fn cmd_reflect(c: &ReflectCommand) -> Result<Outcome> {
    match c {
        ReflectCommand::Build { model, point, dirs, tol } => {
            let ctx = context(model)?;
            let point = vector_for(&ctx, point)?;
            let dirs = dirs.iter().map(|d| vector_for(&ctx, d)).collect::<Result<Vec<_>>>()?;
            let g = LineSpec::new(point, dirs)?;
            let map = reflection(&ctx, &g, *tol)?;
            Ok(Outcome::ok(json!({
                "line": to_value(&g),
                "map": to_value(&map),
                "determinant": map.linear.determinant(),
                "residual": left_reflection_residual(&ctx, &map, &g, 0x1ef7),
            })))
        }
        ReflectCommand::Compose { model, lines, maps, tol } => {
            let ctx = context(model)?;
            if lines.is_empty() == maps.is_empty() {
                return Err(Error::input("give either --line or --map arguments, not both"));
            }
            let affine = if maps.is_empty() {
                lines
                    .iter()
                    .map(|l| reflection(&ctx, &from_json::<LineSpec>(l, "line")?, *tol))
                    .collect::<Result<Vec<_>>>()?
            } else {
                maps.iter().map(|m| from_json::<AffineMap>(m, "affine map")).collect::<Result<Vec<_>>>()?
            };
            let composed = compose(&affine)?;
            let class = classify_composition(&ctx, &composed, *tol)?;
            Ok(Outcome::ok(json!({ "map": to_value(&composed), "classification": class })))
        }
        ReflectCommand::Classify { model, map, tol } => {
            let ctx = context(model)?;
            let map: AffineMap = from_json(map, "affine map")?;
            let class = classify_composition(&ctx, &map, *tol)?;
            let fixed = fixed_hyperplane(&map, tol.max(1e-9)).map(|(g, d)| json!({ "hyperplane": to_value(&g), "reversed": vec_value(&d) }));
            Ok(Outcome::ok(json!({ "map": to_value(&map), "classification": class, "fixed": fixed })))
        }
        ReflectCommand::Battery { model, trials, tol } => {
            let ctx = context(model)?;
            let report = euclidean_battery(&ctx, *trials, *tol)?;
            Ok(Outcome::verdict(to_value(&report), report.all_passed()))
        }
    }
}

fn ellipsoid_value(e: &Ellipsoid) -> Value {
    with_fields(
        to_value(e),
        json!({ "semi_axes": e.semi_axes(), "relative_volume": e.relative_volume() }),
    )
}

fn cmd_ellipsoid(c: &EllipsoidCommand) -> Result<Outcome> {
    match c {
        EllipsoidCommand::John { model, eps } => {
            let m = parse_model(&model.model)?;
            let e = john(&m, *eps)?;
            Ok(Outcome::ok(json!({
                "ellipsoid": ellipsoid_value(&e),
                "inscribed_margin": inscribed_margin(&m, &e, SMOOTH_SAMPLES),
            })))
        }
        EllipsoidCommand::Lowner { model, points, eps } => {
            let pts = match (model, points) {
                (None, Some(p)) => parse_points(p)?,
                (Some(m), None) => match parse_model(m)? {
                    NormModel::Polytopal(p) => p.vertices().to_vec(),
                    other => other.boundary_samples(SMOOTH_SAMPLES),
                },
                _ => return Err(Error::input("give exactly one of --model and --points")),
            };
            let e = lowner(&pts, *eps)?;
            Ok(Outcome::ok(json!({ "ellipsoid": ellipsoid_value(&e), "points": pts.len() })))
        }
        EllipsoidCommand::Contacts { model, eps, samples, tol } => {
            let m = parse_model(&model.model)?;
            let e = john(&m, *eps)?;
            Ok(Outcome::ok(contacts_value(&m, &e, *samples, *tol)))
        }
        EllipsoidCommand::RemarkBody { n, eps, samples, tol } => {
            let body = RemarkBody::new(*n, *eps)?;
            let e = john(&body, 1e-7)?;
            let dim = e.dim();
            let ball_distance = (&e.shape - Matrix::identity(dim, dim)).amax();
            let mut value = with_fields(
                json!({ "n": n, "eps": eps, "ball_distance": ball_distance }),
                contacts_value(&body, &e, *samples, *tol),
            );
            if let Value::Object(m) = &mut value {
                m.remove("contacts");
            }
            Ok(Outcome::ok(value))
        }
    }
}

fn contacts_value<B: ConvexBody + ?Sized>(body: &B, e: &Ellipsoid, samples: usize, tol: f64) -> Value {
    let contacts = contact_points(body, e, samples, tol);
    let coplanar = largest_coplanar_group(&contacts, e, 1e-6);
    json!({
        "ellipsoid": ellipsoid_value(e),
        "contact_count": contacts.len(),
        "contacts": contacts.iter().map(|c| c.as_slice().to_vec()).collect::<Vec<_>>(),
        "largest_coplanar_group": coplanar.map(|g| to_value(&g)),
    })
}

fn cmd_symmetry(c: &SymmetryCommand) -> Result<Outcome> {
    match c {
        SymmetryCommand::Group { model, tol } => match parse_model(&model.model)? {
            NormModel::Polytopal(p) => Ok(Outcome::ok(to_value(&polytopal_isometry_group(p.vertices(), *tol)?))),
            other => Ok(Outcome::ok(to_value(&group_report(&other, *tol)?))),
        },
        SymmetryCommand::Report { model, tol } => {
            Ok(Outcome::ok(to_value(&group_report(&parse_model(&model.model)?, *tol)?)))
        }
        SymmetryCommand::Orbit { model, x, tol } => {
            let m = parse_model(&model.model)?;
            let x = parse_vector(x)?;
            let NormModel::Polytopal(p) = &m else {
                return Err(Error::Unsupported {
                    op: "orbit",
                    gate: "model-kind",
                    reason: "orbits are enumerated for polytopal unit balls".into(),
                });
            };
            let group = polytopal_isometry_group(p.vertices(), *tol)?;
            let orbit = orbit_probe(&m, &x, &group)?;
            Ok(Outcome::ok(json!({
                "x": vec_value(&x),
                "group_order": group.order,
                "orbit_size": orbit.len(),
                "orbit": orbit.iter().map(|o| o.as_slice().to_vec()).collect::<Vec<_>>(),
            })))
        }
    }
}

fn cmd_lp_scan(a: &LpScanArgs) -> Result<Outcome> {
    let ps = parse_range(&a.p)?;
    let tangents = parse_range(&a.tanphi)?;
    let table = lp_rotation_scan(&ps, &phi_grid_from_tangents(&tangents))?;
    let mut value = to_value(&table);
    if a.summary {
        if let Value::Object(m) = &mut value {
            m.remove("rows");
            m.insert("points".into(), json!(table.rows.len()));
        }
    }
    if !table.all_positive {
        if let (Value::Object(m), Some(row)) = (&mut value, table.rows.iter().find(|r| r.f <= 0.0)) {
            m.insert("witness".into(), to_value(row));
        }
    }
    Ok(Outcome::verdict(value, table.all_positive))
}

// ---- render ----

const SVG_SIZE: f64 = 512.0;
const SVG_RADIUS: f64 = 200.0;
const SVG_SAMPLES: usize = 720;

fn unit_circle(model: &NormModel) -> Vec<Vector> {
    (0..SVG_SAMPLES)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / SVG_SAMPLES as f64;
            let u = Vector::from_vec(vec![t.cos(), t.sin()]);
            let n = model.eval(&u);
            u / n
        })
        .collect()
}

fn polyline(points: &[Vector], scale: f64, style: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .chain(points.first())
        .map(|p| format!("{:.3},{:.3}", SVG_SIZE / 2.0 + scale * p[0], SVG_SIZE / 2.0 - scale * p[1]))
        .collect();
    format!("  <polyline fill=\"none\" {style} points=\"{}\"/>\n", coords.join(" "))
}

fn cmd_render(a: &RenderArgs) -> Result<Outcome> {
    let ctx = context(&a.model)?;
    let model = ctx.model().clone();
    if model.dim() != 2 {
        return Err(Error::input("render draws planar models only"));
    }
    let circle = unit_circle(&model);
    let extent = circle.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let scale = SVG_RADIUS / extent;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        SVG_SIZE
    );
    svg += &polyline(&circle, scale, "stroke=\"black\" stroke-width=\"1.5\"");
    for &theta in &a.thetas {
        let map = left_reflection(&ctx, &LineSpec::through_origin(theta), crate::ortho::DEFAULT_TOL)?;
        let image: Vec<Vector> = circle.iter().map(|p| map.apply(p)).collect();
        svg += &polyline(&image, scale, "stroke=\"steelblue\" stroke-width=\"1\"");
        let (c, s) = (theta.cos() * extent * 1.2, theta.sin() * extent * 1.2);
        svg += &polyline(
            &[Vector::from_vec(vec![-c, -s]), Vector::from_vec(vec![c, s])],
            scale,
            "stroke=\"gray\" stroke-dasharray=\"4 3\"",
        );
    }
    if a.contacts {
        let e = john(&model, 1e-7)?;
        let ellipse: Vec<Vector> = circle
            .iter()
            .map(|p| {
                let u = p.normalize();
                &e.center + &u / e.gauge(&(&u + &e.center)).max(1e-300)
            })
            .collect();
        svg += &polyline(&ellipse, scale, "stroke=\"darkorange\" stroke-width=\"1\"");
        for c in contact_points(&model, &e, SVG_SAMPLES, 1e-6) {
            svg += &format!(
                "  <circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"crimson\"/>\n",
                SVG_SIZE / 2.0 + scale * c[0],
                SVG_SIZE / 2.0 - scale * c[1]
            );
        }
    }
    svg += "</svg>\n";
    Ok(Outcome { output: Output::Svg(svg), verdict: true })
}

// ---- replay ----

fn strip_replay(v: &Value) -> Value {
    let mut v = v.clone();
    if let Value::Object(m) = &mut v {
        m.remove("replay");
    }
    v
}

fn cmd_replay(a: &ReplayArgs) -> Result<Outcome> {
    let text = if a.file == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Error::Input(format!("cannot read stdin: {e}")))?
    } else {
        fs::read_to_string(&a.file).map_err(|e| Error::Input(format!("cannot read {}: {e}", a.file)))?
    };
    let recorded: Value = serde_json::from_str(&text).map_err(|e| Error::Input(format!("invalid JSON: {e}")))?;
    let argv: Vec<String> = recorded
        .get("replay")
        .and_then(|r| r.get("argv"))
        .and_then(|a| serde_json::from_value(a.clone()).ok())
        .ok_or_else(|| Error::input("document has no replay record"))?;
    let config = RunConfig::try_parse_from(std::iter::once("minkkit".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| Error::Input(format!("recorded arguments no longer parse: {e}")))?;
    if matches!(config.command, Command::Replay(_)) {
        return Err(Error::input("a replay record cannot point at another replay"));
    }
    let rerun = execute(&config.command)?;
    let Output::Json(fresh) = &rerun.output else {
        return Err(Error::input("recorded command does not produce JSON"));
    };
    let reproduced = strip_replay(fresh) == strip_replay(&recorded);
    let mut value = json!({ "argv": argv, "reproduced": reproduced, "verdict": rerun.verdict });
    if let Command::Check(c) = &config.command {
        if let Some(w) = recorded.get("witness") {
            let w: Witness = serde_json::from_value(w.clone()).map_err(|e| Error::Input(format!("bad witness: {e}")))?;
            let ctx = context(&c.model)?;
            let op = operator(&ctx, &c.op)?;
            let r = witness_residual(&ctx, c.kind.into(), &op, &w)?;
            let stored: Option<PredicateReport> = serde_json::from_value(strip_replay(&recorded)).ok();
            if let Value::Object(m) = &mut value {
                let mut extra = Map::new();
                extra.insert("witness_residual".into(), json!(r));
                extra.insert("tol".into(), json!(c.tol));
                extra.insert("recorded_residual".into(), json!(stored.map(|s| s.max_residual)));
                m.extend(extra);
            }
        }
    }
    if !reproduced {
        return Err(Error::numeric("replayed command produced a different document", f64::NAN));
    }
    Ok(Outcome::verdict(value, rerun.verdict))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exec(args: &[&str]) -> Result<Outcome> {
        let config = RunConfig::try_parse_from(std::iter::once("minkkit").chain(args.iter().copied()))
            .map_err(|e| Error::Input(e.to_string()))?;
        execute(&config.command)
    }

    fn json_of(o: &Outcome) -> &Value {
        match &o.output {
            Output::Json(v) => v,
            Output::Svg(_) => panic!("expected JSON"),
        }
    }

    #[test]
    fn model_specs() {
        assert_eq!(parse_model("lp:4").unwrap().dim(), 2);
        assert_eq!(parse_model("lp:3:4").unwrap().dim(), 4);
        assert_eq!(parse_model("quadratic:[[2,0],[0,1]]").unwrap().dim(), 2);
        assert_eq!(parse_model("polytopal:cube3").unwrap().dim(), 3);
        assert_eq!(parse_model("polytopal:[[1,0],[0,1],[-1,0],[0,-1]]").unwrap().dim(), 2);
        for bad in ["lp", "lp:x", "lp:0.5", "lp:4:2:1", "quadratic:[[1,2],[2,1]]", "polytopal:blob", "torus:1"] {
            assert!(matches!(parse_model(bad), Err(Error::Input(_))), "{bad}");
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:0.5:2").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_range("1.1:0.1:10").unwrap().len(), 90);
        assert_eq!(parse_range("0.05:0.05:0.95").unwrap().len(), 19);
        assert_eq!(parse_range("3").unwrap(), vec![3.0]);
        assert_eq!(parse_range("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(parse_range("2:0:3").is_err());
        assert!(parse_range("3:1:2").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::input("x")), 2);
        assert_eq!(exit_code(&Error::numeric("x", 1.0)), 3);
        assert!(RunConfig::try_parse_from(["minkkit", "check", "bogus"]).is_err());
        assert_eq!(run(["minkkit", "sip", "--model", "lp:4", "--u", "[1,0,0]", "--v", "[0,1]"]), 2);
    }

    #[test]
    fn sip_command() {
        let o = exec(&["sip", "--model", "quadratic:[[2,0],[0,1]]", "--u", "[1,1]", "--v", "[1,0]"]).unwrap();
        let v = json_of(&o);
        assert_eq!(v["sip"].as_f64().unwrap(), 2.0);
        assert_eq!(v["rho_plus"].as_f64().unwrap(), 2.0);
        let o = exec(&["sip", "--model", "polytopal:square", "--u", "[1,0]", "--v", "[1,1]"]).unwrap();
        assert!(json_of(&o)["sip"].is_null());
    }

    #[test]
    fn check_isometry_and_replay() {
        let o = exec(&["check", "isometry", "--model", "lp:4", "--op", "[[0,1],[-1,0]]", "--samples", "50"]).unwrap();
        assert!(o.verdict);
        let o = exec(&["check", "isometry", "--model", "lp:4", "--op", "[[1,1],[0,1]]", "--samples", "50"]).unwrap();
        assert!(!o.verdict);
        let w: Witness = serde_json::from_value(json_of(&o)["witness"].clone()).unwrap();
        let ctx = SipContext::new(parse_model("lp:4").unwrap());
        let op = LinearOperator::from_rows(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let r = witness_residual(&ctx, Predicate::Isometry, &op, &w).unwrap();
        assert_eq!(r, json_of(&o)["max_residual"].as_f64().unwrap());
    }

    #[test]
    fn symmetry_group_of_cube() {
        let o = exec(&["symmetry", "group", "--model", "polytopal:cube3"]).unwrap();
        assert_eq!(json_of(&o)["order"], 48);
        let o = exec(&["symmetry", "group", "--model", "quadratic:[[1,0],[0,3]]"]).unwrap();
        assert_eq!(json_of(&o)["classification"], "infinite-detected");
        assert!(matches!(exec(&["symmetry", "report", "--model", "lp:3"]), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn lp_scan_is_positive() {
        let o = exec(&["lp-scan", "--p", "1.1:0.1:10", "--tanphi", "0.05:0.05:0.95", "--summary"]).unwrap();
        assert!(o.verdict);
        assert_eq!(json_of(&o)["points"], 90 * 19 * 2);
    }

    #[test]
    fn render_svg() {
        let o = exec(&["render", "--model", "lp:4", "--theta", "0.3", "--contacts"]).unwrap();
        let Output::Svg(s) = o.output else { panic!() };
        assert!(s.starts_with("<svg") && s.contains("width=\"512\""));
        assert_eq!(s.matches("<polyline").count(), 4);
        assert!(s.contains("<circle"));
    }

    #[test]
    fn reflect_commands() {
        let o = exec(&["reflect", "build", "--model", "lp:4", "--point", "[0,0]", "--dir", "[1,0.5]"]).unwrap();
        assert!((json_of(&o)["determinant"].as_f64().unwrap() + 1.0).abs() < 1e-9);
        let l1 = r#"{"point":[0,0],"directions":[[1,0]]}"#;
        let l2 = r#"{"point":[0,1],"directions":[[1,0]]}"#;
        let o = exec(&["reflect", "compose", "--model", "lp:4", "--line", l1, "--line", l2]).unwrap();
        assert_eq!(json_of(&o)["classification"], "translation");
    }
}

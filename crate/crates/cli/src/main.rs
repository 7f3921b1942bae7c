#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use wholepartial_core::expr::{self, eval, parse, rel_err, Bindings, ExprError, C64};
use wholepartial_core::helicity::{self, AnsatzConvention, FourVector, Helicity, HelicityError, Kinematics};
use wholepartial_core::ncalgebra::{AlgebraError, CoordAlgebra};
use wholepartial_core::onshell::{self, Chart, ChartError, OnShellSampler, VarKind, ENERGY};
use wholepartial_core::shells::{self, GammaSet, MassTerm, ShellError, ShellPoint, ShellPresets, SpinorVariant};
use wholepartial_core::verify::{self, Comparison, Status, VerifyOptions};

const SCHEMA: u32 = 1;
const FD_STEP: f64 = 1e-5;
const FD_AGREEMENT: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "wholepartial", version, about = "Whole-partial derivatives on the mass shell")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Whole-partial derivative of an expression.
    Derive {
        expr: String,
        /// Variable to differentiate with respect to.
        #[arg(long)]
        var: String,
        #[command(flatten)]
        chart: ChartArgs,
        #[command(flatten)]
        at: AtArgs,
    },
    /// Commutator of two whole-partial operators applied to an expression.
    Commute {
        expr: String,
        v1: String,
        v2: String,
        #[command(flatten)]
        chart: ChartArgs,
        #[command(flatten)]
        at: AtArgs,
        /// Momentum commutator [p_i, p_j], e.g. "i*B3"; requires two momenta.
        #[arg(long, allow_hyphen_values = true)]
        pcomm: Option<String>,
        /// Sample points for the closed-form comparison.
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Helicity-basis polarization vectors.
    Polvec {
        #[command(flatten)]
        kin: KinArgs,
        /// +1, -1, 0, 0t or all.
        #[arg(long, default_value = "all", allow_hyphen_values = true)]
        lambda: String,
    },
    /// Electric and magnetic fields of a helicity mode.
    Fields {
        #[command(flatten)]
        kin: KinArgs,
        #[arg(long, default_value = "all", allow_hyphen_values = true)]
        lambda: String,
    },
    /// Coordinate commutators [x^mu, x^nu] f and the weight against the longitudinal field.
    Ansatz {
        expr: String,
        #[command(flatten)]
        kin: KinArgs,
        #[command(flatten)]
        chart: ChartArgs,
        /// Also report the Jacobi residual of the derivative-valued bracket.
        #[arg(long)]
        jacobi: bool,
    },
    /// Residual of a named mass shell at a point.
    Shell {
        /// Preset name.
        #[arg(long, default_value = "standard")]
        shell: String,
        /// Presets file; the built-in presets are used otherwise.
        #[arg(long)]
        shells: Option<PathBuf>,
        #[command(flatten)]
        at: AtArgs,
    },
    /// Eight-component spinor operator: determinant and algebraic shell residual.
    Dirac {
        /// p0,p1,p2,p3; with three components p0 is solved on the shell.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        p: Vec<f64>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        p4: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        /// psi, psiR or both.
        #[arg(long, default_value = "both")]
        variant: String,
        /// Reading of the mass term: half (2 sinh(mu/2)) or sinh (sinh mu).
        #[arg(long, default_value = "half")]
        reading: String,
        /// Energy branch used when solving for p0.
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        branch: i32,
    },
    /// Coordinate algebra brackets and Jacobi residual.
    Algebra {
        /// kappa-Minkowski deformation parameter.
        #[arg(long, conflicts_with = "file")]
        kappa: Option<f64>,
        /// Algebra description (JSON).
        #[arg(long)]
        file: Option<PathBuf>,
        /// Only this bracket, e.g. x1,t.
        #[arg(long, value_delimiter = ',')]
        pair: Option<Vec<String>>,
    },
    /// Run the verification suite.
    Verify {
        /// Replace every upper-bound tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Attach wall-clock times (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Args)]
struct ChartArgs {
    /// Chart file (JSON); the standard mass-shell chart otherwise.
    #[arg(long)]
    chart: Option<PathBuf>,
    /// Energy branch of the standard chart.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    branch: i32,
}

#[derive(Args)]
struct AtArgs {
    /// Evaluation point, e.g. `p=1,0,0 m=0` or `E=2,B3=1`.
    #[arg(long, num_args = 1.., allow_hyphen_values = true)]
    at: Option<Vec<String>>,
}

#[derive(Args)]
struct KinArgs {
    /// 3-momentum px,py,pz.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    p: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
}

#[derive(Debug)]
enum CliError {
    /// Bad input: parse errors, unknown names, malformed files. Exit 2.
    Input(String),
    /// Evaluation failures and singularities. Exit 3.
    Eval(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Eval(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Eval(m) => m,
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        if e.is_parse_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Eval(e.to_string())
        }
    }
}

impl From<ChartError> for CliError {
    fn from(e: ChartError) -> Self {
        match e {
            ChartError::Expr(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<HelicityError> for CliError {
    fn from(e: HelicityError) -> Self {
        match e {
            HelicityError::InvalidKinematics(_) => CliError::Input(e.to_string()),
            HelicityError::Chart(inner) => inner.into(),
            other => CliError::Eval(other.to_string()),
        }
    }
}

impl From<ShellError> for CliError {
    fn from(e: ShellError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Input(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let out = match &cli.command {
        Command::Derive { expr, var, chart, at } => derive(expr, var, chart, at)?,
        Command::Commute { expr, v1, v2, chart, at, pcomm, samples } => {
            commute(expr, v1, v2, chart, at, pcomm.as_deref(), *samples, cli.seed)?
        }
        Command::Polvec { kin, lambda } => polvec(kin, lambda)?,
        Command::Fields { kin, lambda } => fields(kin, lambda)?,
        Command::Ansatz { expr, kin, chart, jacobi } => ansatz(expr, kin, chart, *jacobi)?,
        Command::Shell { shell, shells, at } => shell_cmd(shell, shells.as_ref(), at)?,
        Command::Dirac { p, p4, mu, variant, reading, branch } => dirac(p, *p4, *mu, variant, reading, *branch)?,
        Command::Algebra { kappa, file, pair } => algebra(*kappa, file.as_ref(), pair.as_deref())?,
        Command::Verify { tol, timing } => {
            return verify_cmd(cli.seed, *tol, *timing, cli.json);
        }
    };
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&out.json).expect("json output"));
    } else {
        print!("{}", out.text);
    }
    Ok(0)
}

/// Text and JSON renderings of one command's result.
struct Output {
    text: String,
    json: Value,
}

impl Output {
    fn new(command: &str) -> Self {
        Self { text: String::new(), json: json!({ "schema": SCHEMA, "command": command }) }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn set(&mut self, key: &str, v: Value) {
        self.json[key] = v;
    }
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn rtext(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-4 || x.abs() >= 1e16 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn ctext(z: C64) -> String {
    if z.im == 0.0 {
        rtext(z.re)
    } else if z.re == 0.0 {
        format!("{}i", rtext(z.im))
    } else {
        format!("{} {} {}i", rtext(z.re), if z.im < 0.0 { '-' } else { '+' }, rtext(z.im.abs()))
    }
}

fn residual_text(x: f64) -> String {
    format!("{x:.11e}")
}

fn read_file(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_chart(args: &ChartArgs) -> Result<Chart> {
    if args.branch != 1 && args.branch != -1 {
        return Err(CliError::Input(format!("branch must be +1 or -1, got {}", args.branch)));
    }
    match &args.chart {
        Some(path) => Ok(Chart::from_json(&read_file(path)?)?),
        None => Ok(Chart::standard(args.branch)),
    }
}

/// `--at` tokens: `key=v[,v...]`, split on whitespace and commas; bare numbers
/// extend the previous key's vector.
fn parse_at(tokens: &[String]) -> Result<Vec<(String, Vec<f64>)>> {
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    for piece in tokens.iter().flat_map(|t| t.split([',', ' '])).filter(|s| !s.is_empty()) {
        let (key, value) = match piece.split_once('=') {
            Some((k, v)) => (Some(k.trim()), v.trim()),
            None => (None, piece.trim()),
        };
        let x: f64 = value.parse().map_err(|_| CliError::Input(format!("--at: `{value}` is not a number")))?;
        if !x.is_finite() {
            return Err(CliError::Input(format!("--at: `{value}` is not finite")));
        }
        match key {
            Some("") => return Err(CliError::Input("--at: empty key".into())),
            Some(k) => out.push((k.to_string(), vec![x])),
            None => match out.last_mut() {
                Some((_, v)) => v.push(x),
                None => return Err(CliError::Input(format!("--at: `{value}` has no key"))),
            },
        }
    }
    Ok(out)
}

fn alias(k: &str) -> &str {
    match k {
        "px" => "p1",
        "py" => "p2",
        "pz" => "p3",
        other => other,
    }
}

/// Scalars bind as given; a vector `k=a,b,c` binds `k1, k2, k3`.
fn bindings_from(entries: &[(String, Vec<f64>)]) -> Bindings {
    let mut b = Bindings::new();
    for (k, vs) in entries {
        if vs.len() == 1 {
            b.set_real(alias(k), vs[0]);
        } else {
            for (n, v) in vs.iter().enumerate() {
                b.set_real(format!("{k}{}", n + 1), *v);
            }
        }
    }
    b
}

/// Complete a point on the chart: derived variables are filled in when all
/// their base variables are bound.
fn complete(chart: &Chart, point: &Bindings) -> Bindings {
    let mut out = point.clone();
    for d in chart.derived() {
        if !out.contains(&d.name) {
            if let Ok(v) = eval(&d.defining(), point) {
                out.set(d.name.clone(), v);
            }
        }
    }
    out
}

fn point_json(b: &Bindings) -> Value {
    let mut m = serde_json::Map::new();
    for (k, v) in b.iter() {
        m.insert(k.to_string(), cjson(v));
    }
    Value::Object(m)
}

fn derive(text: &str, var: &str, chart_args: &ChartArgs, at: &AtArgs) -> Result<Output> {
    let chart = load_chart(chart_args)?;
    let f = parse(text)?;
    let d = onshell::whole_partial(&chart, &f, var)?.simplify();
    let mut out = Output::new("derive");
    out.line(format!("D/D{var} [{f}] = {d}"));
    out.set("expr", json!(f.to_string()));
    out.set("var", json!(var));
    out.set("result", json!(d.to_string()));
    if let Some(tokens) = &at.at {
        let point = complete(&chart, &bindings_from(&parse_at(tokens)?));
        let value = eval(&d, &point)?;
        out.line(format!("value: {}", ctext(value)));
        out.set("at", point_json(&point));
        out.set("value", cjson(value));
        match onshell::fd_whole_partial(&chart, &f, var, &point, FD_STEP) {
            Ok(fd) => {
                let err = rel_err(fd, value);
                let agree = err <= FD_AGREEMENT;
                out.line(format!(
                    "finite difference (h = {FD_STEP:e}): {} rel err {} {}",
                    ctext(fd),
                    residual_text(err),
                    if agree { "agree" } else { "DISAGREE" }
                ));
                out.set("fd", json!({ "h": FD_STEP, "value": cjson(fd), "rel_err": err, "agree": agree }));
            }
            Err(e) => {
                out.line(format!("finite difference: unavailable ({e})"));
                out.set("fd", Value::Null);
            }
        }
    }
    Ok(out)
}

fn momentum_axis(chart: &Chart, v: &str) -> Option<usize> {
    let axis = match v {
        "p1" | "px" => 1,
        "p2" | "py" => 2,
        "p3" | "pz" => 3,
        _ => return None,
    };
    (chart.kind(&format!("p{axis}")) == Some(VarKind::Base)).then_some(axis)
}

#[allow(clippy::too_many_arguments)]
fn commute(
    text: &str,
    v1: &str,
    v2: &str,
    chart_args: &ChartArgs,
    at: &AtArgs,
    pcomm: Option<&str>,
    samples: usize,
    seed: u64,
) -> Result<Output> {
    let chart = load_chart(chart_args)?;
    let f = parse(text)?;
    let mut out = Output::new("commute");
    out.set("expr", json!(f.to_string()));
    out.set("pair", json!([v1, v2]));

    let (result, closed) = match pcomm {
        Some(pc) => {
            let (Some(i), Some(j)) = (momentum_axis(&chart, v1), momentum_axis(&chart, v2)) else {
                return Err(CliError::Input("--pcomm needs two momentum variables".into()));
            };
            if chart.kind(ENERGY) != Some(VarKind::Derived) {
                return Err(CliError::Input("--pcomm needs a chart with derived energy `E`".into()));
            }
            let pc = parse(pc)?;
            out.set("pcomm", json!(pc.to_string()));
            (onshell::momentum_commutator_apply(&chart, i, j, &f, &pc)?.simplify(), None)
        }
        None => {
            let r = onshell::commutator_apply(&chart, v1, v2, &f)?;
            let c = onshell::commutator_closed_form_general(&chart, v1, v2, &f)?;
            (r.simplify(), Some(c.simplify()))
        }
    };
    out.line(format!("[D/D{v1}, D/D{v2}] {f} = {result}"));
    out.set("result", json!(result.to_string()));
    out.set("identically_zero", json!(result.is_zero()));
    if result.is_zero() {
        out.line("identically zero");
    }

    if let Some(closed) = &closed {
        out.line(format!("closed form: {closed}"));
        out.set("closed_form", json!(closed.to_string()));
        let mut sampler = OnShellSampler::new(&chart, seed);
        match expr::max_rel_residual(&result, closed, &mut sampler, samples) {
            Ok((r, n)) => {
                out.line(format!("closed-form residual over {n} on-shell samples: {}", residual_text(r)));
                out.set("closed_form_residual", json!({ "max_rel": r, "samples": n, "seed": seed }));
            }
            Err(e) => {
                out.line(format!("closed-form residual: unavailable ({e})"));
                out.set("closed_form_residual", Value::Null);
            }
        }
    }

    if let Some(tokens) = &at.at {
        let point = complete(&chart, &bindings_from(&parse_at(tokens)?));
        let value = eval(&result, &point)?;
        out.line(format!("value: {}", ctext(value)));
        out.set("at", point_json(&point));
        out.set("value", cjson(value));
        if let Some(closed) = &closed {
            let cv = eval(closed, &point)?;
            let r = rel_err(value, cv);
            out.line(format!("closed form at point: {} residual {}", ctext(cv), residual_text(r)));
            out.set("closed_form_value", cjson(cv));
            out.set("residual", json!(r));
        }
    }
    Ok(out)
}

fn kinematics(k: &KinArgs) -> Result<Kinematics> {
    let p: [f64; 3] =
        k.p.as_slice().try_into().map_err(|_| CliError::Input(format!("--p needs 3 components, got {}", k.p.len())))?;
    Ok(Kinematics::new(p, k.m)?)
}

fn helicities(s: &str) -> Result<Vec<Helicity>> {
    if s == "all" {
        Ok(Helicity::ALL.to_vec())
    } else {
        Ok(vec![s.parse::<Helicity>().map_err(CliError::Input)?])
    }
}

fn vec_json(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|z| cjson(*z)).collect())
}

fn vec_text(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| ctext(*z)).collect();
    format!("({})", parts.join(", "))
}

fn kin_json(k: &Kinematics) -> Value {
    json!({ "p": k.p, "m": k.m, "E": k.energy() })
}

fn polvec(kin: &KinArgs, lambda: &str) -> Result<Output> {
    let k = kinematics(kin)?;
    let p = k.four_momentum();
    let mut out = Output::new("polvec");
    out.set("kinematics", kin_json(&k));
    out.line(format!("p = {:?}, m = {}, E = {}", k.p, k.m, k.energy()));
    let mut modes = Vec::new();
    for l in helicities(lambda)? {
        let eps: FourVector = helicity::pol_vector(&k, l)?;
        let norm = eps.norm_sq();
        let transverse = p.contract(&eps);
        out.line(format!("eps_mu({l}) = {}", vec_text(&eps.0)));
        out.line(format!("  eps.eps* = {}  p.eps = {}", ctext(norm), ctext(transverse)));
        modes.push(json!({
            "lambda": l.label(),
            "eps": vec_json(&eps.0),
            "norm": cjson(norm),
            "p_dot_eps": cjson(transverse),
        }));
    }
    out.set("modes", Value::Array(modes));
    Ok(out)
}

fn fields(kin: &KinArgs, lambda: &str) -> Result<Output> {
    let k = kinematics(kin)?;
    let mut out = Output::new("fields");
    out.set("kinematics", kin_json(&k));
    let mut modes = Vec::new();
    for l in helicities(lambda)? {
        let closed = helicity::fields_closed(&k, l)?;
        let eps = helicity::pol_vector(&k, l)?;
        let from = helicity::fields_from_potential(&k, &eps);
        let diff = closed.max_diff(&from);
        out.line(format!("lambda = {l}"));
        out.line(format!("  E = {}", vec_text(&closed.e)));
        out.line(format!("  B = {}", vec_text(&closed.b)));
        out.line(format!("  from potential: max diff {}", residual_text(diff)));
        modes.push(json!({
            "lambda": l.label(),
            "E": vec_json(&closed.e),
            "B": vec_json(&closed.b),
            "potential": { "E": vec_json(&from.e), "B": vec_json(&from.b) },
            "max_diff": diff,
        }));
    }
    out.set("modes", Value::Array(modes));
    Ok(out)
}

fn ansatz(text: &str, kin: &KinArgs, chart_args: &ChartArgs, jacobi: bool) -> Result<Output> {
    let chart = load_chart(chart_args)?;
    let k = kinematics(kin)?;
    let f = parse(text)?;
    let conv = AnsatzConvention::default();
    let r = helicity::ansatz_commutator(&chart, &k, &f, &conv)?;
    let long = helicity::longitudinal_tensor(&k)?;
    let mut out = Output::new("ansatz");
    out.set("expr", json!(f.to_string()));
    out.set("kinematics", kin_json(&k));
    out.line(format!("f = {f}, p = {:?}, m = {}, E = {}", k.p, k.m, k.energy()));
    out.line(format!("df/dE = {}", ctext(r.df_de)));
    out.set("df_dE", cjson(r.df_de));
    out.set("commutator", Value::Array(r.commutator.iter().map(|row| vec_json(row)).collect()));
    for i in 1..4 {
        out.line(format!("[x^0, x^{i}] f = {}", ctext(r.commutator[0][i])));
    }
    out.line(format!("longitudinal E = {}", vec_text(&long.e)));
    out.set("longitudinal_E", vec_json(&long.e));
    match r.coefficient_vector() {
        Some(coef) => {
            let cross = helicity::norm3(&helicity::cross(&coef, &long.e));
            out.line(format!("coefficients = {}", vec_text(&coef)));
            out.line(format!("|coefficients x E_par| = {}", residual_text(cross)));
            out.set("coefficients", vec_json(&coef));
            out.set("cross_norm", json!(cross));
        }
        None => {
            out.line("df/dE vanishes: no coefficients");
            out.set("coefficients", Value::Null);
        }
    }
    let omega: Vec<Value> = r.omega.iter().map(|w| w.map_or(Value::Null, cjson)).collect();
    for (i, w) in r.omega.iter().enumerate() {
        out.line(format!("omega_{} = {}", i + 1, w.map_or("undefined".to_string(), ctext)));
    }
    out.set("omega", Value::Array(omega));
    if jacobi {
        let mut worst = 0.0f64;
        let mut per = Vec::new();
        for triple in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            let res = helicity::ansatz_jacobi_residual(&chart, &k, &f, triple, &conv)?;
            worst = worst.max(res);
            per.push(json!({ "triple": triple, "residual": res }));
            out.line(format!("Jacobi {triple:?}: {}", residual_text(res)));
        }
        out.set("jacobi", json!({ "max": worst, "triples": per }));
    }
    Ok(out)
}

fn shell_cmd(name: &str, file: Option<&PathBuf>, at: &AtArgs) -> Result<Output> {
    let presets = match file {
        Some(path) => ShellPresets::from_json(&read_file(path)?)?,
        None => ShellPresets::default(),
    };
    let def = presets.get(name)?;
    let entries = parse_at(at.at.as_deref().unwrap_or_default())?;
    let get = |key: &str| entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    let point = match get("p") {
        Some(p) if p.len() == 5 => ShellPoint::Five([p[0], p[1], p[2], p[3], p[4]]),
        Some(p) if p.len() == 3 => {
            let e = get("E").and_then(|v| v.first().copied());
            let e = e.ok_or_else(|| CliError::Input("--at needs E=... with a 3-momentum".into()))?;
            ShellPoint::EnergyMomentum { e, p: [p[0], p[1], p[2]] }
        }
        _ => return Err(CliError::Input("--at needs p=p1,p2,p3 with E=..., or p=p0,...,p4".into())),
    };
    let residual = def.residual(name, point)?;
    let mut out = Output::new("shell");
    out.set("shell", json!(name));
    out.set("definition", serde_json::to_value(def).expect("definition serializes"));
    out.set("residual", json!(residual));
    out.line(format!("shell {name}: residual {}", residual_text(residual)));
    Ok(out)
}

fn dirac(p: &[f64], p4: f64, mu: f64, variant: &str, reading: &str, branch: i32) -> Result<Output> {
    let reading = match reading {
        "half" => MassTerm::HalfArgument,
        "sinh" => MassTerm::HalvedSinh,
        other => return Err(CliError::Input(format!("unknown reading `{other}` (expected half or sinh)"))),
    };
    let variants = match variant {
        "both" => vec![SpinorVariant::Psi, SpinorVariant::PsiR],
        v => vec![v.parse::<SpinorVariant>().map_err(CliError::Input)?],
    };
    let p: [f64; 4] = match p.len() {
        4 => [p[0], p[1], p[2], p[3]],
        3 => {
            let a = reading.value(mu);
            let b = p4 - 1.0;
            let p0sq = a * a + p.iter().map(|x| x * x).sum::<f64>() - b * b;
            if p0sq < 0.0 {
                return Err(CliError::Eval(format!("no real p0 on the shell (p0^2 = {p0sq})")));
            }
            let s = if branch < 0 { -1.0 } else { 1.0 };
            [s * p0sq.sqrt(), p[0], p[1], p[2]]
        }
        n => return Err(CliError::Input(format!("--p needs 3 or 4 components, got {n}"))),
    };
    let g = GammaSet::dirac();
    let alg = shells::dirac_algebraic_residual(p, p4, mu, reading);
    let mass = shells::mass_relation(mu);
    let mut out = Output::new("dirac");
    out.set("p", json!(p));
    out.set("p4", json!(p4));
    out.set("mu", json!(mu));
    out.set("reading", json!(format!("{reading:?}")));
    out.set("algebraic_residual", json!(alg));
    out.set("mass", json!({ "m": mass.m, "m4": mass.m4 }));
    out.line(format!("p = {p:?}, p4 = {p4}, mu = {mu}"));
    out.line(format!("a^2 - p.p - (p4 - 1)^2 = {}", residual_text(alg)));
    let mut dets = Vec::new();
    for v in variants {
        let (det, _) = shells::dirac_shell_residual(&g, p, p4, mu, v, reading);
        out.line(format!("det D({v:?}) = {}  |det| = {}", ctext(det), residual_text(det.norm())));
        dets.push(json!({ "variant": format!("{v:?}"), "det": cjson(det), "abs": det.norm() }));
    }
    out.set("determinants", Value::Array(dets));
    out.line(format!("m = sinh(mu) = {}, m4 = cosh(mu) = {}", mass.m, mass.m4));
    Ok(out)
}

fn algebra(kappa: Option<f64>, file: Option<&PathBuf>, pair: Option<&[String]>) -> Result<Output> {
    let alg = match (kappa, file) {
        (_, Some(path)) => CoordAlgebra::from_json(&read_file(path)?)?,
        (k, None) => CoordAlgebra::kappa_minkowski(k.unwrap_or(1.0))?,
    };
    let mut out = Output::new("algebra");
    out.set("generators", json!(alg.generators()));
    let gens = alg.generators().to_vec();
    let pairs: Vec<(String, String)> = match pair {
        Some([a, b]) => vec![(a.clone(), b.clone())],
        Some(_) => return Err(CliError::Input("--pair needs two generators".into())),
        None => {
            let mut v = Vec::new();
            for a in 0..gens.len() {
                for b in (a + 1)..gens.len() {
                    v.push((gens[a].clone(), gens[b].clone()));
                }
            }
            v
        }
    };
    let mut brackets = Vec::new();
    for (a, b) in pairs {
        let c = alg.commutator(&a, &b)?;
        let text = alg.format_element(&c);
        out.line(format!("[{a}, {b}] = {text}"));
        brackets.push(json!({
            "pair": [a, b],
            "value": text,
            "scalar": cjson(c.scalar),
            "coeffs": vec_json(&c.coeffs),
        }));
    }
    out.set("brackets", Value::Array(brackets));
    let jacobi = alg.jacobi_residual();
    out.line(format!("Jacobi residual: {}", residual_text(jacobi)));
    out.set("jacobi_residual", json!(jacobi));
    Ok(out)
}

fn verify_cmd(seed: u64, tol: Option<f64>, timing: bool, as_json: bool) -> Result<u8> {
    if let Some(t) = tol {
        if !(t >= 0.0) {
            return Err(CliError::Input(format!("--tol must be non-negative, got {t}")));
        }
    }
    let report = verify::run(VerifyOptions { seed, tolerance: tol, timing });
    if as_json {
        println!("{}", report.to_json());
    } else {
        for c in &report.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            };
            let op = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            let mut line = format!(
                "{status} [{}] {:<34} {} {op} {:e} (n = {})",
                c.criterion,
                c.name,
                residual_text(c.residual),
                c.tolerance,
                c.samples
            );
            if let Some(ms) = c.wall_ms {
                line.push_str(&format!(" {ms:.1} ms"));
            }
            if let Some(note) = &c.note {
                line.push_str(&format!(" ({note})"));
            }
            println!("{line}");
        }
        let failed = report.failures().count();
        println!("{} of {} checks passed (seed {seed})", report.checks.len() - failed, report.checks.len());
    }
    Ok(if report.passed { 0 } else { 1 })
}

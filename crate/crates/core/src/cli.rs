//! Command-line driver. Each subcommand runs one study, writes a JSON
//! report (plus CSV tables) to `--out`, and prints one PASS/FAIL line per
//! check.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::geometry::{
    scan_critical_points, transition_derivatives, verify_metric_expansion, BoundaryManifold, BoundaryPoint,
    CriticalKind, FermiChart, ManifoldSpec,
};
use crate::pde::{self, NewtonOptions};
use crate::profile::{
    self, compute_constants, halfspace_angular_moment, nehari_residual, ode_residual, solve_ground_state, Parameters,
};
use crate::reduction::{self, QuadSpec};
use crate::spectrum::{assemble_linearized, kernel_report, HalfBoxGrid, SpectrumReport};

/// JSON schema for `--config` files.
pub const CONFIG_SCHEMA: &str = include_str!("../schema/config.schema.json");

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const MODULES: [&str; 5] = ["profile", "geometry", "reduction", "spectrum", "pde"];

#[derive(Parser, Debug)]
#[command(name = "spikelab", version, about = "Boundary spike layers for singularly perturbed Neumann problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Radial ground state by shooting; checks the 1-D solitons.
    GroundState(Flags),
    /// Half-space constants C and alpha with the Pohozaev residual.
    Constants(Flags),
    /// Angular/radial moment identity ∫(U'/|z|)² z_1² z_n = ½∫(U'/|z|)² z_n³.
    IdentityCheck(Flags),
    /// Fermi metric expansions and chart-transition identities.
    GeometryCheck(Flags),
    /// Reduced energy J over the boundary and critical points of H.
    Landscape(Flags),
    /// Fit J = C - ε α H + o(ε) at a fixed boundary point.
    Expansion(Flags),
    /// Compare ∇J with -ε α ∇H.
    GradientCheck(Flags),
    /// Low spectrum of the linearized operator on the half box.
    Spectrum(Flags),
    /// Scaling of the projected remainder with ε.
    Remainder(Flags),
    /// Newton solve at one ε from the peak ansatz.
    Solve(Flags),
    /// Newton continuation along a descending ε list.
    Continuation(Flags),
}

impl Command {
    fn split(self) -> (&'static str, Flags) {
        match self {
            Command::GroundState(f) => ("ground-state", f),
            Command::Constants(f) => ("constants", f),
            Command::IdentityCheck(f) => ("identity-check", f),
            Command::GeometryCheck(f) => ("geometry-check", f),
            Command::Landscape(f) => ("landscape", f),
            Command::Expansion(f) => ("expansion", f),
            Command::GradientCheck(f) => ("gradient-check", f),
            Command::Spectrum(f) => ("spectrum", f),
            Command::Remainder(f) => ("remainder", f),
            Command::Solve(f) => ("solve", f),
            Command::Continuation(f) => ("continuation", f),
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
struct Flags {
    /// Space dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Nonlinearity exponent.
    #[arg(long)]
    p: Option<f64>,
    /// (n, p) pair written as n:p; repeatable.
    #[arg(long = "case", value_parser = parse_case)]
    cases: Vec<(usize, f64)>,
    /// Domain, e.g. ellipse:2,1 or disk:1; repeatable where supported.
    #[arg(long)]
    manifold: Vec<String>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    /// Boundary parameter of the peak (t on curves, polar angle on surfaces).
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<f64>,
    /// Cutoff radius of the peak ansatz.
    #[arg(long)]
    r_cut: Option<f64>,
    /// Mesh size for the planar solver.
    #[arg(long)]
    h_mesh: Option<f64>,
    /// Half-box size L.
    #[arg(long)]
    box_l: Option<f64>,
    /// Half-box grid step.
    #[arg(long)]
    grid_h: Option<f64>,
    /// Number of eigenpairs.
    #[arg(long)]
    eigen_count: Option<usize>,
    /// Threshold on |λ| for counting kernel eigenvalues.
    #[arg(long)]
    kernel_tol: Option<f64>,
    /// Repeat the spectrum at half the grid step.
    #[arg(long)]
    refine: Option<bool>,
    /// Newton tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Move the first continuation seed downhill in the ansatz energy.
    #[arg(long)]
    localize: Option<bool>,
    /// Number of boundary samples.
    #[arg(long)]
    resolution: Option<usize>,
    /// Profile grid: outer radius, step and shooting tolerance.
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    shoot_tol: Option<f64>,
    /// JSON config; its fields override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_case(s: &str) -> Result<(usize, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected n:p, got '{s}'"))?;
    let n = a.trim().parse::<usize>().map_err(|e| format!("n in '{s}': {e}"))?;
    let p = b.trim().parse::<f64>().map_err(|e| format!("p in '{s}': {e}"))?;
    Ok((n, p))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ManifoldArg {
    Text(String),
    Spec(ManifoldSpec),
}

impl ManifoldArg {
    fn spec(&self) -> crate::Result<ManifoldSpec> {
        match self {
            ManifoldArg::Text(s) => ManifoldSpec::parse(s),
            ManifoldArg::Spec(s) => Ok(*s),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct Case {
    n: usize,
    p: f64,
}

/// Validated parameter set; unset fields take per-subcommand defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    n: Option<usize>,
    p: Option<f64>,
    cases: Option<Vec<Case>>,
    manifold: Option<Vec<ManifoldArg>>,
    eps: Option<Vec<f64>>,
    xi: Option<f64>,
    r_cut: Option<f64>,
    h_mesh: Option<f64>,
    box_l: Option<f64>,
    grid_h: Option<f64>,
    eigen_count: Option<usize>,
    kernel_tol: Option<f64>,
    refine: Option<bool>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    localize: Option<bool>,
    resolution: Option<usize>,
    r_max: Option<f64>,
    step: Option<f64>,
    shoot_tol: Option<f64>,
}

enum Failure {
    Config(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            other => Failure::Numerical(other),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn config_err<T>(msg: impl Into<String>) -> Res<T> {
    Err(Failure::Config(msg.into()))
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed, detail: detail.into() }
    }

    fn below(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check::new(name, value < limit, format!("{value:.3e} < {limit:.1e}"))
    }

    fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Check {
        Check::new(name, value >= limit, format!("{value:.4} >= {limit}"))
    }
}

#[derive(Default)]
struct Outcome {
    params: Map<String, Value>,
    tolerances: Map<String, Value>,
    checks: Vec<Check>,
    result: Map<String, Value>,
    tables: Vec<(String, String)>,
}

impl Outcome {
    fn param(&mut self, k: &str, v: impl Into<Value>) {
        self.params.insert(k.into(), v.into());
    }
    fn tol(&mut self, k: &str, v: f64) {
        self.tolerances.insert(k.into(), json!(v));
    }
    fn put(&mut self, k: &str, v: impl serde::Serialize) {
        self.result.insert(k.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }
}

pub fn usage() -> String {
    use clap::CommandFactory;
    Cli::command().render_help().to_string()
}

/// Result of one invocation: exit code, checks, and text destined for
/// stdout/stderr.
#[derive(Debug, Clone, Default)]
pub struct Execution {
    pub code: i32,
    pub checks: Vec<Check>,
    pub stdout: String,
    pub stderr: String,
}

impl Execution {
    fn exit(code: i32, stderr: String) -> Execution {
        Execution { code, stderr, ..Default::default() }
    }
}

/// Run one invocation without printing. Exit code: 0 when every check
/// passes, 1 on a failed check or numerical error, 2 on a usage or
/// configuration error.
pub fn execute<I, T>(argv: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::error::ErrorKind;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Execution { code: 0, stdout: e.to_string(), ..Default::default() }
                }
                ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Execution::exit(2, format!("{e}\n{}", usage()))
                }
                _ => Execution::exit(2, e.to_string()),
            };
        }
    };
    let (name, flags) = cli.command.split();
    let cfg = match load_config(&flags) {
        Ok(c) => c,
        Err(msg) => return Execution::exit(2, format!("config error: {msg}\n")),
    };
    let outcome = match dispatch(name, &cfg) {
        Ok(o) => o,
        Err(Failure::Config(msg)) => return Execution::exit(2, format!("config error: {msg}\n")),
        Err(Failure::Numerical(e)) => {
            let mut ex = Execution::exit(1, format!("{name}: {e}\n"));
            ex.checks.push(Check::new(name, false, e.to_string()));
            return ex;
        }
    };
    if let Err(e) = write_outputs(name, &flags.out, &outcome) {
        return Execution::exit(1, format!("{name}: cannot write outputs: {e}\n"));
    }
    let all = outcome.checks.iter().all(|c| c.passed);
    Execution { code: if all { 0 } else { 1 }, checks: outcome.checks, ..Default::default() }
}

/// Run the CLI on `argv` (including the program name), print the results
/// and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let ex = execute(argv);
    print!("{}", ex.stdout);
    eprint!("{}", ex.stderr);
    for c in &ex.checks {
        println!("{c}");
    }
    ex.code
}

fn schema_validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(CONFIG_SCHEMA).expect("bundled schema is valid JSON");
    jsonschema::validator_for(&schema).expect("bundled schema compiles")
}

/// Validate a config object against the published schema. Returns one
/// message per offending field.
pub fn validate_config(value: &Value) -> Vec<String> {
    let v = schema_validator();
    v.iter_errors(value)
        .map(|e| {
            let path = e.instance_path().to_string();
            let field = if path.is_empty() { "(root)".to_string() } else { path };
            format!("{field}: {e}")
        })
        .collect()
}

fn flags_to_value(f: &Flags) -> Value {
    let mut m = Map::new();
    let mut put = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    put("n", f.n.map(|v| json!(v)));
    put("p", f.p.map(|v| json!(v)));
    if !f.cases.is_empty() {
        put("cases", Some(Value::Array(f.cases.iter().map(|(n, p)| json!({"n": n, "p": p})).collect())));
    }
    if !f.manifold.is_empty() {
        put("manifold", Some(json!(f.manifold)));
    }
    if !f.eps.is_empty() {
        put("eps", Some(json!(f.eps)));
    }
    put("xi", f.xi.map(|v| json!(v)));
    put("r_cut", f.r_cut.map(|v| json!(v)));
    put("h_mesh", f.h_mesh.map(|v| json!(v)));
    put("box_l", f.box_l.map(|v| json!(v)));
    put("grid_h", f.grid_h.map(|v| json!(v)));
    put("eigen_count", f.eigen_count.map(|v| json!(v)));
    put("kernel_tol", f.kernel_tol.map(|v| json!(v)));
    put("refine", f.refine.map(|v| json!(v)));
    put("tol", f.tol.map(|v| json!(v)));
    put("max_iter", f.max_iter.map(|v| json!(v)));
    put("localize", f.localize.map(|v| json!(v)));
    put("resolution", f.resolution.map(|v| json!(v)));
    put("r_max", f.r_max.map(|v| json!(v)));
    put("step", f.step.map(|v| json!(v)));
    put("shoot_tol", f.shoot_tol.map(|v| json!(v)));
    Value::Object(m)
}

fn load_config(flags: &Flags) -> std::result::Result<RunConfig, String> {
    let mut merged = flags_to_value(flags);
    let errors = validate_config(&merged);
    if !errors.is_empty() {
        return Err(errors.join("; "));
    }
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let errors = validate_config(&file);
        if !errors.is_empty() {
            return Err(errors.join("; "));
        }
        if let (Value::Object(dst), Value::Object(src)) = (&mut merged, file) {
            for (k, v) in src {
                dst.insert(k, v);
            }
        }
    }
    parse_config(merged)
}

/// Turn a schema-valid config object into a `RunConfig`.
pub fn parse_config(mut value: Value) -> std::result::Result<RunConfig, String> {
    if let Value::Object(m) = &mut value {
        for key in ["manifold", "eps"] {
            if let Some(v) = m.get_mut(key) {
                if !v.is_array() {
                    *v = Value::Array(vec![v.take()]);
                }
            }
        }
    }
    serde_json::from_value(value).map_err(|e| e.to_string())
}

fn dispatch(name: &str, cfg: &RunConfig) -> Res<Outcome> {
    match name {
        "ground-state" => ground_state(cfg),
        "constants" => constants(cfg),
        "identity-check" => identity_check(cfg),
        "geometry-check" => geometry_check(cfg),
        "landscape" => landscape(cfg),
        "expansion" => expansion(cfg),
        "gradient-check" => gradient(cfg),
        "spectrum" => spectrum(cfg),
        "remainder" => remainder(cfg),
        "solve" => solve(cfg),
        "continuation" => continuation(cfg),
        other => config_err(format!("unknown subcommand '{other}'")),
    }
}

fn sha256_hex(s: &str) -> String {
    Sha256::digest(s.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn meta(name: &str, o: &Outcome) -> Value {
    let canonical = json!({ "subcommand": name, "config": o.params });
    let modules: Map<String, Value> = MODULES.iter().map(|m| (m.to_string(), json!(VERSION))).collect();
    json!({
        "tool": "spikelab",
        "version": VERSION,
        "subcommand": name,
        "config_hash": sha256_hex(&canonical.to_string()),
        "config": o.params,
        "tolerances": o.tolerances,
        "modules": modules,
    })
}

fn write_outputs(name: &str, out: &Path, o: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(out)?;
    let meta = meta(name, o);
    let checks: Vec<Value> =
        o.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect();
    let doc = json!({ "meta": meta, "checks": checks, "result": o.result });
    let mut text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(out.join(format!("{name}.json")), text)?;
    let header = format!("# meta {}\n", meta);
    for (file, body) in &o.tables {
        fs::write(out.join(file), format!("{header}{body}"))?;
    }
    Ok(())
}

// ---------- parameter helpers ----------

fn cases(cfg: &RunConfig, default: &[(usize, f64)]) -> Vec<(usize, f64)> {
    if let Some(c) = &cfg.cases {
        return c.iter().map(|c| (c.n, c.p)).collect();
    }
    match (cfg.n, cfg.p) {
        (None, None) => default.to_vec(),
        (n, p) => vec![(n.unwrap_or(default[0].0), p.unwrap_or(default[0].1))],
    }
}

fn manifolds(cfg: &RunConfig, default: &[&str]) -> Res<Vec<BoundaryManifold>> {
    let specs: Vec<ManifoldSpec> = match &cfg.manifold {
        Some(list) => list.iter().map(|m| m.spec()).collect::<crate::Result<_>>()?,
        None => default.iter().map(|s| ManifoldSpec::parse(s)).collect::<crate::Result<_>>()?,
    };
    specs
        .into_iter()
        .map(|s| BoundaryManifold::new(s).or_else(|e| config_err(e.to_string())))
        .collect()
}

fn one_manifold(cfg: &RunConfig, default: &str) -> Res<BoundaryManifold> {
    let mut ms = manifolds(cfg, &[default])?;
    if ms.len() != 1 {
        return config_err(format!("this subcommand takes one manifold, got {}", ms.len()));
    }
    Ok(ms.remove(0))
}

fn planar(m: &BoundaryManifold) -> Res<()> {
    if m.n() != 2 {
        return config_err(format!("{} is not planar; the solver handles n = 2 only", m.spec().kind()));
    }
    Ok(())
}

fn point_at(m: &BoundaryManifold, xi: f64) -> BoundaryPoint {
    if m.n() == 2 {
        m.curve_point(xi)
    } else {
        m.surface_point(0.0, xi)
    }
}

fn manifold_label(m: &BoundaryManifold) -> String {
    serde_json::to_value(m.spec())
        .ok()
        .and_then(|v| v.as_object().cloned())
        .map(|o| {
            let nums: Vec<String> =
                ["radius", "a", "b", "c"].iter().filter_map(|k| o.get(*k)).map(|v| v.to_string()).collect();
            format!("{}:{}", m.spec().kind(), nums.join(","))
        })
        .unwrap_or_else(|| m.spec().kind().to_string())
}

fn manifold_json(ms: &[BoundaryManifold]) -> Value {
    Value::Array(ms.iter().map(|m| serde_json::to_value(m.spec()).unwrap_or(Value::Null)).collect())
}

fn profile_for(n: usize, p: f64) -> Res<profile::GroundStateProfile> {
    let params = Parameters::new(n, p).or_else(|e| config_err(e.to_string()))?;
    Ok(solve_ground_state(params, profile::DEFAULT_R_MAX, profile::DEFAULT_STEP, profile::DEFAULT_SHOOT_TOL)?)
}

fn file_tag(n: usize, p: f64) -> String {
    format!("n{n}_p{p}")
}

// ---------- subcommands ----------

fn ground_state(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let list = cases(cfg, &[(1, 4.0), (1, 3.0)]);
    let r_max = cfg.r_max.unwrap_or(profile::DEFAULT_R_MAX);
    let step = cfg.step.unwrap_or(profile::DEFAULT_STEP);
    let shoot_tol = cfg.shoot_tol.unwrap_or(profile::DEFAULT_SHOOT_TOL);
    o.param("cases", list.iter().map(|(n, p)| json!({"n": n, "p": p})).collect::<Vec<_>>());
    o.param("r_max", r_max);
    o.param("step", step);
    o.param("shoot_tol", shoot_tol);
    o.tol("soliton_sup", 1e-6);
    o.tol("nehari", 1e-6);
    o.tol("ode_residual", shoot_tol);
    let mut reports = vec![];
    for &(n, p) in &list {
        let params = Parameters::new(n, p).or_else(|e| config_err(e.to_string()))?;
        let prof = solve_ground_state(params, r_max, step, shoot_tol)?;
        let tag = format!("(n={n}, p={p})");
        let soliton: Option<Box<dyn Fn(f64) -> f64>> = match (n, p) {
            (1, 4.0) => Some(Box::new(|r: f64| 2f64.sqrt() / r.cosh())),
            (1, 3.0) => Some(Box::new(|r: f64| 1.5 / (0.5 * r).cosh().powi(2))),
            _ => None,
        };
        let sup = soliton.map(|f| prof.r_grid.iter().zip(&prof.v).map(|(r, v)| (v - f(*r)).abs()).fold(0.0, f64::max));
        if let Some(s) = sup {
            o.checks.push(Check::below(format!("soliton {tag}"), s, 1e-6));
        }
        let ode = ode_residual(&prof).iter().map(|r| r.abs()).fold(0.0, f64::max);
        let neh = nehari_residual(&prof);
        let monotone = prof.v.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0);
        o.checks.push(Check::below(format!("ode residual {tag}"), ode, shoot_tol));
        o.checks.push(Check::below(format!("nehari {tag}"), neh, 1e-6));
        o.checks.push(Check::new(format!("positive decreasing {tag}"), monotone, format!("{monotone}")));
        reports.push(json!({
            "n": n, "p": p, "V0": prof.v0(), "r_match": prof.r_match, "decay_c": prof.decay_c,
            "ode_residual": ode, "nehari_residual": neh, "soliton_sup_error": sup,
        }));
        o.tables.push((format!("profile_{}.csv", file_tag(n, p)), prof.to_csv()));
    }
    o.put("profiles", reports);
    Ok(o)
}

fn constants(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let list = cases(cfg, &[(2, 4.0)]);
    o.param("cases", list.iter().map(|(n, p)| json!({"n": n, "p": p})).collect::<Vec<_>>());
    o.tol("pohozaev_residual", 1e-6);
    let mut reports = vec![];
    for &(n, p) in &list {
        let prof = profile_for(n, p)?;
        let rep = compute_constants(&prof)?;
        o.checks.push(Check::below(format!("pohozaev (n={n}, p={p})"), rep.pohozaev_residual, 1e-6));
        let mut v = serde_json::to_value(&rep).unwrap_or(Value::Null);
        if let Value::Object(m) = &mut v {
            m.insert("n".into(), json!(n));
            m.insert("p".into(), json!(p));
        }
        reports.push(v);
    }
    if reports.len() == 1 {
        o.result = reports.remove(0).as_object().cloned().unwrap_or_default();
    } else {
        o.put("cases", reports);
    }
    Ok(o)
}

fn identity_check(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let list = cases(cfg, &[(2, 4.0), (3, 3.0)]);
    o.param("cases", list.iter().map(|(n, p)| json!({"n": n, "p": p})).collect::<Vec<_>>());
    o.tol("relative_error", 1e-8);
    let mut reports = vec![];
    for &(n, p) in &list {
        if n < 2 {
            return config_err("identity-check needs n >= 2");
        }
        let m11 = halfspace_angular_moment(n, 1, 1)?;
        let m03 = halfspace_angular_moment(n, 0, 3)?;
        let angular = (m11 - 0.5 * m03).abs() / m11;
        let prof = profile_for(n, p)?;
        let rep = compute_constants(&prof)?;
        let lhs = rep.moments[profile::M_DU_R_SQ_Z1SQ_ZN];
        let rhs = 0.5 * rep.moments[profile::M_DU_R_SQ_ZN3];
        let table = (lhs - rhs).abs() / rhs.abs();
        o.checks.push(Check::below(format!("angular moments (n={n})"), angular, 1e-8));
        o.checks.push(Check::below(format!("moment table (n={n}, p={p})"), table, 1e-8));
        reports.push(json!({
            "n": n, "p": p, "angular_z1sq_zn": m11, "angular_zn3": m03, "angular_relative_error": angular,
            "du_over_r_sq_z1sq_zn": lhs, "half_du_over_r_sq_zn3": rhs, "table_relative_error": table,
        }));
    }
    o.put("cases", reports);
    Ok(o)
}

fn geometry_check(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let m = one_manifold(cfg, "ellipse:2,1")?;
    let xi = cfg.xi.unwrap_or(std::f64::consts::FRAC_PI_6);
    o.param("manifold", manifold_json(std::slice::from_ref(&m)));
    o.param("xi", xi);
    o.tol("slope_min", 1.9);
    o.tol("mixed_identity", 1e-4);
    o.tol("transition", 1e-6);
    let q = point_at(&m, xi);
    let chart = FermiChart::new(&m, q);
    let rep = verify_metric_expansion(&chart)?;
    o.checks.push(Check::at_least("g1 residual slope", rep.g1_slope, 1.9));
    o.checks.push(Check::at_least("g3 residual slope", rep.g3_slope, 1.9));
    let (oracle, mixed_err) = if m.n() == 2 {
        let exact = m.curve_curvature_slope(q.param[0]);
        (Some(exact), (rep.mixed[0] + exact).abs())
    } else {
        (None, rep.g_residual)
    };
    o.checks.push(Check::below("mixed derivative of sqrt(det g) vs -(n-1) dH", mixed_err, 1e-4));
    let tr = transition_derivatives(&m, &q)?;
    let first = tr.e_at_zero_y.max(tr.d_eta).max(tr.d_y);
    o.checks.push(Check::below("transition map first-order identities", first, 1e-6));
    o.checks.push(Check::below("transition map normal component", tr.h_normal, 1e-6));
    if m.n() == 2 {
        let worst = tr.mixed.iter().copied().fold(0.0, f64::max);
        o.checks.push(Check::below("transition map mixed derivative", worst, 1e-6));
    } else {
        o.checks.push(Check::at_least("transition map mixed derivative decay slope", tr.mixed_slope, 1.0));
    }
    let mut csv = String::from("step,g1_residual,g3_residual\n");
    for k in 0..rep.steps.len() {
        csv.push_str(&format!("{:.6e},{:.12e},{:.12e}\n", rep.steps[k], rep.g1_residuals[k], rep.g3_residuals[k]));
    }
    o.tables.push(("geometry_metric.csv".into(), csv));
    o.put("metric", &rep);
    o.put("dH_exact", oracle);
    o.put("transition", &tr);
    Ok(o)
}

fn default_r_cut(m: &BoundaryManifold) -> f64 {
    0.9 * m.reach()
}

fn landscape(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let ms = manifolds(cfg, &["ellipse:2,1"])?;
    let p = cfg.p.unwrap_or(4.0);
    let eps = cfg.eps.as_ref().map(|e| e[0]).unwrap_or(0.04);
    let res = cfg.resolution.unwrap_or(64);
    o.param("manifold", manifold_json(&ms));
    o.param("p", p);
    o.param("eps", eps);
    o.param("resolution", res);
    o.param("r_cut", cfg.r_cut.map(Value::from).unwrap_or(Value::Null));
    o.tol("spread_relative", 1e-6);
    let mut reports = vec![];
    for m in &ms {
        let label = manifold_label(m);
        let prof = profile_for(m.n(), p)?;
        let r_cut = cfg.r_cut.unwrap_or_else(|| default_r_cut(m));
        let q = QuadSpec::with_cutoff(r_cut);
        let scan = scan_critical_points(m, 512);
        let span = if m.n() == 2 { 2.0 * std::f64::consts::PI } else { std::f64::consts::PI };
        let samples = (0..res)
            .map(|k| {
                let t = if m.n() == 2 { span * k as f64 / res as f64 } else { span * (k as f64 + 0.5) / res as f64 };
                reduction::reduced_energy(m, &prof, eps, &point_at(m, t), &q)
            })
            .collect::<crate::Result<Vec<_>>>()?;
        let jmax = samples.iter().map(|s| s.j).fold(f64::NEG_INFINITY, f64::max);
        let jmin = samples.iter().map(|s| s.j).fold(f64::INFINITY, f64::min);
        let mean = samples.iter().map(|s| s.j).sum::<f64>() / samples.len() as f64;
        let spread = (jmax - jmin) / mean.abs();
        if scan.degenerate {
            o.checks.push(Check::below(format!("J spread over xi on {label}"), spread, 1e-6));
            o.checks.push(Check::new(format!("degenerate landscape flag on {label}"), true, "DegenerateLandscape"));
        } else {
            let best = samples.iter().min_by(|a, b| a.j.partial_cmp(&b.j).unwrap()).unwrap();
            let hmax = samples.iter().map(|s| s.h).fold(f64::NEG_INFINITY, f64::max);
            let ok = best.h >= hmax - 1e-12;
            o.checks.push(Check::new(
                format!("J minimal where H is maximal on {label}"),
                ok,
                format!("argmin J at xi = {:.4} with H = {:.6} (max H {:.6})", best.xi_param.last().unwrap(), best.h, hmax),
            ));
        }
        let crit_error = if scan.degenerate { Some(Error::DegenerateLandscape { spread: scan.spread }.to_string()) } else { None };
        reports.push(json!({
            "manifold": label, "r_cut": r_cut, "J_min": jmin, "J_max": jmax, "spread_relative": spread,
            "degenerate": scan.degenerate, "curvature_spread": scan.spread, "critical_error": crit_error,
            "critical_points": scan.points,
        }));
        o.tables.push((format!("landscape_{}.csv", m.spec().kind()), reduction::landscape_csv(&samples)));
        o.tables.push((format!("curvature_{}.csv", m.spec().kind()), crate::geometry::landscape_csv(&scan.landscape)));
    }
    o.put("manifolds", reports);
    Ok(o)
}

fn expansion(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let ms = manifolds(cfg, &["ellipse:2,1", "disk:1"])?;
    let p = cfg.p.unwrap_or(4.0);
    let xi = cfg.xi.unwrap_or(0.0);
    o.param("manifold", manifold_json(&ms));
    o.param("p", p);
    o.param("xi", xi);
    o.param("eps", cfg.eps.clone().map(Value::from).unwrap_or(Value::Null));
    o.param("r_cut", cfg.r_cut.map(Value::from).unwrap_or(Value::Null));
    o.tol("alpha_relative", 0.05);
    o.tol("r2_min", 0.999);
    o.tol("eps_count_min", 5.0);
    let mut reports = vec![];
    for m in &ms {
        let label = manifold_label(m);
        let prof = profile_for(m.n(), p)?;
        let consts = compute_constants(&prof)?;
        let r_cut = cfg.r_cut.unwrap_or_else(|| default_r_cut(m));
        let eps = cfg.eps.clone().unwrap_or_else(|| reduction::fit_window(r_cut, 6));
        let q = QuadSpec::with_cutoff(r_cut);
        let xp = point_at(m, xi);
        let samples = eps
            .iter()
            .map(|&e| reduction::reduced_energy(m, &prof, e, &xp, &q))
            .collect::<crate::Result<Vec<_>>>()?;
        let fit = reduction::fit_expansion(&samples)?;
        let alpha_hat = fit.alpha(samples[0].h)?;
        let rel = (alpha_hat - consts.alpha).abs() / consts.alpha;
        o.checks.push(Check::at_least(format!("eps count on {label}"), eps.len() as f64, 5.0));
        o.checks.push(Check::new(
            format!("alpha_hat vs alpha on {label}"),
            rel < 0.05,
            format!("alpha_hat {alpha_hat:.5}, alpha {:.5}, relative {rel:.3e} < 5e-2", consts.alpha),
        ));
        o.checks.push(Check::new(format!("R^2 on {label}"), fit.r2 > 0.999, format!("{:.6} > 0.999", fit.r2)));
        reports.push(json!({
            "manifold": label, "r_cut": r_cut, "C": consts.c, "alpha": consts.alpha, "fit": fit,
            "alpha_relative_error": rel, "samples": samples,
        }));
        o.tables.push((format!("expansion_{}.csv", m.spec().kind()), reduction::landscape_csv(&samples)));
    }
    o.put("manifolds", reports);
    Ok(o)
}

fn gradient(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let m = one_manifold(cfg, "ellipse:2,1")?;
    let p = cfg.p.unwrap_or(4.0);
    let xi = cfg.xi.unwrap_or(0.7);
    let r_cut = cfg.r_cut.unwrap_or(0.2);
    let eps = cfg.eps.clone().unwrap_or_else(|| vec![0.02, 0.01]);
    o.param("manifold", manifold_json(std::slice::from_ref(&m)));
    o.param("p", p);
    o.param("xi", xi);
    o.param("r_cut", r_cut);
    o.param("eps", eps.clone());
    o.tol("relative_deviation", 0.1);
    let prof = profile_for(m.n(), p)?;
    let consts = compute_constants(&prof)?;
    let q = QuadSpec::with_cutoff(r_cut);
    let xp = point_at(&m, xi);
    let reps = eps
        .iter()
        .map(|&e| reduction::gradient_check(&m, &prof, &consts, e, &xp, &q))
        .collect::<crate::Result<Vec<_>>>()?;
    o.checks.push(Check::below(format!("relative deviation at eps = {}", eps[0]), reps[0].relative_deviation, 0.1));
    if reps.len() > 1 {
        let dec = reps.windows(2).all(|w| w[1].relative_deviation < w[0].relative_deviation);
        let seq: Vec<String> = reps.iter().map(|r| format!("{:.3e}", r.relative_deviation)).collect();
        o.checks.push(Check::new("deviation decreases with eps", dec, seq.join(" > ")));
    }
    o.put("reports", &reps);
    o.put("alpha", consts.alpha);
    Ok(o)
}

fn spectrum_checks(o: &mut Outcome, rep: &SpectrumReport, n: usize, kernel_tol: f64, tag: &str) {
    let small = rep.eigenvalues.iter().filter(|l| l.abs() < kernel_tol).count();
    let smallest = rep.eigenvalues.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    o.checks.push(Check::new(
        format!("kernel count |lambda| < {kernel_tol:.0e}{tag}"),
        small == n - 1,
        format!("{small} eigenvalue(s), expected {} (smallest |lambda| {smallest:.3e})", n - 1),
    ));
    let k = rep.cluster_size;
    let tang = (0..k)
        .map(|j| rep.overlaps.tangential[j].iter().map(|c| c * c).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min);
    let tang = if k == 0 { 0.0 } else { tang };
    o.checks.push(Check::new(
        format!("tangential overlap{tag}"),
        k == n - 1 && tang > 0.99,
        format!("{tang:.5} > 0.99 over {k} near-kernel vector(s)"),
    ));
    let normal = rep.max_normal_overlap_in_cluster();
    o.checks.push(Check::new(format!("normal overlap{tag}"), k > 0 && normal < 0.2, format!("{normal:.3e} < 0.2")));
    o.checks.push(Check::new(format!("coercivity gap{tag}"), rep.gap > 0.05, format!("{:.5} > 0.05", rep.gap)));
}

fn spectrum_csv(rep: &SpectrumReport) -> String {
    let mut s = String::from("index,lambda,overlap_tangential,overlap_normal\n");
    for (j, l) in rep.eigenvalues.iter().enumerate() {
        let t = rep.overlaps.tangential[j].iter().map(|c| c * c).sum::<f64>().sqrt();
        s.push_str(&format!("{j},{l:.12e},{t:.8},{:.8}\n", rep.overlaps.normal[j]));
    }
    s
}

fn spectrum(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let n = cfg.n.unwrap_or(2);
    let p = cfg.p.unwrap_or(4.0);
    let l = cfg.box_l.unwrap_or(14.0);
    let h = cfg.grid_h.unwrap_or(0.1);
    let k = cfg.eigen_count.unwrap_or(n + 2);
    let kernel_tol = cfg.kernel_tol.unwrap_or(5e-3);
    let refine = cfg.refine.unwrap_or(true);
    for (key, v) in [("n", json!(n)), ("p", json!(p)), ("box_l", json!(l)), ("grid_h", json!(h))] {
        o.param(key, v);
    }
    o.param("eigen_count", k);
    o.param("kernel_tol", kernel_tol);
    o.param("refine", refine);
    o.tol("kernel_eigenvalue", kernel_tol);
    o.tol("tangential_overlap_min", 0.99);
    o.tol("normal_overlap_max", 0.2);
    o.tol("gap_min", 0.05);
    o.tol("gap_refinement_relative", 0.1);
    let prof = profile_for(n, p)?;
    let grid = HalfBoxGrid::new(n, l, h).or_else(|e| config_err(e.to_string()))?;
    let rep = kernel_report(&assemble_linearized(&prof, &grid)?, k)?;
    spectrum_checks(&mut o, &rep, n, kernel_tol, "");
    o.tables.push(("spectrum.csv".into(), spectrum_csv(&rep)));
    o.put("report", &rep);
    if refine {
        let fine = HalfBoxGrid::new(n, l, 0.5 * h).or_else(|e| config_err(e.to_string()))?;
        let rep2 = kernel_report(&assemble_linearized(&prof, &fine)?, k)?;
        let change = (rep2.gap - rep.gap).abs() / rep.gap;
        o.checks.push(Check::new(
            "coercivity gap under h -> h/2",
            rep2.gap > 0.05 && change < 0.1,
            format!("{:.5} -> {:.5}, relative change {change:.3e} < 0.1", rep.gap, rep2.gap),
        ));
        o.tables.push(("spectrum_refined.csv".into(), spectrum_csv(&rep2)));
        o.put("refined", &rep2);
    }
    Ok(o)
}

fn remainder(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let m = one_manifold(cfg, "ellipse:2,1")?;
    planar(&m)?;
    let list: Vec<(usize, f64)> = cases(cfg, &[(2, 4.0), (2, 3.0)]);
    if list.iter().any(|(n, _)| *n != 2) {
        return config_err("remainder runs on planar domains; every case needs n = 2");
    }
    let xi = cfg.xi.unwrap_or(0.0);
    let r_cut = cfg.r_cut.unwrap_or_else(|| default_r_cut(&m));
    let h_mesh = cfg.h_mesh.unwrap_or(0.01);
    let eps = cfg.eps.clone().unwrap_or_else(|| vec![0.08, 0.06, 0.04, 0.03, 0.02]);
    o.param("manifold", manifold_json(std::slice::from_ref(&m)));
    o.param("cases", list.iter().map(|(n, p)| json!({"n": n, "p": p})).collect::<Vec<_>>());
    o.param("xi", xi);
    o.param("r_cut", r_cut);
    o.param("h_mesh", h_mesh);
    o.param("eps", eps.clone());
    o.tol("slope_window", 0.15);
    o.tol("projection_residual", 1e-10);
    let d = pde::discretize(&m, h_mesh)?;
    let mut studies = vec![];
    for &(n, p) in &list {
        let prof = profile_for(n, p)?;
        let st = pde::remainder_study(&d, &prof, &eps, xi, r_cut)?;
        o.checks.push(Check::new(
            format!("remainder slope (n={n}, p={p})"),
            (st.slope - st.predicted_slope).abs() <= 0.15,
            format!("{:.4} vs {:.4} +/- 0.15", st.slope, st.predicted_slope),
        ));
        let proj = st.samples.iter().map(|s| s.projection_residual).fold(0.0, f64::max);
        o.checks.push(Check::below(format!("projection residual (p={p})"), proj, 1e-10));
        o.tables.push((format!("remainder_{}.csv", file_tag(n, p)), pde::remainder_csv(&st)));
        studies.push(json!({"n": n, "p": p, "study": st}));
    }
    o.put("nodes", d.len());
    o.put("studies", studies);
    Ok(o)
}

fn newton_options(cfg: &RunConfig) -> NewtonOptions {
    let mut opts = NewtonOptions::default();
    if let Some(t) = cfg.tol {
        opts.tol = t;
    }
    if let Some(k) = cfg.max_iter {
        opts.max_iter = k;
    }
    opts
}

fn distance_to_max(m: &BoundaryManifold, foot: [f64; 2]) -> Option<f64> {
    let scan = scan_critical_points(m, 512);
    if scan.degenerate {
        return None;
    }
    scan.points
        .iter()
        .filter(|c| c.kind == CriticalKind::Max)
        .map(|c| ((c.location[0] - foot[0]).powi(2) + (c.location[1] - foot[1]).powi(2)).sqrt())
        .min_by(|a, b| a.partial_cmp(b).unwrap())
}

fn solve(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let m = one_manifold(cfg, "ellipse:2,1")?;
    planar(&m)?;
    let p = cfg.p.unwrap_or(4.0);
    let eps = cfg.eps.as_ref().map(|e| e[0]).unwrap_or(0.05);
    let xi = cfg.xi.unwrap_or(0.0);
    let r_cut = cfg.r_cut.unwrap_or_else(|| default_r_cut(&m));
    let h_mesh = cfg.h_mesh.unwrap_or(0.0125);
    let localize = cfg.localize.unwrap_or(false);
    let opts = newton_options(cfg);
    o.param("manifold", manifold_json(std::slice::from_ref(&m)));
    for (key, v) in [("p", p), ("eps", eps), ("xi", xi), ("r_cut", r_cut), ("h_mesh", h_mesh), ("tol", opts.tol)] {
        o.param(key, v);
    }
    o.param("max_iter", opts.max_iter);
    o.param("localize", localize);
    o.tol("newton", opts.tol);
    o.tol("foot_distance", 0.1);
    let prof = profile_for(2, p)?;
    let d = pde::discretize(&m, h_mesh)?;
    let t0 = if localize { pde::localize_peak(&d, &prof, eps, xi, r_cut)? } else { xi };
    let a = reduction::PeakAnsatz::new(&m, &prof, eps, m.curve_point(t0), r_cut)?;
    let u0 = d.sample_ansatz(&a);
    let (u, rep) = pde::newton_solve(&d, eps, p, &u0, opts)?;
    o.checks.push(Check::new("newton converged", rep.converged, format!("{} iterations, residual {:.3e}", rep.iterations, rep.residual)));
    o.checks.push(Check::new("min u > 0", rep.min_u > 0.0, format!("{:.3e}", rep.min_u)));
    if let Some(dist) = rep.distance_to_critical {
        o.checks.push(Check::below("foot point distance to nearest stable critical point", dist, 0.1));
    }
    o.tables.push(("solution.csv".into(), pde::solution_csv(&d, &u)));
    o.put("nodes", d.len());
    o.put("seed_param", t0);
    o.put("report", &rep);
    Ok(o)
}

fn continuation(cfg: &RunConfig) -> Res<Outcome> {
    let mut o = Outcome::default();
    let m = one_manifold(cfg, "ellipse:2,1")?;
    planar(&m)?;
    let p = cfg.p.unwrap_or(4.0);
    let eps = cfg.eps.clone().unwrap_or_else(|| vec![0.08, 0.06, 0.045, 0.034]);
    let xi = cfg.xi.unwrap_or_else(|| 0.95f64.acos());
    let r_cut = cfg.r_cut.unwrap_or_else(|| default_r_cut(&m));
    let h_mesh = cfg.h_mesh.unwrap_or(0.01);
    let localize = cfg.localize.unwrap_or(true);
    let opts = newton_options(cfg);
    o.param("manifold", manifold_json(std::slice::from_ref(&m)));
    o.param("eps", eps.clone());
    for (key, v) in [("p", p), ("xi", xi), ("r_cut", r_cut), ("h_mesh", h_mesh), ("tol", opts.tol)] {
        o.param(key, v);
    }
    o.param("max_iter", opts.max_iter);
    o.param("localize", localize);
    o.tol("newton", opts.tol);
    o.tol("final_distance", 0.05);
    let prof = profile_for(2, p)?;
    let d = pde::discretize(&m, h_mesh)?;
    let (res, fields) = pde::continuation(&d, &prof, &eps, xi, r_cut, localize, opts)?;
    let ok = res.failure.is_none() && res.reports.iter().all(|r| r.converged && r.min_u > 0.0);
    let detail = match &res.failure {
        Some(f) => format!("stopped after {} stage(s): {f}", res.reports.len()),
        None => format!("{} stage(s)", res.reports.len()),
    };
    o.checks.push(Check::new("every stage converged with min u > 0", ok, detail));
    let dist: Vec<Option<f64>> = res.reports.iter().map(|r| distance_to_max(&m, r.foot_point)).collect();
    let known: Vec<f64> = dist.iter().flatten().copied().collect();
    if known.len() == dist.len() && !known.is_empty() {
        let mono = known.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let seq: Vec<String> = known.iter().map(|v| format!("{v:.3e}")).collect();
        o.checks.push(Check::new("distance to curvature maximum non-increasing", mono && ok, seq.join(", ")));
        let last = *known.last().unwrap();
        o.checks.push(Check::new("final distance to curvature maximum", ok && last < 0.05, format!("{last:.3e} < 5e-2")));
    } else {
        o.checks.push(Check::new("distance to curvature maximum", false, "no isolated maximum of H or no converged stage"));
    }
    let gaps: Vec<f64> = res.reports.iter().filter_map(|r| r.energy_gap).collect();
    let dec = gaps.len() >= 2 && gaps.windows(2).all(|w| w[1] < w[0]);
    let seq: Vec<String> = gaps.iter().map(|v| format!("{v:.4}")).collect();
    o.checks.push(Check::new("energy gap decreasing", dec && ok, seq.join(" > ")));
    let mut csv = String::from("eps,foot_x,foot_y,distance_to_max,energy,energy_gap,iterations,min_u\n");
    for (r, dd) in res.reports.iter().zip(&dist) {
        csv.push_str(&format!(
            "{:.6e},{:.10},{:.10},{:.6e},{:.12e},{:.6e},{},{:.6e}\n",
            r.eps,
            r.foot_point[0],
            r.foot_point[1],
            dd.unwrap_or(f64::NAN),
            r.energy,
            r.energy_gap.unwrap_or(f64::NAN),
            r.iterations,
            r.min_u
        ));
    }
    o.tables.push(("continuation.csv".into(), csv));
    if let Some(u) = fields.last() {
        o.tables.push(("solution_final.csv".into(), pde::solution_csv(&d, u)));
    }
    o.put("nodes", d.len());
    o.put("distance_to_max", dist);
    o.put("continuation", &res);
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_accepts_and_rejects() {
        let ok = json!({"n": 2, "p": 4, "manifold": "ellipse:2,1", "eps": [0.05, 0.02]});
        assert!(validate_config(&ok).is_empty());
        let ok2 = json!({"manifold": [{"kind": "disk", "radius": 1}, "ellipse:2,1"], "eps": 0.05});
        assert!(validate_config(&ok2).is_empty());
        let bad = json!({"n": 5, "p": 1.5, "bogus": true});
        let errs = validate_config(&bad);
        assert_eq!(errs.len(), 3, "{errs:?}");
        assert!(errs.iter().any(|e| e.starts_with("/n")));
        assert!(errs.iter().any(|e| e.starts_with("/p")));
    }

    #[test]
    fn scalars_become_lists() {
        let cfg = parse_config(json!({"eps": 0.05, "manifold": "disk:1"})).unwrap();
        assert_eq!(cfg.eps.unwrap(), vec![0.05]);
        assert_eq!(cfg.manifold.unwrap().len(), 1);
    }

    #[test]
    fn case_parsing() {
        assert_eq!(parse_case("2:4").unwrap(), (2, 4.0));
        assert!(parse_case("2").is_err());
        let cfg = RunConfig { n: Some(3), ..Default::default() };
        assert_eq!(cases(&cfg, &[(2, 4.0)]), vec![(3, 4.0)]);
    }

    #[test]
    fn hash_is_stable() {
        let mut o = Outcome::default();
        o.param("n", 2);
        let a = meta("constants", &o);
        let b = meta("constants", &o);
        assert_eq!(a, b);
        assert_eq!(a["config_hash"].as_str().unwrap().len(), 64);
    }
}

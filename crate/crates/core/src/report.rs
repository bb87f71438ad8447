//! Command dispatch and JSON reports.
//!
//! Every report is an object with `model`, `model_file`, `command`,
//! `version`, `precision`, `warnings` and exactly one of `result` or
//! `error`. Keys are sorted, rationals are `"num/den"` strings and reals
//! are decimal strings with 17 significant digits.

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

use crate::cohomology::{CohomClass, Monomial, RingPresentation};
use crate::error::{Error, Result};
use crate::gamma_class::{self, KClass, ZetaTable};
use crate::gkz;
use crate::mellin_barnes;
use crate::model::{load_model, ModelFile, ModelSource};
use crate::oscillatory;
use crate::quantum_ring::{self, QSeries};
use crate::toric_geom::{self, ToricVariety};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const PRECISION_ENV: &str = "TORIC_MIRROR_PRECISION";

const DEFAULT_BOUND: u32 = 6;
const DEFAULT_CENTRAL_CHARGE_BOUND: u32 = 10;
const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "toric-mirror", version, about = "Toric mirror symmetry checks on JSON model files")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Stability, fan, weak-Fano and rank report.
    Check {
        #[arg(long)]
        model: PathBuf,
    },
    /// I-function coefficients up to an omega-degree bound.
    Ifunction {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Residuals of the box operators applied to the truncated I-function.
    GkzVerify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Mirror map series `psi_a(q)`.
    MirrorMap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Gamma-hat and Todd classes.
    Gamma {
        #[arg(long)]
        model: PathBuf,
    },
    /// Positive-cycle period against its Gamma-class asymptotics along `q_a = q`.
    Asymptotics {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        z: f64,
        #[arg(long = "q-start")]
        q_start: f64,
        #[arg(long = "q-ratio")]
        q_ratio: f64,
        #[arg(long)]
        steps: u32,
        #[arg(long)]
        tol: Option<f64>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Central charge of a sum of line bundles.
    CentralCharge {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
        #[arg(long)]
        z: f64,
        /// `[m*]a1,..,ak;...` line bundle degrees; defaults to the structure sheaf.
        #[arg(long, allow_hyphen_values = true)]
        bundle: Option<String>,
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Quadrature of `exp(-W/z)` over the positive real cycle.
    Oscillatory {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Residue sum of the Mellin-Barnes integral (Picard rank one).
    Mellin {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
        #[arg(long)]
        z: f64,
        #[arg(long)]
        terms: u32,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Ifunction { .. } => "ifunction",
            Command::GkzVerify { .. } => "gkz-verify",
            Command::MirrorMap { .. } => "mirror-map",
            Command::Gamma { .. } => "gamma",
            Command::Asymptotics { .. } => "asymptotics",
            Command::CentralCharge { .. } => "central-charge",
            Command::Oscillatory { .. } => "oscillatory",
            Command::Mellin { .. } => "mellin",
        }
    }

    pub fn model(&self) -> &Path {
        match self {
            Command::Check { model }
            | Command::Ifunction { model, .. }
            | Command::GkzVerify { model, .. }
            | Command::MirrorMap { model, .. }
            | Command::Gamma { model }
            | Command::Asymptotics { model, .. }
            | Command::CentralCharge { model, .. }
            | Command::Oscillatory { model, .. }
            | Command::Mellin { model, .. } => model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Double,
}

/// Reads the precision request; extended precision is not available and
/// falls back to double with a warning.
pub fn resolve_precision(value: Option<&str>) -> (Precision, Option<String>) {
    match value.map(|s| s.trim().to_ascii_lowercase()) {
        None => (Precision::Double, None),
        Some(s) if s.is_empty() || s == "double" => (Precision::Double, None),
        Some(s) if s == "extended" => {
            (Precision::Double, Some(format!("{PRECISION_ENV}=extended is not available; using double")))
        }
        Some(s) => (Precision::Double, Some(format!("{PRECISION_ENV}={s} is not recognized; using double"))),
    }
}

pub fn fmt_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_complex(x: Complex64) -> Value {
    json!({ "re": fmt_real(x.re), "im": fmt_real(x.im) })
}

fn monomial_name(m: &Monomial) -> String {
    let parts: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(a, &e)| if e == 1 { format!("p{}", a + 1) } else { format!("p{}^{e}", a + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

fn basis_names(pres: &RingPresentation) -> Vec<String> {
    pres.basis().iter().map(monomial_name).collect()
}

fn rational_class(c: &CohomClass<BigRational>) -> Vec<String> {
    c.coeffs().iter().map(fmt_rational).collect()
}

fn real_class(c: &CohomClass<f64>) -> Vec<String> {
    c.coeffs().iter().map(|&x| fmt_real(x)).collect()
}

fn q_series(s: &QSeries) -> Value {
    Value::Array(s.iter().map(|(d, c)| json!({ "d": d.0, "coeff": fmt_rational(c) })).collect())
}

fn rational_vec(v: &[BigRational]) -> Vec<String> {
    v.iter().map(fmt_rational).collect()
}

/// What a single invocation produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
    /// CSV text for `asymptotics --csv`, written by the caller.
    pub csv: Option<(PathBuf, String)>,
}

impl Outcome {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn error_object(e: &Error) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(e.kind()));
    obj.insert("message".into(), json!(e.to_string()));
    match e {
        Error::SchemaError { pointer, .. } => {
            obj.insert("pointer".into(), json!(pointer));
        }
        Error::GeometryError { pointer, source } => {
            obj.insert("pointer".into(), json!(pointer));
            obj.insert("cause".into(), error_object(source));
        }
        Error::Unstable { condition, .. } => {
            obj.insert("condition".into(), json!(condition.to_string()));
        }
        _ => {}
    }
    Value::Object(obj)
}

fn echo(cmd: &Command, model: &ModelFile) -> Value {
    let bound = |b: &Option<u32>, d: u32| b.or(model.defaults.bound).unwrap_or(d);
    let tol = |t: &Option<f64>| fmt_real(t.or(model.defaults.tol).unwrap_or(DEFAULT_TOL));
    let qs = |q: &[f64]| q.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>();
    let args = match cmd {
        Command::Check { .. } | Command::Gamma { .. } => json!({}),
        Command::Ifunction { bound: b, .. } | Command::GkzVerify { bound: b, .. } | Command::MirrorMap { bound: b, .. } => {
            json!({ "bound": bound(b, DEFAULT_BOUND) })
        }
        Command::Asymptotics { z, q_start, q_ratio, steps, tol: t, csv, .. } => json!({
            "z": fmt_real(*z), "q_start": fmt_real(*q_start), "q_ratio": fmt_real(*q_ratio),
            "steps": steps, "tol": tol(t), "csv": csv.as_ref().map(|p| p.display().to_string()),
        }),
        Command::CentralCharge { q, z, bundle, bound: b, .. } => json!({
            "q": qs(q), "z": fmt_real(*z), "bundle": bundle.clone().unwrap_or_else(|| "O".into()),
            "bound": b.unwrap_or(DEFAULT_CENTRAL_CHARGE_BOUND),
        }),
        Command::Oscillatory { q, z, tol: t, .. } => json!({ "q": qs(q), "z": fmt_real(*z), "tol": tol(t) }),
        Command::Mellin { q, z, terms, .. } => json!({ "q": qs(q), "z": fmt_real(*z), "terms": terms }),
    };
    json!({ "name": cmd.name(), "args": args })
}

struct Context<'a> {
    model: &'a ModelFile,
    tv: &'a ToricVariety,
    warnings: Vec<String>,
}

impl Context<'_> {
    fn presentation(&self) -> Result<RingPresentation> {
        RingPresentation::build(self.tv)
    }

    fn bound(&self, b: Option<u32>, default: u32) -> i64 {
        i64::from(b.or(self.model.defaults.bound).unwrap_or(default))
    }

    fn tol(&self, t: Option<f64>) -> Result<f64> {
        let tol = t.or(self.model.defaults.tol).unwrap_or(DEFAULT_TOL);
        if tol > 0.0 && tol.is_finite() {
            Ok(tol)
        } else {
            Err(Error::InvalidArgument(format!("tol = {tol} must be positive")))
        }
    }

    /// One value per Kähler parameter; a single value is used for all.
    fn q_vector(&self, q: &[f64]) -> Result<Vec<f64>> {
        let k = self.tv.k();
        match q.len() {
            0 => Err(Error::InvalidArgument("--q is required".into())),
            1 => Ok(vec![q[0]; k]),
            l if l == k => Ok(q.to_vec()),
            l => Err(Error::Dimension(format!("--q has {l} values, expected 1 or {k}"))),
        }
    }
}

/// Parses a model and runs one command. Never panics on bad input; every
/// failure becomes an `error` object.
pub fn run_command(cmd: &Command, precision_warning: Option<String>) -> Outcome {
    let model_file = cmd.model().display().to_string();
    let mut report = Map::new();
    report.insert("version".into(), json!(VERSION));
    report.insert("precision".into(), json!("double"));
    report.insert("model_file".into(), json!(model_file));
    let mut warnings: Vec<String> = precision_warning.into_iter().collect();
    let mut csv = None;
    let model = match load_model(cmd.model()) {
        Ok(m) => m,
        Err(e) => {
            report.insert("model".into(), Value::Null);
            report.insert("command".into(), json!({ "name": cmd.name() }));
            report.insert("error".into(), error_object(&e));
            report.insert("warnings".into(), json!(warnings));
            return Outcome { report: Value::Object(report), exit_code: 1, csv };
        }
    };
    report.insert("model".into(), json!(model.name));
    report.insert("command".into(), echo(cmd, &model));
    let mut ctx = Context { model: &model, tv: &model.variety, warnings: Vec::new() };
    let result = dispatch(cmd, &mut ctx, &mut csv);
    warnings.append(&mut ctx.warnings);
    report.insert("warnings".into(), json!(warnings));
    let exit_code = match result {
        Ok(v) => {
            report.insert("result".into(), v);
            0
        }
        Err(e) => {
            report.insert("error".into(), error_object(&e));
            csv = None;
            1
        }
    };
    Outcome { report: Value::Object(report), exit_code, csv }
}

fn dispatch(cmd: &Command, ctx: &mut Context, csv: &mut Option<(PathBuf, String)>) -> Result<Value> {
    match cmd {
        Command::Check { .. } => check(ctx),
        Command::Ifunction { bound, .. } => ifunction(ctx, ctx.bound(*bound, DEFAULT_BOUND)),
        Command::GkzVerify { bound, .. } => gkz_verify(ctx, ctx.bound(*bound, DEFAULT_BOUND)),
        Command::MirrorMap { bound, .. } => mirror_map(ctx, ctx.bound(*bound, DEFAULT_BOUND)),
        Command::Gamma { .. } => gamma(ctx),
        Command::Asymptotics { z, q_start, q_ratio, steps, tol, csv: path, .. } => {
            let (value, text) = asymptotics(ctx, *z, *q_start, *q_ratio, *steps, ctx.tol(*tol)?)?;
            if let Some(p) = path {
                *csv = Some((p.clone(), text));
            }
            Ok(value)
        }
        Command::CentralCharge { q, z, bundle, bound, .. } => {
            let b = i64::from(bound.unwrap_or(DEFAULT_CENTRAL_CHARGE_BOUND));
            central_charge(ctx, q, *z, bundle.as_deref(), b)
        }
        Command::Oscillatory { q, z, tol, .. } => oscillatory_cmd(ctx, q, *z, ctx.tol(*tol)?),
        Command::Mellin { q, z, terms, .. } => mellin(ctx, q, *z, *terms),
    }
}

fn check(ctx: &Context) -> Result<Value> {
    let tv = ctx.tv;
    let git = tv.git();
    let stability = toric_geom::check_stability(git)?;
    let pres = ctx.presentation()?;
    let wf = toric_geom::is_weak_fano(tv);
    let rank = gkz::rank_check(tv, &pres);
    let relations = quantum_ring::batyrev_relations(tv);
    let source = match &ctx.model.source {
        ModelSource::Git { .. } => "git",
        ModelSource::Fan { .. } => "fan",
    };
    let multiplicative: Vec<Value> = relations
        .multiplicative
        .iter()
        .map(|r| json!({ "lhs": r.lhs, "rhs": r.rhs, "class": r.class.0 }))
        .collect();
    Ok(json!({
        "input": source,
        "dimension": tv.n(),
        "picard_rank": tv.k(),
        "divisors": tv.m(),
        "stability": { "a": stability.a, "b": stability.b, "c": stability.c },
        "charges": git.charges(),
        "omega": rational_vec(git.omega()),
        "rays": tv.fan().rays(),
        "max_cones": tv.fan().max_cones(),
        "smooth": true,
        "weak_fano": wf.weak_fano,
        "fano": wf.fano,
        "mori_generators": tv.mori_generators(),
        "nef_rays": tv.nef_rays(),
        "primitive_collections": tv.fan().primitive_collections(),
        "betti": pres.betti(),
        "basis": basis_names(&pres),
        "rank": { "volume": rank.volume, "betti_sum": rank.betti_sum, "equal": rank.equal },
        "batyrev_relations": { "multiplicative": multiplicative, "linear": relations.linear },
    }))
}

fn ifunction(ctx: &Context, bound: i64) -> Result<Value> {
    let pres = ctx.presentation()?;
    let i = gkz::i_function(ctx.tv, &pres, bound)?;
    let git = ctx.tv.git();
    let terms: Vec<Value> = i
        .terms()
        .iter()
        .map(|(d, lau)| {
            let powers: Vec<Value> =
                lau.iter().map(|(s, c)| json!({ "z_power": s, "coeffs": rational_class(c) })).collect();
            json!({
                "d": d.0,
                "omega_degree": fmt_rational(&git.omega_degree(d)),
                "c1_degree": git.c1_degree(d),
                "z_expansion": powers,
            })
        })
        .collect();
    Ok(json!({
        "bound": bound,
        "basis": basis_names(&pres),
        "homogeneous": gkz::is_homogeneous(ctx.tv, &pres, &i),
        "terms": terms,
    }))
}

fn gkz_verify(ctx: &Context, bound: i64) -> Result<Value> {
    let pres = ctx.presentation()?;
    let i = gkz::i_function(ctx.tv, &pres, bound)?;
    let mut all_zero = true;
    let mut operators = Vec::new();
    for d in gkz::verification_classes(ctx.tv) {
        let op = gkz::gkz_operator(ctx.tv, &d);
        let res = gkz::apply_gkz(ctx.tv, &pres, &op, &i)?;
        all_zero &= res.is_zero();
        let failing: Vec<Vec<i64>> = res.nonzero.keys().map(|f| f.0.clone()).collect();
        operators.push(json!({
            "class": d.0,
            "operator": op.describe(),
            "window": fmt_rational(&res.window),
            "checked_terms": res.checked_terms,
            "residual": if res.is_zero() { "zero" } else { "nonzero" },
            "nonzero_terms": failing,
        }));
    }
    Ok(json!({ "bound": bound, "all_zero": all_zero, "operators": operators }))
}

fn mirror_map(ctx: &Context, bound: i64) -> Result<Value> {
    let pres = ctx.presentation()?;
    let i = gkz::i_function(ctx.tv, &pres, bound)?;
    let mm = gkz::mirror_map(ctx.tv, &pres, &i)?;
    let g: Vec<Value> = mm.g.iter().map(q_series).collect();
    let psi: Vec<Value> = mm.psi.iter().map(q_series).collect();
    Ok(json!({ "bound": bound, "trivial": mm.is_trivial(), "g": g, "psi": psi }))
}

fn gamma(ctx: &Context) -> Result<Value> {
    let pres = ctx.presentation()?;
    let table = ZetaTable::shared();
    let gamma = gamma_class::gamma_class(&pres, table);
    let todd = gamma_class::todd_class(&pres);
    let chern = pres.chern_total();
    let top_chern = pres.integrate(&pres.component(&chern, pres.n()))?;
    Ok(json!({
        "basis": basis_names(&pres),
        "gamma_hat": real_class(&gamma),
        "todd": rational_class(&todd),
        "todd_integral": fmt_rational(&pres.integrate(&todd)?),
        "chern": rational_class(&chern),
        "euler_characteristic": fmt_rational(&top_chern),
        "max_cones": ctx.tv.fan().max_cones().len(),
        "euler_gamma": fmt_real(table.euler_gamma),
        "reflection_residual": fmt_real(gamma_class::reflection_check(12, table)),
    }))
}

fn asymptotics(ctx: &Context, z: f64, q_start: f64, q_ratio: f64, steps: u32, tol: f64) -> Result<(Value, String)> {
    if !(q_start > 0.0 && q_ratio > 0.0) || steps == 0 {
        return Err(Error::InvalidArgument("need q-start > 0, q-ratio > 0 and steps >= 1".into()));
    }
    let pres = ctx.presentation()?;
    let w = oscillatory::build_potential(ctx.tv)?;
    let qs: Vec<f64> = (0..steps).map(|j| q_start * q_ratio.powi(j as i32)).collect();
    let rows = oscillatory::asymptotic_compare(&w, &pres, ZetaTable::shared(), &qs, z, tol)?;
    let mut text = String::from("q,numeric,gamma_value,abs_err\n");
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            let cells = [fmt_real(r.q), fmt_real(r.numeric), fmt_real(r.gamma_value), fmt_real(r.abs_err)];
            text.push_str(&cells.join(","));
            text.push('\n');
            json!({ "q": cells[0], "numeric": cells[1], "gamma_value": cells[2], "abs_err": cells[3] })
        })
        .collect();
    Ok((json!({ "potential": w.describe(), "rows": table }), text))
}

fn central_charge(ctx: &mut Context, q: &[f64], z: f64, bundle: Option<&str>, bound: i64) -> Result<Value> {
    let q = ctx.q_vector(q)?;
    let pres = ctx.presentation()?;
    let k = ctx.tv.k();
    let e = match bundle {
        Some(text) if !text.trim().eq_ignore_ascii_case("o") => KClass::parse(text, k)?,
        _ => KClass::structure_sheaf(k),
    };
    let i = gkz::i_function(ctx.tv, &pres, bound)?;
    let cc = gamma_class::central_charge(ctx.tv, &pres, ZetaTable::shared(), &e, &i, &q, z)?;
    if cc.truncation_warning {
        ctx.warnings.push(format!(
            "highest omega-degree terms contribute {:.3e} of the value; raise --bound",
            cc.last_contribution
        ));
    }
    Ok(json!({
        "rank": e.rank(),
        "value": fmt_complex(cc.value),
        "last_contribution": fmt_real(cc.last_contribution),
        "truncation_warning": cc.truncation_warning,
    }))
}

fn oscillatory_cmd(ctx: &Context, q: &[f64], z: f64, tol: f64) -> Result<Value> {
    let q = ctx.q_vector(q)?;
    let w = oscillatory::build_potential(ctx.tv)?;
    let r = oscillatory::positive_cycle_integral(&w, &q, z, tol)?;
    Ok(json!({
        "potential": w.describe(),
        "value": fmt_real(r.value),
        "error_estimate": fmt_real(r.error_estimate),
        "step": fmt_real(r.step),
        "evaluations": r.evaluations,
    }))
}

fn mellin(ctx: &Context, q: &[f64], z: f64, terms: u32) -> Result<Value> {
    if ctx.tv.k() != 1 {
        return Err(Error::NotRankOne(ctx.tv.k()));
    }
    let q = ctx.q_vector(q)?;
    let r = mellin_barnes::residue_sum(ctx.tv.git(), q[0], z, terms as usize, ZetaTable::shared())?;
    Ok(json!({
        "value": fmt_real(r.value),
        "tail_estimate": fmt_real(r.tail_estimate),
        "residues": r.residues.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>(),
    }))
}

/// Parses `args` (including the program name), runs the command and returns
/// the report text together with the exit status. Argument errors are
/// reported by clap on stderr with status 2.
pub fn run_args<I, T>(args: I, precision_env: Option<&str>) -> std::result::Result<Outcome, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (_, warning) = resolve_precision(precision_env);
    Ok(run_command(&cli.command, warning))
}

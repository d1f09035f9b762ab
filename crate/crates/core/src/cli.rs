//! Command-line front end.
//!
//! Reports are JSON on stdout, tables are CSV on stdout. Exit codes: 0 on
//! success, 1 for invalid input, 2 when an optimizer fails to converge,
//! 3 when a constrained feasible set is empty.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analysis::{alpha_sweep, plane_samples, truncate_decimals, uew_pair_for, SweepAlpha};
use crate::error::UewError;
use crate::io::{fmt_f64, load_operator, load_state, save_operator, save_state, write_csv};
use crate::linalg::{expectation, HermitianOperator, Ket};
use crate::optimize::{
    classify_case, compute_alpha0, sup_product_constrained, sup_product_unconstrained, Alpha0Outcome, CaseLabel,
    OptimizationResult, OptimizerConfig, DEFAULT_BRACKET_MIN,
};
use crate::states::{build_example31, DensityMatrix, Example31Config, NoisyStateFamily, PovmConvention, ProductKet};
use crate::witness::{detect, ConstraintSpec, HalfSpaceSide};

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

/// Distance from `Tr(Cσ) = c` below which a constrained optimum counts as
/// sitting on the boundary.
const BOUNDARY_ACTIVE_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "uew", version, about = "Ultrafine entanglement witnesses for small bipartite systems")]
pub struct Cli {
    #[command(flatten)]
    pub opt: OptimizerArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    /// RNG seed for optimizer restarts.
    #[arg(long, global = true, env = "UEW_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Number of see-saw restarts.
    #[arg(long, global = true, default_value_t = 64)]
    pub restarts: usize,

    /// Grid points per polar angle in the constrained search.
    #[arg(long, global = true, default_value_t = 181)]
    pub grid_theta: usize,

    /// Grid points per phase in the constrained search.
    #[arg(long, global = true, default_value_t = 360)]
    pub grid_phi: usize,

    /// Reading of the worked example's measurement: complete or printed.
    #[arg(long, global = true, default_value = "complete", value_parser = parse_povm)]
    pub povm: PovmConvention,
}

impl OptimizerArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            grid_theta: self.grid_theta,
            grid_phi: self.grid_phi,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Test operator file.
    #[arg(long)]
    pub test: PathBuf,
    /// Constraint operator file.
    #[arg(long)]
    pub constraint: PathBuf,
    /// Constraint value c; rationals like 1/100 are accepted.
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub cvalue: f64,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// Weight of the |1><1| measurement element; rationals like 2/3 are accepted.
    #[arg(long, default_value = "2/3", value_parser = parse_real)]
    pub x: f64,
    /// Amplitude of |00> in the target state.
    #[arg(long, default_value = "7/10", value_parser = parse_real)]
    pub amp_alpha: f64,
    /// Amplitude of |01> and |10> in the target state.
    #[arg(long, default_value = "1/2", value_parser = parse_real)]
    pub amp_beta: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Supremum of <a,b|L|a,b> over product states.
    Gs {
        #[arg(long)]
        test: PathBuf,
    },
    /// Supremum over product states on one side of Tr(C rho) = c.
    Pc {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = parse_side)]
        side: HalfSpaceSide,
    },
    /// Noise thresholds of the rotated witnesses on the worked example (CSV).
    Scan {
        /// Use the built-in two-qubit example (currently the only source).
        #[arg(long)]
        example31: bool,
        #[command(flatten)]
        example: ExampleArgs,
        #[arg(long, default_value = "1/100", value_parser = parse_real)]
        cvalue: f64,
        /// Comma-separated rotation parameters below 1, or -inf.
        #[arg(long, default_value = "0,-1,-10,-100,-inf", allow_hyphen_values = true)]
        alphas: String,
        /// Cut thresholds to this many decimals instead of printing them in full.
        #[arg(long)]
        decimals: Option<u32>,
    },
    /// Applies the witness pair to a state.
    Detect {
        /// State file (density matrix).
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        /// Rotation parameter below 1, or -inf; omit for the plain pair.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
    },
    /// Case label and the smallest admissible rotation parameter.
    Alpha0 {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = DEFAULT_BRACKET_MIN, allow_hyphen_values = true)]
        bracket_min: f64,
    },
    /// Tr(C rho) and Tr(L rho) for every state file in a directory (CSV).
    Plane {
        #[arg(long)]
        states: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        constraint: PathBuf,
    },
    /// Writes the worked example's operators and states as JSON files.
    Example31 {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        example: ExampleArgs,
        /// Noise weight of the written state.
        #[arg(long, default_value = "0", value_parser = parse_real)]
        noise: f64,
    },
}

/// Failure carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<UewError> for CliError {
    fn from(e: UewError) -> Self {
        let code = match e {
            UewError::NoConvergence(_) | UewError::InconsistentBracket(_) => EXIT_NO_CONVERGENCE,
            UewError::EmptyFeasibleSet => EXIT_INFEASIBLE,
            _ => EXIT_INPUT,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        UewError::from(e).into()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input_error(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Accepts decimals and `p/q` rationals.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let v = match t.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad numerator in '{t}'"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad denominator in '{t}'"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in '{t}'"));
            }
            n / d
        }
        None => t.parse().map_err(|_| format!("cannot parse '{t}' as a number"))?,
    };
    if !v.is_finite() {
        return Err(format!("'{t}' is not finite"));
    }
    Ok(v)
}

fn parse_side(s: &str) -> std::result::Result<HalfSpaceSide, String> {
    match s.parse::<HalfSpaceSide>() {
        Ok(HalfSpaceSide::Boundary) | Err(_) => Err(format!("side must be leq or geq, got '{s}'")),
        Ok(side) => Ok(side),
    }
}

fn parse_povm(s: &str) -> std::result::Result<PovmConvention, String> {
    s.parse().map_err(|e: UewError| e.to_string())
}

fn povm_name(p: PovmConvention) -> &'static str {
    match p {
        PovmConvention::Complete => "complete",
        PovmConvention::AsPrinted => "printed",
    }
}

pub fn parse_alpha_list(s: &str) -> crate::Result<Vec<SweepAlpha>> {
    let items: Vec<&str> = s.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    if items.is_empty() {
        return Err(UewError::Parse("empty alpha list".into()));
    }
    items.into_iter().map(str::parse).collect()
}

/// Parses `args` (including the program name) and runs the command,
/// writing reports and tables to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}")?;
                return Ok(());
            }
            return Err(input_error(e.render().to_string()));
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    execute(&cli, &echo, out)
}

fn execute(cli: &Cli, echo: &[String], out: &mut dyn Write) -> CliResult<()> {
    let cfg = cli.opt.config();
    cfg.validate()?;
    let started = Instant::now();
    let report = |name: &str, results: Value, out: &mut dyn Write| -> CliResult<()> {
        let doc = json!({
            "tool": "uew",
            "version": env!("CARGO_PKG_VERSION"),
            "command": name,
            "args": echo,
            "config": {
                "seed": cfg.seed,
                "restarts": cfg.restarts,
                "grid_theta": cfg.grid_theta,
                "grid_phi": cfg.grid_phi,
                "seesaw_tol": cfg.seesaw_tol,
                "seesaw_max_iter": cfg.seesaw_max_iter,
                "feas_tol": cfg.feas_tol,
                "povm": povm_name(cli.opt.povm),
            },
            "results": results,
            "wall_time_s": started.elapsed().as_secs_f64(),
        });
        let text = serde_json::to_string_pretty(&doc).map_err(UewError::from)?;
        writeln!(out, "{text}")?;
        Ok(())
    };

    match &cli.command {
        Command::Gs { test } => {
            let l = load_operator(test)?;
            let r = sup_product_unconstrained(&l, &cfg)?;
            report("gs", json!({ "g_s": r.value, "optimum": result_json(&r) }), out)?;
            if !r.converged {
                return Err(CliError {
                    code: EXIT_NO_CONVERGENCE,
                    message: "no see-saw restart converged; the reported value is a lower bound".into(),
                });
            }
            Ok(())
        }
        Command::Pc { pair, side } => {
            let (l, spec) = load_pair(pair)?;
            let r = sup_product_constrained(&l, &spec, *side, &cfg)?;
            let tc = r.constraint_value.unwrap_or(f64::NAN);
            let key = if *side == HalfSpaceSide::Leq { "p_c" } else { "p_c_tilde" };
            let results = json!({
                key: r.value,
                "side": side.to_string(),
                "boundary_active": (tc - spec.value()).abs() <= BOUNDARY_ACTIVE_TOL,
                "optimum": result_json(&r),
            });
            report("pc", results, out)?;
            if !r.converged {
                return Err(CliError {
                    code: EXIT_NO_CONVERGENCE,
                    message: "constrained search did not converge; the reported value is a lower bound".into(),
                });
            }
            Ok(())
        }
        Command::Scan {
            example31,
            example,
            cvalue,
            alphas,
            decimals,
        } => {
            if !example31 {
                return Err(input_error("scan needs --example31 (the built-in two-qubit example)"));
            }
            let alphas = parse_alpha_list(alphas)?;
            let ecfg = example_config(example, *cvalue, cli.opt.povm);
            let ex = build_example31(&ecfg)?;
            let spec = ConstraintSpec::new(ex.constraint, *cvalue)?;
            let family = NoisyStateFamily::example31(&ecfg)?;
            let rows = alpha_sweep(&ex.test, &spec, &alphas, &family, &cfg)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let p = match (r.threshold_p, decimals) {
                        (None, _) => "none".to_string(),
                        (Some(p), None) => fmt_f64(p),
                        (Some(p), Some(d)) => format!("{:.*}", *d as usize, truncate_decimals(p, *d)),
                    };
                    vec![r.alpha.to_string(), fmt_f64(r.bound), p]
                })
                .collect();
            write_csv(out, &["alpha", "bound", "threshold_p"], &table)?;
            Ok(())
        }
        Command::Detect { state, pair, alpha } => {
            let rho = load_state(state)?;
            let (l, spec) = load_pair(pair)?;
            if rho.dims() != l.dims() {
                return Err(UewError::DimensionMismatch {
                    expected: l.dim(),
                    found: rho.op().dim(),
                }
                .into());
            }
            let alpha = alpha.as_deref().map(str::parse::<SweepAlpha>).transpose()?;
            let pair = uew_pair_for(&l, &spec, alpha, &cfg)?;
            let v = detect(&rho, &pair)?;
            let results = json!({
                "alpha": alpha.map_or(Value::Null, |a| json!(a)),
                "side_used": v.side_used.to_string(),
                "constraint_expectation": expectation(spec.op(), &rho)?,
                "bound_c": pair.w_c().bound(),
                "bound_c_tilde": pair.w_ctilde().bound(),
                "witness_value": v.witness_value,
                "verdict": v.kind.to_string(),
            });
            report("detect", results, out)
        }
        Command::Alpha0 { pair, bracket_min } => {
            let (l, spec) = load_pair(pair)?;
            let label = classify_case(&l, &spec, &cfg)?;
            let p_c = sup_product_constrained(&l, &spec, HalfSpaceSide::Leq, &cfg)?.value;
            let outcome = compute_alpha0(&l, &spec, p_c, &cfg, *bracket_min)?;
            let (alpha0, note) = match outcome {
                Alpha0Outcome::Finite(a) => (
                    Value::String(format!("{a:.6}")),
                    "V at alpha0 attains zero on the constrained separable set and is a finest witness there".to_string(),
                ),
                Alpha0Outcome::NoFiniteAlpha0 if label == CaseLabel::CaseI => (
                    Value::String("NoFiniteAlpha0".into()),
                    "Case I: every rotation alpha < 1 yields a valid witness, so the infimum is -inf".to_string(),
                ),
                Alpha0Outcome::NoFiniteAlpha0 => (
                    Value::String("NoFiniteAlpha0".into()),
                    format!("the feasibility condition still holds at alpha = {bracket_min}"),
                ),
            };
            let results = json!({
                "case": label.to_string(),
                "p_c": p_c,
                "alpha0": alpha0,
                "note": note,
            });
            report("alpha0", results, out)
        }
        Command::Plane {
            states,
            test,
            constraint,
        } => {
            let l = load_operator(test)?;
            let c_op = load_operator(constraint)?;
            let spec = ConstraintSpec::new(c_op, 0.0)?;
            let loaded = load_state_dir(states)?;
            let samples = plane_samples(&loaded, &spec, &l)?;
            let table: Vec<Vec<String>> = samples
                .iter()
                .map(|s| vec![s.label.clone(), fmt_f64(s.x), fmt_f64(s.y)])
                .collect();
            write_csv(out, &["label", "x", "y"], &table)?;
            Ok(())
        }
        Command::Example31 { out: dir, example, noise } => {
            let ecfg = example_config(example, 0.01, cli.opt.povm);
            let ex = build_example31(&ecfg)?;
            let family = NoisyStateFamily::example31(&ecfg)?;
            std::fs::create_dir_all(dir)?;
            let files = [
                ("test", dir.join("test.json")),
                ("constraint", dir.join("constraint.json")),
                ("state", dir.join("state.json")),
                ("mixed", dir.join("mixed.json")),
            ];
            save_operator(&files[0].1, &ex.test)?;
            save_operator(&files[1].1, &ex.constraint)?;
            save_state(&files[2].1, &family.member(*noise)?)?;
            save_state(&files[3].1, &DensityMatrix::maximally_mixed((2, 2))?)?;
            let written: serde_json::Map<String, Value> = files
                .iter()
                .map(|(k, p)| (k.to_string(), Value::String(p.display().to_string())))
                .collect();
            report("example31", json!({ "x": example.x, "noise": noise, "files": written }), out)
        }
    }
}

fn example_config(e: &ExampleArgs, c: f64, povm: PovmConvention) -> Example31Config {
    Example31Config {
        amp_alpha: e.amp_alpha,
        amp_beta: e.amp_beta,
        x: e.x,
        c,
        povm,
    }
}

fn load_pair(pair: &PairArgs) -> CliResult<(HermitianOperator, ConstraintSpec)> {
    let l = load_operator(&pair.test)?;
    let spec = ConstraintSpec::new(load_operator(&pair.constraint)?, pair.cvalue)?;
    spec.ensure_distinct_from(&l)?;
    if spec.dims() != l.dims() {
        return Err(UewError::DimensionMismatch {
            expected: l.dim(),
            found: spec.op().dim(),
        }
        .into());
    }
    Ok((l, spec))
}

fn load_state_dir(dir: &Path) -> CliResult<Vec<(String, DensityMatrix)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| input_error(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut states = Vec::new();
    let mut bad = Vec::new();
    for p in paths {
        let label = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match load_state(&p) {
            Ok(rho) => states.push((label, rho)),
            Err(e) => bad.push(format!("{}: {e}", p.display())),
        }
    }
    if !bad.is_empty() {
        return Err(input_error(format!("unreadable state files:\n  {}", bad.join("\n  "))));
    }
    Ok(states)
}

fn ket_json(k: &Ket) -> Value {
    Value::Array(k.amplitudes().iter().map(|z| json!([z.re, z.im])).collect())
}

fn product_json(p: &ProductKet) -> Value {
    json!({ "a": ket_json(p.a()), "b": ket_json(p.b()) })
}

fn result_json(r: &OptimizationResult) -> Value {
    json!({
        "value": r.value,
        "argmax": product_json(&r.argmax),
        "constraint_value": r.constraint_value,
        "converged": r.converged,
        "iterations": r.iterations,
        "method": r.method.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (CliResult<()>, String) {
        let mut buf = Vec::new();
        let r = run(std::iter::once("uew").chain(args.iter().copied()), &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_real("2/3").unwrap(), 2.0 / 3.0);
        assert_eq!(parse_real(" 0.01 ").unwrap(), 0.01);
        assert_eq!(parse_real("1/100").unwrap(), 0.01);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("x").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn alpha_lists() {
        let v = parse_alpha_list("0,-1,-10,-100,-inf").unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v[4], SweepAlpha::MinusInfinity);
        assert!(parse_alpha_list("2").is_err());
        assert!(parse_alpha_list("").is_err());
        assert!(parse_alpha_list("0,,x").is_err());
    }

    #[test]
    fn side_parser_rejects_boundary() {
        assert!(parse_side("boundary").is_err());
        assert_eq!(parse_side("geq").unwrap(), HalfSpaceSide::Geq);
    }

    #[test]
    fn exit_codes_follow_error_kind() {
        assert_eq!(CliError::from(UewError::EmptyFeasibleSet).code, EXIT_INFEASIBLE);
        assert_eq!(CliError::from(UewError::NoConvergence("x".into())).code, EXIT_NO_CONVERGENCE);
        assert_eq!(CliError::from(UewError::Parse("x".into())).code, EXIT_INPUT);
    }

    #[test]
    fn scan_single_zero_row() {
        let (r, out) = run_capture(&["--restarts", "8", "scan", "--example31", "--alphas", "0"]);
        r.unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "alpha,bound,threshold_p");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("0,") && lines[1].ends_with(",none"));
    }

    #[test]
    fn scan_rejects_alpha_above_one() {
        let (r, _) = run_capture(&["scan", "--example31", "--alphas", "2"]);
        assert_eq!(r.unwrap_err().code, EXIT_INPUT);
    }

    #[test]
    fn scan_requires_example_flag() {
        let (r, _) = run_capture(&["scan", "--alphas", "0"]);
        assert_eq!(r.unwrap_err().code, EXIT_INPUT);
    }

    #[test]
    fn unknown_flag_is_input_error() {
        let (r, _) = run_capture(&["gs", "--bogus"]);
        assert_eq!(r.unwrap_err().code, EXIT_INPUT);
    }

    #[test]
    fn help_succeeds() {
        let (r, out) = run_capture(&["--help"]);
        r.unwrap();
        assert!(out.contains("scan"));
    }
}

//! Command-line drivers behind the `dynamo` binary: argument bundles,
//! the profile grammar, and deterministic CSV emission.
//!
//! Output is byte-reproducible for identical configurations: floats are
//! printed with 17 significant digits (lossless for f64), lines end in
//! `\n`, and sweep parallelism gathers results in grid order.
//!
//! Exit codes: 0 ok, 2 usage/config, 3 solver, 4 bracketing.

use crate::branch::{
    critical_c, default_im_tol, detect_transitions, match_branches, refine_ep, sweep,
    AffineOperator, BranchError, RefineOptions, TransitionEvent, TransitionKind,
};
use crate::eig::EigError;
use crate::krein::{classify_involution, Involution, InvolutionClass, VectorType};
use crate::operator::{AlphaProfile, BoundaryCondition, OperatorError, RadialGrid};
use crate::pencil::{build_pencil, solve_keldysh_chain, PencilError};
use crate::toy2x2::{
    classify_point, eigenvalues, jordan_at_ep, jordan_chain_check, Regime, ToyPoint,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver { message: String, partial: Option<String> },
    Bracket(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Solver { message, .. } => write!(f, "{message}"),
            CliError::Bracket(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver { .. } => 3,
            CliError::Bracket(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn partial_output(&self) -> Option<&str> {
        match self {
            CliError::Solver { partial, .. } => partial.as_deref(),
            _ => None,
        }
    }
}

fn usage_from_operator(e: OperatorError) -> CliError {
    CliError::Usage(e.to_string())
}

fn map_branch_error(e: BranchError) -> CliError {
    match e {
        BranchError::NoSignChange { .. } => CliError::Bracket(e.to_string()),
        BranchError::Eig(inner) => CliError::Solver {
            message: inner.to_string(),
            partial: None,
        },
        BranchError::Operator(inner) => usage_from_operator(inner),
        other => CliError::Usage(other.to_string()),
    }
}

/// Float formatting used in all machine-readable output: 17 significant
/// digits, round-trip exact for f64.
pub fn fmt_g17(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    format!("{x:.16e}")
}

#[derive(Debug, Parser)]
#[command(
    name = "dynamo",
    about = "Spectral analysis of the kinematic MHD alpha^2-dynamo",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a point of the 2x2 graded matrix model.
    Toy(ToyArgs),
    /// Full spectrum of the discretized operator at fixed scaling C.
    Spectrum(SpectrumArgs),
    /// Eigenvalue branches over a range of C, with transition events.
    Sweep(SweepArgs),
    /// Refine real-to-complex crossings; optionally attach Keldysh chains.
    Crossings(CrossingsArgs),
    /// Locate the dynamo threshold C_c by bisection.
    Critical(CriticalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BcArg {
    Idealized,
    Physical,
}

impl From<BcArg> for BoundaryCondition {
    fn from(b: BcArg) -> Self {
        match b {
            BcArg::Idealized => BoundaryCondition::Idealized,
            BcArg::Physical => BoundaryCondition::Physical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Fd,
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Inline profile: `const:v` or `poly:a0,a1,a2,...`.
    #[arg(long, value_name = "SPEC")]
    pub alpha: Option<String>,
    /// Profile file with `coeffs = a0, a1, ...` and `C = value` lines.
    #[arg(long, value_name = "PATH")]
    pub profile_file: Option<PathBuf>,
    /// Angular mode number l >= 1.
    #[arg(long, default_value_t = 1)]
    pub l: u32,
    /// Boundary conditions at r = 1.
    #[arg(long, value_enum, default_value_t = BcArg::Idealized)]
    pub bc: BcArg,
    /// Interior grid size.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Discretization scheme.
    #[arg(long, value_enum, default_value_t = SchemeArg::Fd)]
    pub scheme: SchemeArg,
}

impl ProblemArgs {
    fn grid(&self) -> RadialGrid {
        match self.scheme {
            SchemeArg::Fd => RadialGrid::uniform(self.n),
            SchemeArg::Chebyshev => RadialGrid::chebyshev(self.n),
        }
    }

    fn profile(&self, c_override: Option<f64>) -> Result<AlphaProfile, CliError> {
        let base = match (&self.alpha, &self.profile_file) {
            (Some(spec), None) => parse_profile_spec(spec)?,
            (None, Some(path)) => parse_profile_file(path)?,
            _ => {
                return Err(CliError::Usage(
                    "exactly one of --alpha and --profile-file is required".into(),
                ))
            }
        };
        Ok(match c_override {
            Some(c) => base.with_scaling(c),
            None => base,
        })
    }

    fn echo(&self, out: &mut String, profile: &AlphaProfile) {
        let coeffs = profile
            .coeffs()
            .iter()
            .map(|&a| fmt_g17(a))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "# coeffs = {coeffs}");
        let _ = writeln!(out, "# C = {}", fmt_g17(profile.scaling()));
        let _ = writeln!(out, "# l = {}", self.l);
        let _ = writeln!(out, "# bc = {}", BoundaryCondition::from(self.bc));
        let _ = writeln!(
            out,
            "# scheme = {}",
            match self.scheme {
                SchemeArg::Fd => "fd",
                SchemeArg::Chebyshev => "chebyshev",
            }
        );
        let _ = writeln!(out, "# n = {}", self.n);
    }
}

/// Parses the inline profile grammar `const:v` | `poly:a0,a1,...`.
pub fn parse_profile_spec(spec: &str) -> Result<AlphaProfile, CliError> {
    if let Some(rest) = spec.strip_prefix("const:") {
        let v: f64 = rest
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad constant profile value: {rest:?}")))?;
        return Ok(AlphaProfile::new(vec![v], 1.0));
    }
    if let Some(rest) = spec.strip_prefix("poly:") {
        let coeffs = parse_coeff_list(rest)?;
        return Ok(AlphaProfile::new(coeffs, 1.0));
    }
    Err(CliError::Usage(format!(
        "profile spec must start with const: or poly:, got {spec:?}"
    )))
}

fn parse_coeff_list(s: &str) -> Result<Vec<f64>, CliError> {
    let trimmed = s.trim().trim_start_matches('[').trim_end_matches(']');
    let coeffs: Result<Vec<f64>, _> = trimmed
        .split(',')
        .map(|tok| tok.trim().parse::<f64>())
        .collect();
    let coeffs = coeffs.map_err(|_| CliError::Usage(format!("bad coefficient list: {s:?}")))?;
    if coeffs.is_empty() {
        return Err(CliError::Usage("empty coefficient list".into()));
    }
    Ok(coeffs)
}

/// Profile file format: `coeffs = a0, a1, ...` (brackets optional) and
/// `C = value`; `#` starts a comment.
pub fn parse_profile_file(path: &Path) -> Result<AlphaProfile, CliError> {
    let text = fs::read_to_string(path)?;
    let mut coeffs: Option<Vec<f64>> = None;
    let mut c = 1.0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "{}:{}: expected key = value",
                path.display(),
                lineno + 1
            )));
        };
        match key.trim() {
            "coeffs" => coeffs = Some(parse_coeff_list(value)?),
            "C" => {
                c = value.trim().parse().map_err(|_| {
                    CliError::Usage(format!(
                        "{}:{}: bad C value {value:?}",
                        path.display(),
                        lineno + 1
                    ))
                })?;
            }
            other => {
                return Err(CliError::Usage(format!(
                    "{}:{}: unknown key {other:?}",
                    path.display(),
                    lineno + 1
                )));
            }
        }
    }
    let coeffs = coeffs.ok_or_else(|| {
        CliError::Usage(format!("{}: missing coeffs = line", path.display()))
    })?;
    Ok(AlphaProfile::new(coeffs, c))
}

#[derive(Debug, Args)]
pub struct ToyArgs {
    #[arg(long)]
    pub e0: f64,
    #[arg(long)]
    pub f: f64,
    #[arg(long)]
    pub b1: f64,
    #[arg(long)]
    pub b2: f64,
    /// Classification tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Profile scaling C (overrides the profile file value).
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub c_min: f64,
    #[arg(long)]
    pub c_max: f64,
    #[arg(long)]
    pub c_count: usize,
    /// Number of leading branches to track.
    #[arg(long, default_value_t = 18)]
    pub branches: usize,
    /// Append `# EVENT ...` lines for real/complex transitions.
    #[arg(long)]
    pub detect_transitions: bool,
    /// Bisect each event down to the exceptional point.
    #[arg(long)]
    pub refine: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossingsArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub c_min: f64,
    #[arg(long)]
    pub c_max: f64,
    #[arg(long, default_value_t = 200)]
    pub c_count: usize,
    #[arg(long, default_value_t = 18)]
    pub branches: usize,
    /// Solve the Jordan-Keldysh chain of the quadratic pencil at each
    /// refined crossing.
    #[arg(long)]
    pub chain: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub c_min: f64,
    #[arg(long)]
    pub c_max: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
}

/// Runs a parsed command, writing rendered output to stdout or the
/// requested file. On solver failures the partial output is still
/// written before the error propagates.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Toy(args) => {
            print!("{}", cmd_toy(args)?);
            Ok(())
        }
        Command::Spectrum(args) => {
            emit_or_partial(cmd_spectrum(args), args.output.as_deref())
        }
        Command::Sweep(args) => emit_or_partial(cmd_sweep(args), args.output.as_deref()),
        Command::Crossings(args) => {
            emit_or_partial(cmd_crossings(args), args.output.as_deref())
        }
        Command::Critical(args) => {
            print!("{}", cmd_critical(args)?);
            Ok(())
        }
    }
}

fn emit_or_partial(
    result: Result<String, CliError>,
    output: Option<&Path>,
) -> Result<(), CliError> {
    match result {
        Ok(rendered) => {
            emit(output, &rendered)?;
            Ok(())
        }
        Err(e) => {
            if let Some(partial) = e.partial_output() {
                emit(output, partial)?;
            }
            Err(e)
        }
    }
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, content).map_err(CliError::Io),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Short display name of a 2x2 involution.
fn involution_name(eta: &Involution) -> String {
    match classify_involution(eta) {
        Ok(InvolutionClass::Plus { sign }) => {
            if sign >= 0.0 {
                "+I".into()
            } else {
                "-I".into()
            }
        }
        Ok(InvolutionClass::Minus { a }) => {
            let close = |x: f64, y: f64| (x - y).abs() < 1e-9;
            let named = [
                ([1.0, 0.0, 0.0], "sigma1"),
                ([-1.0, 0.0, 0.0], "-sigma1"),
                ([0.0, 1.0, 0.0], "sigma2"),
                ([0.0, -1.0, 0.0], "-sigma2"),
                ([0.0, 0.0, 1.0], "sigma3"),
                ([0.0, 0.0, -1.0], "-sigma3"),
            ];
            for (pattern, name) in named {
                if close(a[0], pattern[0]) && close(a[1], pattern[1]) && close(a[2], pattern[2]) {
                    return name.into();
                }
            }
            format!("pauli({},{},{})", fmt_g17(a[0]), fmt_g17(a[1]), fmt_g17(a[2]))
        }
        Err(_) => "?".into(),
    }
}

fn vector_type_name(t: VectorType) -> &'static str {
    match t {
        VectorType::Positive => "positive",
        VectorType::Negative => "negative",
        VectorType::Isotropic => "isotropic",
    }
}

pub fn cmd_toy(args: &ToyArgs) -> Result<String, CliError> {
    if args.tol <= 0.0 {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let p = ToyPoint::new(args.e0, args.f, args.b1, args.b2);
    let cls = classify_point(&p, args.tol);
    let (e_minus, e_plus) = eigenvalues(&p);
    let eta_name = cls.eta.as_ref().map(involution_name);
    let types = cls.krein_types;
    let jordan = if cls.regime == Regime::ExceptionalCone {
        jordan_at_ep(&p)
            .ok()
            .map(|dec| {
                let e = dec.d[(0, 0)];
                let res = jordan_chain_check(&dec.d, e);
                (e, res)
            })
    } else {
        None
    };

    let mut out = String::new();
    match args.format {
        FormatArg::Text => {
            let _ = writeln!(out, "point: e0 = {}, f = {}, b1 = {}, b2 = {}",
                fmt_g17(args.e0), fmt_g17(args.f), fmt_g17(args.b1), fmt_g17(args.b2));
            let _ = writeln!(out, "delta = {}", fmt_g17(cls.delta));
            let _ = writeln!(out, "regime = {}", cls.regime);
            let _ = writeln!(
                out,
                "E_minus = {} + {} i",
                fmt_g17(e_minus.re),
                fmt_g17(e_minus.im)
            );
            let _ = writeln!(
                out,
                "E_plus = {} + {} i",
                fmt_g17(e_plus.re),
                fmt_g17(e_plus.im)
            );
            if let Some(name) = &eta_name {
                let _ = writeln!(out, "eta = {name}");
            }
            if let Some((tm, tp)) = types {
                let _ = writeln!(
                    out,
                    "krein types: |-> {}, |+> {}",
                    vector_type_name(tm),
                    vector_type_name(tp)
                );
            }
            if let Some((e, (r1, r2, r3))) = jordan {
                let _ = writeln!(out, "jordan E = {}", fmt_g17(e.re));
                let _ = writeln!(
                    out,
                    "jordan chain residuals = {} {} {}",
                    fmt_g17(r1),
                    fmt_g17(r2),
                    fmt_g17(r3)
                );
            }
        }
        FormatArg::Csv => {
            let _ = writeln!(
                out,
                "e0,f,b1,b2,delta,regime,re_E_minus,im_E_minus,re_E_plus,im_E_plus,eta,type_minus,type_plus,jordan_E,jordan_res1,jordan_res2,jordan_res3"
            );
            let eta_field = eta_name.unwrap_or_default();
            let (tm, tp) = types
                .map(|(a, b)| (vector_type_name(a), vector_type_name(b)))
                .unwrap_or(("", ""));
            let (je, jr) = match jordan {
                Some((e, (r1, r2, r3))) => (
                    fmt_g17(e.re),
                    format!("{},{},{}", fmt_g17(r1), fmt_g17(r2), fmt_g17(r3)),
                ),
                None => (String::new(), ",,".into()),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_g17(args.e0),
                fmt_g17(args.f),
                fmt_g17(args.b1),
                fmt_g17(args.b2),
                fmt_g17(cls.delta),
                cls.regime,
                fmt_g17(e_minus.re),
                fmt_g17(e_minus.im),
                fmt_g17(e_plus.re),
                fmt_g17(e_plus.im),
                eta_field,
                tm,
                tp,
                je,
                jr
            );
        }
    }
    Ok(out)
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<String, CliError> {
    let profile = args.problem.profile(args.c)?;
    let grid = args.problem.grid();
    let op = crate::operator::assemble(
        &profile,
        args.problem.l,
        &grid,
        args.problem.bc.into(),
    )
    .map_err(usage_from_operator)?;

    let mut out = String::new();
    let _ = writeln!(out, "# dynamo spectrum");
    args.problem.echo(&mut out, &profile);
    let _ = writeln!(out, "index,re_lambda,im_lambda,residual");

    match op.spectrum() {
        Ok(spec) => {
            for (i, (z, r)) in spec.eigenvalues.iter().zip(&spec.residuals).enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    i,
                    fmt_g17(z.re),
                    fmt_g17(z.im),
                    fmt_g17(*r)
                );
            }
            Ok(out)
        }
        Err(EigError::NonConvergence {
            sweeps,
            converged,
            dim,
            partial,
        }) => {
            for (i, z) in partial.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},", i, fmt_g17(z.re), fmt_g17(z.im));
            }
            Err(CliError::Solver {
                message: format!(
                    "eigensolver stopped after {sweeps} sweeps with {converged}/{dim} eigenvalues"
                ),
                partial: Some(out),
            })
        }
        Err(e) => Err(CliError::Solver {
            message: e.to_string(),
            partial: None,
        }),
    }
}

fn linspace(c_min: f64, c_max: f64, count: usize) -> Result<Vec<f64>, CliError> {
    if count == 0 || c_min > c_max || (c_min == c_max && count > 1) {
        return Err(CliError::Usage(format!(
            "invalid C range: [{c_min}, {c_max}] with {count} points"
        )));
    }
    if count == 1 {
        return Ok(vec![c_min]);
    }
    let step = (c_max - c_min) / (count - 1) as f64;
    Ok((0..count).map(|i| c_min + i as f64 * step).collect())
}

fn sweep_pipeline(
    problem: &ProblemArgs,
    c_min: f64,
    c_max: f64,
    c_count: usize,
    branches: usize,
) -> Result<(AffineOperator, Vec<crate::branch::Branch>, f64), CliError> {
    let profile = problem.profile(None)?;
    let grid = problem.grid();
    let op = AffineOperator::from_dynamo(&profile, problem.l, &grid, problem.bc.into())
        .map_err(map_branch_error)?;
    let c_grid = linspace(c_min, c_max, c_count)?;
    let result = sweep(&op, &c_grid).map_err(map_branch_error)?;
    let tracked = match_branches(&result, branches).map_err(map_branch_error)?;
    let im_tol = default_im_tol(&op, c_max.abs().max(c_min.abs()).max(1.0));
    Ok((op, tracked, im_tol))
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let profile = args.problem.profile(None)?;
    let (op, tracked, im_tol) = sweep_pipeline(
        &args.problem,
        args.c_min,
        args.c_max,
        args.c_count,
        args.branches,
    )?;

    let mut out = String::new();
    let _ = writeln!(out, "# dynamo sweep");
    args.problem.echo(&mut out, &profile);
    let _ = writeln!(out, "# c_min = {}", fmt_g17(args.c_min));
    let _ = writeln!(out, "# c_max = {}", fmt_g17(args.c_max));
    let _ = writeln!(out, "# c_count = {}", args.c_count);
    let _ = writeln!(out, "# branches = {}", args.branches);
    let _ = writeln!(out, "branch_id,C,re_lambda,im_lambda");
    for b in &tracked {
        for &(c, z) in &b.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                b.id,
                fmt_g17(c),
                fmt_g17(z.re),
                fmt_g17(z.im)
            );
        }
    }

    if args.detect_transitions {
        let mut events = detect_transitions(&tracked, im_tol);
        if args.refine {
            let opts = RefineOptions {
                im_tol,
                ..RefineOptions::default()
            };
            events = events
                .iter()
                .map(|ev| refine_ep(ev, &op, &opts).map_err(map_branch_error))
                .collect::<Result<Vec<_>, _>>()?;
        }
        for ev in &events {
            let _ = writeln!(
                out,
                "# EVENT {} {} {} {}",
                ev.kind,
                fmt_g17(ev.c_star),
                fmt_g17(ev.lambda_star.re),
                fmt_g17(ev.lambda_star.im)
            );
        }
    }
    Ok(out)
}

pub fn cmd_crossings(args: &CrossingsArgs) -> Result<String, CliError> {
    let profile = args.problem.profile(None)?;
    let (op, tracked, im_tol) = sweep_pipeline(
        &args.problem,
        args.c_min,
        args.c_max,
        args.c_count,
        args.branches,
    )?;
    let opts = RefineOptions {
        im_tol,
        ..RefineOptions::default()
    };
    let events: Vec<TransitionEvent> = detect_transitions(&tracked, im_tol)
        .iter()
        .map(|ev| refine_ep(ev, &op, &opts).map_err(map_branch_error))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out = String::new();
    let _ = writeln!(out, "# dynamo crossings");
    args.problem.echo(&mut out, &profile);
    let _ = writeln!(
        out,
        "kind,c_star,re_lambda_star,im_lambda_star,branch_a,branch_b,exponent,chain_res1,chain_res2,chain_res3"
    );
    for ev in &events {
        let exponent = ev.exponent.map(fmt_g17).unwrap_or_default();
        let chain_fields = if args.chain && ev.kind != TransitionKind::NearMiss {
            let grid = args.problem.grid();
            let pencil = build_pencil(
                &profile.with_scaling(ev.c_star),
                args.problem.l,
                &grid,
                args.problem.bc.into(),
            )
            .map_err(|e| match e {
                PencilError::ProfileVanishes { .. } => CliError::Usage(e.to_string()),
                other => CliError::Solver {
                    message: other.to_string(),
                    partial: None,
                },
            })?;
            match solve_keldysh_chain(&pencil, ev.lambda_star) {
                Ok(chain) => format!(
                    "{},{},{}",
                    fmt_g17(chain.residuals[0]),
                    fmt_g17(chain.residuals[1]),
                    fmt_g17(chain.residuals[2])
                ),
                Err(PencilError::NotDefective { residuals }) => format!(
                    "{},{},{}",
                    fmt_g17(residuals[0]),
                    fmt_g17(residuals[1]),
                    fmt_g17(residuals[2])
                ),
                Err(e) => {
                    return Err(CliError::Solver {
                        message: e.to_string(),
                        partial: None,
                    })
                }
            }
        } else {
            ",,".into()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            ev.kind,
            fmt_g17(ev.c_star),
            fmt_g17(ev.lambda_star.re),
            fmt_g17(ev.lambda_star.im),
            ev.branch_ids.0,
            ev.branch_ids.1,
            exponent,
            chain_fields
        );
    }
    Ok(out)
}

pub fn cmd_critical(args: &CriticalArgs) -> Result<String, CliError> {
    let profile = args.problem.profile(None)?;
    let grid = args.problem.grid();
    let op = AffineOperator::from_dynamo(&profile, args.problem.l, &grid, args.problem.bc.into())
        .map_err(map_branch_error)?;
    let im_tol = default_im_tol(&op, args.c_max.abs().max(1.0));
    let cp = critical_c(&op, args.c_min, args.c_max, im_tol).map_err(map_branch_error)?;

    let mut out = String::new();
    match args.format {
        FormatArg::Text => {
            let _ = writeln!(out, "# dynamo critical");
            args.problem.echo(&mut out, &profile);
            let _ = writeln!(out, "C_c = {}", fmt_g17(cp.c));
            let _ = writeln!(out, "onset = {}", cp.onset);
            let _ = writeln!(out, "re_lambda = {}", fmt_g17(cp.lambda.re));
            let _ = writeln!(out, "im_lambda = {}", fmt_g17(cp.lambda.im));
        }
        FormatArg::Csv => {
            let _ = writeln!(out, "c_critical,onset,re_lambda,im_lambda");
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_g17(cp.c),
                cp.onset,
                fmt_g17(cp.lambda.re),
                fmt_g17(cp.lambda.im)
            );
        }
    }
    Ok(out)
}

//! `wcl`: exact and Monte Carlo verification of Wiener chaos identities.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or I/O error,
//! 3 parse error, 4 precondition violation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wiener_chaos::girsanov::Hypotheses;
use wiener_chaos::instance::{
    generate, verify_instance, verify_nilpotency, Instance, InstanceSpec, Kind,
};
use wiener_chaos::malliavin::{verify_adjoint, verify_cm};
use wiener_chaos::montecarlo::{
    mc_verify_cm, mc_verify_mg, reseed, sample_batch, with_reseed_retry,
};
use wiener_chaos::{
    girsanov, parse_direction, parse_expression, ChaosElement, Direction, Error, PredictableField,
    VerificationReport,
};

#[derive(Parser)]
#[command(
    name = "wcl",
    version,
    about = "Exact and Monte Carlo checks of Wiener chaos identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct Output {
    /// Write reports here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Exact verification of one identity.
    #[command(subcommand)]
    Verify(Verify),
    /// Structural checks on a field.
    #[command(subcommand)]
    Check(Check),
    /// Monte Carlo verification.
    #[command(subcommand)]
    Mc(Mc),
    /// Generate seeded random instances as JSON lines.
    Gen(GenArgs),
    /// Parse an expression and print it in canonical form.
    Parse { expression: String },
}

#[derive(Args, Clone, Default)]
struct Inputs {
    /// Chaos element F, e.g. "xi1^2 - 1".
    #[arg(long)]
    f: Option<String>,
    /// Second element G (adjointness).
    #[arg(long)]
    g: Option<String>,
    /// Direction θ, e.g. "1*e1 - 1/2*e3".
    #[arg(long)]
    theta: Option<String>,
    /// JSON file holding a field `{"level": s, "components": {...}}`.
    #[arg(long)]
    z_file: Option<PathBuf>,
    /// Instance file from `wcl gen` (JSON lines or an array); overrides the
    /// other inputs and verifies every instance.
    #[arg(long)]
    instance: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Verify {
    Cm(#[command(flatten)] Inputs),
    Adjoint(#[command(flatten)] Inputs),
    Mg(#[command(flatten)] Inputs),
    Ln {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        n: Option<u32>,
        /// Evaluate anticipating fields instead of rejecting them; the report
        /// then always fails.
        #[arg(long)]
        allow_anticipating: bool,
    },
    Density(#[command(flatten)] Inputs),
}

#[derive(Subcommand)]
enum Check {
    Nilpotent(#[command(flatten)] Inputs),
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    count: usize,
    /// Haar level of the draws; defaults to the smallest level covering the inputs.
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Subcommand)]
enum Mc {
    Cm(McArgs),
    Mg(McArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of instances; instance i uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    level: Option<u32>,
    /// Bound on the order of F and G.
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    field_degree: Option<u32>,
    #[arg(long)]
    coords: Option<u32>,
    #[arg(long)]
    coeff: Option<i64>,
    #[arg(long)]
    max_n: Option<u32>,
    #[arg(long)]
    nonconstant_field: bool,
    #[arg(long)]
    anticipating: bool,
}

enum Failure {
    Usage(String),
    Parse(String),
    Precondition(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Parse(_) => 3,
            Failure::Precondition(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Precondition(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Json(_) => Failure::Parse(e.to_string()),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("WCL_THREADS").ok().filter(|s| !s.is_empty()) {
        let Ok(n) = threads.parse::<usize>() else {
            eprintln!("error: WCL_THREADS must be a positive integer, got `{threads}`");
            return ExitCode::from(2);
        };
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Outcome<u8> {
    let reports = match &cli.command {
        Command::Parse { expression } => {
            let e = parse_expression(expression).map_err(|e| Failure::Parse(e.to_string()))?;
            let text = match cli.output.format {
                Format::Json => serde_json::to_string(&serde_json::json!({
                    "canonical": e.to_string(),
                    "element": e,
                }))
                .expect("serializable"),
                Format::Table => e.to_string(),
            };
            emit(&cli.output, &(text + "\n"))?;
            return Ok(0);
        }
        Command::Gen(args) => {
            let mut text = String::new();
            for i in 0..args.count {
                let inst = generate(&gen_spec(args, args.seed.wrapping_add(i)))?;
                text.push_str(&serde_json::to_string(&inst).expect("serializable"));
                text.push('\n');
            }
            emit(&cli.output, &text)?;
            return Ok(0);
        }
        Command::Verify(v) => verify(v)?,
        Command::Check(Check::Nilpotent(inputs)) => match &inputs.instance {
            Some(path) => run_instances(path, Kind::Nilpotency, Hypotheses::AllowAnticipating)?,
            None => vec![verify_nilpotency(&field(inputs)?)],
        },
        Command::Mc(mc) => vec![monte_carlo(mc)?],
    };
    emit(&cli.output, &render(&reports, cli.output.format))?;
    Ok(if reports.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn gen_spec(args: &GenArgs, seed: u64) -> InstanceSpec {
    let mut spec = InstanceSpec::new(args.kind, seed);
    if let Some(v) = args.level {
        spec.level = v;
    }
    if let Some(v) = args.degree {
        spec.degree = v;
    }
    if let Some(v) = args.field_degree {
        spec.field_degree = v;
    }
    if let Some(v) = args.coords {
        spec.coords = v;
    }
    if let Some(v) = args.coeff {
        spec.coeff = v;
    }
    if let Some(v) = args.max_n {
        spec.max_n = v;
    }
    spec.nonconstant_field = args.nonconstant_field;
    spec.anticipating = args.anticipating;
    spec
}

fn verify(v: &Verify) -> Outcome<Vec<VerificationReport>> {
    let (kind, inputs, hyp) = match v {
        Verify::Cm(i) => (Kind::Cm, i, Hypotheses::Enforce),
        Verify::Adjoint(i) => (Kind::Adjoint, i, Hypotheses::Enforce),
        Verify::Mg(i) => (Kind::Mg, i, Hypotheses::Enforce),
        Verify::Density(i) => (Kind::Density, i, Hypotheses::Enforce),
        Verify::Ln {
            inputs,
            allow_anticipating,
            ..
        } => {
            let hyp = if *allow_anticipating {
                Hypotheses::AllowAnticipating
            } else {
                Hypotheses::Enforce
            };
            (Kind::Ln, inputs, hyp)
        }
    };
    if let Some(path) = &inputs.instance {
        return run_instances(path, kind, hyp);
    }
    let report = match v {
        Verify::Cm(i) => verify_cm(&element(&i.f, "--f")?, &direction(i)?),
        Verify::Adjoint(i) => verify_adjoint(
            &element(&i.f, "--f")?,
            &element(&i.g, "--g")?,
            &direction(i)?,
        ),
        Verify::Mg(i) => girsanov::verify_mg(&element(&i.f, "--f")?, &field(i)?)?,
        Verify::Density(i) => {
            girsanov::verify_density_expansion(&element(&i.f, "--f")?, &field(i)?)?
        }
        Verify::Ln { inputs: i, n, .. } => {
            let n = n.ok_or_else(|| Failure::Usage("missing --n".into()))?;
            girsanov::verify_ln_duality(&element(&i.f, "--f")?, &field(i)?, n, hyp)?
        }
    };
    Ok(vec![report])
}

fn run_instances(path: &Path, kind: Kind, hyp: Hypotheses) -> Outcome<Vec<VerificationReport>> {
    let instances = read_instances(path)?;
    if let Some(bad) = instances.iter().find(|i| i.kind != kind) {
        return Err(Failure::Usage(format!(
            "instance of kind {:?} passed to a {:?} verifier",
            bad.kind, kind
        )));
    }
    let results: Vec<Result<VerificationReport, String>> = {
        use rayon::prelude::*;
        instances
            .par_iter()
            .enumerate()
            .map(|(i, inst)| {
                verify_instance(inst, hyp)
                    .map(|r| r.with_id(i as u64))
                    .map_err(|e| format!("instance {i}: {e}"))
            })
            .collect()
    };
    let failures: Vec<String> = results
        .iter()
        .filter_map(|r| r.as_ref().err().cloned())
        .collect();
    if !failures.is_empty() {
        return Err(Failure::Precondition(failures.join("; ")));
    }
    Ok(results.into_iter().map(Result::unwrap).collect())
}

fn read_instances(path: &Path) -> Outcome<Vec<Instance>> {
    let text = read(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return serde_json::from_str(trimmed)
            .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())));
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Failure::Parse(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn element(text: &Option<String>, flag: &str) -> Outcome<ChaosElement> {
    let text = text
        .as_deref()
        .ok_or_else(|| Failure::Usage(format!("missing {flag}")))?;
    parse_expression(text).map_err(|e| Failure::Parse(format!("{flag}: {e}")))
}

fn direction(i: &Inputs) -> Outcome<Direction> {
    let text = i
        .theta
        .as_deref()
        .ok_or_else(|| Failure::Usage("missing --theta".into()))?;
    parse_direction(text).map_err(|e| Failure::Parse(format!("--theta: {e}")))
}

fn field(i: &Inputs) -> Outcome<PredictableField> {
    let path = i
        .z_file
        .as_deref()
        .ok_or_else(|| Failure::Usage("missing --z-file".into()))?;
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn covering_level(dim: u32) -> u32 {
    (0..31).find(|s| (1u32 << s) >= dim).unwrap_or(30)
}

fn monte_carlo(mc: &Mc) -> Outcome<VerificationReport> {
    let (args, is_cm) = match mc {
        Mc::Cm(a) => (a, true),
        Mc::Mg(a) => (a, false),
    };
    let f = element(&args.inputs.f, "--f")?;
    let f_dim = f.max_coord().unwrap_or(1);
    let accept = |r: &VerificationReport| r.pass;
    let (report, attempts) = if is_cm {
        let theta = direction(&args.inputs)?;
        let dim = f_dim.max(theta.coords().keys().next_back().copied().unwrap_or(1));
        let level = args.level.unwrap_or_else(|| covering_level(dim));
        if (1u64 << level) < dim as u64 {
            return Err(Failure::Precondition(format!(
                "level {level} does not cover coordinate {dim}"
            )));
        }
        with_reseed_retry(
            args.seed,
            |seed| mc_verify_cm(&f, &theta, &sample_batch(level, args.count, seed)?),
            accept,
        )?
    } else {
        let z = field(&args.inputs)?;
        girsanov::validate_predictable(&z).map_err(|v| Failure::from(Error::NotPredictable(v)))?;
        let level = args.level.unwrap_or(z.level()).max(z.level());
        if (1u64 << level) < f_dim as u64 {
            return Err(Failure::Precondition(format!(
                "level {level} does not cover coordinate {f_dim}"
            )));
        }
        with_reseed_retry(
            args.seed,
            |seed| mc_verify_mg(&f, &z, &sample_batch(level, args.count, seed)?),
            accept,
        )?
    };
    let used = if attempts > 1 {
        reseed(args.seed, 1)
    } else {
        args.seed
    };
    Ok(report
        .with_param("attempts", attempts)
        .with_param("seed_used", used))
}

fn render(reports: &[VerificationReport], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            for r in reports {
                out.push_str(&r.to_json());
                out.push('\n');
            }
        }
        Format::Table => {
            out.push_str(&format!(
                "{:>4}  {:<11} {:>24} {:>24}  {}\n",
                "id", "identity", "lhs", "rhs", "pass"
            ));
            for r in reports {
                let identity = serde_json::to_value(r.identity).expect("serializable");
                out.push_str(&format!(
                    "{:>4}  {:<11} {:>24} {:>24}  {}\n",
                    r.instance_id,
                    identity.as_str().unwrap_or("?"),
                    r.lhs,
                    r.rhs,
                    if r.pass { "ok" } else { "FAIL" }
                ));
                if let Some(c) = &r.context {
                    out.push_str(&format!("      {c}\n"));
                }
            }
        }
    }
    out
}

fn emit(output: &Output, text: &str) -> Outcome<()> {
    let result = match &output.out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    result.map_err(|e| Failure::Usage(format!("writing output: {e}")))
}

//! `cvp-qubo` command-line tool.
//!
//! Exit codes: 0 success, 1 solver refused or verification failed,
//! 2 invalid input.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;

use cvp_qubo::io::{self as cio, InstanceFile};
use cvp_qubo::pipeline::{cvp_oracle_certified, cvp_oracle_enum, DEFAULT_ORACLE_CAP};
use cvp_qubo::qubo::{export_qubo, import_qubo, QuboFormat};
use cvp_qubo::solve::{solve_exhaustive_capped, DEFAULT_EXHAUSTIVE_CAP};
use cvp_qubo::{
    build_qubo, encoding_bits, reduce_to_parallelepiped, solve_cvp, solve_sa, verify_solution, AnnealSchedule, BoundMode,
    CvpInstance, EncodingParams, Error, MethodChoice, OraclePolicy, QuboMatrix, SignMode, SolveOptions, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "cvp-qubo", version, about = "Reduce closest vector problems to QUBO and solve them exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Tight,
}

impl From<ModeArg> for BoundMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => BoundMode::Paper,
            ModeArg::Tight => BoundMode::Tight,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Derived,
    Verbatim,
}

impl From<SignArg> for SignMode {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Derived => SignMode::Derived,
            SignArg::Verbatim => SignMode::Verbatim,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    QuboLines,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum MethodArg {
    Auto,
    Exhaustive,
    Sa,
}

#[derive(Args)]
struct EncodingArgs {
    /// Bit-width bound.
    #[arg(long, value_enum, default_value = "tight")]
    mode: ModeArg,
    /// Sign convention of the linear target term.
    #[arg(long, value_enum, default_value = "derived")]
    sign: SignArg,
}

#[derive(Args)]
struct SolverArgs {
    /// Solver; `auto` is exhaustive when N is within the cap, else annealing.
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest N exhaustive search accepts.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: usize,
    #[arg(long)]
    sa_sweeps: Option<u32>,
    #[arg(long)]
    sa_restarts: Option<u32>,
    /// Initial temperature, e.g. `1000` or `7/2`.
    #[arg(long)]
    sa_t0: Option<BigRational>,
    /// Per-sweep cooling factor in (0,1), e.g. `99/100`.
    #[arg(long)]
    sa_cooling: Option<BigRational>,
}

impl SolverArgs {
    fn schedule(&self, q: &QuboMatrix) -> AnnealSchedule {
        let mut s = AnnealSchedule::with_sweeps(q, self.sa_sweeps.unwrap_or(AnnealSchedule::DEFAULT_SWEEPS), self.seed);
        if let Some(r) = self.sa_restarts {
            s.restarts = r;
        }
        if let Some(t) = &self.sa_t0 {
            s.initial_temperature = t.clone();
        }
        if let Some(c) = &self.sa_cooling {
            s.cooling = c.clone();
        }
        s
    }

    fn has_schedule_overrides(&self) -> bool {
        self.sa_sweeps.is_some() || self.sa_restarts.is_some() || self.sa_t0.is_some() || self.sa_cooling.is_some()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print b, det, the condition bound, m, N and the coefficient bound.
    Bounds {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "tight")]
        mode: ModeArg,
    },
    /// Translate the target into the fundamental parallelepiped.
    Reduce { instance: PathBuf },
    /// Build the Q-matrix of the reduced instance.
    Build {
        instance: PathBuf,
        #[command(flatten)]
        enc: EncodingArgs,
        #[arg(long, value_enum, default_value = "qubo-lines")]
        format: FormatArg,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Minimize a QUBO file.
    SolveQubo {
        qubo: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Solve the instance end to end and verify the answer.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        enc: EncodingArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Oracle radius; defaults to 2^m when the enumeration is small enough.
        #[arg(long)]
        radius: Option<BigInt>,
        #[arg(long)]
        no_oracle: bool,
    },
    /// Brute-force closest vector.
    Oracle {
        instance: PathBuf,
        /// Box radius around the parallelepiped target; defaults to 2^m.
        #[arg(long)]
        radius: Option<BigInt>,
        /// Search a box derived from the rounding distance instead.
        #[arg(long, conflicts_with = "radius")]
        certified: bool,
        #[arg(long, value_enum, default_value = "tight")]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        oracle_cap: u64,
    },
    /// Check a solution file against an instance.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        #[command(flatten)]
        enc: EncodingArgs,
        /// Oracle radius; defaults to 2^m when the enumeration is small enough.
        #[arg(long)]
        radius: Option<BigInt>,
        #[arg(long)]
        no_oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Refused(String),
    Invalid(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OverCap { .. } | Error::OracleCap { .. } => Failure::Refused(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| Failure::Invalid(format!("stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read_input(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<CvpInstance, Failure> {
    let text = read_text(path)?;
    Ok(InstanceFile::parse(&text)?.to_instance()?)
}

fn oracle_policy(radius: &Option<BigInt>, off: bool) -> OraclePolicy {
    match (off, radius) {
        (true, _) => OraclePolicy::Off,
        (false, Some(r)) => OraclePolicy::Radius(r.clone()),
        (false, None) => OraclePolicy::Auto,
    }
}

fn emit(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds { instance, mode } => {
            let inst = load_instance(&instance)?;
            let rep = encoding_bits(&inst, mode.into())?;
            emit(&cio::bounds_json(&inst, &rep));
        }
        Command::Reduce { instance } => {
            let inst = load_instance(&instance)?;
            emit(&cio::reduced_json(&reduce_to_parallelepiped(&inst)?));
        }
        Command::Build { instance, enc, format, output } => {
            let inst = load_instance(&instance)?;
            let red = reduce_to_parallelepiped(&inst)?;
            let m = encoding_bits(&inst, enc.mode.into())?.m();
            let q = build_qubo(&red, &EncodingParams::new(inst.dim(), m), enc.sign.into())?;
            let fmt = match format {
                FormatArg::Json => QuboFormat::Json,
                FormatArg::QuboLines => QuboFormat::QuboLines,
            };
            let bytes = export_qubo(&q, fmt);
            match output {
                Some(path) => fs::write(&path, bytes).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?,
                None => io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| Failure::Invalid(format!("stdout: {e}")))?,
            }
        }
        Command::SolveQubo { qubo, solver } => {
            let q = import_qubo(&read_input(&qubo)?)?;
            let use_sa = match solver.method {
                MethodArg::Sa => true,
                MethodArg::Exhaustive => false,
                MethodArg::Auto => q.n_vars() > solver.cap,
            };
            let result = if use_sa {
                solve_sa(&q, &solver.schedule(&q))?
            } else {
                solve_exhaustive_capped(&q, solver.cap)?
            };
            let mut doc = cio::solve_result_json(&result);
            doc["objective_with_constant"] = (&result.value + &q.constant).to_string().into();
            emit(&doc);
        }
        Command::Solve { instance, enc, solver, radius, no_oracle } => {
            let inst = load_instance(&instance)?;
            let method = match solver.method {
                MethodArg::Exhaustive => MethodChoice::Exhaustive,
                MethodArg::Auto if !solver.has_schedule_overrides() => MethodChoice::Auto,
                _ => {
                    // The schedule is scaled to Q, so build Q here as the pipeline will.
                    let m = encoding_bits(&inst, enc.mode.into())?.m();
                    let params = EncodingParams::new(inst.dim(), m);
                    if solver.method == MethodArg::Auto && params.n_vars() <= solver.cap {
                        MethodChoice::Exhaustive
                    } else {
                        let q = build_qubo(&reduce_to_parallelepiped(&inst)?, &params, enc.sign.into())?;
                        MethodChoice::Sa(Some(solver.schedule(&q)))
                    }
                }
            };
            let opts = SolveOptions {
                bound_mode: enc.mode.into(),
                sign: enc.sign.into(),
                method,
                exhaustive_cap: solver.cap,
                seed: solver.seed,
                verify: VerifyOptions {
                    oracle: oracle_policy(&radius, no_oracle),
                    seed: solver.seed,
                    ..VerifyOptions::default()
                },
            };
            emit(&cio::outcome_json(&solve_cvp(&inst, &opts)?));
        }
        Command::Oracle { instance, radius, certified, mode, oracle_cap } => {
            let inst = load_instance(&instance)?;
            let red = reduce_to_parallelepiped(&inst)?;
            let found = if certified {
                cvp_oracle_certified(inst.basis(), &red.x_hat, oracle_cap)?
            } else {
                let r = match radius {
                    Some(r) => r,
                    None => BigInt::from(1) << encoding_bits(&inst, mode.into())?.m(),
                };
                cvp_oracle_enum(inst.basis(), &red.x_hat, &r, oracle_cap)?
            };
            // Translate back to the original target.
            let z: Vec<BigInt> = found.z.iter().zip(&red.floor_coords).map(|(a, b)| a + b).collect();
            let lambda: Vec<BigInt> = found.lambda.iter().zip(&red.lambda0).map(|(a, b)| a + b).collect();
            let sol = cvp_qubo::CvpSolution { z, lambda, ..found };
            emit(&cio::solution_json(&sol));
        }
        Command::Verify { instance, solution, enc, radius, no_oracle, seed } => {
            let inst = load_instance(&instance)?;
            let sol = cio::parse_solution(&read_text(&solution)?)?;
            let opts = VerifyOptions {
                bound_mode: enc.mode.into(),
                sign: enc.sign.into(),
                oracle: oracle_policy(&radius, no_oracle),
                seed,
                ..VerifyOptions::default()
            };
            let rep = verify_solution(&inst, &sol, &opts)?;
            emit(&cio::verify_json(&rep));
            if !rep.passed() {
                return Err(Failure::Checks("verification failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Refused(msg)) | Err(Failure::Checks(msg)) => {
            eprintln!("cvp-qubo: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("cvp-qubo: {msg}");
            ExitCode::from(2)
        }
    }
}

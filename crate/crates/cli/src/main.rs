//! `stabcert` command-line front end.

mod config;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stabcert::certificate::{exit_code, EXIT_FAIL, EXIT_USAGE};
use stabcert::iteration::{c0_value, c_exponent, recursion_simulate, RecursionInput};
use stabcert::optimizer::{maximize_epsilon, minimize_delta0, Objective, SearchConfig};
use stabcert::{pipeline, reference_row, Certificate, Settings};

use crate::config::{parse_c_ms, parse_radius, parse_rational, ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "stabcert", version, about = "Exact certification of stability-curvature constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Certificate output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Michael-Simon constant.
    #[arg(long)]
    cms: Option<String>,
    /// Outer radius R for the De Giorgi constants.
    #[arg(long)]
    radius: Option<String>,
    /// Exit 3 when a computed value differs from a quoted one.
    #[arg(long)]
    strict: bool,
    /// Print every computed value, not only the checks.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Delta0,
    Epsilon,
}

#[derive(Subcommand)]
enum Command {
    /// Certify one built-in row (n = 3, 4 or 5).
    Verify {
        dimension: Option<u32>,
        #[arg(long = "n")]
        n: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Certify every row plus the delta1, iteration and (with C_MS) eps1 tables.
    VerifyAll {
        #[command(flatten)]
        common: Common,
    },
    /// Search for parameters and recertify the result exactly.
    Optimize {
        #[arg(long = "n")]
        n: u32,
        #[arg(long, value_enum, default_value = "delta0")]
        objective: ObjectiveArg,
        /// Fixed delta0 for the epsilon objective (default: the built-in row).
        #[arg(long)]
        delta0: Option<String>,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Iterate the worst-case De Giorgi recursion against its closed bound.
    RecursionSim {
        #[arg(long = "n")]
        n: u32,
        #[arg(long)]
        s1: f64,
        /// C0 directly; otherwise computed from --q and --delta.
        #[arg(long)]
        c0: Option<f64>,
        /// log2 of C; otherwise computed from --q.
        #[arg(long)]
        log2_c: Option<String>,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 12)]
        steps: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Render a stored certificate; exit code follows its content.
    Report {
        path: PathBuf,
        #[arg(long)]
        strict: bool,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<stabcert::Error> for Failure {
    fn from(e: stabcert::Error) -> Self {
        match e {
            stabcert::Error::MalformedCertificate(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    if let Some(c) = &common.cms {
        cfg.c_ms = Some(parse_c_ms(c)?);
    }
    if let Some(r) = &common.radius {
        cfg.radius = Some(parse_radius(r)?);
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn settings(cfg: &RunConfig) -> Settings {
    let mut s = Settings::default();
    cfg.apply(&mut s);
    s
}

fn write(cert: &Certificate, path: &Path) -> Result<(), Failure> {
    cert.write_atomic(path)
        .map_err(|e| Failure::Runtime(format!("writing {}: {e}", path.display())))?;
    println!("certificate written to {}", path.display());
    Ok(())
}

fn finish(cert: &Certificate, cfg: &RunConfig, default_out: &str, common: &Common) -> Result<i32, Failure> {
    print!("{}", render::certificate(cert, common.verbose));
    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from(default_out));
    write(cert, &path)?;
    Ok(exit_code(cert, common.strict))
}

fn run(cli: Cli) -> Result<i32, Failure> {
    match cli.command {
        Command::Verify { dimension, n, common } => {
            let n = match (dimension, n) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Failure::Usage(format!("conflicting dimensions {a} and {b}")))
                }
                (Some(a), _) | (None, Some(a)) => a,
                (None, None) => return Err(Failure::Usage("missing dimension".into())),
            };
            let cfg = load_config(&common)?;
            reference_row(n)?;
            let cert = pipeline::verify(n, &settings(&cfg))?;
            finish(&cert, &cfg, &format!("certificate-verify-{n}.json"), &common)
        }
        Command::VerifyAll { common } => {
            let cfg = load_config(&common)?;
            let cert = pipeline::verify_all(&settings(&cfg))?;
            finish(&cert, &cfg, "certificate-verify-all.json", &common)
        }
        Command::Optimize { n, objective, delta0, budget, common } => {
            let cfg = load_config(&common)?;
            let objective = match objective {
                ObjectiveArg::Delta0 => Objective::MinimizeDelta0,
                ObjectiveArg::Epsilon => Objective::MaximizeEpsilon,
            };
            let mut sc = SearchConfig::new(n, objective)?;
            if let Some(b) = budget.or(cfg.budget) {
                sc.budget = b;
            }
            if let Some(d) = cfg.denominator_bound {
                sc.denominator_bound = d;
            }
            if let Some(seed) = cfg.seed {
                sc.seeds = (0..8).map(|i| seed.wrapping_add(i)).collect();
            }
            sc.validate()?;
            let result = match objective {
                Objective::MinimizeDelta0 => minimize_delta0(&sc)?,
                Objective::MaximizeEpsilon => {
                    let d0 = match &delta0 {
                        Some(d) => parse_rational("delta0", d)?,
                        None => reference_row(n)
                            .map_err(|_| Failure::Usage(format!("--delta0 is required for n = {n}")))?
                            .delta0,
                    };
                    maximize_epsilon(&sc, &d0)?
                }
            };
            let mut env = settings(&cfg).environment();
            env.set("budget", sc.budget);
            env.set("denominator_bound", sc.denominator_bound);
            env.set("seeds", format!("{:?}", sc.seeds));
            let mut cert = Certificate::new(format!("optimize n={n}"), env);
            cert.search = Some(result);
            let cert = cert.finalize();
            let r = cert.search.as_ref().expect("just set");
            if !r.certified {
                eprintln!("no certified parameters found within the budget");
            } else if let Some(gain) = r.improvement_vs_reference.as_ref().filter(|g| g.is_positive()) {
                let what = match objective {
                    Objective::MinimizeDelta0 => "delta0 below",
                    Objective::MaximizeEpsilon => "epsilon above",
                };
                let banner = format!(
                    "FINDING: certified {what} the built-in row for n = {n} by {gain} (~{:.3e})",
                    gain.to_f64()
                );
                println!("{banner}");
                eprintln!("{banner}");
            }
            finish(&cert, &cfg, &format!("certificate-optimize-{n}.json"), &common)
        }
        Command::RecursionSim { n, s1, c0, log2_c, q, delta, steps, common } => {
            let cfg = load_config(&common)?;
            let s = settings(&cfg);
            let q = q.map(|v| parse_rational("q", &v)).transpose()?;
            let log2_c = match (log2_c, &q) {
                (Some(v), _) => parse_rational("log2_c", &v)?,
                (None, Some(q)) => c_exponent(n, q)?.0,
                (None, None) => return Err(Failure::Usage("give --log2-c or --q".into())),
            };
            let c0 = match (c0, &q, delta) {
                (Some(v), _, _) => v,
                (None, Some(q), Some(d)) => {
                    let d = parse_rational("delta", &d)?;
                    c0_value(n, &d, q, s.c_ms_value(), &s.radius, s.precision)?.to_f64()
                }
                _ => return Err(Failure::Usage("give --c0, or --q with --delta".into())),
            };
            let input = RecursionInput { n, s1, c0, log2_c, steps };
            let run = recursion_simulate(&input, s.precision)?;
            let mut cert = Certificate::new(format!("recursion-sim n={n}"), s.environment());
            cert.recursion = Some(vec![run]);
            let cert = cert.finalize();
            let mut out = String::new();
            render::recursion(&mut out, &cert.recursion.as_ref().expect("just set")[0]);
            print!("{out}");
            if let Some(p) = &cfg.out {
                write(&cert, p)?;
            }
            Ok(exit_code(&cert, common.strict))
        }
        Command::Report { path, strict } => {
            let cert = Certificate::read(&path).map_err(|e| Failure::Usage(e.to_string()))?;
            print!("{}", render::certificate(&cert, true));
            Ok(exit_code(&cert, strict))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let code = match run(cli) {
        Ok(c) => c,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_FAIL
        }
    };
    ExitCode::from(code as u8)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use kreinlab::cli::{self, Command, GenClass, PathFile, EXIT_CODES_HELP, EXIT_VERIFY};
use kreinlab::homotopy::ScenarioParams;
use kreinlab::io::MatrixFile;
use kreinlab::realsym::RealKind;
use kreinlab::spectral::OperatorKind;
use kreinlab::{KreinError, ToleranceConfig};

#[derive(Parser)]
#[command(name = "kreinlab", version, about = "Krein-space spectral invariants, bifurcation tracking and homotopy retractions", after_help = EXIT_CODES_HELP)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Unitary,
    Hermitian,
}

impl From<KindArg> for OperatorKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Unitary => OperatorKind::Unitary,
            KindArg::Hermitian => OperatorKind::Hermitian,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random group element or J-hermitian operator as a matrix file.
    #[command(after_help = EXIT_CODES_HELP)]
    Gen {
        /// O, SO*, SP-ind, SP-R, U or hermitian
        class: String,
        n_plus: usize,
        n_minus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit H = 0 (hermitian class only).
        #[arg(long)]
        zero: bool,
        /// Real kind `eta,tau` for hermitian output, e.g. `1,-1`.
        #[arg(long, allow_hyphen_values = true)]
        real: Option<String>,
        /// Output file; the matrix file goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the invariant report of a matrix file as JSON.
    #[command(after_help = EXIT_CODES_HELP)]
    Invariants {
        input: PathBuf,
        /// Operator kind; inferred from the membership residuals when omitted.
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Track eigenvalues along a library scenario or a path file.
    #[command(after_help = EXIT_CODES_HELP)]
    Track {
        /// Scenario name (finex, kc2x2, qkc, tb, mtb, pd, mpd) or path file.
        source: String,
        /// Initial uniform grid size.
        #[arg(long, default_value_t = 41)]
        grid: usize,
        /// Trajectory CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Events JSON output (stdout when omitted).
        #[arg(long)]
        events: Option<PathBuf>,
        /// Signs of the finex family.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        sigma_prime: f64,
    },
    /// Retract a J-hermitian matrix file to its model operator.
    #[command(after_help = EXIT_CODES_HELP)]
    Retract {
        input: PathBuf,
        /// Trace JSON output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a randomized verification suite and print a JSON summary.
    #[command(after_help = EXIT_CODES_HELP)]
    Verify {
        /// riesz, signature-law, cayley, kramers, taxonomy, retraction or factorization
        suite: String,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn read(path: &Path) -> kreinlab::Result<String> {
    std::fs::read_to_string(path).map_err(|e| KreinError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, s: &str) -> kreinlab::Result<()> {
    std::fs::write(path, s).map_err(|e| KreinError::Io(format!("{}: {e}", path.display())))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable output")
}

/// Prints to stdout; a closed pipe is not an error.
fn print(s: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{s}").and_then(|_| out.flush());
}

fn emit(out: Option<&Path>, s: &str) -> kreinlab::Result<()> {
    match out {
        Some(p) => write(p, &format!("{s}\n")),
        None => {
            print(s);
            Ok(())
        }
    }
}

fn parse_real(s: &str) -> kreinlab::Result<RealKind> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || KreinError::InvalidInput(format!("--real expects `eta,tau`, got `{s}`"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let eta = parts[0].parse::<i64>().map_err(|_| bad())?;
    let tau = parts[1].parse::<i64>().map_err(|_| bad())?;
    RealKind::try_new(eta, tau)
}

/// Runs a command; `Ok(false)` signals a verification failure.
fn run(cmd: Cmd, tol: &ToleranceConfig) -> kreinlab::Result<bool> {
    match cmd {
        Cmd::Gen { class, n_plus, n_minus, seed, zero, real, out } => {
            let class: GenClass = class.parse()?;
            let real = real.as_deref().map(parse_real).transpose()?;
            let (file, report) = cli::cmd_gen(class, n_plus, n_minus, seed, zero, real)?;
            match out {
                Some(p) => {
                    write(&p, &format!("{}\n", file.to_json()))?;
                    print(&json(&report));
                }
                None => {
                    print(&file.to_json());
                    eprintln!("{}", json(&report));
                }
            }
        }
        Cmd::Invariants { input, kind } => {
            let file = MatrixFile::from_json(&read(&input)?)?;
            let rep = cli::cmd_invariants(&file, kind.map(Into::into), tol)?;
            print(&json(&rep));
        }
        Cmd::Track { source, grid, out, events, sigma, sigma_prime } => {
            let res = if cli::is_scenario(&source) {
                cli::cmd_track_scenario(&source, &ScenarioParams { sigma, sigma_prime }, grid, tol)?
            } else if Path::new(&source).is_file() {
                let pf = PathFile::from_json(&read(Path::new(&source))?)?;
                cli::cmd_track_file(&pf, &source, grid, tol)?
            } else {
                return Err(KreinError::UnknownScenario(source));
            };
            if let Some(p) = out {
                write(&p, &res.csv)?;
            }
            emit(events.as_deref(), &json(&res))?;
        }
        Cmd::Retract { input, out } => {
            let file = MatrixFile::from_json(&read(&input)?)?;
            let trace = cli::cmd_retract(&file, tol)?;
            emit(out.as_deref(), &json(&trace.to_json()))?;
        }
        Cmd::Verify { suite, n, seed } => {
            let summary = cli::run_suite(&suite, n, seed, tol)?;
            print(&json(&summary));
            return Ok(summary.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cmd = match &args.cmd {
        Cmd::Gen { .. } => Command::Gen,
        Cmd::Invariants { .. } => Command::Invariants,
        Cmd::Track { .. } => Command::Track,
        Cmd::Retract { .. } => Command::Retract,
        Cmd::Verify { .. } => Command::Verify,
    };
    let tol = ToleranceConfig::from_env();
    match run(args.cmd, &tol) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(cmd, &e) as u8)
        }
    }
}

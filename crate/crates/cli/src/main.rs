use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lsdlab::ensemble::{EntryDistribution, MatrixKind};
use lsdlab::experiment::{self, ExperimentConfig, SimMethod};
use lsdlab::moments::GammaMethod;
use lsdlab::report::{self, OutputFile};
use lsdlab::LabError;

const EXIT_MISMATCH: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_USAGE: u8 = 4;
const EXIT_OTHER: u8 = 1;

#[derive(Parser)]
#[command(name = "lsdlab", version, about = "Toeplitz/Hankel random matrix laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate matrices and compare their moments with the limiting values.
    Simulate(Overrides),
    /// Compute the limiting moment sequence.
    Moments(Overrides),
    /// Tabulate offset-vector cardinalities, optionally against brute force.
    Cardinality(Overrides),
    /// Check the trace formulas exactly on small matrices.
    Validate(Overrides),
    /// Track moments and diagonal-zeroing distances across matrix sizes.
    Convergence(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<MatrixKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Highest moment order.
    #[arg(long, visible_alias = "h")]
    hmax: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// normal | rademacher | uniform
    #[arg(long)]
    dist: Option<EntryDistribution>,
    /// Comma-separated c_{-m}..c_{m}.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    /// dense | fast
    #[arg(long)]
    method: Option<SimMethod>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gamma samples per pairing or grid side (moments, simulate, convergence);
    /// enumeration budget (cardinality, validate).
    #[arg(long)]
    budget: Option<u64>,
    /// monte-carlo | grid
    #[arg(long)]
    gamma_method: Option<String>,
    /// Skip the theoretical columns (required for non-unit weights).
    #[arg(long)]
    no_theory: bool,
    #[arg(long)]
    bins: Option<usize>,
    /// Comma-separated ascending sizes for `convergence`.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long)]
    pmax: Option<usize>,
    #[arg(long)]
    mmax: Option<usize>,
    #[arg(long)]
    bruteforce: bool,
    /// Comma-separated seeds or an inclusive range `a-b`.
    #[arg(long)]
    seeds: Option<String>,
    /// Inject an off-by-one into the indicator window (sensitivity check).
    #[arg(long)]
    mutate: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, LabError> {
    let bad = || LabError::InvalidArgument(format!("cannot parse seeds '{text}'"));
    if let Some((a, b)) = text.split_once('-') {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

impl Overrides {
    fn resolve(self) -> Result<ExperimentConfig, LabError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
                    path: path.clone(),
                    source,
                })?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(kind => kind, n => n, m => m, trials => trials, hmax => h_max, seed => seed,
             dist => dist, method => method, out => out, bins => bins, n_list => n_list,
             pmax => p_max, mmax => m_max);
        if let Some(w) = self.weights {
            cfg.weights = Some(w);
        }
        if let Some(b) = self.budget {
            cfg.budget = Some(b);
        }
        if let Some(g) = self.gamma_method {
            cfg.gamma_method = match g.as_str() {
                "monte-carlo" | "mc" => GammaMethod::MonteCarlo,
                "grid" | "riemann-grid" => GammaMethod::RiemannGrid,
                other => {
                    return Err(LabError::InvalidArgument(format!(
                        "unknown gamma method '{other}' (monte-carlo | grid)"
                    )))
                }
            };
        }
        if let Some(s) = self.seeds {
            cfg.seeds = parse_seeds(&s)?;
        }
        cfg.theory &= !self.no_theory;
        cfg.bruteforce |= self.bruteforce;
        cfg.mutate |= self.mutate;
        Ok(cfg)
    }
}

fn exit_code(err: &LabError) -> u8 {
    match err {
        LabError::ResourceLimit { .. } => EXIT_RESOURCE,
        LabError::InvalidArgument(_)
        | LabError::InvalidRange { .. }
        | LabError::Config(_)
        | LabError::UnsupportedTheory(_)
        | LabError::InvalidInput(_) => EXIT_USAGE,
        _ => EXIT_OTHER,
    }
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x:.6}")
    }
}

fn write(cfg: &ExperimentConfig, command: &str, files: &[OutputFile]) -> Result<(), LabError> {
    for path in report::write_outputs(&cfg.out, command, files)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Runs a command; `Ok(false)` means it completed but found a mismatch.
fn run(command: Command) -> Result<bool, LabError> {
    match command {
        Command::Simulate(o) => {
            let cfg = o.resolve()?;
            let out = experiment::simulate(&cfg)?;
            println!("h\tmean\tstd\tbeta\tz");
            for r in &out.rows {
                println!("{}\t{}\t{}\t{}\t{}", r.h, fmt(r.mean), fmt(r.std), fmt(r.beta), fmt(r.z));
            }
            write(&cfg, "simulate", &report::simulate_files(&cfg, &out))?;
            Ok(true)
        }
        Command::Convergence(o) => {
            let cfg = o.resolve()?;
            let out = experiment::convergence(&cfg)?;
            println!("n\th\tmean\tvariance\tbeta\tz");
            for r in &out.rows {
                println!("{}\t{}\t{}\t{}\t{}\t{}", r.n, r.h, fmt(r.mean), fmt(r.variance()), fmt(r.beta), fmt(r.z));
            }
            write(&cfg, "convergence", &report::convergence_files(&cfg, &out))?;
            Ok(out.w2.iter().flatten().all(|w| w.holds))
        }
        Command::Moments(o) => {
            let cfg = o.resolve()?;
            let rep = experiment::moments(&cfg)?;
            println!("h\tbeta\tse");
            for r in &rep.moments {
                println!("{}\t{}\t{}", r.h, fmt(r.beta), fmt(r.std_error));
            }
            write(&cfg, "moments", &report::moments_files(&cfg, &rep))?;
            Ok(true)
        }
        Command::Cardinality(o) => {
            let cfg = o.resolve()?;
            let rows = experiment::cardinality(&cfg)?;
            let ok = rows.iter().all(|r| r.matches());
            println!("{} rows, all consistent: {ok}", rows.len());
            write(&cfg, "cardinality", &report::cardinality_files(&cfg, &rows))?;
            Ok(ok)
        }
        Command::Validate(o) => {
            let cfg = o.resolve()?;
            let rep = experiment::validate(&cfg)?;
            println!("passed {} failed {}", rep.passed, rep.failed);
            write(&cfg, "validate", &report::validate_files(&cfg, &rep))?;
            Ok(rep.all_passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("mismatch detected");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

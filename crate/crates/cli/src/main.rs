use std::path::PathBuf;
use std::process::ExitCode;

use aiep_cli::reports::{self, DEFAULT_EPSILONS};
use aiep_cli::{load_spec, run_experiment, CliError, CliResult};
use aiep_core::femodel::{WingConfig, B737_MASS_RATIO};
use aiep_core::perturbation::StudyConfig;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aiep", version, about = "Inverse eigenvalue experiments with embedded particle swarms")]
struct Cli {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Single master seed, replacing the seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by --spec.
    Run,
    /// Johnson-Lindenstrauss target dimensions for n points.
    JlTable {
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPSILONS.to_vec())]
        epsilons: Vec<f64>,
    },
    /// First-order eigenvalue estimate error against exact re-solves.
    PerturbStudy {
        #[arg(long, value_delimiter = ',')]
        p_values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        /// mass | delta-mass
        #[arg(long, default_value = "mass")]
        denominator: String,
    },
    /// Frequencies and mode shapes of the beam wing model.
    ModalReport {
        #[arg(long, default_value_t = 30)]
        elements: usize,
        #[arg(long, default_value_t = B737_MASS_RATIO)]
        mass_ratio: f64,
        #[arg(long, default_value_t = 4)]
        modes: usize,
    },
    /// Solve the pencil in a matrix-pair file (M then K).
    Eig {
        pair_file: PathBuf,
        #[arg(long)]
        count: Option<usize>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Run => {
            let path = cli.spec.ok_or_else(|| CliError::Validation("run needs --spec <file>".into()))?;
            let mut spec = load_spec(&path)?;
            if let Some(seed) = cli.seed {
                spec.seeds = vec![seed];
            }
            if let Some(out) = cli.out {
                spec.output_dir = out;
            }
            let summary = run_experiment(&spec)?;
            for r in &summary.runs {
                println!("seed {:>6}  final {:.6e}", r.seed, r.final_value);
            }
            println!(
                "dimension {} of {}  median final {:.6e}  -> {}",
                summary.search_dimension,
                summary.parameter_count,
                summary.median_final,
                spec.output_dir.display()
            );
        }
        Command::JlTable { n, epsilons } => {
            let rows = reports::jl_table(n, &epsilons)?;
            print!("{}", reports::format_jl_table(&rows));
            if let Some(out) = cli.out {
                reports::write_jl_table(&rows, &out.join(format!("jl_table_n{n}.csv")))?;
            }
        }
        Command::PerturbStudy { p_values, dims, trials, denominator } => {
            let mut config = StudyConfig { denominator: reports::parse_denominator(&denominator)?, ..Default::default() };
            if let Some(p) = p_values {
                config.p_values = p;
            }
            if let Some(d) = dims {
                config.dims = d;
            }
            if let Some(t) = trials {
                config.trials = t;
            }
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            let rows = reports::perturb_study(&config)?;
            println!("{:>10}  {:>4}  {:>14}  {:>6}", "p", "d", "mean |err| %", "trials");
            for r in &rows {
                println!("{:>10}  {:>4}  {:>14.6}  {:>6}", r.step_scale, r.dimension, r.mean_abs_pct_error, r.trials);
            }
            let out = cli.out.unwrap_or_else(|| PathBuf::from("."));
            reports::write_study(&config, &rows, &out.join("perturb_study.csv"))?;
        }
        Command::ModalReport { elements, mass_ratio, modes } => {
            let config = WingConfig::unit(elements, mass_ratio);
            let report = reports::modal_report(&config, modes)?;
            print!("{}", reports::format_modal_report(&report));
            if let Some(out) = cli.out {
                reports::write_modal_report(&report, &out)?;
            }
        }
        Command::Eig { pair_file, count } => {
            let spectrum = reports::eig_file(&pair_file, count)?;
            for (i, l) in spectrum.eigenvalues.iter().enumerate() {
                println!("{:>4}  {:.12e}", i + 1, l);
            }
            if let Some(out) = cli.out {
                reports::write_spectrum(&spectrum, &pair_file, &out.join("eigenvalues.csv"))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

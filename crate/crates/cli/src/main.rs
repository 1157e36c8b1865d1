use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use phaseless::config::RunConfig;
use phaseless::experiment::{
    check_source, reconstruct_dir, retrieve_dir, write_reconstruction_table, write_retrieval_table,
    write_simulation, Experiment, Selection, SourceSpec, RECONSTRUCTION_NOISE, TABLE_NOISE,
};
use phaseless::CliError;

#[derive(Debug, Parser)]
#[command(name = "phaseless", version, about = "Phase retrieval with reference point sources and Fourier source reconstruction")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "PHASELESS_OUT", default_value = "out")]
    out: PathBuf,
    /// Noise level, as a fraction or with a percent sign (`0.01`, `1%`).
    #[arg(long, global = true, value_parser = parse_noise)]
    noise: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_boundary: Option<usize>,
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// `mountain` or a real grid dump.
    #[arg(long, global = true, default_value = "mountain")]
    source: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact fields and noisy phaseless data at every admissible wavenumber.
    Simulate,
    /// Recover the complex fields from a `simulate` directory.
    Retrieve {
        #[arg(long)]
        input: PathBuf,
    },
    /// Fourier reconstruction from a `retrieve` directory.
    Reconstruct {
        #[arg(long)]
        input: PathBuf,
        /// Fourier truncation; defaults to the rule for the noise level.
        #[arg(long)]
        truncation: Option<usize>,
        /// Report the error against `--source`.
        #[arg(long)]
        compare: bool,
    },
    /// All stages in one run.
    Pipeline,
    /// Seed-averaged error tables.
    Tables {
        #[arg(long, value_enum, default_value_t = Table::All)]
        table: Table,
        /// Number of seeds, `0..seeds`.
        #[arg(long)]
        seeds: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Table {
    Retrieval,
    Reconstruction,
    All,
}

fn parse_noise(s: &str) -> Result<f64, String> {
    let (number, scale) = match s.strip_suffix('%') {
        Some(p) => (p, 0.01),
        None => (s, 1.0),
    };
    let v: f64 = number.trim().parse().map_err(|_| format!("not a noise level: {s:?}"))?;
    let v = v * scale;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("noise level {v} outside [0, 1)"))
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut run = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.noise {
        run.noise_level = v;
    }
    if let Some(v) = cli.seed {
        run.seed = v;
    }
    if let Some(v) = cli.n_boundary {
        run.n_boundary = v;
    }
    if let Some(v) = cli.rho {
        run.rho = v;
    }
    run.validate()?;
    Ok(run)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let run = load(&cli)?;
    let out = cli.out.clone();
    match cli.command {
        Command::Simulate => {
            let source = SourceSpec::parse(&cli.source)?;
            check_source(&source, &run)?;
            let exp = Experiment::new(run.clone(), source, Selection::All)?;
            write_simulation(&exp, run.noise_level, run.seed, &out)?;
            eprintln!("simulated {} wavenumbers in {:.1?}", exp.sims.len(), exp.simulation_time);
        }
        Command::Retrieve { input } => {
            let fields = retrieve_dir(&run, &input, &out)?;
            eprintln!("retrieved {} fields", fields.len());
        }
        Command::Reconstruct {
            input,
            truncation,
            compare,
        } => {
            let n = match truncation {
                Some(n) => n,
                None => run.truncation_for(run.noise_level)?,
            };
            let reference = if compare {
                Some(SourceSpec::parse(&cli.source)?)
            } else {
                None
            };
            let (_, error) = reconstruct_dir(&run, &input, &out, n, reference.as_ref())?;
            if let Some(e) = error {
                println!("relative L2 error {:.4}%", 100.0 * e);
            }
        }
        Command::Pipeline => {
            let source = SourceSpec::parse(&cli.source)?;
            check_source(&source, &run)?;
            let n = run.truncation_for(run.noise_level)?;
            let exp = Experiment::new(run.clone(), source, Selection::UpTo(n))?;
            let report = exp.trial(run.noise_level, run.seed)?;
            report.write(&out)?;
            for (stage, t) in &report.timings {
                eprintln!("{stage}: {t:.1?}");
            }
            println!(
                "N = {}, relative L2 reconstruction error {:.4}%",
                report.n_trunc,
                100.0 * report.reconstruction_l2
            );
            if let Some(e) = report.breach() {
                return Err(e);
            }
        }
        Command::Tables { table, seeds } => {
            let seeds = seeds.unwrap_or(run.seeds);
            let source = SourceSpec::parse(&cli.source)?;
            check_source(&source, &run)?;
            let selection = if table == Table::Retrieval {
                Selection::Tables
            } else {
                Selection::All
            };
            let exp = Experiment::new(run.clone(), source, selection)?;
            if table != Table::Reconstruction {
                let rows = exp.retrieval_table(&TABLE_NOISE, seeds)?;
                write_retrieval_table(&rows, &out)?;
                for r in &rows {
                    println!(
                        "eps {:>6.3}%  k {:>9.4}  l2 {:>8.4}%  linf {:>8.4}%",
                        100.0 * r.epsilon,
                        r.k,
                        100.0 * r.l2.mean,
                        100.0 * r.linf.mean
                    );
                }
            }
            if table != Table::Retrieval {
                let rows = exp.reconstruction_table(&RECONSTRUCTION_NOISE, seeds)?;
                write_reconstruction_table(&rows, &out)?;
                for (eps, n, s) in &rows {
                    println!("eps {:>6.3}%  N {n:>2}  reconstruction l2 {:.4}%", 100.0 * eps, 100.0 * s.mean);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

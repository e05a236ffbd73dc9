use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use comb_polar::sim::fer::run_sweep;
use comb_polar::sim::psd::psd_report;
use comb_polar::sim::report::FerWriter;
use comb_polar::sim::selftest::{run_selftest, SelfTestOptions};
use comb_polar::sim::tables::{construct, mcsc_table};
use comb_polar::sim::{init_threads, ExperimentConfig};
use comb_polar::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_SELFTEST: u8 = 2;
const EXIT_IO: u8 = 3;

/// Comb-shaping polar codes: construction, link simulation and checks.
#[derive(Parser, Debug)]
#[command(name = "combpolar", version)]
struct Cli {
    /// Experiment config (TOML); defaults describe the reference link.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed of the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select the information set and write per-index capacities.
    Construct,
    /// FER sweep over the configured SNR points and arms.
    Fer,
    /// Averaged PSD and null-depth report.
    Psd,
    /// MCSC of both selection criteria for every configured rate.
    Mcsc,
    /// Small-instance oracle suite.
    Selftest,
}

enum Failure {
    Usage(String),
    Io(String),
    SelfTest,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::SelfTest) => ExitCode::from(EXIT_SELFTEST),
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_toml(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        init_threads(t)?;
    }
    if let Command::Selftest = cli.command {
        let seed = cli.seed.unwrap_or(0);
        let report = run_selftest(&SelfTestOptions { g_override: None, seed })?;
        print!("{report}");
        return if report.passed() { Ok(()) } else { Err(Failure::SelfTest) };
    }

    let cfg = load_config(cli)?;
    fs::create_dir_all(&cli.out).map_err(|e| Failure::Io(format!("{}: {e}", cli.out.display())))?;
    match cli.command {
        Command::Construct => {
            let report = construct(&cfg)?;
            report.write_csv(create(&cli.out, "construct.csv")?)?;
            print!("{}", report.summary());
        }
        Command::Fer => {
            let path = cli.out.join("fer.csv");
            let mut writer = FerWriter::create(&path)?;
            run_sweep(&cfg, |rows| {
                for r in rows {
                    println!(
                        "{:<9} SNR {:>6.2} dB  frames {:>7}  errors {:>5}  FER {:.3e}  [{:.2e}, {:.2e}]  stop {}",
                        r.arm,
                        r.snr_db,
                        r.frames,
                        r.frame_errors,
                        r.fer,
                        r.wilson_ci_95.0,
                        r.wilson_ci_95.1,
                        r.stop.name()
                    );
                }
                writer.append(rows)
            })?;
        }
        Command::Psd => {
            let report = psd_report(&cfg)?;
            report.write_psd_csv(create(&cli.out, "psd.csv")?)?;
            report.write_depth_csv(create(&cli.out, "null_depth.csv")?)?;
            let min_shaped = report.depths.iter().map(|d| d.shaped_db).fold(f64::INFINITY, f64::min);
            let max_control = report
                .depths
                .iter()
                .filter(|d| d.flat)
                .map(|d| d.control_db)
                .fold(f64::NEG_INFINITY, f64::max);
            println!(
                "{} target frequencies, {} Welch segments per arm",
                report.depths.len(),
                report.shaped.segments
            );
            println!(
                "shaped: minimum depth {min_shaped:.1} dB (threshold {} dB) {}",
                report.threshold_db,
                if report.shaped_pass() { "pass" } else { "fail" }
            );
            println!(
                "conventional: maximum depth in the flat band {max_control:.1} dB (limit {} dB) {}",
                report.control_db,
                if report.control_pass() { "not nulled" } else { "nulled" }
            );
            println!("rectangular pulse: worst relative magnitude at null bins {:.2e}", report.exact_residual);
        }
        Command::Mcsc => {
            let table = mcsc_table(&cfg)?;
            table.write_csv(create(&cli.out, "mcsc.csv")?)?;
            println!(
                "SNR {} dB, method {}, per-dimension noise variance {:.5}",
                table.profile.snr_db,
                table.profile.method.name(),
                table.profile.noise_variance
            );
            for r in &table.rows {
                println!("{:>2}/{:<3} K={:<4} {:<16} {:.4}", r.rate.0, r.rate.1, r.k, r.criterion_name(), r.mcsc);
            }
        }
        Command::Selftest => unreachable!("handled above"),
    }
    Ok(())
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use cxr_phase::elea::RhoMode;
use cxr_phase::{
    enhance_file, parse_config, read_manifest, run_batch, BankCache, BatchOptions, BitDepth,
    ConfigOverrides, EmitFlags, EnhanceConfig, RunStatus,
};

const EXIT_PARTIAL: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Local-phase enhancement of grayscale radiographs.
///
/// Log verbosity is controlled by the CXR_PHASE_LOG environment variable
/// (e.g. CXR_PHASE_LOG=debug).
#[derive(Parser, Debug)]
#[command(name = "cxr-phase", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enhance one image and print its run record as JSON.
    Enhance {
        input: PathBuf,
        /// Output directory; features go to <out>/<feature>/<stem>.png.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Enhance every entry of a `path,label,subject` manifest.
    Batch {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Args, Debug)]
struct ParamArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Square working resolution (0 keeps native size).
    #[arg(long)]
    working_size: Option<usize>,
    /// LwPA guard relative to the peak odd energy.
    #[arg(long)]
    guard: Option<f64>,
    /// Output PNG bit depth (8 or 16).
    #[arg(long, value_parser = parse_bit_depth)]
    bit_depth: Option<BitDepth>,
    /// Comma-separated features to write: lwpa,lpe,elea,mf.
    #[arg(long)]
    emit: Option<EmitFlags>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long)]
    scale_multiplier: Option<f64>,
    /// Number of bandpass scales.
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Echogenicity constant: "mean" or a number.
    #[arg(long)]
    rho: Option<RhoMode>,
    /// Write the solver's per-iteration objective to <out>/trace/<stem>.json.
    #[arg(long)]
    trace: bool,
}

fn parse_bit_depth(s: &str) -> Result<BitDepth, String> {
    s.parse::<u8>()
        .map_err(|e| e.to_string())
        .and_then(BitDepth::try_from)
}

impl ParamArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            working_size: self.working_size,
            guard: self.guard,
            output_bit_depth: self.bit_depth,
            emit: self.emit,
            alpha: self.alpha,
            s0: self.s0,
            scale_multiplier: self.scale_multiplier,
            num_scales: self.scales,
            lambda: self.lambda,
            epsilon: self.epsilon,
            delta: self.delta,
            rho: self.rho,
        }
    }

    fn load(&self) -> Result<EnhanceConfig, ExitCode> {
        parse_config(self.config.as_deref(), &self.overrides()).map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CXR_PHASE_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) | Err(code) => code,
    }
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Enhance { input, out, params } => {
            let config = params.load()?;
            let record = enhance_file(&input, &config, &BankCache::new(), &out, params.trace);
            println!(
                "{}",
                serde_json::to_string(&record).expect("record serializes")
            );
            if record.status == RunStatus::Failed {
                error!(
                    "{}: {}",
                    input.display(),
                    record.error.as_deref().unwrap_or("failed")
                );
                return Err(ExitCode::from(EXIT_PARTIAL));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Batch {
            manifest,
            out,
            parallelism,
            params,
        } => {
            let config = params.load()?;
            let entries = read_manifest(&manifest).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            })?;
            let options = BatchOptions {
                parallelism,
                base_dir: manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
                record_trace: params.trace,
            };
            let report = run_batch(&entries, &config, &out, &options).map_err(|e| {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            })?;
            eprintln!(
                "{} of {} images enhanced; records in {}",
                report.records.len() - report.failures(),
                report.records.len(),
                report.runs_path.display()
            );
            Ok(ExitCode::from(report.exit_code() as u8))
        }
        Command::Config { params } => {
            let config = params.load()?;
            print!("{}", config.to_toml());
            Ok(ExitCode::SUCCESS)
        }
    }
}

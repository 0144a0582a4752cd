use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sumcomp::harness::config::parse_config_text;
use sumcomp::harness::{check_table, run_experiment, ConfigError, Experiment, ExperimentConfig};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CHECK: u8 = 3;

/// Digital over-the-air computation experiments.
#[derive(Parser)]
#[command(name = "sumcomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical vs analytic MSE of the decoded sum over an SNR grid.
    MseSweep(Flags),
    /// Empirical MAE of a nomographic function vs the modulus bound.
    MaeSweep(Flags),
    /// NMSE of SumComp against AirComp and OFDMA baselines.
    NmseCompare(Flags),
    /// Collision classes of two-node Gray PAM-4 and SumComp PAM-4.
    OverlapDemo(Flags),
    /// Closed-form error and complexity expressions over a grid.
    AnalyticTable(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// key = value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// qam, pam, hex-a or hex-b.
    #[arg(long)]
    preset: Option<String>,
    /// arithmetic_mean, arithmetic_sum, geometric_mean, max_approx, euclidean_norm.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    snr_start: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    snr_stop: Option<String>,
    #[arg(long)]
    snr_step: Option<String>,
    /// Comma-separated SNR points in dB; `inf` is noiseless. Replaces the range.
    #[arg(long, allow_hyphen_values = true)]
    snr_list: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<String>,
    /// Exit with status 3 if the table misses its thresholds.
    #[arg(long)]
    check: bool,
    /// Shift the constellation to zero mean (true/false).
    #[arg(long)]
    centered: Option<String>,
    /// unbounded or aggregate grid extents for the analytic columns.
    #[arg(long)]
    extents: Option<String>,
    /// none or rayleigh.
    #[arg(long)]
    fading: Option<String>,
    /// Input distribution: zq or range:LO:HI.
    #[arg(long)]
    input: Option<String>,
    /// Comma-separated K values for analytic-table.
    #[arg(long)]
    k_list: Option<String>,
    #[arg(long)]
    bops_a: Option<String>,
    #[arg(long)]
    bops_b: Option<String>,
    #[arg(long)]
    bops_e: Option<String>,
    #[arg(long)]
    bops_d: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let fields = [
            ("preset", &self.preset),
            ("function", &self.function),
            ("k", &self.k),
            ("q", &self.q),
            ("snr_start", &self.snr_start),
            ("snr_stop", &self.snr_stop),
            ("snr_step", &self.snr_step),
            ("snr_list", &self.snr_list),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("out", &self.out),
            ("workers", &self.workers),
            ("centered", &self.centered),
            ("extents", &self.extents),
            ("fading", &self.fading),
            ("input", &self.input),
            ("k_list", &self.k_list),
            ("bops_a", &self.bops_a),
            ("bops_b", &self.bops_b),
            ("bops_e", &self.bops_e),
            ("bops_d", &self.bops_d),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

fn build_config(experiment: Experiment, flags: &Flags) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::defaults(experiment);
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        for (key, value) in parse_config_text(&text)? {
            if key == "experiment" {
                let named: Experiment = value.parse()?;
                if named != experiment {
                    return Err(ConfigError::Invalid(format!(
                        "config file is for {named}, not {experiment}"
                    )));
                }
                continue;
            }
            cfg.set(&key, &value)?;
        }
    }
    cfg.apply(flags.pairs())?;
    if flags.check {
        cfg.check = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = match &cli.command {
        Command::MseSweep(f) => (Experiment::MseSweep, f),
        Command::MaeSweep(f) => (Experiment::MaeSweep, f),
        Command::NmseCompare(f) => (Experiment::NmseCompare, f),
        Command::OverlapDemo(f) => (Experiment::OverlapDemo, f),
        Command::AnalyticTable(f) => (Experiment::AnalyticTable, f),
    };
    let cfg = match build_config(experiment, flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("sumcomp: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let table = match run_experiment(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("sumcomp: {e}");
            return ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_RUNTIME });
        }
    };
    let written = match &cfg.output_path {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            table.write_to(&mut w)?;
            w.flush()
        }),
        None => table.write_to(io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("sumcomp: writing output: {e}");
        return ExitCode::from(EXIT_RUNTIME);
    }
    if cfg.check {
        let outcomes = check_table(&cfg, &table);
        for c in &outcomes {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            eprintln!("check {verdict} {}: {}", c.name, c.detail);
        }
        if outcomes.iter().any(|c| !c.passed) {
            return ExitCode::from(EXIT_CHECK);
        }
    }
    ExitCode::SUCCESS
}

//! The `wiretap` command line: `design`, `eval` and `sweep`.
//!
//! This is the only place where dB values and bit rates appear. Powers are
//! converted with `10^(dB/10)` and rates with `bits · ln 2` while parsing;
//! everything printed is in bits.
//!
//! Exit status: 0 on success, 1 on usage or runtime errors, 2 when the result
//! is outage only (a design or trial in outage, or a sweep in which every
//! cell is in full outage).

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand as ClapSubcommand, ValueEnum};
use serde::Deserialize;

use crate::channel::{jammer_covariance, realize_system, MatrixRole, SystemConfig, TrialStream};
use crate::error::Error;
use crate::experiments::{run_sweep, run_trial, JamLevel, Strategy, SweepSpec};
use crate::par::{self, Execution};
use crate::rates::RateNats;
use crate::strategies::{design_statistical_ecsi, design_unknown_ecsi, EcsiDistribution, InitialDimension};
use crate::whitening::whiten_with_jammer;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_OUTAGE: i32 = 2;

const DEFAULT_NA: usize = 6;
const DEFAULT_NB: usize = 4;
const DEFAULT_NE: usize = 4;
const DEFAULT_NJ: usize = 4;
const DEFAULT_P_DB: f64 = 10.0;
const DEFAULT_PJ_DB: f64 = 0.0;
const DEFAULT_PJ_GRID: &str = "0:2:20";
const DEFAULT_RATE_BITS: f64 = 4.0;
const DEFAULT_N_SIM: usize = 100;
const DEFAULT_TRIALS: usize = 2000;
const DEFAULT_SEED: u64 = 0;
const DEFAULT_OUT: &str = "sweep.csv";

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Parser, Debug)]
#[command(
    name = "wiretap",
    version,
    about = "Secure transmit design and secrecy-rate simulation for a MIMO wiretap channel with a jammer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand, Debug)]
enum Command {
    /// Design a transmit strategy for one seeded channel draw and print it.
    Design(Flags),
    /// Run one seeded trial and print the realized rates.
    Eval(Flags),
    /// Sweep jamming power, write average secrecy rates to CSV.
    Sweep(Flags),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StrategyKind {
    /// Target-rate design, eavesdropper channel unknown.
    Unknown,
    /// Simulated-channel design, eavesdropper channel law known.
    Statistical,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// TOML file with [system] and [run] sections; flags override it.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Transmitter (Alice) antennas [default: 6]
    #[arg(long)]
    na: Option<usize>,
    /// Legitimate receiver (Bob) antennas [default: 4]
    #[arg(long)]
    nb: Option<usize>,
    /// Eavesdropper (Eve) antennas [default: 4]
    #[arg(long)]
    ne: Option<usize>,
    /// Jammer antennas [default: 4]
    #[arg(long)]
    nj: Option<usize>,
    /// Total transmit power in dB, unit noise [default: 10]
    #[arg(long = "p-db", allow_negative_numbers = true)]
    p_db: Option<f64>,
    /// Jamming power in dB for design/eval [default: 0]
    #[arg(long = "pj-db", allow_negative_numbers = true)]
    pj_db: Option<f64>,
    /// Jamming grid for sweep, START:STEP:STOP or a comma list [default: 0:2:20]
    #[arg(long = "pj-grid", allow_hyphen_values = true)]
    pj_grid: Option<String>,
    /// Strategies, comma separated [default: unknown]
    #[arg(long, value_enum, value_delimiter = ',')]
    strategy: Option<Vec<StrategyKind>>,
    /// Target rates in bits per channel use, comma separated [default: 4]
    #[arg(long = "rate-bits", value_delimiter = ',')]
    rate_bits: Option<Vec<f64>>,
    /// Simulated eavesdropper channels for the statistical strategy [default: 100]
    #[arg(long = "n-sim")]
    n_sim: Option<usize>,
    /// Monte Carlo trials per sweep point [default: 2000]
    #[arg(long)]
    trials: Option<usize>,
    /// RNG seed [default: 0]
    #[arg(long, env = "WIRETAP_SEED")]
    seed: Option<u64>,
    /// Trial index drawn by design/eval [default: 0]
    #[arg(long)]
    trial: Option<u64>,
    /// Sweep CSV output path [default: sweep.csv]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep [default: all cores]
    #[arg(long)]
    threads: Option<usize>,
    /// Eve's antenna count is unknown too: start the unknown-ECSI dimension search at one stream
    #[arg(long = "unknown-ne")]
    unknown_ne: bool,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    na: Option<usize>,
    nb: Option<usize>,
    ne: Option<usize>,
    nj: Option<usize>,
    p_db: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunSection {
    pj_db: Option<f64>,
    pj_grid: Option<String>,
    strategy: Option<Vec<StrategyKind>>,
    rate_bits: Option<Vec<f64>>,
    n_sim: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    trial: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    unknown_ne: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Design,
    Eval,
    Sweep,
}

/// A parsed, merged and validated command line.
#[derive(Debug, Clone)]
pub struct CliInvocation {
    pub subcommand: Subcommand,
    /// Linear powers, target rate in nats, `p_jam` from `--pj-db`.
    pub config: SystemConfig,
    pub pj_db: f64,
    pub pj_grid: Vec<JamLevel>,
    pub strategies: Vec<Strategy>,
    pub trial_index: u64,
    pub output: PathBuf,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    /// Help, version, or a clap-detected usage error.
    Clap(clap::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => EXIT_OK,
            _ => EXIT_ERROR,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "error: {msg}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `START:STEP:STOP` (inclusive) or a comma-separated list of dB values.
pub fn parse_pj_grid(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("--pj-grid: '{s}' is not a number"))
    };
    let grid: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("--pj-grid: expected START:STEP:STOP, got '{text}'"));
        }
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(format!("--pj-grid: '{text}' needs STEP > 0 and STOP >= START"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + step * i as f64).collect()
    } else {
        text.split(',').map(num).collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err("--pj-grid: empty grid".into());
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(format!("--pj-grid: '{text}' is not strictly increasing"));
    }
    Ok(grid)
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("--config: cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("--config: {}: {e}", path.display())))
}

/// Parses `argv` (including the program name), merges the optional config
/// file under the flags and validates the result.
pub fn parse_and_validate<I, T>(argv: I) -> Result<CliInvocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let (subcommand, flags) = match cli.command {
        Command::Design(f) => (Subcommand::Design, f),
        Command::Eval(f) => (Subcommand::Eval, f),
        Command::Sweep(f) => (Subcommand::Sweep, f),
    };
    let file = match &flags.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let (sys, run) = (file.system, file.run);

    let n_a = flags.na.or(sys.na).unwrap_or(DEFAULT_NA);
    let n_b = flags.nb.or(sys.nb).unwrap_or(DEFAULT_NB);
    let n_e = flags.ne.or(sys.ne).unwrap_or(DEFAULT_NE);
    let n_j = flags.nj.or(sys.nj).unwrap_or(DEFAULT_NJ);
    for (flag, v) in [("--na", n_a), ("--nb", n_b), ("--ne", n_e), ("--nj", n_j)] {
        if v == 0 {
            return Err(usage(format!("{flag}: antenna count must be at least 1")));
        }
    }
    if n_a <= n_e {
        return Err(usage(format!(
            "--ne: transmitter antennas (--na {n_a}) must exceed eavesdropper antennas (--ne {n_e})"
        )));
    }
    let p_db = flags.p_db.or(sys.p_db).unwrap_or(DEFAULT_P_DB);
    if !p_db.is_finite() {
        return Err(usage("--p-db: must be finite"));
    }
    let pj_db = flags.pj_db.or(run.pj_db).unwrap_or(DEFAULT_PJ_DB);
    if !pj_db.is_finite() {
        return Err(usage("--pj-db: must be finite"));
    }
    let grid_text = flags.pj_grid.or(run.pj_grid).unwrap_or_else(|| DEFAULT_PJ_GRID.to_string());
    let pj_grid = parse_pj_grid(&grid_text)
        .map_err(usage)?
        .into_iter()
        .map(|db| JamLevel {
            db,
            linear: db_to_linear(db),
        })
        .collect();

    let rates = flags.rate_bits.or(run.rate_bits).unwrap_or_else(|| vec![DEFAULT_RATE_BITS]);
    if rates.is_empty() {
        return Err(usage("--rate-bits: no rate given"));
    }
    if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(usage(format!("--rate-bits: {r} is not a finite non-negative rate")));
    }
    let n_sim = flags.n_sim.or(run.n_sim).unwrap_or(DEFAULT_N_SIM);
    if n_sim == 0 {
        return Err(usage("--n-sim: must be at least 1"));
    }
    let trials = flags.trials.or(run.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(usage("--trials: must be at least 1"));
    }
    let threads = flags.threads.or(run.threads);
    if threads == Some(0) {
        return Err(usage("--threads: must be at least 1"));
    }
    let initial = if flags.unknown_ne || run.unknown_ne.unwrap_or(false) {
        InitialDimension::Single
    } else {
        InitialDimension::EveAntennas
    };

    let kinds = flags.strategy.or(run.strategy).unwrap_or_else(|| vec![StrategyKind::Unknown]);
    if kinds.is_empty() {
        return Err(usage("--strategy: no strategy given"));
    }
    let mut strategies = Vec::new();
    for kind in &kinds {
        match kind {
            StrategyKind::Unknown => strategies.extend(rates.iter().map(|&target_rate_bits| Strategy::UnknownEcsi {
                target_rate_bits,
                initial,
            })),
            StrategyKind::Statistical => strategies.push(Strategy::statistical(n_sim)),
        }
    }
    strategies.dedup();
    if subcommand != Subcommand::Sweep && strategies.len() != 1 {
        return Err(usage(
            "--strategy/--rate-bits: design and eval take exactly one strategy and one target rate",
        ));
    }

    let config = SystemConfig {
        n_a,
        n_b,
        n_e,
        n_j,
        p_total: db_to_linear(p_db),
        p_jam: db_to_linear(pj_db),
        target_rate: RateNats::from_bits(rates[0]).map_err(|e| usage(format!("--rate-bits: {e}")))?.value(),
        n_sim,
        n_trials: trials,
        seed: flags.seed.or(run.seed).unwrap_or(DEFAULT_SEED),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;

    Ok(CliInvocation {
        subcommand,
        config,
        pj_db,
        pj_grid,
        strategies,
        trial_index: flags.trial.or(run.trial).unwrap_or(0),
        output: flags.out.or(run.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        threads,
    })
}

fn fmt_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    format!("[{}]", items.join(", "))
}

fn design(inv: &CliInvocation, out: &mut dyn Write) -> Result<i32, Error> {
    let cfg = &inv.config;
    let stream = TrialStream::new(cfg.seed, inv.trial_index);
    let ch = realize_system(cfg, &stream)?;
    let wch = whiten_with_jammer(&ch.h_ba, &ch.h_bj, &jammer_covariance(cfg.p_jam, cfg.n_j)?)?;
    let strategy = inv.strategies[0];
    let d = match strategy {
        Strategy::UnknownEcsi {
            target_rate_bits,
            initial,
        } => design_unknown_ecsi(&wch, cfg.n_e, cfg.p_total, RateNats::from_bits(target_rate_bits)?, initial)?,
        Strategy::StatisticalEcsi { n_sim } => design_statistical_ecsi(
            &wch,
            &EcsiDistribution::new(cfg.n_e)?,
            cfg.p_total,
            n_sim,
            &mut stream.rng(MatrixRole::SimulatedEve),
        )?,
    };
    writeln!(out, "strategy = {}", strategy.label())?;
    if let Strategy::UnknownEcsi { target_rate_bits, .. } = strategy {
        writeln!(out, "target_rate_bits = {target_rate_bits}")?;
    }
    writeln!(out, "seed = {}", cfg.seed)?;
    writeln!(out, "trial = {}", inv.trial_index)?;
    writeln!(out, "c_rank = {}", wch.c_rank)?;
    writeln!(out, "d1 = {}", d.d1)?;
    writeln!(out, "d2 = {}", d.d2)?;
    writeln!(out, "rho = {:.6}", d.rho)?;
    writeln!(out, "powers = {}", fmt_list(&d.powers.powers))?;
    writeln!(out, "an_power_per_symbol = {:.6}", d.an_power)?;
    writeln!(out, "bob_rate_bits = {:.6}", d.bob_rate.bits())?;
    writeln!(out, "outage = {}", d.outage)?;
    Ok(if d.outage { EXIT_OUTAGE } else { EXIT_OK })
}

fn eval(inv: &CliInvocation, out: &mut dyn Write) -> Result<i32, Error> {
    let strategy = inv.strategies[0];
    let o = run_trial(&inv.config, &strategy, inv.trial_index)?;
    writeln!(out, "strategy = {}", strategy.label())?;
    if let Strategy::UnknownEcsi { target_rate_bits, .. } = strategy {
        writeln!(out, "target_rate_bits = {target_rate_bits}")?;
    }
    writeln!(out, "seed = {}", inv.config.seed)?;
    writeln!(out, "trial = {}", inv.trial_index)?;
    writeln!(out, "d1 = {}", o.d1)?;
    writeln!(out, "rho = {:.6}", o.rho)?;
    writeln!(out, "bob_rate_bits = {:.6}", o.bob.bits())?;
    writeln!(out, "eve_rate_bits = {:.6}", o.eve.bits())?;
    writeln!(out, "secrecy_rate_bits = {:.6}", o.secrecy.bits())?;
    writeln!(out, "outage = {}", o.outage)?;
    Ok(if o.outage { EXIT_OUTAGE } else { EXIT_OK })
}

fn sweep(inv: &CliInvocation, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    // Fail before simulating if the destination directory is not writable.
    let dir = match inv.output.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    drop(tempfile::NamedTempFile::new_in(dir)?);

    let spec = SweepSpec {
        config: inv.config.clone(),
        pj_grid: inv.pj_grid.clone(),
        strategies: inv.strategies.clone(),
        output_path: Some(inv.output.clone()),
    };
    let records = par::with_threads(inv.threads, || run_sweep(&spec, Execution::default()))?;
    let failed: usize = records.iter().map(|r| r.failed).sum();
    if failed > 0 {
        writeln!(err, "warning: {failed} trials failed numerically and were excluded")?;
    }
    writeln!(out, "{}", inv.output.display())?;
    Ok(if records.iter().all(|r| r.outage_fraction == 1.0) {
        EXIT_OUTAGE
    } else {
        EXIT_OK
    })
}

/// Runs a validated invocation, returning the process exit status.
pub fn execute(inv: &CliInvocation, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match inv.subcommand {
        Subcommand::Design => design(inv, out),
        Subcommand::Eval => eval(inv, out),
        Subcommand::Sweep => sweep(inv, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Parse, validate and execute; the whole binary.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_and_validate(argv) {
        Ok(inv) => execute(&inv, out, err),
        Err(e) => {
            let code = e.exit_code();
            let text = match &e {
                CliError::Clap(c) => c.render().to_string(),
                CliError::Usage(_) => format!("{e}\n"),
            };
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            code
        }
    }
}

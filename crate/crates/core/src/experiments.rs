//! Seeded Monte Carlo sweeps of average secrecy rate versus jamming power.
//!
//! Trial `t` always draws its channels from the substreams of
//! `(seed, t)`, independent of the jamming level and the strategy, so curves
//! share common random numbers and every record is reproducible regardless of
//! how trials are scheduled across threads.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::channel::{jammer_covariance, realize_system, MatrixRole, SystemConfig, TrialStream};
use crate::error::{invalid, Error, Result};
use crate::par::{self, Execution};
use crate::rates::RateNats;
use crate::strategies::{design_statistical_ecsi, design_unknown_ecsi, EcsiDistribution, InitialDimension};
use crate::whitening::whiten_with_jammer;

pub const CSV_HEADER: &str = "pj_db,strategy,target_rate_bits,avg_secrecy_bits,outage_fraction,n_trials,seed";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    UnknownEcsi {
        target_rate_bits: f64,
        initial: InitialDimension,
    },
    StatisticalEcsi {
        n_sim: usize,
    },
}

impl Strategy {
    pub fn unknown(target_rate_bits: f64) -> Self {
        Strategy::UnknownEcsi {
            target_rate_bits,
            initial: InitialDimension::EveAntennas,
        }
    }

    pub fn statistical(n_sim: usize) -> Self {
        Strategy::StatisticalEcsi { n_sim }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::UnknownEcsi { .. } => "unknown_ecsi",
            Strategy::StatisticalEcsi { .. } => "statistical_ecsi",
        }
    }

    /// Target rate in bits; 0 for the statistical strategy.
    pub fn target_rate_bits(&self) -> f64 {
        match self {
            Strategy::UnknownEcsi { target_rate_bits, .. } => *target_rate_bits,
            Strategy::StatisticalEcsi { .. } => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Strategy::UnknownEcsi { target_rate_bits, .. } => {
                RateNats::from_bits(*target_rate_bits).map(|_| ())
            }
            Strategy::StatisticalEcsi { n_sim } if *n_sim == 0 => Err(invalid("n_sim must be at least 1")),
            Strategy::StatisticalEcsi { .. } => Ok(()),
        }
    }
}

/// One point of the jamming-power grid. `db` labels output rows; `linear` is
/// what the simulation uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JamLevel {
    pub db: f64,
    pub linear: f64,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Base configuration; its `p_jam` is replaced by each grid point.
    pub config: SystemConfig,
    pub pj_grid: Vec<JamLevel>,
    pub strategies: Vec<Strategy>,
    pub output_path: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.pj_grid.is_empty() {
            return Err(invalid("jamming-power grid is empty"));
        }
        if self.pj_grid.windows(2).any(|w| !(w[0].db < w[1].db)) {
            return Err(invalid("jamming-power grid must be strictly increasing"));
        }
        if let Some(l) = self.pj_grid.iter().find(|l| !(l.linear >= 0.0) || !l.linear.is_finite()) {
            return Err(invalid(format!("invalid jamming power {}", l.linear)));
        }
        if self.strategies.is_empty() {
            return Err(invalid("no strategy selected"));
        }
        self.strategies.iter().try_for_each(Strategy::validate)
    }
}

/// Outcome of one trial, all rates realized against the trial's true
/// eavesdropper channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub secrecy: RateNats,
    pub bob: RateNats,
    pub eve: RateNats,
    pub outage: bool,
    pub d1: usize,
    pub rho: f64,
}

/// Draws trial `trial_index`, whitens the jammer, designs per `strategy` and
/// evaluates the realized secrecy rate.
pub fn run_trial(config: &SystemConfig, strategy: &Strategy, trial_index: u64) -> Result<TrialOutcome> {
    let stream = TrialStream::new(config.seed, trial_index);
    let ch = realize_system(config, &stream)?;
    let q_j = jammer_covariance(config.p_jam, config.n_j)?;
    let wch = whiten_with_jammer(&ch.h_ba, &ch.h_bj, &q_j)?;
    let design = match *strategy {
        Strategy::UnknownEcsi {
            target_rate_bits,
            initial,
        } => design_unknown_ecsi(
            &wch,
            config.n_e,
            config.p_total,
            RateNats::from_bits(target_rate_bits)?,
            initial,
        )?,
        Strategy::StatisticalEcsi { n_sim } => design_statistical_ecsi(
            &wch,
            &EcsiDistribution::new(config.n_e)?,
            config.p_total,
            n_sim,
            &mut stream.rng(MatrixRole::SimulatedEve),
        )?,
    };
    let eve = design.eve_rate(&ch.h_ea)?;
    let secrecy = design.secrecy_against(&ch.h_ea)?;
    Ok(TrialOutcome {
        secrecy,
        bob: design.bob_rate,
        eve,
        outage: design.outage,
        d1: design.d1,
        rho: design.rho,
    })
}

/// Aggregated result of one (strategy, jamming level) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub pj_db: f64,
    pub strategy: String,
    pub target_rate_bits: f64,
    pub avg_secrecy_bits: f64,
    pub outage_fraction: f64,
    pub n_trials: usize,
    pub seed: u64,
    /// Standard error of `avg_secrecy_bits`. Not written to the CSV.
    pub std_err_bits: f64,
    /// Trials excluded after a numerical failure. Not written to the CSV.
    pub failed: usize,
}

/// Reduces per-trial outcomes in index order.
pub fn aggregate(
    outcomes: &[Result<TrialOutcome>],
    pj_db: f64,
    strategy: &Strategy,
    seed: u64,
) -> SweepRecord {
    let ok: Vec<&TrialOutcome> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let n = ok.len();
    let (mut mean, mut std_err, mut outage_fraction) = (0.0, 0.0, 0.0);
    if n > 0 {
        let mut sum = 0.0;
        for o in &ok {
            sum += o.secrecy.bits();
        }
        mean = sum / n as f64;
        if n > 1 {
            let mut ss = 0.0;
            for o in &ok {
                ss += (o.secrecy.bits() - mean).powi(2);
            }
            std_err = (ss / (n - 1) as f64 / n as f64).sqrt();
        }
        outage_fraction = ok.iter().filter(|o| o.outage).count() as f64 / n as f64;
    }
    SweepRecord {
        pj_db,
        strategy: strategy.label().to_string(),
        target_rate_bits: strategy.target_rate_bits(),
        avg_secrecy_bits: mean,
        outage_fraction,
        n_trials: outcomes.len(),
        seed,
        std_err_bits: std_err,
        failed: outcomes.len() - n,
    }
}

/// Per-trial outcomes of one sweep cell, in trial order.
pub fn run_cell(config: &SystemConfig, strategy: &Strategy, exec: Execution) -> Vec<Result<TrialOutcome>> {
    par::map_indices(config.n_trials as u64, exec, |t| run_trial(config, strategy, t))
}

fn record_order(a: &SweepRecord, b: &SweepRecord) -> Ordering {
    a.strategy
        .cmp(&b.strategy)
        .then(a.target_rate_bits.total_cmp(&b.target_rate_bits))
        .then(a.pj_db.total_cmp(&b.pj_db))
}

/// Runs every (strategy, jamming level) cell and, when `spec.output_path` is
/// set, writes the CSV there. Records are sorted by strategy, then target
/// rate, then jamming power.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.strategies.len() * spec.pj_grid.len());
    for strategy in &spec.strategies {
        for level in &spec.pj_grid {
            let config = SystemConfig {
                p_jam: level.linear,
                ..spec.config.clone()
            };
            let outcomes = run_cell(&config, strategy, exec);
            records.push(aggregate(&outcomes, level.db, strategy, config.seed));
        }
    }
    records.sort_by(record_order);
    if let Some(path) = &spec.output_path {
        write_csv(&records, path)?;
        if records.iter().any(|r| r.failed > 0) {
            write_failed_sidecar(&records, &failed_sidecar_path(path))?;
        }
    }
    Ok(records)
}

/// `x` with `sig` significant digits, in the style of C's `%g`.
pub fn format_significant(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn render_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            format_significant(r.pj_db, 6),
            r.strategy,
            format_significant(r.target_rate_bits, 6),
            format_significant(r.avg_secrecy_bits, 6),
            format_significant(r.outage_fraction, 6),
            r.n_trials,
            r.seed
        ));
    }
    out
}

/// Writes `contents` to a temporary file beside `path` and renames it into
/// place, so a failed write never leaves a partial file at `path`.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Writes the sweep CSV: fixed header, one row per record, floats with six
/// significant digits, LF line endings.
pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(invalid("no records to write"));
    }
    write_atomic(path, &render_csv(records))
}

pub fn failed_sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".failed.csv");
    path.with_file_name(name)
}

fn write_failed_sidecar(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut out = String::from("pj_db,strategy,target_rate_bits,failed\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_significant(r.pj_db, 6),
            r.strategy,
            format_significant(r.target_rate_bits, 6),
            r.failed
        ));
    }
    write_atomic(path, &out)
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub pj_db: f64,
    pub strategy: String,
    pub target_rate_bits: f64,
    pub avg_secrecy_bits: f64,
    pub outage_fraction: f64,
    pub n_trials: usize,
    pub seed: u64,
}

/// Parses the output of [`write_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(invalid("missing or unexpected CSV header"));
    }
    let bad = |line: &str| invalid(format!("malformed CSV row: {line}"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad(line));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line));
            Ok(CsvRow {
                pj_db: num(f[0])?,
                strategy: f[1].to_string(),
                target_rate_bits: num(f[2])?,
                avg_secrecy_bits: num(f[3])?,
                outage_fraction: num(f[4])?,
                n_trials: f[5].parse().map_err(|_| bad(line))?,
                seed: f[6].parse().map_err(|_| bad(line))?,
            })
        })
        .collect()
}

/// Reads and parses a sweep CSV file.
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    parse_csv(&fs::read_to_string(path)?)
}

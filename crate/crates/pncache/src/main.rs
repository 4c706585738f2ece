use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use pncache::harness::{emit, run_experiment, DemandChoice, ExperimentSpec, Format, Mode, ScenarioFile};
use pncache::phylink::rates::db_grid;
use pncache_core::bounds::DenomVariant;
use pncache_core::rational;

/// Cache-aided MISO broadcast with hybrid CSIT: trade-off calculator,
/// simulator and exact decodability oracle.
#[derive(Parser)]
#[command(name = "pncache", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NDT, DoF and baselines at one cache size.
    Ndt(Common),
    /// Closed-form DoF against the per-round schedule count.
    Dof(Common),
    /// Monte Carlo sum rates over a power grid and the fitted DoF slope.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20.0)]
        pdb_min: f64,
        #[arg(long, default_value_t = 50.0)]
        pdb_max: f64,
        #[arg(long, default_value_t = 5.0)]
        pdb_step: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Lower bound on channel magnitudes.
        #[arg(long, default_value_t = 0.1)]
        delta1: f64,
        /// Upper bound on channel magnitudes.
        #[arg(long, default_value_t = 10.0)]
        delta2: f64,
    },
    /// Converse-side lower bound and the factor-2.00884 gap check.
    Bounds {
        #[command(flatten)]
        common: Common,
        /// Denominator variant; both when omitted.
        #[arg(long)]
        variant: Option<DenomVariant>,
        #[arg(long, default_value_t = 101)]
        alpha_grid: u32,
    },
    /// NDT over γ = 0, 1/steps, …, 1.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        steps: u32,
    },
    /// Exact-arithmetic end-to-end decodability over several seeds and demands.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Random distinct demands per seed (ignored with --demand).
        #[arg(long, default_value_t = 5)]
        demands: u64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML scenario file; inline flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// K: number of users.
    #[arg(long)]
    users: Option<i64>,
    /// L: transmit antennas.
    #[arg(long)]
    antennas: Option<i64>,
    /// K_P: users with perfect CSIT.
    #[arg(long)]
    perfect_users: Option<i64>,
    /// N: library size.
    #[arg(long)]
    files: Option<i64>,
    /// γ as "a/b", an integer or a decimal.
    #[arg(long)]
    gamma: Option<String>,
    /// B: bits per file.
    #[arg(long)]
    file_bits: Option<u64>,
    /// Comma-separated labels of the perfect-CSIT users.
    #[arg(long, value_delimiter = ',')]
    perfect_set: Option<Vec<u32>>,
    /// Comma-separated requested file per user.
    #[arg(long, value_delimiter = ',')]
    demand: Option<Vec<u32>>,
}

impl Common {
    fn spec(&self, mode: Mode) -> anyhow::Result<ExperimentSpec> {
        let base = match &self.config {
            Some(p) => ScenarioFile::load(p)?,
            None => ScenarioFile::default(),
        };
        let (gamma_num, gamma_den) = match &self.gamma {
            Some(g) => {
                let g = rational::parse(g).map_err(|e| anyhow::anyhow!("--gamma: {e}"))?;
                (Some(i64::try_from(*g.numer())?), Some(i64::try_from(*g.denom())?))
            }
            None => (None, None),
        };
        let inline = ScenarioFile {
            users: self.users,
            antennas: self.antennas,
            perfect_users: self.perfect_users,
            files: self.files,
            gamma_num,
            gamma_den,
            file_bits: self.file_bits,
            seed: self.seed,
            perfect_set: self.perfect_set.clone(),
            demand: self.demand.clone(),
        };
        let merged = base.overlay(inline);
        let (config, relabel) = merged.resolve()?;
        let mut spec = ExperimentSpec::new(mode, config);
        spec.relabel = relabel;
        spec.seed = merged.seed.unwrap_or(0);
        spec.file_bits = merged.file_bits;
        if let Some(d) = merged.demand {
            spec.demand = DemandChoice::Given(d);
        }
        Ok(spec)
    }
}

fn build(cli: &Cli) -> anyhow::Result<(ExperimentSpec, &Common)> {
    Ok(match &cli.command {
        Command::Ndt(c) => (c.spec(Mode::Ndt)?, c),
        Command::Dof(c) => (c.spec(Mode::Dof)?, c),
        Command::Simulate { common, pdb_min, pdb_max, pdb_step, trials, delta1, delta2 } => {
            let mut s = common.spec(Mode::Simulate)?;
            s.p_db = db_grid(*pdb_min, *pdb_max, *pdb_step);
            anyhow::ensure!(!s.p_db.is_empty(), "empty power grid");
            s.trials = *trials;
            s.delta = (*delta1, *delta2);
            (s, common)
        }
        Command::Bounds { common, variant, alpha_grid } => {
            let mut s = common.spec(Mode::Bounds)?;
            s.variant = *variant;
            anyhow::ensure!(*alpha_grid >= 2, "--alpha-grid needs at least 2 points");
            s.alpha_grid = *alpha_grid;
            (s, common)
        }
        Command::Sweep { common, steps } => {
            let mut s = common.spec(Mode::Sweep)?;
            anyhow::ensure!(*steps >= 1, "--steps must be positive");
            s.sweep_steps = *steps;
            (s, common)
        }
        Command::Oracle { common, seeds, demands } => {
            let mut s = common.spec(Mode::Oracle)?;
            s.oracle_seeds = *seeds;
            s.oracle_demands = *demands;
            (s, common)
        }
    })
}

fn write_output(common: &Common, table: &pncache::harness::Table) -> anyhow::Result<()> {
    match &common.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            emit(table, common.format, BufWriter::new(f))
        }
        None => emit(table, common.format, io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (spec, common) = match build(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = match run_experiment(&spec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = write_output(common, &outcome.table) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let mut err = io::stderr().lock();
    for n in &outcome.notes {
        let _ = writeln!(err, "{n}");
    }
    let _ = writeln!(err, "{}: {}", spec.mode.name(), if outcome.pass { "pass" } else { "FAIL" });
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

//! Command implementations behind the `pricefill` binary.

pub mod csvio;
pub mod format;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pricefill_core::{
    flat_rate_round, grid_allocation_oracle, run_round, solve_allocation, throughput, verify_kkt,
    welfare_sweep, Allocation, Execution, FocMode, GridSpec, RoundOutcome, Scenario, SweepConfig,
    UserProfile,
};
use thiserror::Error;

use crate::csvio::{load_bids, load_scenario};
use crate::format::sig6;

/// Relative tolerance on the objective gap between the solver and the grid oracle.
pub const ORACLE_REL_TOL: f64 = 1e-6;
const ORACLE_MAX_USERS: usize = 8;
const ORACLE_STEPS: usize = 100_000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {what} has {got} entries, scenario has {expected} users")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("verification failed")]
    Verification,
    #[error(transparent)]
    Model(#[from] pricefill_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification => 1,
            CliError::Dimension { .. } => 3,
            CliError::Model(pricefill_core::Error::DimensionMismatch { .. }) => 3,
            CliError::Parse(_) | CliError::Model(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pricefill",
    version,
    about = "Differential-pricing power allocation and bidding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allocate power for a scenario and a fixed bid vector.
    Allocate { scenario: PathBuf, bids: PathBuf },
    /// Run one round: announce beliefs, solve bids, allocate.
    Simulate {
        scenario: PathBuf,
        /// Also run the flat-rate baseline at this price, or `auto` for the
        /// mean differential bid.
        #[arg(long)]
        flat: Option<FlatPrice>,
    },
    /// Welfare sweep of differential pricing against the flat-rate baseline.
    Sweep(SweepArgs),
    /// KKT and grid-oracle checks for an allocation.
    Verify {
        scenario: PathBuf,
        /// Bids file; solved from the announced beliefs when omitted.
        bids: Option<PathBuf>,
        /// Replace the solved powers before checking (comma separated).
        #[arg(long, value_delimiter = ',')]
        powers: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy)]
pub enum FlatPrice {
    Auto,
    Fixed(f64),
}

impl std::str::FromStr for FlatPrice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(FlatPrice::Auto);
        }
        match s.parse::<f64>() {
            Ok(c) if c.is_finite() && c >= 0.0 => Ok(FlatPrice::Fixed(c)),
            _ => Err(format!(
                "expected `auto` or a non-negative price, got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 10)]
    pub users: usize,
    /// Common demanded throughput.
    #[arg(long, default_value_t = 1.5)]
    pub b: f64,
    /// Common channel quality.
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Valuation ranges; valuations are drawn from Uniform(0, R).
    #[arg(long = "R", value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "paper_foc")]
    pub foc_mode: FocMode,
    /// Evaluate repetitions on one thread.
    #[arg(long)]
    pub sequential: bool,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Allocate { scenario, bids } => {
            let scenario = load_scenario(&scenario)?;
            let bids = load_bids(&bids)?;
            check_len("bids", &scenario, bids.len())?;
            let allocation = solve_allocation(&scenario.users, &bids, scenario.budget)?;
            warn(&allocation);
            let outcome = settle(&scenario.users, &bids, allocation);
            write_round(out, &scenario.users, &outcome)?;
        }
        Command::Simulate { scenario, flat } => {
            let scenario = load_scenario(&scenario)?;
            let outcome = run_round(&scenario)?;
            warn(&outcome.allocation);
            write_round(out, &scenario.users, &outcome)?;
            if let Some(flat) = flat {
                let price = match flat {
                    FlatPrice::Auto => outcome.mean_bid(),
                    FlatPrice::Fixed(c) => c,
                };
                let baseline = flat_rate_round(&scenario, price)?;
                writeln!(out, "# flat_rate price={}", sig6(price))?;
                write_round(out, &scenario.users, &baseline)?;
            }
        }
        Command::Sweep(args) => {
            let cfg = SweepConfig {
                n_users: args.users,
                demand: args.b,
                quality: args.q,
                r_grid: args.r,
                reps: args.reps,
                seed: args.seed,
                foc_mode: args.foc_mode,
                ..SweepConfig::default()
            };
            if !(cfg.demand.is_finite()
                && cfg.demand > 0.0
                && cfg.quality.is_finite()
                && cfg.quality > 0.0)
            {
                return Err(CliError::Parse("--b and --q must be positive".into()));
            }
            let execution = if args.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let result =
                welfare_sweep(&cfg, execution).map_err(|e| CliError::Parse(e.to_string()))?;
            writeln!(out, "R,mean_sw_differential,mean_sw_flat,gap")?;
            for (k, r) in result.r_grid.iter().enumerate() {
                let (d, f) = (result.mean_sw_differential[k], result.mean_sw_flat[k]);
                writeln!(out, "{},{},{},{}", sig6(*r), sig6(d), sig6(f), sig6(d - f))?;
            }
        }
        Command::Verify {
            scenario,
            bids,
            powers,
        } => {
            let scenario = load_scenario(&scenario)?;
            let bids = match bids {
                Some(path) => load_bids(&path)?,
                None => run_round(&scenario)?.bids,
            };
            check_len("bids", &scenario, bids.len())?;
            let mut allocation = solve_allocation(&scenario.users, &bids, scenario.budget)?;
            if let Some(powers) = powers {
                check_len("--powers", &scenario, powers.len())?;
                allocation.throughputs = scenario
                    .users
                    .iter()
                    .zip(&powers)
                    .map(|(u, &p)| throughput(p, u.quality))
                    .collect();
                allocation.powers = powers;
            }
            if !verify(out, &scenario, &bids, &allocation)? {
                return Err(CliError::Verification);
            }
        }
    }
    Ok(())
}

fn check_len(what: &'static str, scenario: &Scenario, got: usize) -> Result<(), CliError> {
    let expected = scenario.users.len();
    if got == expected {
        Ok(())
    } else {
        Err(CliError::Dimension {
            what,
            expected,
            got,
        })
    }
}

fn warn(allocation: &Allocation) {
    if let Some(w) = allocation.warning {
        eprintln!("warning: {w:?}");
    }
}

fn settle(users: &[UserProfile], bids: &[f64], allocation: Allocation) -> RoundOutcome {
    let utilities: Vec<f64> = users
        .iter()
        .zip(bids)
        .zip(&allocation.throughputs)
        .map(|((u, c), t)| (u.valuation - c) * t)
        .collect();
    RoundOutcome {
        bids: bids.to_vec(),
        paid: bids.to_vec(),
        revenue: allocation.revenue(bids),
        social_welfare: utilities.iter().sum(),
        utilities,
        allocation,
        bid_results: Vec::new(),
    }
}

fn write_round(
    out: &mut dyn Write,
    users: &[UserProfile],
    outcome: &RoundOutcome,
) -> std::io::Result<()> {
    writeln!(out, "id,bid,power,throughput,utility")?;
    for (i, u) in users.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            u.id,
            sig6(outcome.paid[i]),
            sig6(outcome.allocation.powers[i]),
            sig6(outcome.allocation.throughputs[i]),
            sig6(outcome.utilities[i]),
        )?;
    }
    writeln!(out, "eta_star,revenue,social_welfare")?;
    writeln!(
        out,
        "{},{},{}",
        sig6(outcome.allocation.eta_star),
        sig6(outcome.revenue),
        sig6(outcome.social_welfare)
    )
}

fn verify(
    out: &mut dyn Write,
    scenario: &Scenario,
    bids: &[f64],
    allocation: &Allocation,
) -> Result<bool, CliError> {
    let report = verify_kkt(allocation, &scenario.users, bids, scenario.budget);
    writeln!(out, "check,residual,tolerance,status")?;
    let mut ok = true;
    for (name, check) in report.conditions() {
        ok &= check.passed;
        writeln!(
            out,
            "{name},{},{},{}",
            sig6(check.residual),
            sig6(check.tolerance),
            status(check.passed)
        )?;
    }

    let hi = scenario
        .users
        .iter()
        .zip(bids)
        .map(|(u, c)| c * u.quality)
        .fold(0.0, f64::max);
    if scenario.users.len() > ORACLE_MAX_USERS || hi <= 0.0 {
        writeln!(
            out,
            "oracle_objective_gap,,{},skipped",
            sig6(ORACLE_REL_TOL)
        )?;
        return Ok(ok);
    }
    let grid = GridSpec::new(hi * 1e-6, hi, ORACLE_STEPS)?;
    let oracle = grid_allocation_oracle(&scenario.users, bids, scenario.budget, grid);
    let objective = allocation.revenue(bids);
    let gap = (objective - oracle.objective).abs() / objective.abs().max(f64::MIN_POSITIVE);
    let passed = gap <= ORACLE_REL_TOL;
    ok &= passed;
    writeln!(
        out,
        "oracle_objective_gap,{},{},{}",
        sig6(gap),
        sig6(ORACLE_REL_TOL),
        status(passed)
    )?;
    Ok(ok)
}

fn status(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

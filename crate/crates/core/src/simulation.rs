//! Full rounds (announce, bid, allocate) and the welfare sweep against the
//! flat-rate baseline.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::allocation::{flat_rate_allocation, solve_allocation, Allocation};
use crate::bidding::{solve_bid, BeliefParams, BidResult, FocMode};
use crate::error::{Error, Result};
use crate::profile::{Budget, UserProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub users: Vec<UserProfile>,
    pub budget: Budget,
    pub foc_mode: FocMode,
}

impl Scenario {
    pub fn new(users: Vec<UserProfile>, budget: Budget, foc_mode: FocMode) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::NoUsers);
        }
        for (position, u) in users.iter().enumerate() {
            u.validate()?;
            if u.id != position {
                return Err(Error::NonContiguousIds { position, id: u.id });
            }
        }
        Ok(Self {
            users,
            budget,
            foc_mode,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    /// Prices submitted to the allocator (0 for abstainers).
    pub bids: Vec<f64>,
    /// Per-bit price actually charged to each user.
    pub paid: Vec<f64>,
    pub allocation: Allocation,
    pub utilities: Vec<f64>,
    pub revenue: f64,
    pub social_welfare: f64,
    /// Empty for flat-rate rounds.
    pub bid_results: Vec<BidResult>,
}

impl RoundOutcome {
    fn settle(
        users: &[UserProfile],
        bids: Vec<f64>,
        paid: Vec<f64>,
        allocation: Allocation,
        bid_results: Vec<BidResult>,
    ) -> Self {
        let utilities: Vec<f64> = users
            .iter()
            .zip(&paid)
            .zip(&allocation.throughputs)
            .map(|((u, c), t)| (u.valuation - c) * t)
            .collect();
        let revenue = allocation.revenue(&paid);
        let social_welfare = utilities.iter().sum();
        Self {
            bids,
            paid,
            allocation,
            utilities,
            revenue,
            social_welfare,
            bid_results,
        }
    }

    pub fn mean_bid(&self) -> f64 {
        self.bids.iter().sum::<f64>() / self.bids.len() as f64
    }
}

/// Belief parameters the base station announces: half the other users'
/// valuations and the sum of their inverse qualities.
pub fn announce_beliefs(scenario: &Scenario) -> Vec<BeliefParams> {
    let users = &scenario.users;
    users
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let mut price_sum = 0.0;
            let mut inverse_quality_sum = 0.0;
            for (j, other) in users.iter().enumerate() {
                if j != i {
                    price_sum += other.valuation;
                    inverse_quality_sum += 1.0 / other.quality;
                }
            }
            BeliefParams {
                price_sum: 0.5 * price_sum,
                inverse_quality_sum,
                own_quality: u.quality,
            }
        })
        .collect()
}

/// Users bid against the announced beliefs, then the base station allocates.
/// Welfare is computed from realized, not believed, throughputs.
pub fn run_round(scenario: &Scenario) -> Result<RoundOutcome> {
    let beliefs = announce_beliefs(scenario);
    let bid_results: Vec<BidResult> = scenario
        .users
        .iter()
        .zip(&beliefs)
        .map(|(u, bp)| solve_bid(u, bp, scenario.foc_mode))
        .collect();
    let bids: Vec<f64> = bid_results.iter().map(|r| r.price).collect();
    let allocation = solve_allocation(&scenario.users, &bids, scenario.budget)?;
    Ok(RoundOutcome::settle(
        &scenario.users,
        bids.clone(),
        bids,
        allocation,
        bid_results,
    ))
}

/// Conventional water-filling with every user charged `flat_price` per bit.
/// Utilities may be negative: nobody opts out.
pub fn flat_rate_round(scenario: &Scenario, flat_price: f64) -> Result<RoundOutcome> {
    if !(flat_price.is_finite() && flat_price >= 0.0) {
        return Err(Error::InvalidBid {
            index: 0,
            value: flat_price,
        });
    }
    let allocation = flat_rate_allocation(&scenario.users, scenario.budget)?;
    let n = scenario.users.len();
    Ok(RoundOutcome::settle(
        &scenario.users,
        vec![flat_price; n],
        vec![flat_price; n],
        allocation,
        Vec::new(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_users: usize,
    pub demand: f64,
    pub quality: f64,
    /// Valuations are drawn from Uniform(0, R) for each R.
    pub r_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub foc_mode: FocMode,
    pub budget: Budget,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_users: 10,
            demand: 1.5,
            quality: 2.0,
            r_grid: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            reps: 50,
            seed: 42,
            foc_mode: FocMode::PaperFoc,
            budget: Budget::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub r_grid: Vec<f64>,
    pub mean_sw_differential: Vec<f64>,
    pub mean_sw_flat: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl SweepResult {
    pub fn gaps(&self) -> Vec<f64> {
        self.mean_sw_differential
            .iter()
            .zip(&self.mean_sw_flat)
            .map(|(d, f)| d - f)
            .collect()
    }
}

/// Random stream for one (R index, repetition) pair. Independent of the
/// order in which repetitions are evaluated.
fn rep_rng(seed: u64, r_index: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((r_index as u64) << 32) | rep as u64);
    rng
}

fn sweep_rep(cfg: &SweepConfig, r_index: usize, range: f64, rep: usize) -> Result<(f64, f64)> {
    let mut rng = rep_rng(cfg.seed, r_index, rep);
    let users = (0..cfg.n_users)
        .map(|id| {
            let u: f64 = rng.sample(Open01);
            UserProfile::new(id, range * u, cfg.quality, cfg.demand)
        })
        .collect::<Result<Vec<_>>>()?;
    let scenario = Scenario::new(users, cfg.budget, cfg.foc_mode)?;
    let differential = run_round(&scenario)?;
    let flat = flat_rate_round(&scenario, differential.mean_bid())?;
    Ok((differential.social_welfare, flat.social_welfare))
}

/// Mean social welfare of differential pricing and of the flat-rate
/// baseline for every valuation range in the grid. Results are identical
/// for both execution modes: sums are accumulated in repetition order.
pub fn welfare_sweep(cfg: &SweepConfig, execution: Execution) -> Result<SweepResult> {
    if cfg.reps == 0 {
        return Err(Error::InvalidSweep("reps must be at least 1"));
    }
    if cfg.n_users == 0 {
        return Err(Error::NoUsers);
    }
    if cfg.r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidSweep(
            "valuation ranges must be positive and finite",
        ));
    }

    let mut mean_sw_differential = Vec::with_capacity(cfg.r_grid.len());
    let mut mean_sw_flat = Vec::with_capacity(cfg.r_grid.len());
    for (k, &range) in cfg.r_grid.iter().enumerate() {
        let per_rep: Vec<(f64, f64)> = match execution {
            Execution::Sequential => (0..cfg.reps)
                .map(|r| sweep_rep(cfg, k, range, r))
                .collect::<Result<_>>()?,
            Execution::Parallel => (0..cfg.reps)
                .into_par_iter()
                .map(|r| sweep_rep(cfg, k, range, r))
                .collect::<Result<_>>()?,
        };
        let (mut d, mut f) = (0.0, 0.0);
        for (sd, sf) in per_rep {
            d += sd;
            f += sf;
        }
        mean_sw_differential.push(d / cfg.reps as f64);
        mean_sw_flat.push(f / cfg.reps as f64);
    }
    Ok(SweepResult {
        r_grid: cfg.r_grid.clone(),
        mean_sw_differential,
        mean_sw_flat,
        reps: cfg.reps,
        seed: cfg.seed,
    })
}

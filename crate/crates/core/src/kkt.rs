//! KKT residual checks for a solved allocation.
//!
//! The slack dual of the non-negativity constraint is never stored; it is
//! implied by stationarity as `λ_i = η − (c_i − γ_i)/(1/q_i + P_i)` and only
//! checked here.

use crate::allocation::{demand_cap, Allocation};
use crate::profile::{Budget, UserProfile};

pub const STATIONARITY_TOL: f64 = 1e-7;
pub const SLACKNESS_TOL: f64 = 1e-7;
/// Shared by the budget, cap and non-negativity checks.
pub const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    /// Worst residual over all users, already scaled the way the tolerance expects.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ConditionCheck {
    fn new(residual: f64, tolerance: f64) -> Self {
        Self {
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    pub stationarity: ConditionCheck,
    pub primal_feasibility: ConditionCheck,
    pub dual_feasibility: ConditionCheck,
    pub complementary_slackness: ConditionCheck,
    /// Implied multipliers of `P_i ≥ 0`.
    pub implied_lambdas: Vec<f64>,
}

impl KktReport {
    pub fn passed(&self) -> bool {
        self.conditions().iter().all(|(_, c)| c.passed)
    }

    pub fn conditions(&self) -> [(&'static str, ConditionCheck); 4] {
        [
            ("stationarity", self.stationarity),
            ("primal_feasibility", self.primal_feasibility),
            ("dual_feasibility", self.dual_feasibility),
            ("complementary_slackness", self.complementary_slackness),
        ]
    }
}

/// Checks stationarity, primal and dual feasibility and complementary
/// slackness of `alloc`. Never fails; mismatched lengths show up as
/// failed conditions.
pub fn verify_kkt(
    alloc: &Allocation,
    users: &[UserProfile],
    bids: &[f64],
    budget: Budget,
) -> KktReport {
    let n = users.len();
    let shaped = alloc.powers.len() == n
        && alloc.gammas.len() == n
        && alloc.throughputs.len() == n
        && bids.len() == n;
    if !shaped {
        let fail = ConditionCheck::new(f64::INFINITY, 0.0);
        return KktReport {
            stationarity: fail,
            primal_feasibility: fail,
            dual_feasibility: fail,
            complementary_slackness: fail,
            implied_lambdas: Vec::new(),
        };
    }

    let eta = alloc.eta_star;
    let mut stationarity: f64 = 0.0;
    let mut primal: f64 = 0.0;
    let mut dual: f64 = (-eta).max(0.0);
    let mut slackness: f64 = 0.0;
    let mut lambdas = Vec::with_capacity(n);

    for i in 0..n {
        let u = &users[i];
        let (c, p, gamma) = (bids[i], alloc.powers[i], alloc.gammas[i]);
        let cap = demand_cap(u);
        let capped = p >= cap * (1.0 - 1e-12);
        let level = 1.0 / u.quality + p;

        if p > 0.0 && !capped {
            let r = (c / level - eta).abs();
            stationarity = stationarity.max(if eta > 0.0 { r / eta } else { r });
        }

        primal = primal.max(-p).max(alloc.throughputs[i] - u.demand);

        let lambda = eta - (c - gamma) / level;
        let scale = eta.max(c * u.quality).max(f64::MIN_POSITIVE);
        dual = dual.max(-gamma).max(-lambda / scale);

        slackness = slackness
            .max((gamma * (u.demand - alloc.throughputs[i])).abs())
            .max((lambda * p).abs());
        lambdas.push(lambda);
    }

    let total: f64 = alloc.powers.iter().sum();
    let budget_violation = if alloc.overloaded {
        (total - budget.phi()).abs()
    } else {
        (total - budget.phi()).max(0.0)
    };
    let primal = primal.max(budget_violation);

    KktReport {
        stationarity: ConditionCheck::new(stationarity, STATIONARITY_TOL),
        primal_feasibility: ConditionCheck::new(primal, PRIMAL_TOL),
        dual_feasibility: ConditionCheck::new(dual.max(0.0), DUAL_TOL),
        complementary_slackness: ConditionCheck::new(slackness, SLACKNESS_TOL),
        implied_lambdas: lambdas,
    }
}

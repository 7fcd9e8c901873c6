//! Revenue-maximizing downlink power allocation.
//!
//! The base station maximizes `Σ c_i log2(1 + q_i P_i)` subject to per-user
//! demand caps `log2(1 + q_i P_i) ≤ b_i`, `P_i ≥ 0` and `Σ P_i = Φ`. The
//! optimum has the water-filling form `P_i = clamp(c_i/η − 1/q_i, 0, cap_i)`
//! where every user has its own flood level `c_i/η`. The budget dual `η` is
//! found by bisection on the clamped aggregate response, which is continuous
//! and non-increasing in `η`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::profile::{Budget, UserProfile};

/// Shannon throughput of a unit-bandwidth channel, `log2(1 + q·p)`.
pub fn throughput(power: f64, quality: f64) -> f64 {
    (quality * power).ln_1p() / LN_2
}

/// Power at which the user's throughput saturates at its demand,
/// `(2^b − 1)/q`.
pub fn demand_cap(user: &UserProfile) -> f64 {
    (user.demand * LN_2).exp_m1() / user.quality
}

/// Power granted to one user at dual level `eta`.
pub(crate) fn clamped_power(bid: f64, quality: f64, cap: f64, eta: f64) -> f64 {
    (bid / eta - 1.0 / quality).clamp(0.0, cap)
}

/// Total power the clamped water-filling rule hands out at dual level `eta`.
///
/// Continuous and non-increasing in `eta`; tends to zero as `eta` grows.
pub fn aggregate_power(eta: f64, users: &[UserProfile], bids: &[f64]) -> f64 {
    debug_assert_eq!(users.len(), bids.len());
    users
        .iter()
        .zip(bids)
        .map(|(u, &c)| clamped_power(c, u.quality, demand_cap(u), eta))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationWarning {
    /// Every bid was zero in an overloaded cell; nobody funds the objective
    /// and all powers are zero.
    AllBidsZero,
    /// The demand caps of the paying users sum to less than the budget, so
    /// the budget cannot be exhausted without serving zero-bid users.
    BudgetNotExhausted,
}

/// Solved allocation plus the recovered duals.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub powers: Vec<f64>,
    /// Dual of the budget constraint (the cell condition).
    pub eta_star: f64,
    /// Duals of the per-user throughput caps.
    pub gammas: Vec<f64>,
    pub throughputs: Vec<f64>,
    /// True iff the demand caps together exceed the budget.
    pub overloaded: bool,
    pub warning: Option<AllocationWarning>,
}

impl Allocation {
    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    /// `Σ c_i T_i` for the given per-bit prices.
    pub fn revenue(&self, prices: &[f64]) -> f64 {
        self.throughputs
            .iter()
            .zip(prices)
            .map(|(t, c)| c * t)
            .sum()
    }
}

pub(crate) fn validate_inputs(users: &[UserProfile], bids: &[f64]) -> Result<()> {
    if users.is_empty() {
        return Err(Error::NoUsers);
    }
    if users.len() != bids.len() {
        return Err(Error::DimensionMismatch {
            expected: users.len(),
            got: bids.len(),
        });
    }
    for u in users {
        u.validate()?;
    }
    for (index, &value) in bids.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidBid { index, value });
        }
    }
    Ok(())
}

const BRACKET_REL_TOL: f64 = 1e-12;

/// Solves the base station's allocation problem for fixed bids.
///
/// Underloaded cells (every demand fits in the budget) get their caps with
/// `eta_star = 0`. Zero-bid users receive no power when the cell is
/// overloaded.
pub fn solve_allocation(users: &[UserProfile], bids: &[f64], budget: Budget) -> Result<Allocation> {
    validate_inputs(users, bids)?;
    let phi = budget.phi();
    let caps: Vec<f64> = users.iter().map(demand_cap).collect();
    let total_cap: f64 = caps.iter().sum();

    if total_cap <= phi {
        return Ok(assemble(users, bids, &caps, caps.clone(), 0.0, false, None));
    }

    if bids.iter().all(|&c| c == 0.0) {
        let zeros = vec![0.0; users.len()];
        return Ok(assemble(
            users,
            bids,
            &caps,
            zeros,
            0.0,
            true,
            Some(AllocationWarning::AllBidsZero),
        ));
    }

    let paying_cap: f64 = caps
        .iter()
        .zip(bids)
        .filter(|(_, &c)| c > 0.0)
        .map(|(cap, _)| cap)
        .sum();
    if paying_cap <= phi {
        let powers = caps
            .iter()
            .zip(bids)
            .map(|(&cap, &c)| if c > 0.0 { cap } else { 0.0 })
            .collect();
        return Ok(assemble(
            users,
            bids,
            &caps,
            powers,
            0.0,
            true,
            Some(AllocationWarning::BudgetNotExhausted),
        ));
    }

    let eta = bisect_budget_dual(users, bids, &caps, phi);
    let powers = users
        .iter()
        .zip(bids)
        .zip(&caps)
        .map(|((u, &c), &cap)| clamped_power(c, u.quality, cap, eta))
        .collect();
    Ok(assemble(users, bids, &caps, powers, eta, true, None))
}

/// Largest `eta` with `g(eta) ≥ phi`, bracketed between the level where
/// every paying user is capped and the level where nobody is served. Stops
/// once the bracket is within `1e-12` of its upper end, which leaves the
/// budget residual far below `1e-10`.
fn bisect_budget_dual(users: &[UserProfile], bids: &[f64], caps: &[f64], phi: f64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for ((u, &c), &cap) in users.iter().zip(bids).zip(caps) {
        if c > 0.0 {
            lo = lo.min(c / (1.0 / u.quality + cap));
            hi = hi.max(c * u.quality);
        }
    }
    // g(lo) is the paying users' total cap (> phi) and g(hi) = 0.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if aggregate_power(mid, users, bids) >= phi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= BRACKET_REL_TOL * hi {
            break;
        }
    }
    lo
}

fn assemble(
    users: &[UserProfile],
    bids: &[f64],
    caps: &[f64],
    powers: Vec<f64>,
    eta: f64,
    overloaded: bool,
    warning: Option<AllocationWarning>,
) -> Allocation {
    let gammas = users
        .iter()
        .zip(bids)
        .zip(caps.iter().zip(&powers))
        .map(|((u, &c), (&cap, &p))| {
            if p > 0.0 && p >= cap {
                (c - eta * (1.0 / u.quality + cap)).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let throughputs = users
        .iter()
        .zip(&powers)
        .map(|(u, &p)| throughput(p, u.quality))
        .collect();
    Allocation {
        powers,
        eta_star: eta,
        gammas,
        throughputs,
        overloaded,
        warning,
    }
}

/// Conventional water-filling: every user weighted equally, demand caps kept.
pub fn flat_rate_allocation(users: &[UserProfile], budget: Budget) -> Result<Allocation> {
    solve_allocation(users, &vec![1.0; users.len()], budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn users(v: &[f64], q: &[f64], b: &[f64]) -> Vec<UserProfile> {
        (0..q.len())
            .map(|i| UserProfile::new(i, v[i], q[i], b[i]).unwrap())
            .collect()
    }

    fn case2() -> (Vec<UserProfile>, Vec<f64>) {
        (
            users(&[1.0; 4], &[1.0, 2.0, 3.0, 4.0], &[1.5; 4]),
            vec![0.83, 0.52, 0.43, 0.38],
        )
    }

    #[test]
    fn demand_cap_values() {
        let u = |q, b| UserProfile::new(0, 1.0, q, b).unwrap();
        assert_abs_diff_eq!(demand_cap(&u(2.0, 1.0)), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            demand_cap(&u(2.0, 1.5)),
            0.914_213_562_373_095,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            demand_cap(&u(4.0, 1.5)),
            0.457_106_781_186_547_6,
            epsilon = 1e-12
        );
        for &(q, b) in &[(2.0, 1.5), (0.7, 0.2), (3.3, 4.0)] {
            assert_abs_diff_eq!(throughput(demand_cap(&u(q, b)), q), b, epsilon = 1e-12);
        }
    }

    #[test]
    fn throughput_values() {
        assert_eq!(throughput(0.0, 5.0), 0.0);
        assert_eq!(throughput(0.5, 2.0), 1.0);
        assert_abs_diff_eq!(throughput(0.914_213_562_373_095, 2.0), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_power_case2() {
        let (u, c) = case2();
        // Values from a direct clamp-sum evaluation.
        assert_abs_diff_eq!(
            aggregate_power(0.45, &u, &c),
            2.566_582_489_435_277_6,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            aggregate_power(0.70, &u, &c),
            1.002_380_952_380_952_6,
            epsilon = 1e-12
        );
        assert_eq!(aggregate_power(1e300, &u, &c), 0.0);
    }

    #[test]
    fn case2_throughputs() {
        let (u, c) = case2();
        let a = solve_allocation(&u, &c, Budget::default()).unwrap();
        assert!(a.overloaded);
        assert_abs_diff_eq!(a.total_power(), 1.0, epsilon = 1e-9);
        for (t, want) in a.throughputs.iter().zip([0.24, 0.58, 0.88, 1.11]) {
            assert_abs_diff_eq!(*t, want, epsilon = 0.01);
        }
        assert_abs_diff_eq!(a.eta_star, 0.70054, epsilon = 1e-4);
    }

    #[test]
    fn single_user_takes_everything() {
        let u = users(&[1.0], &[2.0], &[3.0]);
        let a = solve_allocation(&u, &[0.5], Budget::default()).unwrap();
        assert_abs_diff_eq!(a.powers[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(a.throughputs[0], 3f64.log2(), epsilon = 1e-9);
        assert_eq!(a.gammas[0], 0.0);
    }

    #[test]
    fn symmetric_pair_splits_evenly() {
        let u = users(&[1.0; 2], &[2.0; 2], &[2.0; 2]);
        let a = solve_allocation(&u, &[0.6, 0.6], Budget::default()).unwrap();
        assert_abs_diff_eq!(a.powers[0], 0.5, epsilon = 1e-10);
        assert_eq!(a.powers[0], a.powers[1]);
    }

    #[test]
    fn deterministic() {
        let (u, c) = case2();
        let a = solve_allocation(&u, &c, Budget::default()).unwrap();
        let b = solve_allocation(&u, &c, Budget::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn underloaded_gets_caps() {
        let u = users(&[1.0; 2], &[2.0; 2], &[0.5; 2]);
        let a = solve_allocation(&u, &[0.3, 0.2], Budget::default()).unwrap();
        assert!(!a.overloaded);
        assert_eq!(a.eta_star, 0.0);
        for (p, user) in a.powers.iter().zip(&u) {
            assert_eq!(*p, demand_cap(user));
        }
    }

    #[test]
    fn all_zero_bids_warn() {
        let u = users(&[1.0; 3], &[2.0; 3], &[2.0; 3]);
        let a = solve_allocation(&u, &[0.0; 3], Budget::default()).unwrap();
        assert_eq!(a.warning, Some(AllocationWarning::AllBidsZero));
        assert!(a.powers.iter().all(|&p| p == 0.0));
        assert_eq!(a.eta_star, 0.0);
    }

    #[test]
    fn zero_bid_user_gets_nothing_when_overloaded() {
        let u = users(&[1.0; 3], &[2.0; 3], &[2.0; 3]);
        let a = solve_allocation(&u, &[0.5, 0.0, 0.4], Budget::default()).unwrap();
        assert!(a.warning.is_none());
        assert_eq!(a.powers[1], 0.0);
        assert_abs_diff_eq!(a.total_power(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn paying_users_cannot_fill_budget() {
        let u = users(&[1.0; 2], &[2.0; 2], &[1.0, 3.0]);
        let a = solve_allocation(&u, &[0.5, 0.0], Budget::default()).unwrap();
        assert_eq!(a.warning, Some(AllocationWarning::BudgetNotExhausted));
        assert_eq!(a.powers, vec![0.5, 0.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let u = users(&[1.0; 2], &[2.0; 2], &[1.0; 2]);
        assert_eq!(
            solve_allocation(&[], &[], Budget::default()),
            Err(Error::NoUsers)
        );
        assert!(matches!(
            solve_allocation(&u, &[0.1], Budget::default()),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            solve_allocation(&u, &[0.1, -0.2], Budget::default()),
            Err(Error::InvalidBid { index: 1, .. })
        ));
        assert!(solve_allocation(&u, &[0.1, f64::NAN], Budget::default()).is_err());
    }

    #[test]
    fn flat_rate_examples() {
        let a = flat_rate_allocation(&users(&[1.0; 2], &[2.0; 2], &[10.0; 2]), Budget::default())
            .unwrap();
        assert_abs_diff_eq!(a.powers[0], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(a.powers[1], 0.5, epsilon = 1e-10);

        // 1/η − 1 + 1/η − 1/4 = 1  ⇒  η = 8/9.
        let a = flat_rate_allocation(
            &users(&[1.0; 2], &[1.0, 4.0], &[10.0; 2]),
            Budget::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(a.powers[0], 0.125, epsilon = 1e-10);
        assert_abs_diff_eq!(a.powers[1], 0.875, epsilon = 1e-10);
        assert_abs_diff_eq!(a.eta_star, 8.0 / 9.0, epsilon = 1e-10);

        let a = flat_rate_allocation(
            &users(&[1.0; 10], &[2.0; 10], &[1.5; 10]),
            Budget::default(),
        )
        .unwrap();
        for p in &a.powers {
            assert_abs_diff_eq!(*p, 0.1, epsilon = 1e-10);
        }
    }
}

//! Brute-force references for the analytic solvers.
//!
//! Both oracles scan a uniform grid, then rescan the two cells around the
//! incumbent with the same number of points. They recompute the clamp and
//! throughput formulas locally instead of calling into the solvers they check.

use crate::bidding::BeliefParams;
use crate::error::{Error, Result};
use crate::profile::{Budget, UserProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid("bounds must be finite with lo < hi"));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid("at least two steps are required"));
        }
        Ok(Self { lo, hi, steps })
    }

    fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.steps - 1) as f64
    }

    fn point(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.hi
        } else {
            self.lo + self.step() * k as f64
        }
    }

    /// Same resolution, centered on `x`, spanning one cell either side.
    fn refine_around(&self, x: f64) -> GridSpec {
        let h = self.step();
        GridSpec {
            lo: (x - h).max(self.lo),
            hi: (x + h).min(self.hi),
            steps: self.steps,
        }
    }

    /// Best point and its score; ties go to the later point when `later_wins`.
    fn scan<F: Fn(f64) -> f64>(&self, score: F, later_wins: bool) -> (f64, f64) {
        let mut best = (self.lo, f64::NEG_INFINITY);
        for k in 0..self.steps {
            let x = self.point(k);
            let s = score(x);
            if s > best.1 || (later_wins && s == best.1) {
                best = (x, s);
            }
        }
        best
    }
}

fn shannon(power: f64, quality: f64) -> f64 {
    (1.0 + quality * power).log2()
}

fn powers_at(eta: f64, users: &[UserProfile], bids: &[f64], caps: &[f64]) -> Vec<f64> {
    users
        .iter()
        .zip(bids)
        .zip(caps)
        .map(|((u, &c), &cap)| (c / eta - 1.0 / u.quality).max(0.0).min(cap))
        .collect()
}

/// Grid-search approximation of the allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAllocation {
    pub eta: f64,
    pub powers: Vec<f64>,
    pub throughputs: Vec<f64>,
    /// `Σ c_i T_i`.
    pub objective: f64,
}

/// Scans the budget dual over `grid` and keeps the level whose clamped
/// power vector comes closest to the budget (largest level on ties).
pub fn grid_allocation_oracle(
    users: &[UserProfile],
    bids: &[f64],
    budget: Budget,
    grid: GridSpec,
) -> GridAllocation {
    let phi = budget.phi();
    let caps: Vec<f64> = users
        .iter()
        .map(|u| (2f64.powf(u.demand) - 1.0) / u.quality)
        .collect();
    let miss = |eta: f64| -(powers_at(eta, users, bids, &caps).iter().sum::<f64>() - phi).abs();
    let (coarse, _) = grid.scan(miss, true);
    let (eta, _) = grid.refine_around(coarse).scan(miss, true);
    let powers = powers_at(eta, users, bids, &caps);
    let throughputs: Vec<f64> = users
        .iter()
        .zip(&powers)
        .map(|(u, &p)| shannon(p, u.quality))
        .collect();
    let objective = throughputs.iter().zip(bids).map(|(t, c)| t * c).sum();
    GridAllocation {
        eta,
        powers,
        throughputs,
        objective,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBid {
    /// Zero when no grid price yields positive utility.
    pub price: f64,
    pub utility: f64,
}

/// Argmax over `grid` of `(v − c)·clamp(log2(q c/η(c)), 0, b)` under the
/// simple belief.
pub fn grid_bid_oracle(user: &UserProfile, bp: &BeliefParams, grid: GridSpec) -> GridBid {
    let denom = 1.0 + 1.0 / bp.own_quality + bp.inverse_quality_sum;
    let utility = |c: f64| {
        if c <= 0.0 {
            return 0.0;
        }
        let eta = (c + bp.price_sum) / denom;
        let bits = (bp.own_quality * c / eta).log2().max(0.0).min(user.demand);
        (user.valuation - c) * bits
    };
    let (coarse, _) = grid.scan(utility, false);
    let (price, best) = grid.refine_around(coarse).scan(utility, false);
    if best > 0.0 {
        GridBid {
            price,
            utility: best,
        }
    } else {
        GridBid {
            price: 0.0,
            utility: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn users(q: &[f64], b: f64) -> Vec<UserProfile> {
        q.iter()
            .enumerate()
            .map(|(i, &q)| UserProfile::new(i, 1.0, q, b).unwrap())
            .collect()
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(1.0, 1.0, 10).is_err());
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
        assert!(GridSpec::new(0.0, f64::NAN, 10).is_err());
        let g = GridSpec::new(0.0, 1.0, 11).unwrap();
        assert_eq!(g.point(10), 1.0);
        assert!((g.point(3) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn case2_eta() {
        let u = users(&[1.0, 2.0, 3.0, 4.0], 1.5);
        let c = [0.83, 0.52, 0.43, 0.38];
        let g = grid_allocation_oracle(
            &u,
            &c,
            Budget::default(),
            GridSpec::new(0.01, 2.0, 20_000).unwrap(),
        );
        assert!((g.eta - 0.70).abs() < 0.005, "{}", g.eta);
        assert!((g.powers.iter().sum::<f64>() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn single_user_fills_budget() {
        let u = users(&[2.0], 3.0);
        let g = grid_allocation_oracle(
            &u,
            &[0.5],
            Budget::default(),
            GridSpec::new(0.01, 1.0, 10_000).unwrap(),
        );
        // 0.5/η − 0.5 = 1  ⇒  η = 1/3
        assert!((g.eta - 1.0 / 3.0).abs() < 1e-6);
        assert!((g.powers[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn symmetric_instance_is_even() {
        let u = users(&[2.0; 5], 2.0);
        let g = grid_allocation_oracle(
            &u,
            &[0.7; 5],
            Budget::default(),
            GridSpec::new(0.01, 2.0, 5_000).unwrap(),
        );
        assert!(g.powers.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn bid_oracle_exact_objective() {
        let u = UserProfile::new(0, 1.0, 2.0, 1.5).unwrap();
        let bp = BeliefParams::new(1.5, 1.5833, 2.0).unwrap();
        let grid = GridSpec::new(1e-4, 1.0, 10_000).unwrap();
        let g = grid_bid_oracle(&u, &bp, grid);
        assert!((g.price - 0.575).abs() < 1e-3, "{}", g.price);

        let denom = 1.0 + 0.5 + 1.5833;
        let f = |c: f64| (1.0 - c) * (2.0 * c * denom / (c + 1.5)).log2().clamp(0.0, 1.5);
        assert!(g.utility >= f(g.price - 1e-4) && g.utility >= f(g.price + 1e-4));
    }

    #[test]
    fn bid_oracle_saturated_user() {
        // c̄ ≈ 0.3262 for b = 0.1; utility rises until saturation then falls.
        let u = UserProfile::new(0, 1.0, 2.0, 0.1).unwrap();
        let bp = BeliefParams::new(1.5, 1.5, 2.0).unwrap();
        let g = grid_bid_oracle(&u, &bp, GridSpec::new(1e-4, 1.0, 10_000).unwrap());
        let cbar = 1.5 * 2f64.powf(0.1) / (6.0 - 2f64.powf(0.1));
        assert!((g.price - cbar).abs() < 1e-4);
    }

    #[test]
    fn bid_oracle_abstains() {
        let u = UserProfile::new(0, 0.2, 2.0, 1.0).unwrap();
        let bp = BeliefParams::new(1.5, 1.5, 2.0).unwrap();
        let g = grid_bid_oracle(&u, &bp, GridSpec::new(1e-4, 0.2, 1_000).unwrap());
        assert_eq!(g.price, 0.0);
    }
}

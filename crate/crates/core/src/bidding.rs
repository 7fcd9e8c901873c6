//! Optimal bidding against a belief about the cell condition.
//!
//! A user believes the budget dual will settle at `η(c)` when it bids `c`,
//! and therefore expects `clamp(log2(q·c/η(c)), 0, b)` bits. The simple
//! belief is the affine ratio `η(c) = (c + C)/(1 + 1/q + B)`, where `C` and
//! `B` aggregate the believed prices and inverse qualities of the users
//! expected to be served.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::profile::UserProfile;

/// Announced aggregates that define the simple belief of one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefParams {
    /// Sum of the believed prices of the other served users (`C`).
    pub price_sum: f64,
    /// Sum of the believed inverse qualities of the other served users (`B`).
    pub inverse_quality_sum: f64,
    pub own_quality: f64,
}

impl BeliefParams {
    pub fn new(price_sum: f64, inverse_quality_sum: f64, own_quality: f64) -> Result<Self> {
        if !(price_sum.is_finite() && price_sum >= 0.0) {
            return Err(Error::InvalidBelief(
                "price sum must be non-negative and finite",
            ));
        }
        if !(inverse_quality_sum.is_finite() && inverse_quality_sum >= 0.0) {
            return Err(Error::InvalidBelief(
                "inverse quality sum must be non-negative and finite",
            ));
        }
        if !(own_quality.is_finite() && own_quality > 0.0) {
            return Err(Error::InvalidBelief(
                "own quality must be positive and finite",
            ));
        }
        Ok(Self {
            price_sum,
            inverse_quality_sum,
            own_quality,
        })
    }

    /// `1 + 1/q + B`.
    fn denominator(&self) -> f64 {
        1.0 + 1.0 / self.own_quality + self.inverse_quality_sum
    }

    /// `q·(1 + 1/q + B)`: the limit of `q·c/η(c)` as `c` grows.
    fn ratio_limit(&self) -> f64 {
        self.own_quality * self.denominator()
    }
}

/// Which first-order condition the bid solver roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FocMode {
    /// `−log2(q c/η) + (v − c)(1/c − η′/η)`, the form that reproduces the
    /// published bid vectors.
    #[default]
    PaperFoc,
    /// The exact derivative of `(v − c)·log2(q c/η)`, which carries a `1/ln 2`
    /// on the second term.
    ExactLog2,
}

impl FocMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FocMode::PaperFoc => "paper_foc",
            FocMode::ExactLog2 => "exact_log2",
        }
    }
}

impl std::str::FromStr for FocMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper_foc" => Ok(FocMode::PaperFoc),
            "exact_log2" => Ok(FocMode::ExactLog2),
            other => Err(format!(
                "unknown foc mode `{other}` (expected paper_foc or exact_log2)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BidKind {
    InteriorFoc,
    BoundaryCbar,
    BoundaryValuation,
    Abstain,
}

impl BidKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BidKind::InteriorFoc => "interior_foc",
            BidKind::BoundaryCbar => "boundary_cbar",
            BidKind::BoundaryValuation => "boundary_valuation",
            BidKind::Abstain => "abstain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidResult {
    pub price: f64,
    pub kind: BidKind,
    pub believed_throughput: f64,
    /// `(v − price)·believed_throughput`.
    pub believed_utility: f64,
    /// Set when the belief carries no information about other users (`C = 0`)
    /// and the price is a nominal floor rather than a root.
    pub degenerate: bool,
}

/// The simple affine-ratio belief `η(c) = (c + C)/(1 + 1/q + B)`.
pub fn simple_belief(price: f64, bp: &BeliefParams) -> f64 {
    (price + bp.price_sum) / bp.denominator()
}

/// Throughput the user expects at `price`, clamped to `[0, demand]`.
pub fn believed_throughput(price: f64, bp: &BeliefParams, demand: f64) -> f64 {
    if price <= 0.0 {
        return 0.0;
    }
    let eta = simple_belief(price, bp);
    (bp.own_quality * price / eta).log2().clamp(0.0, demand)
}

/// Believed power `clamp(c/η − 1/q, 0, cap)` for an arbitrary belief value.
pub fn believed_power(price: f64, eta: f64, quality: f64, demand: f64) -> f64 {
    let cap = (demand * LN_2).exp_m1() / quality;
    (price / eta - 1.0 / quality).clamp(0.0, cap)
}

/// Price range a rational user considers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleInterval {
    /// Price below which the believed throughput is zero.
    pub lower: f64,
    /// Cheapest price believed to meet the full demand (`c̄`).
    pub saturation: f64,
    /// `min(c̄, v)`.
    pub upper: f64,
    /// The belief has `C = 0`, so believed throughput does not depend on price.
    pub degenerate: bool,
}

impl FeasibleInterval {
    pub fn is_empty(&self) -> bool {
        self.upper <= self.lower
    }
}

/// Closed-form feasible interval under the simple belief. Infinite bounds
/// mean the corresponding throughput level is never reached.
pub fn feasible_interval(bp: &BeliefParams, valuation: f64, demand: f64) -> FeasibleInterval {
    let limit = bp.ratio_limit();
    let full = demand.exp2();
    // With C = 0 the believed throughput is the constant log2(q(1 + 1/q + B)),
    // which is positive because that ratio always exceeds 1.
    if bp.price_sum == 0.0 {
        return FeasibleInterval {
            lower: 0.0,
            saturation: 0.0,
            upper: 0.0,
            degenerate: true,
        };
    }
    let lower = if limit > 1.0 {
        bp.price_sum / (limit - 1.0)
    } else {
        f64::INFINITY
    };
    let saturation = if limit > full {
        full * bp.price_sum / (limit - full)
    } else {
        f64::INFINITY
    };
    FeasibleInterval {
        lower,
        saturation,
        upper: saturation.min(valuation),
        degenerate: false,
    }
}

fn residual_unchecked(price: f64, bp: &BeliefParams, valuation: f64, mode: FocMode) -> f64 {
    let log_term = (bp.own_quality * price / simple_belief(price, bp)).log2();
    // 1/c − η′/η with η′/η = 1/(c + C)
    let marginal = 1.0 / price - 1.0 / (price + bp.price_sum);
    let scale = match mode {
        FocMode::PaperFoc => 1.0,
        FocMode::ExactLog2 => 1.0 / LN_2,
    };
    -log_term + scale * (valuation - price) * marginal
}

/// First-order condition of the bidding problem at `price`.
///
/// Defined for `lower < price ≤ v`, where `lower` is the zero-throughput
/// threshold of the belief.
pub fn foc_residual(price: f64, bp: &BeliefParams, valuation: f64, mode: FocMode) -> Result<f64> {
    let limit = bp.ratio_limit();
    let lower = if bp.price_sum == 0.0 {
        0.0
    } else if limit > 1.0 {
        bp.price_sum / (limit - 1.0)
    } else {
        f64::INFINITY
    };
    if !(price.is_finite() && price > lower && price <= valuation) {
        return Err(Error::Domain {
            price,
            lower,
            upper: valuation,
        });
    }
    Ok(residual_unchecked(price, bp, valuation, mode))
}

const ROOT_TOL: f64 = 1e-10;
const DEGENERATE_PRICE_FRACTION: f64 = 1e-6;

fn result_at(price: f64, kind: BidKind, bp: &BeliefParams, user: &UserProfile) -> BidResult {
    let t = believed_throughput(price, bp, user.demand);
    BidResult {
        price,
        kind,
        believed_throughput: t,
        believed_utility: (user.valuation - price) * t,
        degenerate: false,
    }
}

fn abstain() -> BidResult {
    BidResult {
        price: 0.0,
        kind: BidKind::Abstain,
        believed_throughput: 0.0,
        believed_utility: 0.0,
        degenerate: false,
    }
}

/// Best bid for `user` under the simple belief `bp`.
///
/// Roots the first-order condition on the open feasible interval by
/// bisection. When the residual is still non-negative at the upper end
/// `min(c̄, v)`, there is no interior root and the user bids that boundary.
pub fn solve_bid(user: &UserProfile, bp: &BeliefParams, mode: FocMode) -> BidResult {
    let v = user.valuation;
    let interval = feasible_interval(bp, v, user.demand);

    if interval.degenerate {
        let mut r = result_at(
            DEGENERATE_PRICE_FRACTION * v,
            BidKind::InteriorFoc,
            bp,
            user,
        );
        r.degenerate = true;
        return r;
    }
    if interval.is_empty() {
        return abstain();
    }

    let upper = interval.upper;
    let boundary_kind = if interval.saturation <= v {
        BidKind::BoundaryCbar
    } else {
        BidKind::BoundaryValuation
    };

    let f = |c: f64| residual_unchecked(c, bp, v, mode);
    let mut lo = interval.lower * (1.0 + 1e-9);
    let mut hi = upper;
    if lo >= hi || f(hi) >= 0.0 || f(lo) <= 0.0 {
        return result_at(upper, boundary_kind, bp, user);
    }
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result_at(0.5 * (lo + hi), BidKind::InteriorFoc, bp, user)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `η(c₂) < η(c₁)`.
    Decreasing,
    /// Both points believe an interior allocation but `η` did not increase.
    NotStrictlyIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    /// Index of the first price of the offending adjacent pair.
    pub index: usize,
    pub kind: ViolationKind,
}

fn interior_regime(price: f64, eta: f64, quality: f64, demand: f64) -> bool {
    let t = (quality * price / eta).log2();
    t > 0.0 && t < demand
}

/// Checks a sampled belief for consistency: non-decreasing everywhere and
/// strictly increasing between prices where the believed allocation is
/// positive but below demand. Returns every offending adjacent pair.
pub fn check_belief_consistency(
    prices: &[f64],
    etas: &[f64],
    quality: f64,
    demand: f64,
) -> Result<Vec<Violation>> {
    if prices.len() != etas.len() {
        return Err(Error::DimensionMismatch {
            expected: prices.len(),
            got: etas.len(),
        });
    }
    if prices.len() < 2 {
        return Err(Error::InvalidGrid("at least two prices are required"));
    }
    if prices
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidGrid("prices must be strictly increasing"));
    }
    let mut violations = Vec::new();
    for i in 0..prices.len() - 1 {
        let (e1, e2) = (etas[i], etas[i + 1]);
        if e2 < e1 {
            violations.push(Violation {
                index: i,
                kind: ViolationKind::Decreasing,
            });
        } else if e2 == e1
            && interior_regime(prices[i], e1, quality, demand)
            && interior_regime(prices[i + 1], e2, quality, demand)
        {
            violations.push(Violation {
                index: i,
                kind: ViolationKind::NotStrictlyIncreasing,
            });
        }
    }
    Ok(violations)
}

//! Python bindings. Users are passed as sequences of `(v, q, b)` tuples and
//! receive ids by position.

use pricefill_core as core;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn users_from(rows: &[(f64, f64, f64)]) -> PyResult<Vec<core::UserProfile>> {
    rows.iter()
        .enumerate()
        .map(|(i, &(v, q, b))| core::UserProfile::new(i, v, q, b).map_err(err))
        .collect()
}

fn user_from(row: (f64, f64, f64)) -> PyResult<core::UserProfile> {
    core::UserProfile::new(0, row.0, row.1, row.2).map_err(err)
}

fn budget(phi: f64) -> PyResult<core::Budget> {
    core::Budget::new(phi).map_err(err)
}

fn mode(name: &str) -> PyResult<core::FocMode> {
    name.parse().map_err(|e: String| PyValueError::new_err(e))
}

fn belief(
    price_sum: f64,
    inverse_quality_sum: f64,
    own_quality: f64,
) -> PyResult<core::BeliefParams> {
    core::BeliefParams::new(price_sum, inverse_quality_sum, own_quality).map_err(err)
}

fn scenario(users: &[(f64, f64, f64)], phi: f64, foc_mode: &str) -> PyResult<core::Scenario> {
    core::Scenario::new(users_from(users)?, budget(phi)?, mode(foc_mode)?).map_err(err)
}

#[pyclass(name = "Allocation", get_all, frozen)]
pub struct PyAllocation {
    powers: Vec<f64>,
    eta_star: f64,
    gammas: Vec<f64>,
    throughputs: Vec<f64>,
    overloaded: bool,
    /// `None`, `"all_bids_zero"` or `"budget_not_exhausted"`.
    warning: Option<&'static str>,
}

impl From<&core::Allocation> for PyAllocation {
    fn from(a: &core::Allocation) -> Self {
        Self {
            powers: a.powers.clone(),
            eta_star: a.eta_star,
            gammas: a.gammas.clone(),
            throughputs: a.throughputs.clone(),
            overloaded: a.overloaded,
            warning: a.warning.map(|w| match w {
                core::AllocationWarning::AllBidsZero => "all_bids_zero",
                core::AllocationWarning::BudgetNotExhausted => "budget_not_exhausted",
            }),
        }
    }
}

#[pymethods]
impl PyAllocation {
    fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }

    fn __repr__(&self) -> String {
        format!(
            "Allocation(eta_star={}, powers={:?})",
            self.eta_star, self.powers
        )
    }
}

#[pyclass(name = "BidResult", get_all, frozen)]
pub struct PyBidResult {
    price: f64,
    kind: &'static str,
    believed_throughput: f64,
    believed_utility: f64,
    degenerate: bool,
}

impl From<&core::BidResult> for PyBidResult {
    fn from(r: &core::BidResult) -> Self {
        Self {
            price: r.price,
            kind: r.kind.as_str(),
            believed_throughput: r.believed_throughput,
            believed_utility: r.believed_utility,
            degenerate: r.degenerate,
        }
    }
}

#[pymethods]
impl PyBidResult {
    fn __repr__(&self) -> String {
        format!("BidResult(price={}, kind='{}')", self.price, self.kind)
    }
}

#[pyclass(name = "RoundOutcome", frozen)]
pub struct PyRoundOutcome {
    inner: core::RoundOutcome,
}

#[pymethods]
impl PyRoundOutcome {
    #[getter]
    fn bids(&self) -> Vec<f64> {
        self.inner.bids.clone()
    }

    #[getter]
    fn paid(&self) -> Vec<f64> {
        self.inner.paid.clone()
    }

    #[getter]
    fn allocation(&self) -> PyAllocation {
        (&self.inner.allocation).into()
    }

    #[getter]
    fn utilities(&self) -> Vec<f64> {
        self.inner.utilities.clone()
    }

    #[getter]
    fn revenue(&self) -> f64 {
        self.inner.revenue
    }

    #[getter]
    fn social_welfare(&self) -> f64 {
        self.inner.social_welfare
    }

    #[getter]
    fn bid_results(&self) -> Vec<PyBidResult> {
        self.inner.bid_results.iter().map(Into::into).collect()
    }

    fn mean_bid(&self) -> f64 {
        self.inner.mean_bid()
    }

    fn __repr__(&self) -> String {
        format!(
            "RoundOutcome(bids={:?}, social_welfare={})",
            self.inner.bids, self.inner.social_welfare
        )
    }
}

#[pyfunction]
fn demand_cap(quality: f64, demand: f64) -> PyResult<f64> {
    Ok(core::demand_cap(&user_from((1.0, quality, demand))?))
}

#[pyfunction]
fn throughput(power: f64, quality: f64) -> f64 {
    core::throughput(power, quality)
}

#[pyfunction]
fn aggregate_power(eta: f64, users: Vec<(f64, f64, f64)>, bids: Vec<f64>) -> PyResult<f64> {
    Ok(core::aggregate_power(eta, &users_from(&users)?, &bids))
}

#[pyfunction]
#[pyo3(signature = (users, bids, budget=1.0))]
fn solve_allocation(
    users: Vec<(f64, f64, f64)>,
    bids: Vec<f64>,
    budget: f64,
) -> PyResult<PyAllocation> {
    let a =
        core::solve_allocation(&users_from(&users)?, &bids, self::budget(budget)?).map_err(err)?;
    Ok((&a).into())
}

#[pyfunction]
#[pyo3(signature = (users, budget=1.0))]
fn flat_rate_allocation(users: Vec<(f64, f64, f64)>, budget: f64) -> PyResult<PyAllocation> {
    let a = core::flat_rate_allocation(&users_from(&users)?, self::budget(budget)?).map_err(err)?;
    Ok((&a).into())
}

/// Solves the allocation (optionally overriding powers) and returns
/// `(condition, residual, tolerance, passed)` rows.
#[pyfunction]
#[pyo3(signature = (users, bids, budget=1.0, powers=None))]
fn verify_kkt(
    users: Vec<(f64, f64, f64)>,
    bids: Vec<f64>,
    budget: f64,
    powers: Option<Vec<f64>>,
) -> PyResult<Vec<(&'static str, f64, f64, bool)>> {
    let users = users_from(&users)?;
    let budget = self::budget(budget)?;
    let mut a = core::solve_allocation(&users, &bids, budget).map_err(err)?;
    if let Some(p) = powers {
        a.throughputs = users
            .iter()
            .zip(&p)
            .map(|(u, &p)| core::throughput(p, u.quality))
            .collect();
        a.powers = p;
    }
    let report = core::verify_kkt(&a, &users, &bids, budget);
    Ok(report
        .conditions()
        .into_iter()
        .map(|(name, c)| (name, c.residual, c.tolerance, c.passed))
        .collect())
}

#[pyfunction]
fn simple_belief(
    price: f64,
    price_sum: f64,
    inverse_quality_sum: f64,
    own_quality: f64,
) -> PyResult<f64> {
    Ok(core::simple_belief(
        price,
        &belief(price_sum, inverse_quality_sum, own_quality)?,
    ))
}

/// Returns `(lower, saturation, upper, degenerate)`.
#[pyfunction]
fn feasible_interval(
    user: (f64, f64, f64),
    price_sum: f64,
    inverse_quality_sum: f64,
) -> PyResult<(f64, f64, f64, bool)> {
    let u = user_from(user)?;
    let iv = core::feasible_interval(
        &belief(price_sum, inverse_quality_sum, u.quality)?,
        u.valuation,
        u.demand,
    );
    Ok((iv.lower, iv.saturation, iv.upper, iv.degenerate))
}

#[pyfunction]
#[pyo3(signature = (price, user, price_sum, inverse_quality_sum, foc_mode="paper_foc"))]
fn foc_residual(
    price: f64,
    user: (f64, f64, f64),
    price_sum: f64,
    inverse_quality_sum: f64,
    foc_mode: &str,
) -> PyResult<f64> {
    let u = user_from(user)?;
    let bp = belief(price_sum, inverse_quality_sum, u.quality)?;
    core::foc_residual(price, &bp, u.valuation, mode(foc_mode)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (user, price_sum, inverse_quality_sum, foc_mode="paper_foc"))]
fn solve_bid(
    user: (f64, f64, f64),
    price_sum: f64,
    inverse_quality_sum: f64,
    foc_mode: &str,
) -> PyResult<PyBidResult> {
    let u = user_from(user)?;
    let bp = belief(price_sum, inverse_quality_sum, u.quality)?;
    Ok((&core::solve_bid(&u, &bp, mode(foc_mode)?)).into())
}

/// Returns one `(price_sum, inverse_quality_sum)` pair per user.
#[pyfunction]
#[pyo3(signature = (users, budget=1.0))]
fn announce_beliefs(users: Vec<(f64, f64, f64)>, budget: f64) -> PyResult<Vec<(f64, f64)>> {
    let s = scenario(&users, budget, "paper_foc")?;
    Ok(core::announce_beliefs(&s)
        .into_iter()
        .map(|bp| (bp.price_sum, bp.inverse_quality_sum))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (users, budget=1.0, foc_mode="paper_foc"))]
fn run_round(users: Vec<(f64, f64, f64)>, budget: f64, foc_mode: &str) -> PyResult<PyRoundOutcome> {
    let inner = core::run_round(&scenario(&users, budget, foc_mode)?).map_err(err)?;
    Ok(PyRoundOutcome { inner })
}

#[pyfunction]
#[pyo3(signature = (users, price, budget=1.0))]
fn flat_rate_round(
    users: Vec<(f64, f64, f64)>,
    price: f64,
    budget: f64,
) -> PyResult<PyRoundOutcome> {
    let inner =
        core::flat_rate_round(&scenario(&users, budget, "paper_foc")?, price).map_err(err)?;
    Ok(PyRoundOutcome { inner })
}

/// Returns `(r_grid, mean_sw_differential, mean_sw_flat)`.
#[pyfunction]
#[pyo3(signature = (
    n_users=10, demand=1.5, quality=2.0, r_grid=None, reps=50, seed=42,
    foc_mode="paper_foc", budget=1.0, parallel=true
))]
#[allow(clippy::too_many_arguments)]
fn welfare_sweep(
    py: Python<'_>,
    n_users: usize,
    demand: f64,
    quality: f64,
    r_grid: Option<Vec<f64>>,
    reps: usize,
    seed: u64,
    foc_mode: &str,
    budget: f64,
    parallel: bool,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let defaults = core::SweepConfig::default();
    let cfg = core::SweepConfig {
        n_users,
        demand,
        quality,
        r_grid: r_grid.unwrap_or(defaults.r_grid),
        reps,
        seed,
        foc_mode: mode(foc_mode)?,
        budget: self::budget(budget)?,
    };
    let execution = if parallel {
        core::Execution::Parallel
    } else {
        core::Execution::Sequential
    };
    let r = py
        .detach(|| core::welfare_sweep(&cfg, execution))
        .map_err(err)?;
    Ok((r.r_grid, r.mean_sw_differential, r.mean_sw_flat))
}

#[pymodule]
pub fn pricefill(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAllocation>()?;
    m.add_class::<PyBidResult>()?;
    m.add_class::<PyRoundOutcome>()?;
    m.add_function(wrap_pyfunction!(demand_cap, m)?)?;
    m.add_function(wrap_pyfunction!(throughput, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_power, m)?)?;
    m.add_function(wrap_pyfunction!(solve_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(flat_rate_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(verify_kkt, m)?)?;
    m.add_function(wrap_pyfunction!(simple_belief, m)?)?;
    m.add_function(wrap_pyfunction!(feasible_interval, m)?)?;
    m.add_function(wrap_pyfunction!(foc_residual, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bid, m)?)?;
    m.add_function(wrap_pyfunction!(announce_beliefs, m)?)?;
    m.add_function(wrap_pyfunction!(run_round, m)?)?;
    m.add_function(wrap_pyfunction!(flat_rate_round, m)?)?;
    m.add_function(wrap_pyfunction!(welfare_sweep, m)?)?;
    Ok(())
}

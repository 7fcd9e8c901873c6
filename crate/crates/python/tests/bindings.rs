use std::ffi::CString;
use std::sync::Once;

use pricefill::pricefill;
use pyo3::prelude::*;

fn python() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        pyo3::append_to_inittab!(pricefill);
        Python::initialize();
    });
}

fn run(code: &str) {
    python();
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        py.run(&code, None, None).unwrap_or_else(|e| panic!("{e}"));
    });
}

#[test]
fn case2_round() {
    run(r#"
import pricefill
out = pricefill.run_round([(1.0, q, 1.5) for q in (1.0, 2.0, 3.0, 4.0)])
want = [0.83, 0.52, 0.43, 0.38]
assert all(abs(a - b) <= 0.01 for a, b in zip(out.bids, want)), out.bids
assert abs(out.allocation.total_power() - 1.0) < 1e-9
assert out.bid_results[3].kind == "interior_foc"
assert all(row[3] for row in pricefill.verify_kkt([(1.0, q, 1.5) for q in (1.0, 2.0, 3.0, 4.0)], out.bids))
"#);
}

#[test]
fn core_errors_become_value_errors() {
    run(r#"
import pricefill
for call in (
    lambda: pricefill.solve_allocation([(1.0, 2.0, 1.0)], [0.5, 0.5]),
    lambda: pricefill.solve_allocation([(1.0, -2.0, 1.0)], [0.5]),
    lambda: pricefill.solve_bid((1.0, 2.0, 1.0), 1.0, 1.0, "bogus"),
    lambda: pricefill.welfare_sweep(reps=0),
):
    try:
        call()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
"#);
}

#[test]
fn sweep_is_deterministic() {
    run(r#"
import pricefill
a = pricefill.welfare_sweep(r_grid=[1.0, 2.0], reps=5, seed=3)
b = pricefill.welfare_sweep(r_grid=[1.0, 2.0], reps=5, seed=3, parallel=False)
assert a == b
"#);
}

"""Smoke test for the pricefill extension module."""

import math

import pricefill

CASE2 = [(1.0, q, 1.5) for q in (1.0, 2.0, 3.0, 4.0)]


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b)) and len(a) == len(b)


def main():
    out = pricefill.run_round(CASE2)
    assert close(out.bids, [0.83, 0.52, 0.43, 0.38], 0.01), out.bids
    alloc = out.allocation
    assert close(alloc.throughputs, [0.24, 0.58, 0.88, 1.11], 0.01), alloc.throughputs
    assert math.isclose(alloc.total_power(), 1.0, abs_tol=1e-9)
    assert [r.kind for r in out.bid_results][0] == "interior_foc"

    checks = pricefill.verify_kkt(CASE2, out.bids)
    assert all(passed for _, _, _, passed in checks), checks
    bad = pricefill.verify_kkt(CASE2, out.bids, powers=[0.25] * 4)
    assert not all(passed for _, _, _, passed in bad)

    assert math.isclose(pricefill.demand_cap(2.0, 1.5), (2**1.5 - 1) / 2)
    lower, _, upper, _ = pricefill.feasible_interval((1.0, 2.0, 0.1), 1.5, 1.5)
    assert math.isclose(lower, 0.3) and math.isclose(upper, 0.32621475120577875)

    bid = pricefill.solve_bid((1.0, 2.0, 1.5), 1.5, 1.0 + 1 / 3 + 1 / 4, "exact_log2")
    assert 0.0 < bid.price < 1.0

    try:
        pricefill.solve_allocation(CASE2, [0.5, 0.5])
    except ValueError:
        pass
    else:
        raise AssertionError("dimension mismatch not reported")

    grid, diff, flat = pricefill.welfare_sweep(reps=10, seed=7)
    assert len(grid) == len(diff) == len(flat) == 6
    assert pricefill.welfare_sweep(reps=10, seed=7, parallel=False) == (grid, diff, flat)

    print("python smoke test passed")


if __name__ == "__main__":
    main()

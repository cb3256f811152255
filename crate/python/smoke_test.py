"""Smoke test for the Python bindings. Run after `maturin develop` or
installing the wheel built from crates/py."""

import math

import mimo_outage_py as mo


def main():
    p = mo.outage_exact(1, 1, 1.0, 0.0)
    assert abs(p["probability"] - (1 - math.exp(-1))) < 1e-9, p
    assert p["method"] == "exact"

    full = mo.outage_exact(3, 3, 2.0, 15.0, t_eigs=[2.3, 0.5, 0.2], r_eigs=[2.7, 0.2, 0.1])
    asym = mo.outage_asymptotic(3, 3, 2.0, 15.0, t_eigs=[2.3, 0.5, 0.2], r_eigs=[2.7, 0.2, 0.1])
    assert 0 < full["probability"] < asym

    p_hat, se = mo.outage_monte_carlo(3, 2, 2.0, 0.0, samples=200_000, seed=3)
    exact = mo.outage_exact(3, 2, 2.0, 0.0)["probability"]
    assert abs(p_hat - exact) <= 4 * se, (p_hat, se, exact)

    assert mo.diversity_order(3, 2) == 6
    assert mo.coding_gain(1, 1, 1.0) == 1.0

    records = mo.verify(only=["remark1", "embedding"])
    assert records and all(r["passed"] for r in records)

    try:
        mo.outage_exact(2, 2, 1.0, 0.0, t_eigs=[1.5, 1.5])
    except ValueError:
        pass
    else:
        raise AssertionError("invalid spectrum accepted")

    print("ok")


if __name__ == "__main__":
    main()

"""Smoke test for the kdvinv extension module.

Build and install first, e.g. `pip install ./crates/python`, then run
`python python/smoke_test.py`.
"""

import math

import kdvinv

KDV = {"alpha": 0.1, "beta": 0.1}
SOLITON = {"family": "kdv_soliton", "amplitude": 1.0}


def main():
    k = kdvinv.elliptic_k(0.5)
    assert abs(k - 1.8540746773013719) < 1e-14, k
    sn, cn, dn = kdvinv.jacobi_sn_cn_dn(0.7, 0.5)
    assert abs(sn * sn + cn * cn - 1.0) < 1e-14

    x = [-2.0, 0.0, 1.5]
    up = kdvinv.sample(SOLITON, KDV, x)
    down = kdvinv.sample(SOLITON, KDV, x, inverted=True)
    assert up[1] == 1.0
    assert all(a == -b for a, b in zip(up, down))

    rep = kdvinv.residual(SOLITON, {"kind": "kdv"}, KDV)
    assert rep["passed"] and rep["relative"] <= 1e-8, rep
    bad = kdvinv.residual(SOLITON, {"kind": "gardner"}, KDV)
    assert not bad["passed"] and bad["relative"] >= 1e-3, bad

    inv = kdvinv.inversion_defect({"kind": "kdv2"}, KDV, seed=3)
    assert inv["relative"] <= 1e-13, inv

    fit = kdvinv.fit("sech2", ["B", "V"], {"kind": "kdv"}, KDV, {"a": 1.0, "b": 0.7, "v": 1.0})
    assert fit["converged"], fit
    assert abs(fit["coefficients"]["b"] - math.sqrt(0.75)) < 1e-8
    assert abs(fit["coefficients"]["v"] - 1.05) < 1e-8

    run = kdvinv.evolve(SOLITON, {"kind": "kdv"}, KDV, n=256, dt=0.05, t_end=2.0)
    assert run["times"] == [0.0, 2.0], run["times"]
    assert run["monitors"]["mass_drift"] <= 1e-8

    try:
        kdvinv.sample({"family": "kdv_soliton", "amplitude": -1.0}, KDV, x)
    except ValueError as e:
        assert "alpha" in str(e)
    else:
        raise AssertionError("negative amplitude with positive alpha must fail")

    print("kdvinv smoke test: ok")


if __name__ == "__main__":
    main()

"""Smoke test for the parashear Python bindings.

Build and install first:  maturin develop -m crates/py/Cargo.toml --release
"""
import json
import math

import parashear_py as ps


def main():
    ss = ps.SkewShift.golden()
    f = ps.RoofFunction.default()
    assert ss.continued_fraction(10) == [1] * 10
    assert ps.SkewShift.silver().continued_fraction(5) == [2] * 5
    assert abs(f(0.25, 0.0) - 1.3) < 1e-12
    assert 0.69 < f.floor <= 0.7

    x, y = 0.123, 0.456
    xn, yn = ss.iterate(10, x, y)
    lhs = ps.birkhoff_sum(ss, f, 25, x, y)
    rhs = ps.birkhoff_sum(ss, f, 10, x, y) + ps.birkhoff_sum(ss, f, 15, xn, yn)
    assert abs(lhs - rhs) < 1e-9

    rows, expo = ps.shear_sequence(ss, f, (0.3, 0.6), (0.3, 0.6 - 1e-3), 100_000)
    assert rows[0][0] == 1000 and len(rows) == 100 and expo < 0.65

    r1 = json.loads(ps.heis_r1prime(ss, f, (0.3, 0.6), (0.3, 0.6 - 1e-3), 0.3, delta=2e-3))
    assert r1["schema"] == 1 and r1["pass"]
    lift = json.loads(ps.lift_strong_r(ss, f, (0.3, 0.6, 0.4), (0.3, 0.6 - 1e-3, 0.4), 0.3, delta=2e-3))
    assert lift["pass"] and abs(lift["residuals"]["p_M"]) >= 0.5

    try:
        ps.heis_r1prime(ss, ps.RoofFunction.constant(1.0), (0.3, 0.6), (0.3, 0.6 - 1e-9), 0.3)
    except ValueError as e:
        assert "constant" in str(e)
    else:
        raise AssertionError("constant roof accepted")

    cb = json.loads(ps.chain_basis("sl2sl2"))
    assert sorted(len(c) for c in cb["chains"]) == [3, 3]
    assert ps.gr([[0, 1, 0], [0, 0, 1], [0, 0, 0]], _sl3_basis()) == 13

    cq = json.loads(ps.cq_verify("sl2sl2", 0.1, 100))
    assert cq["pass"] and all(w["fraction"] == 1.0 for w in cq["windows"])

    hd = json.loads(ps.horo_divergence(0.0, 1e-4, 0.0, 5000.0))
    assert hd["residuals"]["max_D_comp"] < 1e-2 <= hd["residuals"]["D_raw_final"]
    assert ps.c0() == 1 / 32

    sg = json.loads(ps.sigma_witness(1e-31, 0.0, 0.1))
    assert math.isclose(abs(sg["residuals"]["p_M"]), 1.0)
    print("python smoke test: ok")


def _sl3_basis():
    basis = []
    for i in range(3):
        for j in range(3):
            if i != j:
                m = [[0.0] * 3 for _ in range(3)]
                m[i][j] = 1.0
                basis.append(m)
    for k in range(2):
        m = [[0.0] * 3 for _ in range(3)]
        m[k][k], m[k + 1][k + 1] = 1.0, -1.0
        basis.append(m)
    return basis


if __name__ == "__main__":
    main()

"""Smoke test for the doubling_py extension.

Build and run from the workspace root:

    cargo build -p doubling_py --release --features extension-module
    cp target/release/libdoubling_py.so python/doubling_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import doubling_py as d  # noqa: E402


def main():
    p = d.Poly("z1*z2 - 0.01", 2)
    assert p.n == 2 and p.degree == 2
    assert abs(p.eval([0.1, 0.1])) < 1e-15
    assert p.gradient([1j, 2.0]) == [2.0, 1j]

    cover = d.WhitneyCover([[0.0, 0.0, 0.0]], 1.0 / 16.0)
    assert len(cover) > 0 and cover.stop_verified
    assert len(cover) <= cover.count_bound()
    chain = cover.find_chain([0.9, 0.9, 0.9], [-0.9, -0.9, -0.9])
    assert chain[0] == cover.locate([0.9, 0.9, 0.9])
    assert json.loads(cover.to_json())
    r = d.intersection_ball_radius([0.0], 1.0, [1.5], 1.0)
    assert abs(r - 0.25) < 1e-15

    assert [d.eulerian(4, k) for k in range(4)] == [1, 11, 11, 1]
    row = [1]
    for n in range(1, 21):
        row = [(k + 1) * (row[k] if k < len(row) else 0) + (n - k) * (row[k - 1] if k >= 1 else 0) for k in range(n)]
    assert d.eulerian(20, 10) == row[10]
    z = 0.3 + 0.2j
    assert abs(d.polylog_neg(1, z) - z / (1 - z) ** 2) < 1e-14
    assert abs(d.tail_sum(1, 0.5) - 1.5) < 1e-14
    assert abs(d.c_p_constant(1, 0.5, 0.25) - 36.0) < 1e-12
    assert d.bezout_valency(3, 2) == 6
    k = d.kappa_lower(50.0, 0.5, 1)
    assert math.isfinite(k) and k > 0

    q = d.Poly("z1^2 + z2^2", 2)
    atlas = d.Atlas(q, 0.25, mode="covering", verify_samples=30)
    s = json.loads(atlas.summary())
    assert s["kappa"] == atlas.kappa > 0
    a, b = [0.5, 0.0], [0.0, 0.5]
    charts, rhos = atlas.chain_between(a, b)
    assert len(rhos) == len(charts) - 1
    bound, ok = atlas.kobayashi_bound(a, b)
    assert ok and math.isfinite(bound)
    assert atlas.coverage(200, seed=1) == 1.0
    log_bound, path = atlas.chain_bound(b, 1, 0, 0.3)
    assert math.isfinite(log_bound) and path

    rep = d.cover_cube(3, [[0.0, 0.5, -0.25]], 1.0 / 32.0, samples=300)
    assert rep.passed, rep.to_table()
    rep = d.experiment_quadric(3, [0.1, 0.05], samples=300)
    assert rep.passed and rep.to_json() == d.experiment_quadric(3, [0.05, 0.1], samples=300).to_json()
    assert d.doubling_bound(dc=50.0).passed
    assert d.verify(samples=500).passed

    try:
        d.Poly("z3", 2)
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range variable accepted")

    print("smoke test: ok")


if __name__ == "__main__":
    main()

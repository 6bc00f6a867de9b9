"""Smoke test for the pyffrestrict extension.

Build and install first:

    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pyffrestrict-*.whl
    python python/smoke_test.py
"""

import cmath
import json
import math

import pyffrestrict as ff


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def check_transforms():
    p, n = 7, 2
    vals = [complex(i % 5, -(i % 3)) for i in range(p**n)]
    back = ff.idft(p, n, ff.dft(p, n, vals))
    assert all(close(b, v * p**n) for b, v in zip(back, vals))
    lhs = sum(abs(v) ** 2 for v in ff.dft(p, n, vals))
    rhs = p**n * sum(abs(v) ** 2 for v in vals)
    assert close(lhs, rhs)
    # one-dimensional transform against the defining sum
    q = 11
    f = [complex(math.sin(k), k / 3) for k in range(q)]
    direct = [sum(f[x] * cmath.exp(-2j * math.pi * x * xi / q) for x in range(q)) for xi in range(q)]
    assert all(close(a, b, 1e-10) for a, b in zip(ff.dft(q, 1, f), direct))
    assert ff.index_to_point(5, 3, ff.point_to_index(5, [1, 2, 3])) == [1, 2, 3]


def check_sets():
    par = ff.PointSet.paraboloid(13, 2)
    assert len(par) == 13
    mags = [abs(v) for v in par.spectrum()[1:]]
    assert all(m < 1e-8 or abs(m - math.sqrt(13)) < 1e-8 for m in mags)
    cube = ff.PointSet.cube(101, 1, 0.6, 0.4)
    assert cube.members == [1, 2, 3, 4, 5, 6]
    star = cube.bohr()
    assert 0 in star and 1 in star and 100 in star


def check_measures():
    mu = ff.Measure.combined(401, 1, 0.6, 0.4, 1)
    assert close(sum(mu.weights), 1.0)
    rep = mu.spectral_report()
    assert 0 < rep["alpha_eff"] < 1
    exact = mu.rstar_2_2_exact()
    assert close(exact["value"], math.sqrt(401 * max(mu.weights)))
    it = mu.rstar_lower_iterate(float("inf"), restarts=2, seed=3)
    assert abs(it["value"] - 1.0) < 1e-9
    wit = mu.rstar_witness_cube(3.0)
    assert wit["kind"] == "witness" and wit["value"] > 0
    kb = mu.kernel_bounds()
    assert kb["c_infty"] <= 1.01 and kb["c_two"] <= 1.01
    uni = ff.Measure.uniform(11, 2)
    assert uni.spectral_report()["beta_eff"] == "inf"


def check_exponents():
    assert close(ff.critical_q(1, 0.5, 0.5), 6.0)
    assert close(ff.sharpness_tau(2, 1.2, 0.8, 4.0), 0.1)
    assert ff.necessary_q(1.0, 1, 0.5, 0.5) == float("inf")
    assert close(ff.necessary_q(float("inf"), 1, 0.5, 0.5), 3.0)
    assert close(ff.corollary_q_bound(1.0, 2), 8.0)
    assert ff.primes_in_range(100, 1000, 3) == [101, 317, 997]
    slope, _, r2 = ff.fit_loglog_slope([(p, p**0.5) for p in (101, 211, 401)])
    assert abs(slope - 0.5) < 1e-12 and close(r2, 1.0)


def check_sweep():
    cfg = {"seeds": [1], "prime_count": 4, "prime_max": 2000}
    doc = ff.run_sweep(json.dumps(cfg))
    res = doc["report"]["results"][0]
    assert len(res["rows"]) == 4 and res["slope"] > 0
    csv = ff.sweep_csv(doc).splitlines()
    assert len(csv) == 5 and all(len(line.split(",")) == 14 for line in csv)
    try:
        ff.run_sweep(json.dumps({"q_list": [7.0]}))
    except ValueError:
        pass
    else:
        raise AssertionError("q above the critical exponent should be rejected")


if __name__ == "__main__":
    for check in (check_transforms, check_sets, check_measures, check_exponents, check_sweep):
        check()
        print(f"ok  {check.__name__}")
    print(f"pyffrestrict {ff.__version__}: all smoke checks passed")

"""Acceptance criteria at their stated tolerances and budgets.

Each test records one ``criterion N: PASS|FAIL ...`` line, printed in the
terminal summary.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from kreinlab import cli
from kreinlab import krein_verify as kv


def record(num, ok, text, elapsed):
    ACCEPTANCE_LINES.append(f"criterion {num}: {'PASS' if ok else 'FAIL'} {text} ({elapsed:.1f}s)")
    return ok


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def test_01_whittaker_bessel_identity():
    r, dt = timed(kv.check_identity_c)
    ok = r.passed and r.value < 1e-9 and dt < 5.0
    assert record(1, ok, f"max rel err {r.value:.2e} over {len(r.points)} mu x 200 z", dt)


def test_02_m_i_identity():
    r, dt = timed(kv.check_m_i_identity)
    ok = r.passed and r.value < 1e-9 and dt < 5.0
    assert record(2, ok, f"max rel err {r.value:.2e}", dt)


def test_03_whittaker_ode():
    r, dt = timed(kv.check_whittaker_ode, h=1e-3)
    ok = r.passed and r.value < 1e-5
    assert record(3, ok, f"max rel residual {r.value:.2e} at h=1e-3", dt)


def test_04_bessel_hitting_law():
    r, dt = timed(kv.check_bessel_hitting_law, delta=1.0, x0=1.0, step=1e-4, n=10_000, seed=1)
    ok = r.value >= 0.01 and dt < 180.0
    assert record(4, ok, f"KS p={r.value:.3f}", dt)


def test_05_ou_time_change():
    r, dt = timed(kv.check_ou_hitting_time_change, delta=1.0, mu=1.0, x0=1.0, step=1e-4, n=10_000, seed=2)
    ok = r.value >= 0.01 and dt < 180.0
    assert record(5, ok, f"two-sample KS p={r.value:.3f}", dt)


def test_06_eqlaplace():
    r, dt = timed(kv.check_eqlaplace_mc, n=100_000, seed=3)
    zs = "/".join(f"{p[1]:.2f}" for p in r.points)
    ok = len(r.points) == 6 and r.passed and dt < 600.0
    assert record(6, ok, f"|z| per point {zs} (bound 2)", dt)


def test_07_eigen_relations():
    t0 = time.perf_counter()
    parts, ok = [], True
    for alpha, mu in ((0.5, 1.0), (0.3, 2.0), (0.8, 0.5)):
        down = kv.check_eigen_relation_down(alpha, mu)
        up = kv.check_eigen_relation_up(alpha, mu)
        ok = ok and down.passed and up.passed and down.value < 1e-7 and up.value < 1e-7
        for r in (down, up):
            errs = ", ".join(f"{c}: {e:.1e}" for c, e in r.details["errors"].items())
            parts.append(f"{r.name}({alpha},{mu}) [{errs}]")
    dt = time.perf_counter() - t0
    assert record(7, ok, "selected x=sqrt(z); " + "; ".join(parts), dt)


def test_08_proposition():
    t0 = time.perf_counter()
    seeds = (11, 12, 13, 14, 15)
    ps = [kv.check_proposition_timechange(n=5000, step=1e-4, seed=s).value for s in seeds]
    dt = time.perf_counter() - t0
    passing = sum(p >= 0.01 for p in ps)
    ok = passing >= 4 and dt < 900.0
    assert record(8, ok, f"{passing}/5 seeds p>=0.01 (p={'/'.join(f'{p:.3f}' for p in ps)})", dt)


def test_09_drift_routes():
    r, dt = timed(kv.check_drift_routes)
    assert record(9, r.passed and r.value < 1e-6, f"max rel err {r.value:.2e}", dt)


def test_10_inverse_local_time():
    t0 = time.perf_counter()
    pairs = kv.default_pairs()
    stable = kv.estimate_inverse_local_time_exponent(pairs["t1-stable"], n=10_000, step=1e-2, seed=8,
                                                     slope=0.5, slope_tol=0.03)
    sinh = kv.estimate_inverse_local_time_exponent(pairs["t2-sinh-pitman-yor"], n=10_000, step=1e-2, seed=9)
    dt = time.perf_counter() - t0
    slope = stable.details["slope"]
    ok = abs(slope - 0.5) <= 0.03 and min(sinh.details["r2"]) >= 0.99 and dt < 1200.0
    assert record(10, ok, f"Bessel slope {slope:.3f}; sinh pair min R^2 {min(sinh.details['r2']):.4f}", dt)


def test_11_esscher():
    r, dt = timed(kv.check_esscher_tilts, thetas=(0.3, 1.0, 3.0))
    assert record(11, r.passed and r.value < 1e-8, f"max rel err {r.value:.2e}", dt)


@pytest.mark.parametrize("command", ["simulate", "hit-times", "verify"])
def test_12_cli_determinism(command, tmp_path):
    argv = {
        "simulate": ["simulate", "--kind", "radial-ou", "--delta", "1", "--mu", "1", "--x0", "1", "--step", "1e-4",
                     "--horizon", "5", "--seed", "7"],
        "hit-times": ["hit-times", "--kind", "radial-ou", "--delta", "1", "--mu", "1", "--x0", "1", "--n", "500",
                      "--seed", "7"],
        "verify": ["verify", "--identity", "girsanov-esscher", "--n", "2000", "--seed", "7"],
    }[command]
    t0 = time.perf_counter()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    codes = (cli.main(argv + ["--out", str(a)]), cli.main(argv + ["--out", str(b)]))
    same = a.read_bytes() == b.read_bytes()
    ok = codes == (0, 0) and same
    assert record(12, ok, f"{command}: byte-identical={same}", time.perf_counter() - t0)

import math

import numpy as np
import pytest

from kreinlab import krein_verify as kv
from kreinlab import levy
from kreinlab.diffusion.specs import DiffusionSpec, Kind
from kreinlab.errors import DomainError


class TestReport:
    def test_comparisons(self):
        assert kv.VerificationReport("a", "err", 1e-10, 1e-9).passed
        assert not kv.VerificationReport("a", "err", 1e-8, 1e-9).passed
        assert kv.VerificationReport("a", "p", 0.5, 0.01, ">=").passed
        assert not kv.VerificationReport("a", "p", 0.001, 0.01, ">=").passed

    def test_nan_fails(self):
        assert not kv.VerificationReport("a", "err", math.nan, 1.0).passed

    def test_inconclusive_is_not_pass(self):
        r = kv.VerificationReport("a", "err", 0.0, 1.0, status="inconclusive")
        assert not r.passed and "INCONCLUSIVE" in r.to_text()

    def test_bad_comparison(self):
        with pytest.raises(ValueError):
            kv.VerificationReport("a", "err", 0.0, 1.0, "<")

    def test_text(self):
        r = kv.VerificationReport("name", "err", 1.5e-10, 1e-9, params={"mu": 0.25}, seeds=(3,))
        line = r.to_text()
        assert line.startswith("name: PASS err=1.5e-10 <= 1e-09")
        assert "mu=0.25" in line and "seeds=3" in line

    def test_csv_rows_and_determinism(self):
        r1 = kv.check_identity_c(mus=(0.1, 0.2), zs=[0.5, 1.0])
        r2 = kv.check_identity_c(mus=(0.1, 0.2), zs=[0.5, 1.0])
        a = kv.reports_to_csv([r1], header=("x=1",))
        assert a == kv.reports_to_csv([r2], header=("x=1",))
        lines = a.splitlines()
        assert lines[0] == "# x=1"
        assert lines[1] == "name,params,metric,value,tolerance,pass"
        assert len(lines) == 4 and lines[2].startswith("whittaker-c,mu=0.1,")

    def test_csv_single_row(self):
        r = kv.VerificationReport("a", "err", 0.25, 1.0, params={"k": 1})
        assert kv.reports_to_csv([r]).splitlines()[1] == "a,k=1,err,0.25,1.0,1"


class TestAnalytic:
    def test_identity_c(self):
        r = kv.check_identity_c()
        assert r.passed and r.value < 1e-9
        assert len(r.points) == len(kv.MU_GRID)

    def test_m_i(self):
        r = kv.check_m_i_identity()
        assert r.passed and r.value < 1e-9

    def test_ode(self):
        r = kv.check_whittaker_ode()
        assert r.passed and r.value < 1e-5

    @pytest.mark.parametrize("alpha, mu", [(0.5, 1.0), (0.3, 2.0), (0.8, 0.5)])
    def test_eigen_down(self, alpha, mu):
        r = kv.check_eigen_relation_down(alpha, mu)
        assert r.passed and r.value < 1e-7
        assert r.details["selected_convention"] == "x=sqrt(z)"
        assert r.details["errors"]["x=z"] > 1e-3

    @pytest.mark.parametrize("alpha, mu", [(0.5, 1.0), (0.3, 2.0)])
    def test_eigen_up(self, alpha, mu):
        r = kv.check_eigen_relation_up(alpha, mu)
        assert r.passed and r.details["selected_convention"] == "x=sqrt(z)"
        assert r.details["m_i_err"] < 1e-9

    def test_eigen_domain(self):
        with pytest.raises(DomainError, match="0 < alpha < 1"):
            kv.check_eigen_relation_down(1.0, 1.0)
        with pytest.raises(DomainError, match="mu > 0"):
            kv.check_eigen_relation_up(0.5, 0.0)

    def test_drift_routes(self):
        r = kv.check_drift_routes()
        assert r.passed and r.value < 1e-6 and len(r.points) == 9

    def test_gamma_limit(self):
        r = kv.check_gamma_limit()
        assert r.passed and r.details["monotone"]

    def test_esscher(self):
        r = kv.check_esscher_tilts()
        assert r.passed and r.value < 1e-8
        assert len(r.points) == 5 * 3


class TestMonteCarlo:
    def test_bessel_law(self):
        r = kv.check_bessel_hitting_law(n=2000, step=1e-3, seed=1)
        assert r.passed and r.seeds == (1,)

    def test_ou_time_change(self):
        r = kv.check_ou_hitting_time_change(n=2000, step=1e-3, seed=2)
        assert r.passed and r.seeds == (2, 3)

    def test_eqlaplace_point(self):
        r = kv.check_eqlaplace_mc(points=((1.0, 1.0, 0.7, 1.0),), n=10_000, seed=3)
        assert r.passed and len(r.points) == 1

    def test_girsanov(self):
        assert kv.check_girsanov_esscher(n=5000, seed=5).passed

    def test_eigen_down_with_mc(self):
        r = kv.check_eigen_relation_down(0.5, 1.0, mc_n=5000, mc_seed=4)
        assert r.passed and r.seeds == (4,) and len(r.points) == 3

    def test_proposition_light(self):
        r = kv.check_proposition_timechange(n=1000, step=1e-3, seed=7)
        assert r.passed and r.details["drift_algebra_gap"] == 0.0
        assert r.details["clock_positive_finite"]

    def test_reproducible(self):
        a = kv.check_girsanov_esscher(n=500, seed=9)
        b = kv.check_girsanov_esscher(n=500, seed=9)
        assert a.value == b.value and a.details == b.details


class TestInverseLocalTime:
    def test_normalizer(self):
        assert kv.occupation_normalizer(1.0, 0.05) == pytest.approx(10.0)
        assert kv.occupation_normalizer(0.5, 0.04) == pytest.approx(0.25 / 0.2)

    def test_pairs_valid(self):
        pairs = kv.default_pairs()
        assert len(pairs) == 4
        for p in pairs.values():
            assert levy.validate(p.measure) == []

    def test_invalid_pair(self):
        bad = levy.LevyMeasure(levy.Family.SINH, mu=1.0, alpha=0.5, k=2.0)
        with pytest.raises(DomainError):
            kv.KreinPair(bad, DiffusionSpec(Kind.BESSEL, 1.0), "x")

    def test_requires_recurrent_zero(self):
        pair = kv.KreinPair(levy.stable_power(0.5), DiffusionSpec(Kind.SQUARED_OU, 1.0, 1.0), "x")
        with pytest.raises(DomainError, match="delta < 2"):
            kv.estimate_inverse_local_time_exponent(pair, n=10)

    def test_fit_constant(self):
        psi = np.array([1.0, 2.0, 3.0])
        c, r2 = kv._fit_constant(psi, 0.4 * psi)
        assert c == pytest.approx(0.4) and r2 == pytest.approx(1.0)

    def test_small_run_structure(self):
        pair = kv.default_pairs()["t1-stable"]
        r = kv.estimate_inverse_local_time_exponent(pair, n=500, step=2e-2, seed=1, slope=0.5, slope_tol=0.2)
        assert r.status in ("pass", "fail", "inconclusive")
        assert len(r.details["c"]) == 2 and all(c > 0 for c in r.details["c"])
        assert r.points[-1][0]["slope_target"] == 0.5


class TestSweep:
    def test_eighteen_reports(self):
        reps = kv.table_sweep(n_mc=4000, seed=100)
        assert len(reps) == 18
        assert len({r.name for r in reps}) == 18
        assert all(r.passed for r in reps), kv.reports_to_text([r for r in reps if not r.passed])

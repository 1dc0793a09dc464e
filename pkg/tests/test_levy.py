import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kreinlab import levy
from kreinlab.errors import DomainError

# Frozen quadrature oracles (mpmath, 25 digits) of int (1 - e^{-lam y}) h(y) dy.
SINH_1_05_0 = {0.5: 1.1340009551582319, 1.0: 2.0137231850147857, 2.0: 3.3888523391759163}
SINH_DENSITY_Y1 = 0.78493133029540051  # (1/sinh 1)^{3/2}

LAMS = (0.5, 1.0, 2.0, 5.0)


def all_measures():
    return [
        levy.sinh_family(1.0, 0.5, 0.0),
        levy.sinh_family(2.0, 0.3, 0.8, C=0.7),
        levy.sinh_family(1.5, 0.0, 0.4),
        levy.sinh_family(0.8, 0.6, -1.0),
        levy.stable_power(0.5),
        levy.stable_power(0.2, C=2.0),
        levy.tilted_stable(0.5, 1.0),
        levy.tilted_stable(0.8, 0.3),
        levy.gamma_row(1.0),
        levy.gamma_row(2.5, C=0.5),
        levy.pitman_yor_measure(1.0, 1.0),
    ]


class TestDensity:
    def test_sinh_value(self):
        assert levy.density(levy.sinh_family(1.0, 0.5, 0.0), 1.0) == pytest.approx(SINH_DENSITY_Y1, rel=1e-14)

    def test_sinh_to_stable(self):
        y = np.array([0.3, 1.0, 4.0])
        stable = levy.density(levy.stable_power(0.4), y)
        small = levy.density(levy.sinh_family(1e-7, 0.4, 0.3), y)
        np.testing.assert_allclose(small, stable, rtol=1e-6)

    def test_gamma_value(self):
        assert levy.density(levy.gamma_row(2.0), 1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)

    def test_no_overflow(self):
        assert levy.density(levy.sinh_family(1.0, 0.5, 0.2), 300.0) > 0.0

    def test_domain(self):
        with pytest.raises(DomainError, match="y > 0"):
            levy.density(levy.gamma_row(1.0), 0.0)


class TestValidate:
    def test_k_bound(self):
        m = levy.LevyMeasure(levy.Family.SINH, mu=1.0, alpha=0.5, k=1.6)
        assert levy.validate(m) == ["k < 1+alpha"]
        assert levy.validate(levy.LevyMeasure(levy.Family.SINH, mu=1.0, alpha=0.5, k=1.4)) == []

    def test_alpha_bound(self):
        m = levy.LevyMeasure(levy.Family.SINH, mu=1.0, alpha=1.0, k=0.0)
        assert "alpha < 1" in levy.validate(m)

    def test_constructors_raise(self):
        with pytest.raises(DomainError, match="k < 1"):
            levy.sinh_family(1.0, 0.5, 1.6)
        with pytest.raises(DomainError, match="0 < alpha"):
            levy.stable_power(0.0)
        with pytest.raises(DomainError, match="mu > 0"):
            levy.gamma_row(-1.0)

    def test_near_boundary_integrable(self):
        m = levy.LevyMeasure(levy.Family.SINH, mu=1.0, alpha=0.5, k=1.5 - 1e-8)
        assert levy.validate(m) == []

    def test_pitman_yor(self):
        m = levy.pitman_yor_measure(1.0, 1.0)
        assert (m.alpha, m.k) == (0.5, 0.5)
        m = levy.pitman_yor_measure(0.5, 2.0)
        assert (m.alpha, m.k, m.mu) == (0.75, 0.25, 2.0)
        m = levy.pitman_yor_measure(2.0 - 1e-9, 1.0)
        assert m.k < 1 + m.alpha
        with pytest.raises(DomainError, match="0 < delta < 2"):
            levy.pitman_yor_measure(2.0, 1.0)


class TestExponent:
    def test_zero(self):
        for m in all_measures():
            assert levy.exponent(m, 0.0) == 0.0

    def test_stable(self):
        assert levy.exponent(levy.stable_power(0.5), 1.0) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-15)

    def test_gamma_frullani(self):
        assert levy.exponent(levy.gamma_row(1.0), 1.0) == pytest.approx(math.log(2.0), rel=1e-15)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_sinh_oracle(self, lam):
        m = levy.sinh_family(1.0, 0.5, 0.0)
        for method in levy.Method:
            assert levy.exponent(levy.LevyExponent(m, method), lam) == pytest.approx(SINH_1_05_0[lam], rel=1e-10)

    @pytest.mark.parametrize("m", all_measures(), ids=lambda m: f"{m.family.value}-{m.alpha}-{m.k}-{m.mu}")
    def test_routes_agree(self, m):
        q = levy.LevyExponent(m, levy.Method.QUADRATURE)
        c = levy.LevyExponent(m, levy.Method.CLOSED_FORM)
        for lam in LAMS:
            assert q(lam) == pytest.approx(c(lam), rel=1e-9)

    def test_negative_lambda(self):
        with pytest.raises(DomainError, match="lambda >= 0"):
            levy.exponent(levy.gamma_row(1.0), -1.0)

    def test_invalid_measure(self):
        m = levy.LevyMeasure(levy.Family.SINH, mu=1.0, alpha=0.5, k=2.0)
        with pytest.raises(DomainError, match="k < 1"):
            levy.exponent(m, 1.0)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.01, 0.95), st.floats(0.1, 3.0), st.floats(-2.0, 1.0), st.floats(0.01, 50.0))
    def test_sinh_closed_vs_quadrature(self, a, mu, k, lam):
        m = levy.sinh_family(mu, a, k)
        q = levy.exponent(levy.LevyExponent(m, levy.Method.QUADRATURE), lam)
        assert levy.exponent(m, lam) == pytest.approx(q, rel=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(0.01, 20.0), st.floats(0.01, 20.0))
    def test_monotone_concave(self, a, l1, l2):
        m = levy.tilted_stable(a, 1.0)
        lo, hi = sorted((l1, l2))
        assert levy.exponent(m, lo) <= levy.exponent(m, hi) + 1e-15
        mid = levy.exponent(m, 0.5 * (lo + hi))
        assert mid >= 0.5 * (levy.exponent(m, lo) + levy.exponent(m, hi)) - 1e-12


class TestEsscher:
    def test_sinh_rewrite(self):
        t = levy.esscher_tilt(levy.sinh_family(2.0, 0.5, 0.5), 1.0)
        assert (t.family, t.mu, t.alpha, t.k) == (levy.Family.SINH, 2.0, 0.5, 0.0)
        assert t.theta_tilt == 1.0

    def test_identity(self):
        m = levy.sinh_family(2.0, 0.5, 0.5)
        assert levy.esscher_tilt(m, 0.0) == m

    def test_stable_becomes_tilted(self):
        t = levy.esscher_tilt(levy.stable_power(0.5), 0.7)
        assert t.family is levy.Family.TILTED and t.mu == 0.7

    def test_negative_theta(self):
        with pytest.raises(DomainError, match="theta >= 0"):
            levy.esscher_tilt(levy.gamma_row(1.0), -0.1)

    @pytest.mark.parametrize("theta", [0.3, 1.0, 3.0])
    def test_exponent_relation(self, theta):
        for m in all_measures():
            q = levy.LevyExponent(m, levy.Method.QUADRATURE)
            tq = levy.LevyExponent(levy.esscher_tilt(m, theta), levy.Method.QUADRATURE)
            for lam in LAMS:
                want = q(lam + theta) - q(theta)
                assert abs(tq(lam) - want) / want < 1e-8

    def test_density_relation(self):
        m = levy.sinh_family(1.3, 0.4, 0.2)
        y = np.array([0.2, 1.0, 3.0])
        np.testing.assert_allclose(
            levy.density(levy.esscher_tilt(m, 0.9), y), np.exp(-0.9 * y) * levy.density(m, y), rtol=1e-13
        )

    def test_composition(self):
        m = levy.tilted_stable(0.4, 0.5)
        twice = levy.esscher_tilt(levy.esscher_tilt(m, 0.3), 0.7)
        once = levy.esscher_tilt(m, 1.0)
        assert twice.mu == pytest.approx(once.mu) and twice.theta_tilt == pytest.approx(1.0)


class TestText:
    @pytest.mark.parametrize("m", all_measures(), ids=lambda m: m.family.value)
    def test_round_trip(self, m):
        assert levy.from_text(levy.to_text(m)) == m

    def test_defaults_and_comments(self):
        m = levy.from_text("# a measure\nfamily=gamma\nmu=2\n")
        assert m == levy.LevyMeasure(levy.Family.GAMMA, mu=2.0)

    @pytest.mark.parametrize("text", ["mu=1\n", "family=gamma\nbogus=1\n", "family=gamma\nmu\n", "family=cauchy\n"])
    def test_malformed(self, text):
        with pytest.raises(ValueError):
            levy.from_text(text)

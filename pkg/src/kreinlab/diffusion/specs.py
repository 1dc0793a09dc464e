r"""Diffusion specifications, drifts and hitting-time eigenfunctions.

Every radial kind has unit diffusion coefficient and drift

.. math::
    b(x) = \frac{\delta - 1}{2x} + (\text{kind-specific part}),

with index :math:`\alpha = 1 - \delta/2`. The pushed kinds add the
logarithmic derivative of an eigenfunction of the base generator:

* ``bessel-down`` / ``bessel-up``: :math:`\varphi_\downarrow(z)
  \propto \hat K_{\alpha}(\sqrt{2\nu}z)`, :math:`\varphi_\uparrow(z) \propto
  \hat I_{\alpha}(\sqrt{2\nu}z)`;
* ``radial-ou-down``: :math:`\varphi_{\theta\downarrow}(x) =
  E_x[e^{-\theta T_0}]`, a Whittaker :math:`W` expression in
  :math:`\xi = \mu x^2`;
* ``radial-ou-up``: the increasing solution, equal to
  :math:`\Phi(\theta/2\mu, 1-\alpha; \mu x^2)`, written with Whittaker
  :math:`M`.

For simulation the non-radial part of each drift is tabulated once per spec
on a grid uniform in :math:`\log x` (see :func:`drift_table`).
"""

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

from kreinlab import specfun
from kreinlab.errors import DomainError

__all__ = [
    "Kind",
    "DiffusionSpec",
    "Eigenfunction",
    "DriftTable",
    "drift_bessel",
    "drift_radial_ou",
    "drift_squared_ou",
    "drift_gamma_row",
    "drift_radial_ou_down_khat",
    "drift_radial_ou_down_step_a",
    "phi_down_bessel",
    "phi_up_bessel",
    "phi_down_radial_ou",
    "phi_up_radial_ou",
    "bessel_t0_cdf",
    "eigenfunction",
    "base_drift",
    "drift_pushed",
    "drift",
    "drift_table",
]


class Kind(str, enum.Enum):
    BESSEL = "bessel"
    RADIAL_OU = "radial-ou"
    RADIAL_OU_DOWN = "radial-ou-down"
    BESSEL_DOWN = "bessel-down"
    BESSEL_UP = "bessel-up"
    RADIAL_OU_UP = "radial-ou-up"
    SQUARED_OU = "squared-ou"


PUSHED = {Kind.RADIAL_OU_DOWN, Kind.BESSEL_DOWN, Kind.BESSEL_UP, Kind.RADIAL_OU_UP}
OU_KINDS = {Kind.RADIAL_OU, Kind.RADIAL_OU_DOWN, Kind.RADIAL_OU_UP, Kind.SQUARED_OU}


@dataclass(frozen=True)
class DiffusionSpec:
    """Immutable description of a diffusion on ``[0, inf)``.

    Parameters
    ----------
    kind : Kind
    delta : float
        Dimension; ``delta-hat`` for the Bessel kinds.
    mu : float
        Ornstein-Uhlenbeck rate (OU kinds).
    theta : float
        Push parameter of ``radial-ou-down`` / ``radial-ou-up``.
    nu : float
        Push parameter of ``bessel-down`` / ``bessel-up``.
    """

    kind: Kind
    delta: float
    mu: float = 0.0
    theta: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        for name in ("delta", "mu", "theta", "nu"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _validate(self)

    @property
    def alpha(self):
        """Index ``1 - delta/2``."""
        return 1.0 - 0.5 * self.delta

    @property
    def squared(self):
        return self.kind is Kind.SQUARED_OU

    def label(self):
        parts = [f"kind={self.kind.value}", f"delta={self.delta!r}"]
        if self.kind in OU_KINDS:
            parts.append(f"mu={self.mu!r}")
        if self.kind in (Kind.RADIAL_OU_DOWN, Kind.RADIAL_OU_UP):
            parts.append(f"theta={self.theta!r}")
        if self.kind in (Kind.BESSEL_DOWN, Kind.BESSEL_UP):
            parts.append(f"nu={self.nu!r}")
        return " ".join(parts)


def _validate(s):
    if s.kind is Kind.SQUARED_OU:
        if s.delta <= 0:
            raise DomainError("delta > 0", f"got delta={s.delta!r}")
        if s.mu < 0:
            raise DomainError("mu >= 0", f"got mu={s.mu!r}")
        return
    if not 0 < s.delta < 2:
        raise DomainError("0 < delta < 2", f"got delta={s.delta!r}")
    if s.kind in OU_KINDS and s.mu <= 0:
        raise DomainError("mu > 0", f"got mu={s.mu!r}")
    if s.kind in (Kind.BESSEL_DOWN, Kind.BESSEL_UP) and s.nu < 0:
        raise DomainError("nu >= 0", f"got nu={s.nu!r}")
    if s.kind is Kind.RADIAL_OU_DOWN and s.theta <= -2 * s.alpha * s.mu:
        raise DomainError("theta > -2 alpha mu", f"got theta={s.theta!r}")
    if s.kind is Kind.RADIAL_OU_UP and s.theta < 0:
        raise DomainError("theta >= 0", f"got theta={s.theta!r}")


def _positive(x, name="x"):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError(f"{name} > 0", "drift is singular at 0")
    return x


def _out(a):
    return a[()] if np.ndim(a) == 0 else a


def _delta_range(delta):
    if not 0 < delta < 2:
        raise DomainError("0 < delta < 2", f"got delta={delta!r}")


# ---------------------------------------------------------------------------
# Base drifts


def drift_bessel(delta, x):
    """``(delta - 1) / (2x)``."""
    x = _positive(x)
    return _out((delta - 1.0) / (2.0 * x))


def drift_radial_ou(delta, mu, x):
    """``(delta - 1) / (2x) - mu x``."""
    x = _positive(x)
    return _out((delta - 1.0) / (2.0 * x) - mu * x)


def drift_squared_ou(delta, mu, z):
    """``delta - 2 mu z`` for ``dZ = 2 sqrt(Z) dB + (delta - 2 mu Z) dt``.

    Unlike the radial drifts this one is regular at 0, so only ``z < 0``
    is rejected.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("z >= 0", f"got z={z!r}")
    return _out(delta - 2.0 * mu * z)


def drift_gamma_row(mu, x):
    """Drift ``1/(2x) + sqrt(2 mu) K_0'/K_0(sqrt(2 mu) x)`` of the gamma-measure row.

    Uses ``K_0' = -K_1`` with exponentially scaled Bessel functions.
    """
    x = _positive(x)
    r = math.sqrt(2.0 * mu)
    return _out(0.5 / x - r * special.kve(1, r * x) / special.kve(0, r * x))


def drift_radial_ou_down_khat(delta, mu, x):
    """Pushed-down radial OU drift at ``theta = delta mu / 2`` in the K-hat form.

    ``(delta - 1)/(2x) + mu x * Khat'_{a/2}/Khat_{a/2}(mu x^2 / 2)``.
    """
    _delta_range(delta)
    x = _positive(x)
    a = 1.0 - 0.5 * delta
    return _out((delta - 1.0) / (2.0 * x) + mu * x * specfun.khat_logderiv(0.5 * a, 0.5 * mu * x * x))


def drift_radial_ou_down_step_a(delta, mu, x):
    """Same drift written as ``L_{-a,mu}`` plus ``a/x + mu x + mu x K'/K``.

    ``K'_nu/K_nu = -(K_{nu-1} + K_{nu+1}) / (2 K_nu)`` at order ``nu = a/2``.
    """
    _delta_range(delta)
    x = _positive(x)
    a = 1.0 - 0.5 * delta
    y = 0.5 * mu * x * x
    nu = 0.5 * a
    kk = -(special.kve(nu - 1.0, y) + special.kve(nu + 1.0, y)) / (2.0 * special.kve(nu, y))
    extra = a / x + mu * x + mu * x * kk
    return _out((delta - 1.0) / (2.0 * x) - mu * x + extra)


# ---------------------------------------------------------------------------
# Eigenfunctions


def _bessel_args(deltahat, nu, z):
    _delta_range(deltahat)
    if nu < 0:
        raise DomainError("nu >= 0", f"got nu={nu!r}")
    z = _positive(z, "z")
    return 1.0 - 0.5 * deltahat, math.sqrt(2.0 * nu), z


def phi_down_bessel(deltahat, nu, z):
    r"""``E_z[exp(-nu T_0)]`` for the Bessel process of dimension ``deltahat``.

    .. math::
        \frac{2^{1-a}}{\Gamma(a)} \hat K_a(\sqrt{2\nu} z), \quad a = 1 - \hat\delta/2.
    """
    a, r, z = _bessel_args(deltahat, nu, z)
    if r == 0:
        return _out(np.ones_like(z))
    return _out(2.0 ** (1.0 - a) / math.gamma(a) * specfun.khat(a, r * z))


def phi_up_bessel(deltahat, nu, z):
    r"""``1 / E_0[exp(-nu T_z)]`` for the Bessel process of dimension ``deltahat``.

    .. math::
        2^{-a}\Gamma(1-a)\, \hat I_a(\sqrt{2\nu} z), \quad a = 1 - \hat\delta/2.
    """
    a, r, z = _bessel_args(deltahat, nu, z)
    if r == 0:
        return _out(np.ones_like(z))
    return _out(2.0 ** (-a) * math.gamma(1.0 - a) * specfun.ihat(a, r * z))


def bessel_t0_cdf(delta, x, t):
    """CDF of ``T_0`` for the Bessel process from ``x``: ``T_0 = x^2 / (2 gamma_a)``, ``a = 1 - delta/2``."""
    _delta_range(delta)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = special.gammaincc(1.0 - 0.5 * delta, x * x / (2.0 * np.where(t > 0, t, 0.0)))
    return _out(np.where(t > 0, out, 0.0))


def _ou_args(delta, mu, theta, x):
    _delta_range(delta)
    if mu <= 0:
        raise DomainError("mu > 0", f"got mu={mu!r}")
    x = _positive(x)
    a = 1.0 - 0.5 * delta
    kw = 0.5 * ((1.0 - a) - theta / mu)
    return a, kw, x


def phi_down_radial_ou(delta, mu, theta, x):
    r"""``E_x[exp(-theta T_0)]`` for the radial OU process.

    .. math::
        \frac{\Gamma(\alpha+\theta/2\mu)}{\Gamma(\alpha)} \xi^{(\alpha-1)/2}
        e^{\xi/2} W_{k, \alpha/2}(\xi), \quad \xi = \mu x^2,\;
        k = \frac{(1-\alpha) - \theta/\mu}{2},

    valid for ``theta > -2 alpha mu``.
    """
    a, kw, x = _ou_args(delta, mu, theta, x)
    if theta <= -2.0 * a * mu:
        raise DomainError("theta > -2 alpha mu", f"got theta={theta!r}")
    lg = math.lgamma(a + 0.5 * theta / mu) - math.lgamma(a)

    def one(xi):
        pref = math.exp(lg + 0.5 * (a - 1.0) * math.log(xi) + 0.5 * xi)
        return pref * specfun.whittaker_w(kw, 0.5 * a, xi)

    vals = np.array([one(xi) for xi in np.ravel(mu * x * x)]).reshape(np.shape(x))
    return _out(vals)


def _phi_down_radial_ou_logderiv(delta, mu, theta, x):
    # d/dx log of the expression above: (a-1)/x + mu x + 2 mu x W'/W(mu x^2)
    a, kw, x = _ou_args(delta, mu, theta, x)
    vals = [
        (a - 1.0) / xx + mu * xx + 2.0 * mu * xx * specfun.whittaker_w_logderiv(kw, 0.5 * a, mu * xx * xx)
        for xx in np.ravel(x)
    ]
    return _out(np.array(vals).reshape(np.shape(x)))


def phi_up_radial_ou(delta, mu, theta, x):
    r"""Increasing eigenfunction of the radial OU generator, equal to 1 at 0.

    .. math::
        \xi^{(\alpha-1)/2} e^{\xi/2} M_{k, -\alpha/2}(\xi)
        = \Phi(\theta/2\mu,\, 1-\alpha;\, \xi), \quad \xi = \mu x^2,

    with the same ``k`` as :func:`phi_down_radial_ou`.
    """
    a, kw, x = _ou_args(delta, mu, theta, x)

    def one(xi):
        pref = math.exp(0.5 * (a - 1.0) * math.log(xi) + 0.5 * xi)
        return pref * specfun.whittaker_m(kw, -0.5 * a, xi)

    vals = np.array([one(xi) for xi in np.ravel(mu * x * x)]).reshape(np.shape(x))
    return _out(vals)


def _phi_up_radial_ou_logderiv(delta, mu, theta, x):
    # Phi'(a, b; z) = (a/b) Phi(a+1, b+1; z)
    a, _, x = _ou_args(delta, mu, theta, x)
    c = 0.5 * theta / mu
    b = 1.0 - a
    if c == 0:
        return _out(np.zeros_like(x))
    vals = [
        2.0 * mu * xx * (c / b) * specfun.kummer_phi(c + 1.0, b + 1.0, mu * xx * xx)
        / specfun.kummer_phi(c, b, mu * xx * xx)
        for xx in np.ravel(x)
    ]
    return _out(np.array(vals).reshape(np.shape(x)))


@dataclass(frozen=True)
class Eigenfunction:
    """An eigenfunction together with its analytic logarithmic derivative."""

    name: str
    value: Callable
    logderiv: Callable


def eigenfunction(spec):
    """The eigenfunction whose log-derivative pushes ``spec``'s base process."""
    d, mu, th, nu = spec.delta, spec.mu, spec.theta, spec.nu
    a = spec.alpha
    r = math.sqrt(2.0 * nu)
    if spec.kind is Kind.BESSEL_DOWN:
        return Eigenfunction(
            "phi_down_bessel",
            lambda x: phi_down_bessel(d, nu, x),
            lambda x: r * specfun.khat_logderiv(a, r * _positive(x)) if r > 0 else 0.0 * _positive(x),
        )
    if spec.kind is Kind.BESSEL_UP:
        return Eigenfunction(
            "phi_up_bessel",
            lambda x: phi_up_bessel(d, nu, x),
            lambda x: r * specfun.ihat_logderiv(a, r * _positive(x)) if r > 0 else 0.0 * _positive(x),
        )
    if spec.kind is Kind.RADIAL_OU_DOWN:
        return Eigenfunction(
            "phi_down_radial_ou",
            lambda x: phi_down_radial_ou(d, mu, th, x),
            lambda x: _phi_down_radial_ou_logderiv(d, mu, th, x),
        )
    if spec.kind is Kind.RADIAL_OU_UP:
        return Eigenfunction(
            "phi_up_radial_ou",
            lambda x: phi_up_radial_ou(d, mu, th, x),
            lambda x: _phi_up_radial_ou_logderiv(d, mu, th, x),
        )
    raise ValueError(f"{spec.kind.value} is not a pushed kind")


def base_drift(spec, x):
    """Drift of the unpushed process underlying ``spec``."""
    if spec.kind in (Kind.BESSEL, Kind.BESSEL_DOWN, Kind.BESSEL_UP):
        return drift_bessel(spec.delta, x)
    if spec.kind is Kind.SQUARED_OU:
        return drift_squared_ou(spec.delta, spec.mu, x)
    return drift_radial_ou(spec.delta, spec.mu, x)


def drift_pushed(spec, phi, x):
    """Base drift plus ``(log phi)'(x)``."""
    return _out(np.asarray(base_drift(spec, x)) + np.asarray(phi.logderiv(x)))


def drift(spec, x):
    """Full drift of ``spec`` at ``x``."""
    if spec.kind in PUSHED:
        return drift_pushed(spec, eigenfunction(spec), x)
    return base_drift(spec, x)


# ---------------------------------------------------------------------------
# Simulation tables

TABLE_X_MIN = 1e-6
TABLE_NODES = 3000
# Nodes for kinds whose drift needs one quadrature per point.
TABLE_NODES_QUAD = 1200


@dataclass(frozen=True)
class DriftTable:
    """Radial drift split as ``(delta-1)/(2x) + lin x + g(x)/x``.

    ``g`` is sampled at ``x_i = exp(logx0 + i dlog)``.
    """

    delta: float
    lin: float
    logx0: float
    dlog: float
    gvals: np.ndarray

    def g(self, x):
        u = (np.log(x) - self.logx0) / self.dlog
        return np.interp(u, np.arange(self.gvals.size), self.gvals)


def _table_range(spec):
    if spec.kind in OU_KINDS:
        # Kummer series is limited to mu x^2 <= 100.
        x_max = math.sqrt(99.0 / spec.mu) if spec.kind is Kind.RADIAL_OU_UP else math.sqrt(400.0 / spec.mu)
        return x_max, TABLE_NODES_QUAD
    return 1e3, TABLE_NODES


@lru_cache(maxsize=64)
def drift_table(spec):
    """Tabulated drift of ``spec`` for the compiled simulation kernels."""
    if spec.kind is Kind.SQUARED_OU:
        raise ValueError("the squared process is simulated exactly, not from a drift table")
    lin = -spec.mu if spec.kind in OU_KINDS else 0.0
    if spec.kind not in PUSHED:
        return DriftTable(spec.delta, lin, 0.0, 1.0, np.zeros(0))
    x_max, n = _table_range(spec)
    logx0 = math.log(TABLE_X_MIN)
    dlog = (math.log(x_max) - logx0) / (n - 1)
    x = np.exp(logx0 + dlog * np.arange(n))
    with warnings.catch_warnings():
        # QUADPACK flags roundoff near x_min, where g itself is ~1e-6.
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        extra = np.asarray(drift(spec, x)) - (spec.delta - 1.0) / (2.0 * x) - lin * x
    gvals = np.ascontiguousarray(x * extra, dtype=float)
    return DriftTable(spec.delta, lin, logx0, dlog, gvals)

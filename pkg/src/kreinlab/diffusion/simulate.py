"""Seeded simulation of paths, hitting times and time changes.

Schemes
-------
``lamperti``
    Hitting times of 0. Euler in ``log X`` on the clock ``du = dt / X^2``,
    exact for the Bessel process; once ``X <= eps_hit`` the remaining time is
    drawn from its exact law: the Bessel law ``X^2 / (2 gamma)``, mapped
    through the OU clock for the OU kinds and tilted by ``exp(-theta T)`` (by
    rejection) for the kinds pushed down by killing at rate ``theta``.
``implicit-reflect``
    Paths and upward passages. Drift-implicit Euler for the ``(delta-1)/(2x)``
    term, adaptive substeps near 0 and regeneration at 0 when the implicit
    equation has no positive root.
``exact-ncx2``
    The squared OU process, sampled from its noncentral chi-square transition.

Path ``i`` of a batch with base seed ``s`` uses entry ``i`` of
``numpy.random.SeedSequence(s).generate_state(n)``, so results are
reproducible and independent of batch size.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from kreinlab import __version__
from kreinlab.diffusion import _kernels
from kreinlab.diffusion.specs import OU_KINDS, DiffusionSpec, Kind, drift_table
from kreinlab.errors import CensoringError, ClockOverrunError, DomainError

__all__ = [
    "PathSample",
    "HitTimeSample",
    "path_seeds",
    "default_horizon",
    "simulate_path",
    "simulate_marginals",
    "hit_time_T0",
    "first_passage_up",
    "inverse_local_time",
    "ou_from_bessel_path",
    "time_change_4intZ",
    "clock_4intZ",
    "write_csv",
    "read_csv",
]

DEFAULT_STEP = 1e-4
# Lamperti clock increments: at most 1/30^2 for the pure Bessel kind (real
# time is then only limited through the clock), 0.05 otherwise, where the
# real-time cap dt_cap = step binds except within ~0.15 of 0.
DU_MAX_BESSEL = 1.0 / 900.0
DU_MAX = 0.05
# Adaptive substeps are ~ (x / KAPPA_PATH)^2 near 0.
KAPPA_PATH = 10.0
DT_MIN_RATIO = 1e-3
MAX_CENSORED = 0.01


@dataclass(frozen=True)
class PathSample:
    """One discretized trajectory.

    ``values`` are ``X`` for radial kinds and ``Z`` for the squared kind.
    ``flags`` carries notes such as a degenerate clock.
    """

    times: np.ndarray
    values: np.ndarray
    seed: int
    scheme: str
    step: float
    spec: DiffusionSpec | None = None
    flags: tuple = ()

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values differ in length")
        if len(self.times) and self.times[0] != 0:
            raise ValueError("times must start at 0")

    @property
    def horizon(self):
        return float(self.times[-1])


@dataclass(frozen=True)
class HitTimeSample:
    """I.i.d. hitting-time draws.

    Censored draws are recorded at the horizon and flagged in ``censored``;
    ``clock`` holds ``4 int_0^T X^2 dt`` when the scheme tracks it.
    """

    draws: np.ndarray
    censored: np.ndarray
    x0: float
    spec: DiffusionSpec
    seed: int
    scheme: str
    step: float
    horizon: float
    target: float = 0.0
    clock: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self):
        return len(self.draws)

    @property
    def n_censored(self):
        return int(np.count_nonzero(self.censored))

    @property
    def censored_fraction(self):
        return self.n_censored / max(self.n, 1)

    @property
    def uncensored(self):
        return self.draws[~self.censored]


def path_seeds(seed, n):
    """Per-path seeds derived from ``seed`` by :class:`numpy.random.SeedSequence`."""
    if seed is None:
        raise DomainError("seed is set", "stochastic operations need an explicit seed")
    return np.random.SeedSequence(int(seed)).generate_state(n, dtype=np.uint32).astype(np.int64)


def default_horizon(spec, x0):
    """Censoring horizon: ``50 / mu`` for OU kinds, ``50 x0^2`` for Bessel kinds.

    Pushed-down Bessel draws have a tail ``~ exp(-nu t)``, so the horizon is
    at least ``20 / nu`` there.
    """
    if spec.kind in OU_KINDS:
        return 50.0 / spec.mu
    h = 50.0 * x0 * x0
    if spec.kind is Kind.BESSEL_DOWN and spec.nu > 0:
        h = max(h, 20.0 / spec.nu)
    return h


def _check_step(step):
    if not step > 0:
        raise DomainError("step > 0", f"got step={step!r}")


def _table_args(spec):
    t = drift_table(spec)
    return t.delta, t.lin, t.logx0, t.dlog, t.gvals


def _radial(spec):
    if spec.kind is Kind.SQUARED_OU:
        if spec.delta >= 2:
            raise DomainError("delta < 2", "0 is not reached")
        return DiffusionSpec(Kind.RADIAL_OU, spec.delta, spec.mu)
    return spec


# ---------------------------------------------------------------------------
# Paths


def _ncx2_paths(spec, z0, times, seed, n):
    # Z_t | Z_s = c * chi2'_delta(Z_s e^{-2 mu dt} / c), c = (1 - e^{-2 mu dt}) / (2 mu)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    out = np.empty((n, len(times)))
    out[:, 0] = z0
    z = np.full(n, float(z0))
    for j in range(1, len(times)):
        dt = times[j] - times[j - 1]
        if spec.mu > 0:
            decay = math.exp(-2.0 * spec.mu * dt)
            c = -math.expm1(-2.0 * spec.mu * dt) / (2.0 * spec.mu)
        else:
            decay, c = 1.0, dt
        z = c * rng.noncentral_chisquare(spec.delta, z * decay / c)
        out[:, j] = z
    return out


def _reflect(spec, x0, grid, step, seeds, noise=1.0):
    if x0 < 0:
        raise DomainError("x0 >= 0", f"got x0={x0!r}")
    out = np.empty((len(seeds), len(grid)))
    _kernels.reflect_paths(
        float(x0), *_table_args(spec), np.ascontiguousarray(grid, dtype=float),
        step * DT_MIN_RATIO, float(step), KAPPA_PATH, float(noise), seeds, out,
    )
    return out


def simulate_path(spec, x0, horizon, step=DEFAULT_STEP, seed=0, noise=1.0):
    """Simulate one path on the grid ``0, step, 2 step, ..., horizon``.

    Parameters
    ----------
    spec : DiffusionSpec
    x0 : float
        Start, ``>= 0``.
    horizon, step : float
    seed : int
    noise : float
        Multiplier of the driving Brownian increments; ``0`` gives the
        deterministic skeleton.
    """
    _check_step(step)
    n_rec = int(round(horizon / step))
    if n_rec < 1:
        raise DomainError("horizon >= step", f"got horizon={horizon!r}, step={step!r}")
    times = step * np.arange(n_rec + 1)
    if spec.kind is Kind.SQUARED_OU:
        if x0 < 0:
            raise DomainError("x0 >= 0", f"got x0={x0!r}")
        vals = _ncx2_paths(spec, x0, times, seed, 1)[0]
        scheme = "exact-ncx2"
    else:
        vals = _reflect(spec, x0, times, step, path_seeds(seed, 1), noise)[0]
        scheme = "implicit-reflect"
    return PathSample(times, vals, int(seed), scheme, float(step), spec)


def simulate_marginals(spec, x0, times, step=DEFAULT_STEP, seed=0, n=1000):
    """Values of ``n`` independent paths at the increasing ``times``.

    Returns an array of shape ``(n, len(times))``. The recording grid is the
    ``times`` themselves; ``step`` caps the internal substeps.
    """
    _check_step(step)
    times = np.asarray(times, dtype=float)
    grid = np.concatenate([[0.0], times])
    if np.any(np.diff(grid) <= 0):
        raise DomainError("times increasing and > 0", f"got {times!r}")
    if spec.kind is Kind.SQUARED_OU:
        return _ncx2_paths(spec, x0, grid, seed, n)[:, 1:]
    return _reflect(spec, x0, grid, step, path_seeds(seed, n))[:, 1:]


# ---------------------------------------------------------------------------
# Hitting times


def hit_time_T0(spec, x0, step=DEFAULT_STEP, seed=0, n=10_000, horizon=None, eps_hit=None):
    """Draws of the first hitting time of 0 from ``x0``.

    Parameters
    ----------
    spec : DiffusionSpec
        Any radial kind with ``delta < 2``; the squared kind is mapped to its
        radial counterpart started at ``sqrt(x0)``.
    x0 : float
    step : float
        Largest real-time increment; the pure Bessel kind needs none because
        its log-coordinate scheme is exact.
    seed, n : int
    horizon : float, optional
        Censoring level, :func:`default_horizon` by default.
    eps_hit : float, optional
        Below this level the remaining time is drawn from its exact law
        (Bessel, mapped through the OU clock, tilted for downward-pushed
        kinds); ``sqrt(step)`` by default. The clock ``4 int X^2`` omits the
        residual, so pass a much smaller level when the clock is used.

    Raises
    ------
    CensoringError
        For downward-pushed kinds, if more than 1% of the draws are censored.
    """
    _check_step(step)
    if x0 <= 0:
        raise DomainError("x0 > 0", f"got x0={x0!r}")
    if spec.kind in (Kind.BESSEL_UP, Kind.RADIAL_OU_UP):
        raise DomainError("kind reaches 0", f"{spec.kind.value} is pushed away from 0")
    if spec.kind is Kind.SQUARED_OU:
        spec, x0 = _radial(spec), math.sqrt(x0)
    horizon = default_horizon(spec, x0) if horizon is None else float(horizon)
    pure = spec.kind is Kind.BESSEL
    eps_hit = math.sqrt(step) if eps_hit is None else float(eps_hit)
    res_mu = spec.mu if spec.kind in (Kind.RADIAL_OU, Kind.RADIAL_OU_DOWN) else 0.0
    res_tilt = {Kind.BESSEL_DOWN: spec.nu, Kind.RADIAL_OU_DOWN: spec.theta}.get(spec.kind, 0.0)
    dt_cap = math.inf if pure else float(step)
    du_max = DU_MAX_BESSEL if pure else DU_MAX
    seeds = path_seeds(seed, n)
    t = np.empty(n)
    clock = np.empty(n)
    cens = np.empty(n, dtype=np.bool_)
    _kernels.hit_zero(
        float(x0), *_table_args(spec), dt_cap, du_max, eps_hit, res_mu, res_tilt, horizon, not pure, seeds,
        t, clock, cens,
    )
    t[cens] = horizon
    sample = HitTimeSample(t, cens, float(x0), spec, int(seed), "lamperti", float(step), horizon, 0.0, clock)
    if spec.kind in (Kind.BESSEL_DOWN, Kind.RADIAL_OU_DOWN) and sample.censored_fraction > MAX_CENSORED:
        raise CensoringError(
            f"{sample.n_censored} of {n} draws censored at horizon {horizon} ({spec.label()})"
        )
    return sample


def first_passage_up(spec, x0, level, step=DEFAULT_STEP, seed=0, n=10_000, horizon=None):
    """Draws of the first passage time to ``level`` from ``x0 < level``.

    A start "at 0" is represented by a small positive ``x0``.
    """
    _check_step(step)
    if not 0 < x0 < level:
        raise DomainError("0 < x0 < level", f"got x0={x0!r}, level={level!r}")
    spec = _radial(spec)
    horizon = default_horizon(spec, level) if horizon is None else float(horizon)
    seeds = path_seeds(seed, n)
    t = np.empty(n)
    cens = np.empty(n, dtype=np.bool_)
    _kernels.hit_level_up(
        float(x0), float(level), *_table_args(spec), step * DT_MIN_RATIO, float(step), KAPPA_PATH,
        horizon, seeds, t, cens,
    )
    t[cens] = horizon
    return HitTimeSample(t, cens, float(x0), spec, int(seed), "implicit-reflect", float(step), horizon, float(level))


def inverse_local_time(spec, x0, eps, norm, ell, step=1e-3, seed=0, n=10_000, horizon=1e4, dt_min=None):
    """Draws of ``tau_ell = inf{t : c_eps int_0^t 1{X_s < eps} ds > ell}``.

    Parameters
    ----------
    eps, norm : sequence of float
        Bandwidths and their normalizers ``c_eps``; all are read off the
        same paths.
    ell : float
    step : float
        Largest substep, used far from 0.
    dt_min : float, optional
        Smallest substep, ``(min(eps) / 10)^2`` by default.

    Returns
    -------
    tau : ndarray, shape (n, len(eps))
        ``inf`` where censored at ``horizon``.
    censored : ndarray of bool, same shape
    """
    eps = np.ascontiguousarray(eps, dtype=float)
    norm = np.ascontiguousarray(norm, dtype=float)
    if dt_min is None:
        dt_min = (eps.min() / 10.0) ** 2
    seeds = path_seeds(seed, n)
    tau = np.empty((n, len(eps)))
    cens = np.empty((n, len(eps)), dtype=np.bool_)
    _kernels.inverse_local_time(
        float(x0), *_table_args(_radial(spec)), eps, norm, float(ell), float(dt_min), float(step),
        KAPPA_PATH, float(horizon), seeds, tau, cens,
    )
    return tau, cens


# ---------------------------------------------------------------------------
# Time changes


def _clock_ou(mu, t):
    if mu == 0:
        return np.asarray(t, dtype=float)
    return np.expm1(2.0 * mu * np.asarray(t, dtype=float)) / (2.0 * mu)


def ou_from_bessel_path(path, mu, horizon=None, step=None):
    """Radial OU path ``e^{-mu t} R((e^{2 mu t} - 1) / (2 mu))`` from a Bessel path ``R``.

    Parameters
    ----------
    path : PathSample
        Bessel path; linearly interpolated at the transformed clock.
    mu : float
    horizon : float, optional
        Output horizon; by default the largest ``t`` whose clock the input
        covers.
    step : float, optional
        Output grid step, ``path.step`` by default.

    Raises
    ------
    ClockOverrunError
        If the clock at ``horizon`` exceeds the input horizon.
    """
    if mu < 0:
        raise DomainError("mu >= 0", f"got mu={mu!r}")
    step = path.step if step is None else float(step)
    covered = path.horizon if mu == 0 else math.log1p(2.0 * mu * path.horizon) / (2.0 * mu)
    if horizon is None:
        horizon = covered
    elif _clock_ou(mu, horizon) > path.horizon * (1 + 1e-12):
        raise ClockOverrunError(
            "clock <= input horizon",
            f"needs clock {float(_clock_ou(mu, horizon))!r}, input covers {path.horizon!r}",
        )
    n_out = int(math.floor(horizon / step + 1e-9))
    t = step * np.arange(n_out + 1)
    s = np.minimum(_clock_ou(mu, t), path.horizon)
    vals = np.exp(-mu * t) * np.interp(s, path.times, path.values)
    spec = None
    if path.spec is not None and path.spec.kind is Kind.BESSEL and mu > 0:
        spec = DiffusionSpec(Kind.RADIAL_OU, path.spec.delta, mu)
    return PathSample(t, vals, path.seed, f"{path.scheme}+ou-clock", step, spec)


def time_change_4intZ(path, n_grid=None):
    """Re-express a squared path on the clock ``A_t = 4 int_0^t Z_u du``.

    ``A`` is accumulated by the trapezoid rule and the output ``Zhat`` with
    ``Zhat(A_t) = Z_t`` is read off a uniform clock grid by interpolation of
    the monotone map ``A -> Z``. A flat clock yields a one-point path
    flagged ``"degenerate-clock"``.
    """
    z = np.asarray(path.values, dtype=float)
    if np.any(z < 0):
        raise DomainError("Z >= 0", "input must be a squared (nonnegative) path")
    dt = np.diff(path.times)
    a = np.concatenate([[0.0], np.cumsum(2.0 * dt * (z[1:] + z[:-1]))])
    if a[-1] <= 0:
        return PathSample(np.zeros(1), z[:1].copy(), path.seed, f"{path.scheme}+4intZ", 0.0, None,
                          ("degenerate-clock",))
    n_grid = len(z) if n_grid is None else int(n_grid)
    u = np.linspace(0.0, a[-1], n_grid)
    zhat = np.interp(u, a, z)
    step = float(u[1] - u[0]) if n_grid > 1 else 0.0
    return PathSample(u, zhat, path.seed, f"{path.scheme}+4intZ", step, None)


def clock_4intZ(times, z):
    """``A_t = 4 int_0^t Z_u du`` (trapezoid) for each row of ``z``."""
    z = np.atleast_2d(z)
    dt = np.diff(times)
    inc = 2.0 * dt * (z[:, 1:] + z[:, :-1])
    return np.concatenate([np.zeros((z.shape[0], 1)), np.cumsum(inc, axis=1)], axis=1)


# ---------------------------------------------------------------------------
# CSV


def _fmt(v):
    return repr(float(v))


def _header(obj, kind):
    spec = obj.spec.label() if obj.spec is not None else "kind=none"
    lines = [
        f"# kreinlab {__version__}",
        f"# {kind} {spec}",
        f"# seed={obj.seed} step={_fmt(obj.step)} scheme={obj.scheme}",
    ]
    if isinstance(obj, HitTimeSample):
        lines.append(
            f"# x0={_fmt(obj.x0)} target={_fmt(obj.target)} horizon={_fmt(obj.horizon)}"
            f" censored={obj.n_censored}"
        )
    if isinstance(obj, PathSample) and obj.flags:
        lines.append("# flags=" + ",".join(obj.flags))
    return lines


def write_csv(obj, dest=None, extra_header=()):
    """Serialize a :class:`PathSample` (``t,x``) or :class:`HitTimeSample` (``i,T,censored``).

    Returns the text; writes it to ``dest`` when given. Floats use ``repr``
    so equal samples give identical bytes.
    """
    buf = io.StringIO()
    if isinstance(obj, PathSample):
        lines = _header(obj, "path")
    else:
        lines = _header(obj, "hit-times")
    lines += [f"# {h}" for h in extra_header]
    buf.write("\n".join(lines) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, PathSample):
        w.writerow(["t", "x"])
        for t, x in zip(obj.times, obj.values):
            w.writerow([_fmt(t), _fmt(x)])
    else:
        w.writerow(["i", "T", "censored"])
        for i, (t, c) in enumerate(zip(obj.draws, obj.censored)):
            w.writerow([i, _fmt(t), int(c)])
    text = buf.getvalue()
    if dest is not None:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(source):
    """Read the numeric columns of a file written by :func:`write_csv`.

    Returns ``(header_lines, columns)`` with ``columns`` a dict of arrays.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    header = [ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")]
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.reader(body))
    names = rows[0]
    data = np.array(rows[1:], dtype=float).reshape(-1, len(names))
    return header, {nm: data[:, j] for j, nm in enumerate(names)}

"""Command-line front end.

Commands: ``identities``, ``levy-table``, ``simulate``, ``hit-times``,
``verify`` and ``sweep``. Parameters come from flags and, optionally, a
``key=value`` file given with ``--config``; flags win on conflict. CSV
artifacts carry ``#`` header lines with the package version, the resolved
configuration and the seed, and contain no timing information, so a
repeated run with the same configuration writes identical bytes.

Exit status: 0 if every check passes, 1 if a check fails (or a simulation
is over-censored), 2 on a configuration error, naming the constraint.
"""

import argparse
import inspect
import sys
from dataclasses import dataclass, field

from kreinlab import __version__, levy
from kreinlab import krein_verify as kv
from kreinlab.diffusion import simulate as sim
from kreinlab.diffusion.specs import DiffusionSpec, Kind
from kreinlab.errors import CensoringError, DomainError

__all__ = ["RunConfig", "ConfigError", "COMMANDS", "IDENTITIES", "parse_config_file", "run", "main"]

COMMANDS = ("identities", "levy-table", "simulate", "hit-times", "verify", "sweep")
STOCHASTIC = {"simulate", "hit-times", "sweep"}

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _floats(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


# name -> (parser, help); shared by the flags and the config file
PARAMS = {
    "alpha": (float, "index alpha"),
    "mu": (float, "rate mu"),
    "k": (float, "sinh-family k"),
    "C": (float, "Levy density scale C"),
    "delta": (float, "dimension delta"),
    "theta": (float, "eigenvalue / tilt theta"),
    "nu": (float, "Bessel push nu"),
    "x0": (float, "start x0"),
    "step": (float, "time step"),
    "horizon": (float, "time horizon"),
    "level": (float, "upper target level (hit-times)"),
    "n": (int, "number of draws"),
    "seed": (int, "random seed"),
    "lambdas": (_floats, "comma-separated lambda grid"),
    "family": (str, "Levy family: sinh, stable, tilted-stable, gamma, pitman-yor"),
    "method": (str, "exponent route: closed-form or quadrature"),
    "measure": (str, "Levy measure file in key=value form"),
    "kind": (str, "diffusion kind"),
    "identity": (str, "check name (verify)"),
    "pair": (str, "Krein pair for inverse-local-time"),
    "out": (str, "output CSV path"),
}
ALIASES = {"lambda-grid": "lambdas", "out-path": "out"}

COMMAND_PARAMS = {
    "identities": ("identity", "out"),
    "levy-table": ("family", "C", "mu", "alpha", "k", "delta", "theta", "lambdas", "method", "measure", "out"),
    "simulate": ("kind", "delta", "mu", "theta", "nu", "x0", "step", "horizon", "seed", "out"),
    "hit-times": ("kind", "delta", "mu", "theta", "nu", "x0", "step", "horizon", "level", "n", "seed", "out"),
    "verify": ("identity", "alpha", "mu", "delta", "theta", "nu", "x0", "step", "n", "seed", "lambdas", "pair", "out"),
    "sweep": ("n", "seed", "out"),
}

ANALYTIC = ("whittaker-c", "m-i", "whittaker-ode", "eigen-down", "eigen-up", "drift-routes", "gamma-limit", "esscher")

# verify name -> (check, CLI name -> keyword)
IDENTITIES = {
    "whittaker-c": (kv.check_identity_c, {}),
    "m-i": (kv.check_m_i_identity, {}),
    "whittaker-ode": (kv.check_whittaker_ode, {}),
    "eigen-down": (kv.check_eigen_relation_down, {"alpha": "alpha", "mu": "mu"}),
    "eigen-up": (kv.check_eigen_relation_up, {"alpha": "alpha", "mu": "mu"}),
    "drift-routes": (kv.check_drift_routes, {}),
    "gamma-limit": (kv.check_gamma_limit, {"mu": "mu"}),
    "esscher": (kv.check_esscher_tilts, {}),
    "bessel-t0": (kv.check_bessel_hitting_law, {"delta": "delta", "x0": "x0", "step": "step", "n": "n", "seed": "seed"}),
    "ou-time-change": (
        kv.check_ou_hitting_time_change,
        {"delta": "delta", "mu": "mu", "x0": "x0", "step": "step", "n": "n", "seed": "seed"},
    ),
    "eqlaplace": (kv.check_eqlaplace_mc, {"n": "n", "step": "step", "seed": "seed"}),
    "girsanov-esscher": (
        kv.check_girsanov_esscher,
        {"delta": "deltahat", "theta": "theta", "x0": "x0", "n": "n", "step": "step", "seed": "seed"},
    ),
    "phi-up": (kv.check_phi_up_mc, {"delta": "deltahat", "nu": "nu", "x0": "z", "n": "n", "step": "step", "seed": "seed"}),
    "proposition": (
        kv.check_proposition_timechange,
        {"alpha": "alpha", "mu": "mu", "x0": "x0", "n": "n", "step": "step", "seed": "seed"},
    ),
    "inverse-local-time": (kv.estimate_inverse_local_time_exponent, {"n": "n", "step": "step", "seed": "seed"}),
}


class ConfigError(Exception):
    """A configuration problem; ``constraint`` names what was violated."""

    def __init__(self, constraint, detail=""):
        self.constraint = constraint
        self.detail = detail
        super().__init__(f"{constraint}: {detail}" if detail else constraint)


@dataclass
class RunConfig:
    """A command with its resolved parameters."""

    command: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("command in " + "|".join(COMMANDS), f"got {self.command!r}")
        allowed = set(COMMAND_PARAMS[self.command])
        unknown = sorted(set(self.params) - allowed)
        if unknown:
            raise ConfigError(f"known parameter for {self.command}", f"unknown: {','.join(unknown)}")

    def echo(self):
        """``key=value`` list in a fixed order, for artifact headers."""
        keys = [k for k in COMMAND_PARAMS[self.command] if k in self.params and k != "out"]
        return " ".join(f"{k}={_echo(self.params[k])}" for k in keys)

    def get(self, key, default=None):
        return self.params.get(key, default)

    def require(self, key):
        if key not in self.params:
            raise ConfigError(f"{key} required", f"for {self.command}")
        return self.params[key]


def _echo(v):
    if isinstance(v, tuple):
        return ",".join(repr(u) for u in v)
    return repr(v) if isinstance(v, float) else str(v)


def _convert(key, raw):
    key = ALIASES.get(key, key)
    if key not in PARAMS:
        raise ConfigError("known parameter", f"unknown key {key!r}")
    conv = PARAMS[key][0]
    try:
        return key, conv(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} is {conv.__name__.strip('_')}", f"got {raw!r}") from None


def parse_config_file(path):
    """Read ``key=value`` lines; ``#`` starts a comment."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config file readable", str(exc)) from None
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError("config line is key=value", f"got {raw!r}")
        k, v = _convert(key.strip(), val.strip())
        out[k] = v
    return out


def _build_parser():
    parser = argparse.ArgumentParser(prog="kreinlab", description="Krein correspondence verification toolkit.")
    parser.add_argument("--version", action="version", version=f"kreinlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="key=value file; flags win on conflict")
        for key in COMMAND_PARAMS[cmd]:
            flags = [f"--{key}"] + [f"--{a}" for a, t in ALIASES.items() if t == key]
            p.add_argument(*flags, dest=key, default=None, help=PARAMS[key][1])
    return parser


def config_from_args(argv):
    """Parse ``argv`` into a :class:`RunConfig`; raises :class:`ConfigError`."""
    ns = _build_parser().parse_args(argv)
    params = parse_config_file(ns.config) if ns.config else {}
    for key in COMMAND_PARAMS[ns.command]:
        raw = getattr(ns, key)
        if raw is not None:
            params.update([_convert(key, raw)])
    return RunConfig(ns.command, params)


# ---------------------------------------------------------------------------
# Commands


def _header(config, seed=True):
    lines = [f"kreinlab {__version__}", f"command={config.command}"]
    echo = config.echo()
    if echo:
        lines.append(f"config {echo}")
    if seed:
        lines.append(f"seed={config.get('seed', '-')}")
    return lines


def _emit(config, text):
    out = config.get("out")
    if out:
        try:
            with open(out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError("out path writable", str(exc)) from None
    return out


def _report_status(config, reports):
    for r in reports:
        print(r.to_text())
    _emit(config, kv.reports_to_csv(reports, _header(config)))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _identities(config):
    names = ANALYTIC
    if "identity" in config.params:
        names = tuple(s.strip() for s in config.params["identity"].split(",") if s.strip())
        bad = [s for s in names if s not in ANALYTIC]
        if bad:
            raise ConfigError("identity in " + "|".join(ANALYTIC), f"got {','.join(bad)}")
    return _report_status(config, [IDENTITIES[s][0]() for s in names])


def _measure(config):
    if "measure" in config.params:
        try:
            with open(config.params["measure"]) as fh:
                m = levy.from_text(fh.read())
        except OSError as exc:
            raise ConfigError("measure file readable", str(exc)) from None
        except ValueError as exc:
            raise ConfigError("measure file is key=value", str(exc)) from None
    else:
        fam = config.require("family")
        C = config.get("C", 1.0)
        if fam == "pitman-yor":
            m = levy.pitman_yor_measure(config.require("delta"), config.require("mu"), C)
        elif fam == "sinh":
            m = levy.sinh_family(config.require("mu"), config.require("alpha"), config.get("k", 0.0), C)
        elif fam == "stable":
            m = levy.stable_power(config.require("alpha"), C)
        elif fam == "tilted-stable":
            m = levy.tilted_stable(config.require("alpha"), config.require("mu"), C)
        elif fam == "gamma":
            m = levy.gamma_row(config.require("mu"), C)
        else:
            raise ConfigError("family in sinh|stable|tilted-stable|gamma|pitman-yor", f"got {fam!r}")
    bad = levy.validate(m)
    if bad:
        raise DomainError(bad[0], str(m))
    if config.get("theta", 0.0):
        m = levy.esscher_tilt(m, config.params["theta"])
    return m


def _levy_table(config):
    m = _measure(config)
    try:
        method = levy.Method(config.get("method", "closed-form"))
    except ValueError:
        raise ConfigError("method in closed-form|quadrature", f"got {config.get('method')!r}") from None
    lams = config.get("lambdas", (0.5, 1.0, 2.0, 5.0))
    e = levy.LevyExponent(m, method)
    rows = [(lam, e(lam)) for lam in lams]
    lines = [f"# {h}" for h in _header(config)]
    lines.append("# measure " + " ".join(levy.to_text(m).split()))
    lines.append("lambda,psi")
    lines += [f"{lam!r},{psi!r}" for lam, psi in rows]
    text = "\n".join(lines) + "\n"
    if not _emit(config, text):
        sys.stdout.write(text)
    print(f"levy-table: {len(rows)} rows family={m.family.value} method={method.value}", file=sys.stderr)
    return EXIT_OK


def _spec(config):
    kind = config.require("kind")
    try:
        kind = Kind(kind)
    except ValueError:
        raise ConfigError("kind in " + "|".join(k.value for k in Kind), f"got {kind!r}") from None
    return DiffusionSpec(
        kind, config.require("delta"), config.get("mu", 0.0), config.get("theta", 0.0), config.get("nu", 0.0)
    )


def _simulate(config):
    spec = _spec(config)
    path = sim.simulate_path(
        spec, config.require("x0"), config.require("horizon"), config.get("step", sim.DEFAULT_STEP),
        config.params["seed"],
    )
    text = sim.write_csv(path, extra_header=_header(config, seed=False)[1:])
    if not _emit(config, text):
        sys.stdout.write(text)
    print(f"simulate: {len(path.times)} points {spec.label()} scheme={path.scheme}", file=sys.stderr)
    return EXIT_OK


def _hit_times(config):
    spec = _spec(config)
    x0 = config.require("x0")
    kw = dict(step=config.get("step", sim.DEFAULT_STEP), seed=config.params["seed"], n=config.get("n", 10_000),
              horizon=config.get("horizon"))
    if "level" in config.params:
        sample = sim.first_passage_up(spec, x0, config.params["level"], **kw)
    else:
        sample = sim.hit_time_T0(spec, x0, **kw)
    text = sim.write_csv(sample, extra_header=_header(config, seed=False)[1:])
    if not _emit(config, text):
        sys.stdout.write(text)
    print(f"hit-times: {sample.n} draws, {sample.n_censored} censored, {spec.label()}", file=sys.stderr)
    return EXIT_OK


def _verify(config):
    name = config.require("identity")
    if name not in IDENTITIES:
        raise ConfigError("identity in " + "|".join(IDENTITIES), f"got {name!r}")
    func, rename = IDENTITIES[name]
    kwargs = {kw: config.params[key] for key, kw in rename.items() if key in config.params}
    if "seed" in inspect.signature(func).parameters and "seed" not in config.params:
        raise ConfigError("seed required", f"for stochastic check {name}")
    if name == "inverse-local-time":
        pairs = kv.default_pairs()
        pair = config.get("pair", "t1-stable")
        if pair not in pairs:
            raise ConfigError("pair in " + "|".join(pairs), f"got {pair!r}")
        if "lambdas" in config.params:
            kwargs["lams"] = config.params["lambdas"]
        kwargs["slope"] = 0.5 if pair == "t1-stable" else None
        return _report_status(config, [func(pairs[pair], **kwargs)])
    if name == "eqlaplace" and all(k in config.params for k in ("delta", "mu", "theta", "x0")):
        kwargs["points"] = (tuple(config.params[k] for k in ("delta", "mu", "theta", "x0")),)
    return _report_status(config, [func(**kwargs)])


def _sweep(config):
    return _report_status(config, kv.table_sweep(n_mc=config.get("n", 20_000), seed=config.params["seed"]))


HANDLERS = {
    "identities": _identities,
    "levy-table": _levy_table,
    "simulate": _simulate,
    "hit-times": _hit_times,
    "verify": _verify,
    "sweep": _sweep,
}


def run(config):
    """Execute ``config``; returns the exit status. Errors are reported on stderr."""
    try:
        if config.command in STOCHASTIC and "seed" not in config.params:
            raise ConfigError("seed required", f"for {config.command}")
        return HANDLERS[config.command](config)
    except (ConfigError, DomainError) as exc:
        print(f"error: constraint violated: {exc.constraint} ({exc.detail})", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: constraint violated: valid parameters ({exc})", file=sys.stderr)
        return EXIT_CONFIG
    except CensoringError as exc:
        print(f"fail: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main(argv=None):
    try:
        config = config_from_args(argv)
    except ConfigError as exc:
        print(f"error: constraint violated: {exc.constraint} ({exc.detail})", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())

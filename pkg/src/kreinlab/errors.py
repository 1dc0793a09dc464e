"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined.

    The message names the violated constraint, e.g. ``"z > 0"``.
    """

    def __init__(self, constraint, detail=""):
        self.constraint = constraint
        self.detail = detail
        msg = f"constraint violated: {constraint}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ClockOverrunError(DomainError):
    """A time-changed path needs clock values beyond the input horizon."""


class CensoringError(RuntimeError):
    """Too many hitting-time draws were censored at the simulation horizon."""

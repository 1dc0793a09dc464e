"""Diffusions on [0, inf): drifts, eigenfunctions and simulation."""

from kreinlab.diffusion.simulate import *  # noqa: F401,F403
from kreinlab.diffusion.simulate import __all__ as _sim_all
from kreinlab.diffusion.specs import *  # noqa: F401,F403
from kreinlab.diffusion.specs import __all__ as _specs_all

__all__ = list(_specs_all) + list(_sim_all)

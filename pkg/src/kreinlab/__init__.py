"""Numerical laboratory for Krein representations of subordinators.

Submodules: :mod:`kreinlab.specfun`, :mod:`kreinlab.levy`,
:mod:`kreinlab.diffusion`, :mod:`kreinlab.krein_verify` and
:mod:`kreinlab.cli`.
"""

__version__ = "0.1.0"

"""Numerical laboratory for sup-norm bounds of Eisenstein series on ``SL_2(Z)`` and ``Gamma_0(q)``."""

__version__ = "0.1.0"

"""Computational toolkit for a uniform prime number theorem in arithmetic progressions.

Modules: :mod:`chars` (Dirichlet characters), :mod:`primes` (sieving and
Chebyshev sums), :mod:`lfunc` (L-function evaluation), :mod:`zeros` (zero
location and counting), :mod:`pnt` (predictions and envelopes),
:mod:`aconst` (constant optimisation and audits), :mod:`cli`.
"""
from ._backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]

"""Spherical Bessel and Hankel functions of real argument.

``j_n`` comes from a downward ratio recurrence anchored at ``sin t / t``
below the turning point and from upward recurrence above it; ``y_n`` always
recurs upward. Derivatives use ``f_n' = f_{n-1} - (n+1)/t f_n`` and the
Riccati-type combinations are ``J_n = j_n + t j_n'`` and ``H_n = h_n + t h_n'``
with ``h_n = j_n + i y_n``.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from . import _kernels
from .errors import CapacityError, DomainError
from .lseries import LaurentSeries

N_MAX = 32
DOUBLE_FACTORIAL_MAX = 40


@dataclass(frozen=True)
class BesselEval:
    order: int
    argument: float
    j: float
    y: float
    dj: float
    dy: float

    @property
    def h1(self):
        return complex(self.j, self.y)

    @property
    def dh1(self):
        return complex(self.dj, self.dy)

    @property
    def J(self):
        """Riccati combination ``j_n + t j_n'``."""
        return self.j + self.argument * self.dj

    @property
    def H(self):
        """Riccati combination ``h_n + t h_n'``."""
        return self.h1 + self.argument * self.dh1


def _check(n, t, n_max):
    if n < 0 or int(n) != n:
        raise DomainError(f"order must be a non-negative integer, got {n}")
    if n > n_max:
        raise CapacityError(f"order {n} exceeds n_max={n_max}")
    if not t > 0:
        raise DomainError(f"argument must be positive, got {t}")


def sph_bessel(n, t, n_max=N_MAX):
    """Evaluate ``j_n``, ``y_n`` and their derivatives at ``t > 0``."""
    _check(n, t, n_max)
    n = int(n)
    t = float(t)
    j, y = _kernels.jy_table(n + 1, np.array([t]))
    j, y = j[0], y[0]
    if n == 0:
        dj, dy = -j[1], -y[1]
    else:
        dj = j[n - 1] - (n + 1) / t * j[n]
        dy = y[n - 1] - (n + 1) / t * y[n]
    return BesselEval(n, t, float(j[n]), float(y[n]), float(dj), float(dy))


def sph_bessel_table(n_max, t):
    """Return ``(j, y)`` arrays for orders ``0..n_max`` at every ``t`` in an array."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise DomainError("arguments must be positive")
    return _kernels.jy_table(n_max, t)


def riccati_row(n, t):
    """``(j_n, h_n, J_n, H_n)`` at ``t`` for ``n >= 1``; the interface-matrix entries."""
    b = sph_bessel(n, t)
    return b.j, b.h1, b.J, b.H


def double_factorial(n):
    """``n!!`` with ``(-1)!! = 0!! = 1``; exact integers for ``-1 <= n <= 40``."""
    if int(n) != n or n < -1:
        raise DomainError(f"double factorial needs an integer n >= -1, got {n}")
    if n > DOUBLE_FACTORIAL_MAX:
        raise CapacityError(f"double factorial limited to n <= {DOUBLE_FACTORIAL_MAX}")
    return _dfact(int(n))


def _dfact(n):
    out = 1
    for k in range(n, 1, -2):
        out *= k
    return out


def _j_series_coeffs(n, terms):
    # (-1)^l / (2^l l! (2n+2l+1)!!), exact, then to float
    return [
        Fraction((-1) ** l, 2**l * factorial(l) * _dfact(2 * n + 2 * l + 1)) for l in range(terms)
    ]


def _y_series_coeffs(n, terms):
    # -(2n-1)!! (-1)^l / (2^l l! prod_{k=1..l} (2k-2n-1))
    out = []
    for l in range(terms):
        prod = 1
        for k in range(1, l + 1):
            prod *= 2 * k - 2 * n - 1
        out.append(Fraction(-_dfact(2 * n - 1) * (-1) ** l, 2**l * factorial(l) * prod))
    return out


def bessel_series(n, kind, terms):
    """Small-argument Laurent series of ``j_n`` (``kind='first'``) or ``y_n`` (``'second'``).

    ``terms`` nonzero coefficients in steps of ``t**2`` are kept; the result
    is exact through the power just below the first dropped term.
    """
    if terms < 1:
        raise DomainError("need at least one term")
    if n < 0 or int(n) != n:
        raise DomainError(f"order must be a non-negative integer, got {n}")
    n = int(n)
    if kind == "first":
        lead, coeffs = n, _j_series_coeffs(n, terms)
    elif kind == "second":
        lead, coeffs = -n - 1, _y_series_coeffs(n, terms)
    else:
        raise DomainError(f"kind must be 'first' or 'second', got {kind!r}")
    dense = np.zeros(2 * terms - 1, dtype=complex)
    dense[::2] = [float(c) for c in coeffs]
    return LaurentSeries(lead, dense, lead + 2 * terms - 1)


def hankel_series(n, terms):
    """Series of ``h_n = j_n + i y_n`` with ``terms`` terms in each part."""
    return bessel_series(n, "first", terms) + 1j * bessel_series(n, "second", terms)

"""Truncated Laurent series in one variable.

A :class:`LaurentSeries` stores the coefficients of ``t**lead`` through
``t**valid_to``; everything above ``valid_to`` is unknown. Arithmetic
propagates that horizon so a result never reports a coefficient it cannot
vouch for.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularError, ValidityError

# Division refuses a leading denominator coefficient smaller than this
# fraction of the largest stored one.
DIV_LEAD_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """``sum(coeffs[k] * t**(lead + k))`` known exactly through ``t**valid_to``.

    ``coeffs`` always has length ``valid_to - lead + 1``; the zero series of
    known accuracy has no coefficients and ``valid_to == lead - 1``.
    """

    lead: int
    coeffs: np.ndarray
    valid_to: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        lead = int(self.lead)
        vt = int(self.valid_to)
        if vt < lead - 1:
            raise ValueError(f"valid_to={vt} below lead-1={lead - 1}")
        width = vt - lead + 1
        if c.shape[0] < width:
            c = np.concatenate([c, np.zeros(width - c.shape[0], dtype=complex)])
        c = c[:width]
        c.setflags(write=False)
        object.__setattr__(self, "lead", lead)
        object.__setattr__(self, "valid_to", vt)
        object.__setattr__(self, "coeffs", c)

    # construction helpers ---------------------------------------------------

    @classmethod
    def monomial(cls, power, value=1.0, valid_to=None):
        """``value * t**power`` exact through ``valid_to`` (default: far above)."""
        if valid_to is None:
            valid_to = power + 64
        return cls(power, [value], valid_to)

    @classmethod
    def zero(cls, valid_to):
        return cls(valid_to + 1, [], valid_to)

    @property
    def is_zero(self):
        return self.coeffs.shape[0] == 0 or not np.any(self.coeffs)

    @property
    def rel_valid(self):
        """Number of trustworthy orders above the leading exponent."""
        return self.valid_to - self.lead

    def normalize(self):
        """Strip exactly-zero leading coefficients."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return LaurentSeries.zero(self.valid_to)
        k = int(nz[0])
        if k == 0:
            return self
        return LaurentSeries(self.lead + k, self.coeffs[k:], self.valid_to)

    def coefficient(self, power):
        """Coefficient of ``t**power``; raises if beyond ``valid_to``."""
        if power > self.valid_to:
            raise ValidityError(f"coefficient of t^{power} requested, series valid to t^{self.valid_to}")
        if power < self.lead:
            return 0j
        return complex(self.coeffs[power - self.lead])

    def truncate(self, valid_to):
        """Forget everything above ``valid_to`` (never extends validity)."""
        return LaurentSeries(self.lead, self.coeffs, min(valid_to, self.valid_to)).normalize()

    def scale_argument(self, c):
        """Series of ``f(c t)``: coefficient of ``t**p`` picks up ``c**p``."""
        powers = np.arange(self.lead, self.valid_to + 1)
        return LaurentSeries(self.lead, self.coeffs * np.power(complex(c), powers), self.valid_to)

    def shift(self, k):
        """Multiply by ``t**k`` exactly."""
        return LaurentSeries(self.lead + k, self.coeffs, self.valid_to + k)

    def riccati(self):
        """Series of ``d/dt (t f(t)) = f + t f'``."""
        powers = np.arange(self.lead, self.valid_to + 1)
        return LaurentSeries(self.lead, self.coeffs * (powers + 1), self.valid_to).normalize()

    # arithmetic --------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = _constant(other)
        return series_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.lead, -self.coeffs, self.valid_to)

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            other = _constant(other)
        return series_add(self, -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return series_mul(self, other)
        if other == 0:
            return LaurentSeries.zero(self.valid_to)
        return LaurentSeries(self.lead, self.coeffs * other, self.valid_to)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, LaurentSeries):
            return series_div(self, other)
        return LaurentSeries(self.lead, self.coeffs / other, self.valid_to)

    def __call__(self, t):
        return series_eval(self, t)

    def __repr__(self):
        terms = [f"({c:.6g})t^{self.lead + k}" for k, c in enumerate(self.coeffs) if c != 0]
        body = " + ".join(terms) if terms else "0"
        return f"LaurentSeries({body}; valid_to={self.valid_to})"

    def allclose(self, other, rtol=1e-12, atol=0.0):
        """Coefficientwise comparison on the common validity window."""
        top = min(self.valid_to, other.valid_to)
        lo = min(self.lead, other.lead)
        if top < lo:
            return True
        a = np.array([self.coefficient(p) for p in range(lo, top + 1)])
        b = np.array([other.coefficient(p) for p in range(lo, top + 1)])
        scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0))
        return bool(np.all(np.abs(a - b) <= atol + rtol * scale))


def _constant(value):
    return LaurentSeries(0, [value], 10**9)


def series_add(a, b):
    """Coefficientwise sum, valid through ``min(a.valid_to, b.valid_to)``."""
    vt = min(a.valid_to, b.valid_to)
    lead = min(a.lead, b.lead)
    if vt < lead:
        return LaurentSeries.zero(vt)
    out = np.zeros(vt - lead + 1, dtype=complex)
    for s in (a, b):
        stop = min(s.valid_to, vt)
        if stop >= s.lead:
            out[s.lead - lead : stop - lead + 1] += s.coeffs[: stop - s.lead + 1]
    return LaurentSeries(lead, out, vt).normalize()


def series_mul(a, b):
    """Cauchy product; valid through ``min(a.valid_to + b.lead, b.valid_to + a.lead)``."""
    lead = a.lead + b.lead
    vt = min(a.valid_to + b.lead, b.valid_to + a.lead)
    if vt < lead or a.coeffs.size == 0 or b.coeffs.size == 0:
        return LaurentSeries.zero(vt)
    prod = np.convolve(a.coeffs, b.coeffs)
    return LaurentSeries(lead, prod[: vt - lead + 1], vt).normalize()


def series_div(num, den):
    """Formal long division ``num / den``.

    The quotient keeps the smaller of the two operands' relative validities.
    Raises :class:`SingularError` when the leading denominator coefficient is
    zero or negligible against the rest of the denominator.
    """
    den = den.normalize()
    if den.coeffs.size == 0:
        raise SingularError("division by the zero series", magnitude=0.0)
    d0 = den.coeffs[0]
    scale = np.abs(den.coeffs).max()
    if abs(d0) <= DIV_LEAD_RTOL * scale:
        raise SingularError(
            f"leading denominator coefficient {abs(d0):.3e} is negligible (max {scale:.3e})",
            magnitude=abs(d0),
        )
    rel = min(num.valid_to - num.lead, den.valid_to - den.lead)
    lead = num.lead - den.lead
    if rel < 0:
        return LaurentSeries.zero(lead - 1)
    width = rel + 1
    n = np.zeros(width, dtype=complex)
    m = min(width, num.coeffs.size)
    n[:m] = num.coeffs[:m]
    d = np.zeros(width, dtype=complex)
    m = min(width, den.coeffs.size)
    d[:m] = den.coeffs[:m]
    q = np.zeros(width, dtype=complex)
    for k in range(width):
        acc = n[k]
        if k:
            acc -= np.dot(d[1 : k + 1], q[k - 1 :: -1][:k])
        q[k] = acc / d0
    return LaurentSeries(lead, q, lead + rel).normalize()


def series_eval(a, t):
    """Sum of the valid coefficients at ``t > 0``."""
    if not t > 0:
        raise DomainError(f"series evaluation needs t > 0, got {t}")
    if a.coeffs.size == 0:
        return 0j
    powers = np.arange(a.lead, a.valid_to + 1)
    return complex(np.sum(a.coeffs * np.power(float(t), powers)))

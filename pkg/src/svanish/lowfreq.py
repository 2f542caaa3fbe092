"""Low-frequency expansion of the modal coefficients.

The transfer product is recomposed over :class:`LaurentSeries` in the
frequency variable ``t``: every Bessel factor at argument ``t z_j r_j`` is
replaced by its small-argument series. The ratio ``p1/p2`` then gives

    W_n[mu, eps, t] = -i n (n+1) / sqrt(eps_0 mu_0) * (-p1/p2)
                    = sum_l W_{n,l} t**(2n+1+2l)

which is the modal coefficient of the structure shrunk by ``t`` and probed at
unit frequency (equivalently ``t`` times the modal coefficient at ``omega=t``).
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import SchemaError, SingularError, ValidityError
from .lseries import DIV_LEAD_RTOL, LaurentSeries
from .multilayer import POLARIZATIONS, TE, LayeredStructure, ModalCoefficient, Polarization
from .specfun import bessel_series

COEFFS_SCHEMA = "svanish-coeffs/1"

# hard ceiling on terms per Bessel factor in the reference composition
MAX_TERMS = 40


@lru_cache(maxsize=256)
def _dense_bessel(n, width):
    """Dense coefficients of ``j_n`` from ``t**n`` and ``y_n`` from ``t**(-n-1)``, ``width`` each."""
    terms = (width + 1) // 2
    jc = np.real(bessel_series(n, "first", terms).coeffs)[:width]
    yc = np.real(bessel_series(n, "second", terms).coeffs)[:width]
    out = np.zeros((2, width))
    out[0, : jc.size] = jc
    out[1, : yc.size] = yc
    out.setflags(write=False)
    return out


def series_width(n, order, guard=0):
    """Stored coefficients per series so ``W_{n,l}`` is exact for ``l <= order - n + guard``."""
    return 2 * (order - n + guard) + 1


def _series_rows(structure, n, pol, width):
    radii = np.array(structure.radii)
    mat = structure.mu_all if pol is TE else structure.eps_all
    jy = _dense_bessel(n, width)
    return _kernels.series_rows(n, pol.code, width, radii, structure.z, mat, jy[0], jy[1])


def series_transfer_product(structure, n, polarization, order, guard=0):
    """Laurent series ``(p1, p2)`` of the transfer product in ``t``.

    ``p1`` starts at ``t**n`` and ``p2`` at ``t**(-n-1)``. Both are valid
    ``2 (order - n + guard)`` orders above their leading powers, which is what
    ``p1/p2`` needs to determine every ``W_{n,l}`` with ``l <= order - n`` plus
    ``guard`` further even orders.
    """
    pol = Polarization.parse(polarization)
    n = int(n)
    if not 1 <= n <= order:
        raise ValueError(f"need 1 <= n <= order, got n={n}, order={order}")
    width = series_width(n, order, guard)
    c1, c2 = _series_rows(structure, n, pol, width)
    return (
        LaurentSeries(n, c1, n + width - 1).normalize(),
        LaurentSeries(-n - 1, c2, -n - 2 + width).normalize(),
    )


def reference_transfer_product(structure, n, polarization, terms):
    """Same product composed with general :class:`LaurentSeries` arithmetic.

    Slow, but every validity horizon is tracked by the series type itself;
    kept as an independent check on the fixed-width kernel.
    """
    pol = Polarization.parse(polarization)
    if not 1 <= terms <= MAX_TERMS:
        raise ValidityError(f"terms must lie in 1..{MAX_TERMS}")
    return _compose(structure, int(n), pol, terms)


def _bessel_factors(n, scale, terms):
    """Series of ``(j, h, J, H)`` at argument ``scale * t``."""
    j = bessel_series(n, "first", terms).scale_argument(scale)
    y = bessel_series(n, "second", terms).scale_argument(scale)
    h = j + 1j * y
    return j, h, j.riccati(), h.riccati()


def _compose(structure, n, pol, terms):
    L = structure.n_layers
    radii = structure.radii
    z = structure.z
    mat = structure.mu_all if pol is TE else structure.eps_all
    j, h, J, H = _bessel_factors(n, z[L] * radii[L], terms)
    v1, v2 = (j, h) if pol is TE else (J, H)
    for layer in range(L, 0, -1):
        r = radii[layer - 1]
        ji, hi, Ji, Hi = _bessel_factors(n, z[layer] * r, terms)
        jo, ho, Jo, Ho = _bessel_factors(n, z[layer - 1] * r, terms)
        mi, mo = mat[layer], mat[layer - 1]
        if pol is TE:
            a11, a12, a21, a22 = Hi / mi, -hi, -Ji / mi, ji
            b11, b12, b21, b22 = jo, ho, Jo / mo, Ho / mo
        else:
            a11, a12, a21, a22 = hi, -Hi / mi, -ji, Ji / mi
            b11, b12, b21, b22 = Jo / mo, Ho / mo, jo, ho
        # the adjugate carries det ~ 1/t; multiplying by t keeps factors O(1)
        f11 = (a11 * b11 + a12 * b21).shift(1)
        f12 = (a11 * b12 + a12 * b22).shift(1)
        f21 = (a21 * b11 + a22 * b21).shift(1)
        f22 = (a21 * b12 + a22 * b22).shift(1)
        v1, v2 = v1 * f11 + v2 * f21, v1 * f12 + v2 * f22
    return v1, v2


def _ratio(c1, c2):
    """Truncated power-series quotient of two equal-width coefficient arrays."""
    d0 = c2[0]
    scale = np.abs(c2).max()
    if abs(d0) <= DIV_LEAD_RTOL * scale:
        raise SingularError(f"p2 leading coefficient {abs(d0):.3e} is negligible (max {scale:.3e})", magnitude=abs(d0))
    q = np.zeros_like(c1)
    for k in range(c1.size):
        q[k] = (c1[k] - np.dot(c2[1 : k + 1], q[k - 1 :: -1][:k])) / d0 if k else c1[0] / d0
    return q


def _w_coeffs(structure, n, pol, width):
    c1, c2 = _series_rows(structure, n, pol, width)
    return (1j * n * (n + 1) / structure.background_index) * _ratio(c1, c2)


def w_series(structure, n, polarization, order, guard=0):
    """Series of ``W_n[mu, eps, t]``, leading power ``2n+1``, odd offsets zero."""
    pol = Polarization.parse(polarization)
    n = int(n)
    if not 1 <= n <= order:
        raise ValueError(f"need 1 <= n <= order, got n={n}, order={order}")
    width = series_width(n, order, guard)
    lead = 2 * n + 1
    return LaurentSeries(lead, _w_coeffs(structure, n, pol, width), lead + width - 1)


def modal_series(structure, n, polarization, order, guard=0):
    """Low-frequency series of the modal coefficient ``W_n(omega=t)``, leading power ``2n``."""
    pol = Polarization.parse(polarization)
    return ModalCoefficient(int(n), pol, w_series(structure, n, pol, order, guard).shift(-1))


def index_set(order):
    """``(pol, n, l)`` in residual order: TE then TM, ``n`` ascending, ``l`` ascending."""
    return [(pol, n, l) for pol in POLARIZATIONS for n in range(1, order + 1) for l in range(order - n + 1)]


@dataclass(frozen=True)
class CoefficientTable:
    """All ``W_{n,l}`` with ``1 <= n <= order`` and ``0 <= l <= order - n`` for both polarizations."""

    order: int
    entries: dict = field(repr=False)
    structure: LayeredStructure | None = None

    def __getitem__(self, key):
        n, l, pol = key
        return self.entries[(int(n), int(l), Polarization.parse(pol))]

    def keys(self):
        return [(n, l, pol) for pol, n, l in index_set(self.order)]

    def vector(self):
        """Complex values in residual order."""
        return np.array([self.entries[k] for k in self.keys()])

    def to_dict(self):
        doc = {
            "schema": COEFFS_SCHEMA,
            "order": self.order,
            "entries": [
                {"n": n, "l": l, "pol": pol.value, "re": self.entries[(n, l, pol)].real, "im": self.entries[(n, l, pol)].imag}
                for n, l, pol in self.keys()
            ],
        }
        if self.structure is not None:
            doc["structure"] = self.structure.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc):
        from .io import check_schema

        check_schema(doc, COEFFS_SCHEMA)
        try:
            order = int(doc["order"])
            entries = {
                (int(e["n"]), int(e["l"]), Polarization.parse(e["pol"])): complex(e["re"], e["im"])
                for e in doc["entries"]
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed coefficient entry: {exc}", field="entries") from exc
        structure = LayeredStructure.from_dict(doc["structure"]) if "structure" in doc else None
        table = cls(order, entries, structure)
        if set(entries) != set(table.keys()):
            raise SchemaError(f"entries do not cover the order-{order} index set", field="entries")
        return table

    def format(self, reference=None):
        """Plain-text table; with ``reference`` also the magnitude ratio."""
        lines = ["pol  n  l  Re W_{n,l}                 Im W_{n,l}" + ("                 |W|/|W_ref|" if reference else "")]
        for n, l, pol in self.keys():
            w = self.entries[(n, l, pol)]
            row = f"{pol.value:<4} {n:<2} {l:<2} {w.real:<+26.17g} {w.imag:<+26.17g}"
            if reference is not None:
                row += f" {abs(w) / abs(reference.entries[(n, l, pol)]):.6e}"
            lines.append(row)
        return "\n".join(lines)


def lowfreq_coefficients(structure, order):
    """The full :class:`CoefficientTable` of order ``order``."""
    if int(order) != order or order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    order = int(order)
    entries = {}
    for pol in POLARIZATIONS:
        for n in range(1, order + 1):
            w = _w_coeffs(structure, n, pol, series_width(n, order))
            for l in range(order - n + 1):
                entries[(n, l, pol)] = complex(w[2 * l])
    return CoefficientTable(order, entries, structure)

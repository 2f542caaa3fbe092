"""Concentric layered sphere with a PEC core: transfer products and modal coefficients.

Layer ``j`` (1-based) occupies ``radii[j] <= |x| < radii[j-1]`` with
parameters ``mu[j-1], eps[j-1]``; the background sits outside ``radii[0]``
and the perfectly conducting core inside ``radii[-1]``.

For an incident interior multipole of order ``n`` the field in layer ``j`` is
``atilde_j * (regular) + a_j * (outgoing)``. Tangential continuity gives a 2x2
system per interface; closing it with the PEC condition leaves one row
``p1 * atilde_0 + p2 * a_0 = 0``, so ``a_0 = -p1 / p2`` and the modal
coefficient is ``W_n = -i n (n+1) a_0 / k_0``.
"""
import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, NumericalError, SchemaError, SingularError
from .specfun import riccati_row

STRUCTURE_SCHEMA = "svanish-structure/1"

# |p2| below this fraction of |p1| + |p2| is treated as singular
P2_RTOL = 1e-300


class Polarization(str, enum.Enum):
    TE = "TE"
    TM = "TM"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise DomainError(f"polarization must be TE or TM, got {value!r}") from None

    @property
    def code(self):
        return _kernels.TE if self is Polarization.TE else _kernels.TM


TE = Polarization.TE
TM = Polarization.TM
POLARIZATIONS = (TE, TM)


@dataclass(frozen=True, eq=False)
class LayeredStructure:
    """Radii (outermost first), layer parameters and background parameters."""

    radii: tuple
    mu: tuple
    eps: tuple
    background_mu: float = 1.0
    background_eps: float = 1.0

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        mu = tuple(float(v) for v in self.mu)
        eps = tuple(float(v) for v in self.eps)
        if len(mu) != len(eps):
            raise DomainError(f"mu has {len(mu)} layers but eps has {len(eps)}")
        if len(radii) != len(mu) + 1:
            raise DomainError(f"{len(mu)} layers need {len(mu) + 1} radii, got {len(radii)}")
        if not all(r > 0 for r in radii):
            raise DomainError("radii must be positive")
        if any(a <= b for a, b in zip(radii, radii[1:])):
            raise DomainError("radii must be strictly decreasing")
        values = mu + eps + (self.background_mu, self.background_eps)
        if not all(v > 0 and math.isfinite(v) for v in values):
            raise DomainError("material parameters must be positive and finite")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "background_mu", float(self.background_mu))
        object.__setattr__(self, "background_eps", float(self.background_eps))

    @classmethod
    def create(cls, radii, mu, eps, background=(1.0, 1.0)):
        """Build a structure, warning when the radii leave the 2 > ... > 1 frame."""
        s = cls(radii, mu, eps, background[0], background[1])
        if not (math.isclose(s.radii[0], 2.0) and math.isclose(s.radii[-1], 1.0)):
            warnings.warn(
                f"radii run from {s.radii[0]} to {s.radii[-1]}; the design frame uses 2 down to 1",
                stacklevel=2,
            )
        return s

    @classmethod
    def uniform_radii(cls, mu, eps, outer=2.0, inner=1.0, background=(1.0, 1.0)):
        """Equal-thickness layers between ``outer`` and ``inner``."""
        L = len(mu)
        radii = [outer - (outer - inner) * j / L for j in range(L + 1)]
        return cls(radii, mu, eps, background[0], background[1])

    @property
    def n_layers(self):
        return len(self.mu)

    @property
    def z(self):
        """Refractive indices ``sqrt(eps mu)`` with the background at index 0."""
        return np.sqrt(self.mu_all * self.eps_all)

    @property
    def mu_all(self):
        return np.array((self.background_mu,) + self.mu)

    @property
    def eps_all(self):
        return np.array((self.background_eps,) + self.eps)

    @property
    def background_index(self):
        return math.sqrt(self.background_mu * self.background_eps)

    def k0(self, omega):
        return omega * self.background_index

    def with_parameters(self, mu, eps):
        return LayeredStructure(self.radii, mu, eps, self.background_mu, self.background_eps)

    def vacuum(self):
        """Same radii and background, every layer filled with the background medium."""
        L = self.n_layers
        return self.with_parameters([self.background_mu] * L, [self.background_eps] * L)

    def scaled(self, rho):
        """Radii multiplied by ``rho`` (the structure seen through ``x -> x / rho``)."""
        if not rho > 0:
            raise DomainError("scale factor must be positive")
        return LayeredStructure(
            [rho * r for r in self.radii], self.mu, self.eps, self.background_mu, self.background_eps
        )

    def material_at(self, r):
        """``(mu, eps)`` at radius ``r`` outside the core; raises inside it."""
        if r < self.radii[-1]:
            raise DomainError(f"radius {r} lies inside the PEC core")
        if r >= self.radii[0]:
            return self.background_mu, self.background_eps
        for j in range(self.n_layers):
            if self.radii[j + 1] <= r < self.radii[j]:
                return self.mu[j], self.eps[j]
        raise AssertionError("unreachable")  # pragma: no cover

    # serialization -----------------------------------------------------------

    def to_dict(self):
        return {
            "schema": STRUCTURE_SCHEMA,
            "radii": list(self.radii),
            "mu": list(self.mu),
            "eps": list(self.eps),
            "background": {"mu": self.background_mu, "eps": self.background_eps},
        }

    @classmethod
    def from_dict(cls, doc):
        from .io import check_schema

        check_schema(doc, STRUCTURE_SCHEMA)
        for key in ("radii", "mu", "eps"):
            if key not in doc:
                raise SchemaError(f"missing field '{key}'", field=key)
            if not isinstance(doc[key], list) or not all(isinstance(v, (int, float)) for v in doc[key]):
                raise SchemaError(f"field '{key}' must be an array of numbers", field=key)
        bg = doc.get("background", {"mu": 1.0, "eps": 1.0})
        if not isinstance(bg, dict) or set(bg) != {"mu", "eps"}:
            raise SchemaError("field 'background' must be {\"mu\": .., \"eps\": ..}", field="background")
        try:
            return cls(doc["radii"], doc["mu"], doc["eps"], bg["mu"], bg["eps"])
        except DomainError as exc:
            raise SchemaError(str(exc), field="radii/mu/eps") from exc

    def __eq__(self, other):
        if not isinstance(other, LayeredStructure):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.radii, self.mu, self.eps, self.background_mu, self.background_eps))


@dataclass(frozen=True)
class ModalCoefficient:
    """One diagonal scattering coefficient ``W_n`` (independent of ``m``)."""

    n: int
    polarization: Polarization
    value: object  # complex, or LaurentSeries for the low-frequency form


@dataclass(frozen=True)
class LayerFieldCoefficients:
    """``coefficients[j] = (regular, outgoing)`` amplitudes in region ``j = 0..L``."""

    n: int
    polarization: Polarization
    omega: float
    coefficients: np.ndarray = field(repr=False)

    @property
    def a0(self):
        return complex(self.coefficients[0, 1])


def _check_order(n):
    if int(n) != n or n < 1:
        raise DomainError(f"multipole order must be a positive integer, got {n}")
    return int(n)


def interface_matrix(n, polarization, k, material, r):
    """2x2 matrix mapping (regular, outgoing) amplitudes to tangential field traces.

    TE: ``[[j, h], [J/mu, H/mu]]``; TM: ``[[J/eps, H/eps], [j, h]]``, all at ``k r``.
    """
    n = _check_order(n)
    pol = Polarization.parse(polarization)
    if not (k > 0 and material > 0 and r > 0):
        raise DomainError("interface_matrix needs positive k, material and r")
    j, h, J, H = riccati_row(n, k * r)
    if pol is TE:
        return np.array([[j, h], [J / material, H / material]], dtype=complex)
    return np.array([[J / material, H / material], [j, h]], dtype=complex)


def _layer_arrays(structure, polarization):
    mat = structure.mu_all if polarization is TE else structure.eps_all
    return np.array(structure.radii), structure.z, mat


def transfer_products(structure, n, polarization, omegas):
    """Rows ``(p1, p2)`` for every frequency in ``omegas``; shape ``(m, 2)``."""
    n = _check_order(n)
    pol = Polarization.parse(polarization)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(omegas <= 0):
        raise DomainError("frequencies must be positive")
    radii, z, mat = _layer_arrays(structure, pol)
    return _kernels.transfer_rows(n, pol.code, omegas, radii, z, mat)


def transfer_product(structure, n, polarization, omega):
    """Top row ``(p1, p2)`` of the composed transfer product at one frequency.

    Each interface is inverted through its adjugate, so ``p1`` and ``p2``
    differ from the explicitly inverted product by one common nonzero factor;
    only their ratio is meaningful.
    """
    p = transfer_products(structure, n, polarization, [omega])[0]
    return complex(p[0]), complex(p[1])


def outgoing_amplitudes(structure, n, polarization, omegas):
    """``a_0 = -p1/p2`` (TE) or ``b_0`` (TM) at each frequency."""
    p = transfer_products(structure, n, polarization, omegas)
    small = np.abs(p[:, 1]) <= P2_RTOL * (np.abs(p[:, 0]) + np.abs(p[:, 1]))
    if np.any(small) or not np.all(np.isfinite(p)):
        raise SingularError("transfer product has a vanishing p2", magnitude=float(np.abs(p[:, 1]).min()))
    return -p[:, 0] / p[:, 1]


def modal_coefficients(structure, n, polarization, omegas):
    """``W_n`` at each frequency with ``k_0 = omega sqrt(eps_0 mu_0)``."""
    n = _check_order(n)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    a0 = outgoing_amplitudes(structure, n, polarization, omegas)
    return -1j * n * (n + 1) / structure.k0(omegas) * a0


def modal_coefficient(structure, n, polarization, omega):
    value = modal_coefficients(structure, n, polarization, [omega])[0]
    return ModalCoefficient(int(n), Polarization.parse(polarization), complex(value))


def reduced_coefficients(structure, n, polarization, ts):
    """Low-frequency coefficient ``W_n[mu, eps, t]`` at each ``t``.

    This is the modal coefficient of the structure shrunk by ``t`` and probed
    at unit frequency, i.e. ``-i n (n+1) a_0(t) / sqrt(eps_0 mu_0)``; it
    behaves like ``t**(2n+1)`` as ``t -> 0``.
    """
    n = _check_order(n)
    a0 = outgoing_amplitudes(structure, n, polarization, ts)
    return -1j * n * (n + 1) / structure.background_index * a0


def layer_fields(structure, n, polarization, omega, rtol=1e-10):
    """Amplitudes in every region, normalized to a unit incident multipole.

    Solves each interface system forward from the background and checks the
    interface equations and the PEC closure against ``rtol``.
    """
    n = _check_order(n)
    pol = Polarization.parse(polarization)
    a0 = outgoing_amplitudes(structure, n, pol, [omega])[0]
    L = structure.n_layers
    z = structure.z
    mat = structure.mu_all if pol is TE else structure.eps_all
    coeffs = np.zeros((L + 1, 2), dtype=complex)
    coeffs[0] = (1.0, a0)
    residual = 0.0
    for j in range(1, L + 1):
        r = structure.radii[j - 1]
        inner = interface_matrix(n, pol, omega * z[j], mat[j], r)
        outer = interface_matrix(n, pol, omega * z[j - 1], mat[j - 1], r)
        rhs = outer @ coeffs[j - 1]
        try:
            coeffs[j] = np.linalg.solve(inner, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularError(f"interface matrix at r={r} is singular") from exc
        residual = max(residual, np.abs(inner @ coeffs[j] - rhs).max() / max(np.abs(rhs).max(), 1e-300))
    j, h, J, H = riccati_row(n, omega * z[L] * structure.radii[L])
    row = (j, h) if pol is TE else (J, H)
    closure = abs(row[0] * coeffs[L, 0] + row[1] * coeffs[L, 1])
    closure /= max(abs(row[0] * coeffs[L, 0]), abs(row[1] * coeffs[L, 1]), 1e-300)
    if residual > rtol or closure > rtol:
        raise NumericalError(f"layer fields violate their equations (interface {residual:.2e}, PEC {closure:.2e})")
    return LayerFieldCoefficients(n, pol, float(omega), coeffs)

"""Blow-up map and pushed-forward cloak tensors.

``F_rho`` is radial, ``F(x) = f(|x|) x/|x|`` with

    f(r) = r                                   r >= 2
         = (3 - 4 rho)/(2 (1 - rho)) + r/(4 (1 - rho))   2 rho <= r <= 2
         = 1/2 + r/(2 rho)                     rho <= r <= 2 rho
         = r / rho                             r <= rho

It sends ``|x| <= rho`` onto the unit ball and fixes ``|x| >= 2``. A layered
structure shrunk by ``rho`` (radii ``rho r_j``) and placed in ``|x| <= 2 rho``
is pushed forward to an anisotropic medium in ``1 < |y| < 2`` whose far field
equals that of the shrunk structure. The medium is exported, not re-solved.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

BOUNDARY_RTOL = 1e-12
# grid generators move samples this far (relative) off interface spheres
NUDGE = 1e-9


class BoundaryError(DomainError):
    """Point lies on a sphere where the map's Jacobian jumps."""


def _check_rho(rho):
    if not 0 < rho < 0.5:
        raise DomainError(f"rho must lie in (0, 1/2), got {rho}")
    return float(rho)


def radial_profile(rho, r):
    """``f(r)`` and ``f'(r)`` for arrays of radii (one-sided on the breakpoints, from below)."""
    rho = _check_rho(rho)
    r = np.asarray(r, dtype=float)
    f = np.where(
        r >= 2,
        r,
        np.where(
            r >= 2 * rho,
            (3 - 4 * rho) / (2 * (1 - rho)) + r / (4 * (1 - rho)),
            np.where(r >= rho, 0.5 + r / (2 * rho), r / rho),
        ),
    )
    df = np.where(r > 2, 1.0, np.where(r > 2 * rho, 1 / (4 * (1 - rho)), np.where(r > rho, 1 / (2 * rho), 1 / rho)))
    return f, df


def piece_formulas(rho):
    """The four radial pieces as separate callables, outermost first."""
    rho = _check_rho(rho)
    return (
        lambda r: r,
        lambda r: (3 - 4 * rho) / (2 * (1 - rho)) + r / (4 * (1 - rho)),
        lambda r: 0.5 + r / (2 * rho),
        lambda r: r / rho,
    )


def breakpoints(rho):
    """``{r: (outer piece, inner piece)}`` evaluated at each breakpoint ``2, 2 rho, rho``."""
    p = piece_formulas(rho)
    return {r: (p[i](r), p[i + 1](r)) for i, r in enumerate((2.0, 2 * rho, rho))}


def _inverse_profile(rho, s):
    s = np.asarray(s, dtype=float)
    return np.where(
        s >= 2,
        s,
        np.where(
            s >= 1.5,
            4 * (1 - rho) * (s - (3 - 4 * rho) / (2 * (1 - rho))),
            np.where(s >= 1, 2 * rho * (s - 0.5), rho * s),
        ),
    )


def _radial_apply(profile, rho, x):
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, 3)
    r = np.linalg.norm(flat, axis=1)
    s = profile(rho, r)
    s = s[0] if isinstance(s, tuple) else s
    scale = np.divide(s, r, out=np.full_like(r, 1.0 / rho), where=r > 0)
    return (flat * scale[:, None]).reshape(x.shape)


def blow_up_map(rho, x):
    """``F_rho(x)`` for one point or an ``(npts, 3)`` array."""
    _check_rho(rho)
    return _radial_apply(radial_profile, rho, x)


def inverse_map(rho, y):
    """``F_rho^{-1}(y)``; each radial piece is affine so the inverse is exact."""
    _check_rho(rho)
    return _radial_apply(_inverse_profile, rho, y)


def jacobian(rho, x):
    """``DF = f' xhat xhat^T + (f/r) (I - xhat xhat^T)`` at a point off the origin."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0:
        return np.eye(3) / _check_rho(rho)
    f, df = radial_profile(rho, r)
    xh = x / r
    P = np.outer(xh, xh)
    return float(df) * P + float(f) / r * (np.eye(3) - P)


@dataclass(frozen=True)
class MaterialTensorField:
    point: np.ndarray
    mu_tensor: np.ndarray
    eps_tensor: np.ndarray


def push_tensor(DF, value):
    """``DF (value I) DF^T / det DF`` for a scalar material value."""
    return value * (DF @ DF.T) / np.linalg.det(DF)


def interface_radii(structure, rho):
    """Spheres in ``y`` where the pushed-forward tensors jump."""
    _check_rho(rho)
    inner = [float(radial_profile(rho, rho * r)[0]) for r in structure.radii]
    return sorted(set(inner + [1.5, 2.0]))


def push_forward(structure, rho, y):
    """Pushed-forward ``mu`` and ``eps`` tensors at ``y`` with ``|y| > 1``.

    The preimage ``x = F^{-1}(y)`` is looked up in the structure at ``|x|/rho``;
    outside the shrunk structure that is the background medium.
    """
    rho = _check_rho(rho)
    y = np.asarray(y, dtype=float)
    s = float(np.linalg.norm(y))
    if s <= 1:
        raise DomainError(f"|y| = {s} lies inside the cloaked region |y| <= 1")
    for b in interface_radii(structure, rho):
        if abs(s - b) <= BOUNDARY_RTOL * b:
            raise BoundaryError(f"|y| = {s} lies on the interface sphere of radius {b}")
    x = inverse_map(rho, y)
    r = float(np.linalg.norm(x))
    mu, eps = structure.material_at(r / rho)
    if s >= 2:
        return MaterialTensorField(y, mu * np.eye(3), eps * np.eye(3))
    DF = jacobian(rho, x)
    return MaterialTensorField(y, push_tensor(DF, mu), push_tensor(DF, eps))


def nudge_off_interfaces(structure, rho, radii):
    """Move sample radii that sit on an interface sphere outward by ``1e-9`` relative."""
    radii = np.array(radii, dtype=float)
    for b in interface_radii(structure, rho):
        hit = np.abs(radii - b) <= NUDGE * b
        radii[hit] = b * (1 + NUDGE)
    return radii


def tensor_grid(structure, rho, radii, n_dirs=8, seed=0):
    """Tensor samples along ``n_dirs`` fixed pseudo-random directions at each radius."""
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_dirs, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    radii = nudge_off_interfaces(structure, rho, radii)
    return [push_forward(structure, rho, r * d) for r in radii for d in dirs]


TENSOR_COLUMNS = (
    ["x1", "x2", "x3"]
    + [f"mu{i}{j}" for i in range(1, 4) for j in range(i, 4)]
    + [f"eps{i}{j}" for i in range(1, 4) for j in range(i, 4)]
)


def tensor_rows(samples):
    iu = np.triu_indices(3)
    return [list(s.point) + list(s.mu_tensor[iu]) + list(s.eps_tensor[iu]) for s in samples]


def anisotropy(tensor):
    """Largest over smallest eigenvalue of a symmetric tensor."""
    ev = np.linalg.eigvalsh(tensor)
    return float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf

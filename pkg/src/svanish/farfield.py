"""Vector spherical harmonics, plane-wave multipole coefficients and far fields.

Conventions
-----------
``Y_n^m`` are orthonormal on the unit sphere with the Condon-Shortley phase,
``Y_n^{-m} = (-1)^m conj(Y_n^m)``. ``U_{n,m} = grad_S Y_n^m / sqrt(n(n+1))``
and ``V_{n,m} = xhat x U_{n,m}``. The interior multipoles used for the
incident field are

    E~TE = -sqrt(n(n+1)) j_n(kr) V_{n,m}
    E~TM = (i / (omega eps)) curl(j_n(kr) V_{n,m}) ... (tangential part
           sqrt(n(n+1)) J_n(kr) / r U_{n,m})

and the scattering amplitude is defined by
``E - E^i ~ exp(i k0 |x|) / (k0 |x|) A_inf(xhat)``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError, NumericalError
from .multilayer import TE, TM, modal_coefficients

N_MAX_CAP = 32
TAIL_RTOL = 1e-12
ORTHO_TOL = 1e-12


@dataclass(frozen=True)
class Direction:
    """Unit vector with the spherical angles used for its local frame.

    At the poles the azimuth is whatever was supplied (``0`` when built from
    Cartesian components), which fixes ``theta_hat`` and ``phi_hat`` there.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise DomainError("direction angles must be finite")

    @classmethod
    def from_angles(cls, theta, phi):
        return cls(float(theta), float(phi))

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if v.shape != (3,) or not norm > 0:
            raise DomainError("direction needs a nonzero 3-vector")
        v = v / norm
        theta = math.atan2(math.hypot(v[0], v[1]), v[2])
        phi = math.atan2(v[1], v[0]) if (v[0] or v[1]) else 0.0
        return cls(theta, phi)

    @property
    def vector(self):
        return _frame(self.theta, self.phi)[0]

    def frame(self):
        """``(xhat, theta_hat, phi_hat)`` as rows of a 3x3 array."""
        return _frame(self.theta, self.phi)


def _frame(theta, phi):
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(phi), math.cos(phi)
    return np.array([[st * cp, st * sp, ct], [ct * cp, ct * sp, -st], [-sp, cp, 0.0]])


def _as_direction(d):
    return d if isinstance(d, Direction) else Direction.from_vector(d)


@dataclass(frozen=True)
class VshEval:
    n: int
    m: int
    Y: complex
    U: np.ndarray
    V: np.ndarray


def vsh_table(n_max, thetas, phis):
    """``Y, U, V`` for ``1 <= n <= n_max``, ``-n <= m <= n`` at each ``(theta, phi)`` pair.

    Returns arrays of shape ``(npts, n_max+1, 2 n_max+1)`` for ``Y`` and with a
    trailing axis of 3 for ``U`` and ``V``; index ``[.., n, m + n_max]``.
    Entries with ``n = 0`` or ``|m| > n`` are zero.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    if thetas.shape != phis.shape:
        raise DomainError("thetas and phis must have the same shape")
    P, Q, D = _kernels.legendre_table(n_max, thetas)
    npts = thetas.size
    M = 2 * n_max + 1
    Y = np.zeros((npts, n_max + 1, M), dtype=complex)
    gt = np.zeros((npts, n_max + 1, M), dtype=complex)  # theta component of grad_S Y
    gp = np.zeros((npts, n_max + 1, M), dtype=complex)  # phi component
    for m in range(n_max + 1):
        e = np.exp(1j * m * phis)[:, None]
        Y[:, :, n_max + m] = P[:, :, m] * e
        gt[:, :, n_max + m] = D[:, :, m] * e
        gp[:, :, n_max + m] = 1j * m * Q[:, :, m] * e
        if m:
            s = (-1) ** m
            Y[:, :, n_max - m] = s * np.conj(Y[:, :, n_max + m])
            gt[:, :, n_max - m] = s * np.conj(gt[:, :, n_max + m])
            gp[:, :, n_max - m] = s * np.conj(gp[:, :, n_max + m])
    st, ct = np.sin(thetas), np.cos(thetas)
    sp, cp = np.sin(phis), np.cos(phis)
    xhat = np.stack([st * cp, st * sp, ct], axis=1)
    that = np.stack([ct * cp, ct * sp, -st], axis=1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)
    norm = np.zeros(n_max + 1)
    norm[1:] = 1.0 / np.sqrt(np.arange(1, n_max + 1) * np.arange(2, n_max + 2))
    gt *= norm[None, :, None]
    gp *= norm[None, :, None]
    U = gt[..., None] * that[:, None, None, :] + gp[..., None] * phat[:, None, None, :]
    # xhat x theta_hat = phi_hat and xhat x phi_hat = -theta_hat
    V = gt[..., None] * phat[:, None, None, :] - gp[..., None] * that[:, None, None, :]
    Y[:, 0, :] = 0.0
    Y[:, 0, n_max] = P[:, 0, 0]
    return Y, U, V, xhat


def vsh(n, m, direction):
    """``Y_n^m``, ``U_{n,m}`` and ``V_{n,m}`` at one direction."""
    if int(n) != n or n < 1 or int(m) != m or abs(m) > n:
        raise DomainError(f"need n >= 1 and |m| <= n, got n={n}, m={m}")
    d = _as_direction(direction)
    n, m = int(n), int(m)
    Y, U, V, _ = vsh_table(n, [d.theta], [d.phi])
    return VshEval(n, m, complex(Y[0, n, n + m]), U[0, n, n + m].copy(), V[0, n, n + m].copy())


def sphere_quadrature(n_max):
    """Gauss-Legendre in ``cos theta`` times trapezoid in ``phi``; exact through degree ``2 n_max``.

    Returns ``(thetas, phis, weights)`` flattened over the product grid.
    """
    n_theta = 2 * n_max + 2
    n_phi = 4 * n_max + 4
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    T, Pm = np.meshgrid(np.arccos(x), phis, indexing="ij")
    W = np.repeat(w, n_phi) * (2 * np.pi / n_phi)
    return T.ravel(), Pm.ravel(), W


def _check_incidence(c, khat):
    c = np.asarray(c, dtype=float)
    d = _as_direction(khat)
    k = d.vector
    if c.shape != (3,) or not np.linalg.norm(c) > 0:
        raise DomainError("polarization must be a nonzero real 3-vector")
    if abs(c @ k) > ORTHO_TOL * np.linalg.norm(c):
        raise DomainError(f"polarization is not orthogonal to the incidence direction (c.k = {c @ k:.3e})")
    return c, d


def plane_wave_coefficients(c, khat, n_max, omega=1.0, mu0=1.0, eps0=1.0):
    """Multipole coefficients of ``exp(i k0 khat.x) c`` in the background.

    ``exp(i k.x) c = sum_{p,q} a_{p,q} E~TE_{p,q} + b_{p,q} E~TM_{p,q}`` with

        a_{p,q} = -(4 pi i^p / sqrt(p(p+1))) conj(V_{p,q}(khat)) . c
        b_{p,q} = -(4 pi i^p / sqrt(p(p+1))) sqrt(eps0/mu0) conj(U_{p,q}(khat)) . c

    Returned as two ``(n_max+1, 2 n_max+1)`` arrays indexed ``[p, q + n_max]``.
    """
    if int(n_max) != n_max or n_max < 1:
        raise DomainError("n_max must be a positive integer")
    if not (omega > 0 and mu0 > 0 and eps0 > 0):
        raise DomainError("omega, mu0 and eps0 must be positive")
    n_max = int(n_max)
    c, d = _check_incidence(c, khat)
    _, U, V, _ = vsh_table(n_max, [d.theta], [d.phi])
    p = np.arange(n_max + 1)
    pre = np.zeros(n_max + 1, dtype=complex)
    pre[1:] = -4 * np.pi * (1j ** p[1:]) / np.sqrt(p[1:] * (p[1:] + 1))
    a = pre[:, None] * (np.conj(V[0]) @ c)
    b = pre[:, None] * math.sqrt(eps0 / mu0) * (np.conj(U[0]) @ c)
    return a, b


def incident_multipole_field(a, b, x, omega=1.0, mu0=1.0, eps0=1.0):
    """Evaluate ``sum a E~TE + b E~TM`` at points ``x`` (shape ``(npts, 3)``)."""
    from .specfun import sph_bessel_table

    x = np.atleast_2d(np.asarray(x, dtype=float))
    n_max = a.shape[0] - 1
    k = omega * math.sqrt(mu0 * eps0)
    r = np.linalg.norm(x, axis=1)
    if np.any(r <= 0):
        raise DomainError("evaluation points must avoid the origin")
    thetas = np.arccos(np.clip(x[:, 2] / r, -1, 1))
    phis = np.arctan2(x[:, 1], x[:, 0])
    Y, U, V, xhat = vsh_table(n_max, thetas, phis)
    j, _ = sph_bessel_table(n_max, k * r)
    n = np.arange(1, n_max + 1)
    s = np.sqrt(n * (n + 1))
    jn = j[:, 1:]
    Jn = (k * r)[:, None] * j[:, :-1] - n * jn
    te = -(s * jn)[:, :, None, None] * V[:, 1:]
    tm_t = (s * Jn / r[:, None])[:, :, None, None] * U[:, 1:]
    tm_r = ((n * (n + 1)) * jn / r[:, None])[:, :, None, None] * Y[:, 1:, :, None] * xhat[:, None, None, :]
    tm = (1j / (omega * eps0)) * (tm_t + tm_r)
    return np.einsum("nm,pnmk->pk", a[1:], te) + np.einsum("nm,pnmk->pk", b[1:], tm)


@dataclass(frozen=True)
class FarFieldSample:
    c: np.ndarray
    khat: Direction
    xhat: Direction
    amplitude: np.ndarray
    n_max: int = 0
    tail: float = 0.0
    term_norms: np.ndarray = field(default=None, repr=False)


def modal_table(structure, omega, n_max):
    """``W_n^TE``, ``W_n^TM`` for ``n = 0..n_max`` (index 0 unused)."""
    w = np.zeros((2, n_max + 1), dtype=complex)
    for n in range(1, n_max + 1):
        w[0, n] = modal_coefficients(structure, n, TE, [omega])[0]
        w[1, n] = modal_coefficients(structure, n, TM, [omega])[0]
    return w


def _term_norms(alpha, beta, impedance2):
    n = np.arange(alpha.shape[0])
    weight = np.zeros(n.size)
    weight[1:] = 1.0 / (n[1:] * (n[1:] + 1))
    return np.sqrt(weight * (np.sum(np.abs(alpha) ** 2, axis=1) + impedance2 * np.sum(np.abs(beta) ** 2, axis=1)))


def tail_estimate(term_norms):
    """Bound on the omitted terms assuming the last observed ratio keeps shrinking."""
    t = np.asarray(term_norms)[1:]
    if t.size < 2 or t[-2] == 0:
        return float(t[-1]) if t.size else 0.0
    q = t[-1] / t[-2]
    if q >= 1:
        return math.inf
    return float(t[-1] * q / (1 - q))


def default_n_max(structure, omega, c, khat):
    """Smallest order whose tail estimate drops below ``1e-12`` of the partial sum, at most 32."""
    c, d = _check_incidence(c, khat)
    imp2 = structure.background_mu / structure.background_eps
    for n_max in range(2, N_MAX_CAP + 1):
        a, b = plane_wave_coefficients(c, d, n_max, omega, structure.background_mu, structure.background_eps)
        w = modal_table(structure, omega, n_max)
        norms = _term_norms(a * w[0][:, None], b * w[1][:, None], imp2)
        total = math.sqrt(np.sum(norms**2))
        if total == 0 or tail_estimate(norms) <= TAIL_RTOL * total:
            return n_max
    return N_MAX_CAP


def _multipole_weights(structure, omega, c, khat, n_max):
    bg_mu, bg_eps = structure.background_mu, structure.background_eps
    a, b = plane_wave_coefficients(c, khat, n_max, omega, bg_mu, bg_eps)
    w = modal_table(structure, omega, n_max)
    return a * w[0][:, None], b * w[1][:, None]


def amplitude_from_multipoles(alpha, beta, directions_theta, directions_phi, k0, impedance):
    """``A_inf`` at each direction from scattered multipole weights ``alpha`` (TE), ``beta`` (TM)."""
    n_max = alpha.shape[0] - 1
    _, U, V, _ = vsh_table(n_max, directions_theta, directions_phi)
    n = np.arange(1, n_max + 1)
    pre = -(1j ** (-n.astype(float))) * k0 / np.sqrt(n * (n + 1))
    A = np.einsum("n,nm,pnmk->pk", pre, alpha[1:], V[:, 1:])
    A += impedance * np.einsum("n,nm,pnmk->pk", pre, beta[1:], U[:, 1:])
    return A


def scattering_amplitude(structure, omega, c, khat, xhat, n_max=None):
    """Far-field amplitude ``A_inf(xhat)`` for plane-wave incidence ``exp(i k0 khat.x) c``."""
    if not omega > 0:
        raise DomainError("omega must be positive")
    c, kd = _check_incidence(c, khat)
    xd = _as_direction(xhat)
    if n_max is None:
        n_max = default_n_max(structure, omega, c, kd)
    alpha, beta = _multipole_weights(structure, omega, c, kd, n_max)
    k0 = structure.k0(omega)
    imp = math.sqrt(structure.background_mu / structure.background_eps)
    A = amplitude_from_multipoles(alpha, beta, [xd.theta], [xd.phi], k0, imp)[0]
    if not np.all(np.isfinite(A)):
        raise NumericalError("non-finite scattering amplitude")
    norms = _term_norms(alpha, beta, imp**2)
    return FarFieldSample(c, kd, xd, A, n_max, k0 * tail_estimate(norms), norms)


def far_field_grid(structure, omega, c, khat, n_theta=19, n_phi=36, n_max=None):
    """Amplitude on a ``theta x phi`` grid including both poles; rows ``(theta, phi, A)``."""
    c, kd = _check_incidence(c, khat)
    if n_max is None:
        n_max = default_n_max(structure, omega, c, kd)
    thetas = np.linspace(0, np.pi, n_theta)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    T, P = np.meshgrid(thetas, phis, indexing="ij")
    alpha, beta = _multipole_weights(structure, omega, c, kd, n_max)
    imp = math.sqrt(structure.background_mu / structure.background_eps)
    A = amplitude_from_multipoles(alpha, beta, T.ravel(), P.ravel(), structure.k0(omega), imp)
    return T.ravel(), P.ravel(), A, n_max


@dataclass(frozen=True)
class CrossSection:
    quadrature: float
    modal: float
    n_max: int

    @property
    def value(self):
        return self.modal


def cross_section_details(structure, omega, c, khat, n_max=None, rtol=1e-8):
    """Cross section by sphere quadrature of ``|A_inf|^2 / k0^2`` and by the modal power sum."""
    c, kd = _check_incidence(c, khat)
    if n_max is None:
        n_max = default_n_max(structure, omega, c, kd)
    alpha, beta = _multipole_weights(structure, omega, c, kd, n_max)
    k0 = structure.k0(omega)
    imp2 = structure.background_mu / structure.background_eps
    modal = float(np.sum(_term_norms(alpha, beta, imp2) ** 2))
    # |A|^2 has degree 2 n_max in the angles
    T, P, W = sphere_quadrature(n_max)
    A = amplitude_from_multipoles(alpha, beta, T, P, k0, math.sqrt(imp2))
    quad = float(np.sum(W * np.sum(np.abs(A) ** 2, axis=1)) / k0**2)
    if abs(quad - modal) > rtol * max(modal, 1e-300):
        raise NumericalError(f"cross section quadrature {quad:.16e} disagrees with modal sum {modal:.16e}")
    return CrossSection(quad, modal, n_max)


def scattering_cross_section(structure, omega, c, khat, n_max=None):
    """``(1/k0^2) * integral |A_inf|^2`` over the unit sphere (both evaluations must agree)."""
    return cross_section_details(structure, omega, c, khat, n_max).value

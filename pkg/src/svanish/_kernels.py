"""Hot numeric loops.

Every kernel exists twice: a scalar-loop version compiled with numba and a
numpy version vectorised over the grid axis. ``jy_table``, ``legendre_table``,
``transfer_rows`` and ``series_rows`` dispatch on :data:`svanish._jit.USE_JIT`; the ``*_jit``
and ``*_np`` variants stay importable so tests and the benchmark can compare
them directly.
"""
import numpy as np

from . import _jit
from ._jit import njit

# Extra orders above the requested table size where the downward ratio
# recurrence is started.
MILLER_PAD = 50

TE = 0
TM = 1


# ---------------------------------------------------------------------------
# spherical Bessel j_n, y_n for orders 0..nmax at real t > 0


@njit
def _jy_scalar(nmax, t, j, y):
    s = np.sin(t)
    c = np.cos(t)
    y[0] = -c / t
    if nmax >= 1:
        y[1] = -c / (t * t) - s / t
    for k in range(1, nmax):
        y[k + 1] = (2 * k + 1) / t * y[k] - y[k - 1]

    j[0] = s / t
    if nmax == 0:
        return
    if t >= nmax:
        j[1] = s / (t * t) - c / t
        for k in range(1, nmax):
            j[k + 1] = (2 * k + 1) / t * j[k] - j[k - 1]
        return
    # ratio r_k = j_k / j_{k-1} from the continued fraction, started far above nmax
    top = nmax + MILLER_PAD + int(t)
    r = t / (2 * top + 3)
    ratios = np.empty(nmax + 1)
    for k in range(top, 0, -1):
        r = 1.0 / ((2 * k + 1) / t - r)
        if k <= nmax:
            ratios[k] = r
    for k in range(1, nmax + 1):
        j[k] = j[k - 1] * ratios[k]


@njit
def jy_table_jit(nmax, ts):
    m = ts.shape[0]
    j = np.empty((m, nmax + 1))
    y = np.empty((m, nmax + 1))
    for i in range(m):
        _jy_scalar(nmax, ts[i], j[i], y[i])
    return j, y


def jy_table_np(nmax, ts):
    ts = np.asarray(ts, dtype=float)
    m = ts.shape[0]
    j = np.empty((m, nmax + 1))
    y = np.empty((m, nmax + 1))
    s = np.sin(ts)
    c = np.cos(ts)
    y[:, 0] = -c / ts
    j[:, 0] = s / ts
    if nmax == 0:
        return j, y
    y[:, 1] = -c / ts**2 - s / ts
    for k in range(1, nmax):
        y[:, k + 1] = (2 * k + 1) / ts * y[:, k] - y[:, k - 1]

    up = ts >= nmax
    if up.any():
        tu = ts[up]
        ju = np.empty((tu.shape[0], nmax + 1))
        ju[:, 0] = s[up] / tu
        ju[:, 1] = s[up] / tu**2 - c[up] / tu
        for k in range(1, nmax):
            ju[:, k + 1] = (2 * k + 1) / tu * ju[:, k] - ju[:, k - 1]
        j[up] = ju
    down = ~up
    if down.any():
        td = ts[down]
        top = nmax + MILLER_PAD + int(td.max())
        r = td / (2 * top + 3)
        ratios = np.empty((td.shape[0], nmax + 1))
        for k in range(top, 0, -1):
            r = 1.0 / ((2 * k + 1) / td - r)
            if k <= nmax:
                ratios[:, k] = r
        jd = np.empty((td.shape[0], nmax + 1))
        jd[:, 0] = s[down] / td
        for k in range(1, nmax + 1):
            jd[:, k] = jd[:, k - 1] * ratios[:, k]
        j[down] = jd
    return j, y


def jy_table(nmax, ts):
    """Return ``(j, y)`` of shape ``(len(ts), nmax + 1)``."""
    ts = np.ascontiguousarray(ts, dtype=float)
    if _jit.USE_JIT:
        return jy_table_jit(nmax, ts)
    return jy_table_np(nmax, ts)


# ---------------------------------------------------------------------------
# order-n values needed by the interface matrices:
# j_n, h_n = j_n + i y_n, J_n = t j_{n-1} - n j_n, H_n likewise (n >= 1)


@njit
def _bessel_row(n, t, jbuf, ybuf):
    _jy_scalar(n, t, jbuf, ybuf)
    jn = jbuf[n]
    hn = jbuf[n] + 1j * ybuf[n]
    Jn = t * jbuf[n - 1] - n * jbuf[n]
    Hn = t * (jbuf[n - 1] + 1j * ybuf[n - 1]) - n * hn
    return jn, hn, Jn, Hn


def _bessel_row_np(n, ts):
    j, y = jy_table_np(n, ts)
    jn = j[:, n]
    hn = j[:, n] + 1j * y[:, n]
    Jn = ts * j[:, n - 1] - n * jn
    Hn = ts * (j[:, n - 1] + 1j * y[:, n - 1]) - n * hn
    return jn, hn, Jn, Hn


# ---------------------------------------------------------------------------
# transfer product: PEC row composed outward through every interface with
# adjugates, for each frequency in ``omegas``
#
# layer arrays are indexed 0..L with index 0 the background; radii[j-1] is
# the outer radius of layer j and radii[L] the PEC core radius


@njit
def transfer_rows_jit(n, pol, omegas, radii, z, mat):
    L = z.shape[0] - 1
    m = omegas.shape[0]
    out = np.empty((m, 2), dtype=np.complex128)
    jbuf = np.empty(n + 1)
    ybuf = np.empty(n + 1)
    for i in range(m):
        w = omegas[i]
        jn, hn, Jn, Hn = _bessel_row(n, w * z[L] * radii[L], jbuf, ybuf)
        if pol == TE:
            v1 = jn
            v2 = hn
        else:
            v1 = Jn
            v2 = Hn
        for layer in range(L, 0, -1):
            r = radii[layer - 1]
            ji, hi, Ji, Hi = _bessel_row(n, w * z[layer] * r, jbuf, ybuf)
            jo, ho, Jo, Ho = _bessel_row(n, w * z[layer - 1] * r, jbuf, ybuf)
            mi = mat[layer]
            mo = mat[layer - 1]
            if pol == TE:
                # inner [[j, h], [J/mu, H/mu]], outer likewise
                a11 = Hi / mi
                a12 = -hi
                a21 = -Ji / mi
                a22 = ji
                b11 = jo
                b12 = ho
                b21 = Jo / mo
                b22 = Ho / mo
            else:
                # inner [[J/eps, H/eps], [j, h]]
                a11 = hi
                a12 = -Hi / mi
                a21 = -ji
                a22 = Ji / mi
                b11 = Jo / mo
                b12 = Ho / mo
                b21 = jo
                b22 = ho
            f11 = a11 * b11 + a12 * b21
            f12 = a11 * b12 + a12 * b22
            f21 = a21 * b11 + a22 * b21
            f22 = a21 * b12 + a22 * b22
            u1 = v1 * f11 + v2 * f21
            u2 = v1 * f12 + v2 * f22
            big = max(abs(u1), abs(u2))
            if big > 1e100:
                u1 = u1 / big
                u2 = u2 / big
            v1 = u1
            v2 = u2
        out[i, 0] = v1
        out[i, 1] = v2
    return out


def transfer_rows_np(n, pol, omegas, radii, z, mat):
    L = z.shape[0] - 1
    omegas = np.asarray(omegas, dtype=float)
    jn, hn, Jn, Hn = _bessel_row_np(n, omegas * z[L] * radii[L])
    if pol == TE:
        v1, v2 = jn.astype(complex), hn
    else:
        v1, v2 = Jn.astype(complex), Hn
    for layer in range(L, 0, -1):
        r = radii[layer - 1]
        ji, hi, Ji, Hi = _bessel_row_np(n, omegas * z[layer] * r)
        jo, ho, Jo, Ho = _bessel_row_np(n, omegas * z[layer - 1] * r)
        mi, mo = mat[layer], mat[layer - 1]
        if pol == TE:
            a = ((Hi / mi, -hi), (-Ji / mi, ji))
            b = ((jo, ho), (Jo / mo, Ho / mo))
        else:
            a = ((hi, -Hi / mi), (-ji, Ji / mi))
            b = ((Jo / mo, Ho / mo), (jo, ho))
        f11 = a[0][0] * b[0][0] + a[0][1] * b[1][0]
        f12 = a[0][0] * b[0][1] + a[0][1] * b[1][1]
        f21 = a[1][0] * b[0][0] + a[1][1] * b[1][0]
        f22 = a[1][0] * b[0][1] + a[1][1] * b[1][1]
        u1 = v1 * f11 + v2 * f21
        u2 = v1 * f12 + v2 * f22
        big = np.maximum(np.abs(u1), np.abs(u2))
        scale = np.where(big > 1e100, big, 1.0)
        v1, v2 = u1 / scale, u2 / scale
    return np.stack([v1, v2], axis=1)


def transfer_rows(n, pol, omegas, radii, z, mat):
    """Return ``(len(omegas), 2)`` complex rows ``(p1, p2)``."""
    omegas = np.ascontiguousarray(omegas, dtype=float)
    radii = np.ascontiguousarray(radii, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    mat = np.ascontiguousarray(mat, dtype=float)
    if _jit.USE_JIT:
        return transfer_rows_jit(n, pol, omegas, radii, z, mat)
    return transfer_rows_np(n, pol, omegas, radii, z, mat)


# ---------------------------------------------------------------------------
# the same composition over truncated power series in t
#
# Every series has a fixed nominal leading power and K stored coefficients:
# j, J lead n; h, H lead -n-1; the layer factors (already multiplied by t)
# lead 0, -2n-1, 2n+1, 0; p1 leads n and p2 leads -n-1. Since every sum
# adds terms of equal nominal lead, plain truncated convolution is exact
# through relative order K-1 and no lead bookkeeping is needed.
#
# jc[k] is the coefficient of t^(n+k) in j_n, yc[k] that of t^(-n-1+k) in y_n.


@njit
def _smul(a, b):
    K = a.shape[0]
    out = np.zeros(K, dtype=np.complex128)
    for k in range(K):
        acc = 0j
        for i in range(k + 1):
            acc += a[i] * b[k - i]
        out[k] = acc
    return out


@njit
def _series_factors(n, K, s, jc, yc):
    j = np.zeros(K, dtype=np.complex128)
    h = np.zeros(K, dtype=np.complex128)
    J = np.zeros(K, dtype=np.complex128)
    H = np.zeros(K, dtype=np.complex128)
    gap = 2 * n + 1
    for k in range(K):
        pj = n + k
        j[k] = jc[k] * s**pj
        J[k] = j[k] * (pj + 1)
        ph = k - n - 1
        v = 1j * yc[k] * s**ph
        if k >= gap:
            v += jc[k - gap] * s**ph
        h[k] = v
        H[k] = v * (ph + 1)
    return j, h, J, H


@njit
def series_rows_jit(n, pol, K, radii, z, mat, jc, yc):
    L = z.shape[0] - 1
    j, h, J, H = _series_factors(n, K, z[L] * radii[L], jc, yc)
    if pol == TE:
        v1 = j
        v2 = h
    else:
        v1 = J
        v2 = H
    for layer in range(L, 0, -1):
        r = radii[layer - 1]
        ji, hi, Ji, Hi = _series_factors(n, K, z[layer] * r, jc, yc)
        jo, ho, Jo, Ho = _series_factors(n, K, z[layer - 1] * r, jc, yc)
        mi = mat[layer]
        mo = mat[layer - 1]
        if pol == TE:
            a11 = Hi / mi
            a12 = -hi
            a21 = -Ji / mi
            a22 = ji
            b11 = jo
            b12 = ho
            b21 = Jo / mo
            b22 = Ho / mo
        else:
            a11 = hi
            a12 = -Hi / mi
            a21 = -ji
            a22 = Ji / mi
            b11 = Jo / mo
            b12 = Ho / mo
            b21 = jo
            b22 = ho
        f11 = _smul(a11, b11) + _smul(a12, b21)
        f12 = _smul(a11, b12) + _smul(a12, b22)
        f21 = _smul(a21, b11) + _smul(a22, b21)
        f22 = _smul(a21, b12) + _smul(a22, b22)
        u1 = _smul(v1, f11) + _smul(v2, f21)
        u2 = _smul(v1, f12) + _smul(v2, f22)
        v1 = u1
        v2 = u2
    return v1, v2


def _series_factors_np(n, K, s, jc, yc):
    pj = np.arange(K) + n
    ph = np.arange(K) - n - 1
    j = jc * s**pj.astype(float)
    v = 1j * yc * s**ph.astype(float)
    gap = 2 * n + 1
    if K > gap:
        v[gap:] += jc[: K - gap] * s ** ph[gap:].astype(float)
    return j.astype(complex), v, j * (pj + 1), v * (ph + 1)


def series_rows_np(n, pol, K, radii, z, mat, jc, yc):
    def mul(a, b):
        return np.convolve(a, b)[:K]

    L = z.shape[0] - 1
    j, h, J, H = _series_factors_np(n, K, z[L] * radii[L], jc, yc)
    v1, v2 = (j, h) if pol == TE else (J, H)
    for layer in range(L, 0, -1):
        r = radii[layer - 1]
        ji, hi, Ji, Hi = _series_factors_np(n, K, z[layer] * r, jc, yc)
        jo, ho, Jo, Ho = _series_factors_np(n, K, z[layer - 1] * r, jc, yc)
        mi, mo = mat[layer], mat[layer - 1]
        if pol == TE:
            a = ((Hi / mi, -hi), (-Ji / mi, ji))
            b = ((jo, ho), (Jo / mo, Ho / mo))
        else:
            a = ((hi, -Hi / mi), (-ji, Ji / mi))
            b = ((Jo / mo, Ho / mo), (jo, ho))
        f11 = mul(a[0][0], b[0][0]) + mul(a[0][1], b[1][0])
        f12 = mul(a[0][0], b[0][1]) + mul(a[0][1], b[1][1])
        f21 = mul(a[1][0], b[0][0]) + mul(a[1][1], b[1][0])
        f22 = mul(a[1][0], b[0][1]) + mul(a[1][1], b[1][1])
        v1, v2 = mul(v1, f11) + mul(v2, f21), mul(v1, f12) + mul(v2, f22)
    return v1, v2


def series_rows(n, pol, K, radii, z, mat, jc, yc):
    """Coefficient arrays of ``p1`` (lead ``n``) and ``p2`` (lead ``-n-1``), ``K`` each."""
    radii = np.ascontiguousarray(radii, dtype=float)
    z = np.ascontiguousarray(z, dtype=float)
    mat = np.ascontiguousarray(mat, dtype=float)
    jc = np.ascontiguousarray(jc, dtype=float)
    yc = np.ascontiguousarray(yc, dtype=float)
    if _jit.USE_JIT:
        return series_rows_jit(n, pol, K, radii, z, mat, jc, yc)
    return series_rows_np(n, pol, K, radii, z, mat, jc, yc)


# ---------------------------------------------------------------------------
# fully normalised associated Legendre functions with Condon-Shortley phase
#
# P[n, m]  = Pbar_n^m(cos theta)             (m >= 0)
# Q[n, m]  = Pbar_n^m(cos theta) / sin theta (m >= 1, finite at the poles)
# D[n, m]  = d Pbar_n^m / d theta


@njit
def _legendre_scalar(nmax, theta, P, Q, D):
    x = np.cos(theta)
    s = np.sin(theta)
    P[:, :] = 0.0
    Q[:, :] = 0.0
    D[:, :] = 0.0
    # sectoral seeds: Pbar_m^m = (-1)^m sqrt((2m+1)/(4 pi) prod (2k-1)/(2k)) s^m
    seed = np.sqrt(1.0 / (4.0 * np.pi))
    for m in range(nmax + 1):
        if m > 0:
            seed = -seed * np.sqrt((2.0 * m + 1.0) / (2.0 * m))
        # seed currently holds Pbar_m^m / s^m
        if m == 0:
            pm = seed
            qm = 0.0
        else:
            qm = seed * s ** (m - 1)
            pm = qm * s
        P[m, m] = pm
        Q[m, m] = qm
        if m + 1 <= nmax:
            f = np.sqrt(2.0 * m + 3.0)
            P[m + 1, m] = x * f * pm
            Q[m + 1, m] = x * f * qm
        for k in range(m + 2, nmax + 1):
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = np.sqrt((2.0 * k + 1.0) * ((k - 1.0) ** 2 - m * m) / ((2.0 * k - 3.0) * (k * k - m * m)))
            P[k, m] = a * x * P[k - 1, m] - b * P[k - 2, m]
            Q[k, m] = a * x * Q[k - 1, m] - b * Q[k - 2, m]
    for k in range(1, nmax + 1):
        D[k, 0] = np.sqrt(k * (k + 1.0)) * P[k, 1]
        for m in range(1, k + 1):
            c = np.sqrt((2.0 * k + 1.0) / (2.0 * k - 1.0) * (k * k - m * m))
            D[k, m] = k * x * Q[k, m] - c * Q[k - 1, m]


@njit
def legendre_table_jit(nmax, thetas):
    npts = thetas.shape[0]
    P = np.empty((npts, nmax + 1, nmax + 1))
    Q = np.empty((npts, nmax + 1, nmax + 1))
    D = np.empty((npts, nmax + 1, nmax + 1))
    for i in range(npts):
        _legendre_scalar(nmax, thetas[i], P[i], Q[i], D[i])
    return P, Q, D


def legendre_table_np(nmax, thetas):
    thetas = np.asarray(thetas, dtype=float)
    x = np.cos(thetas)
    s = np.sin(thetas)
    npts = thetas.shape[0]
    P = np.zeros((npts, nmax + 1, nmax + 1))
    Q = np.zeros((npts, nmax + 1, nmax + 1))
    D = np.zeros((npts, nmax + 1, nmax + 1))
    seed = np.sqrt(1.0 / (4.0 * np.pi))
    for m in range(nmax + 1):
        if m > 0:
            seed = -seed * np.sqrt((2.0 * m + 1.0) / (2.0 * m))
        if m == 0:
            pm = np.full(npts, seed)
            qm = np.zeros(npts)
        else:
            qm = seed * s ** (m - 1)
            pm = qm * s
        P[:, m, m] = pm
        Q[:, m, m] = qm
        if m + 1 <= nmax:
            f = np.sqrt(2.0 * m + 3.0)
            P[:, m + 1, m] = x * f * pm
            Q[:, m + 1, m] = x * f * qm
        for k in range(m + 2, nmax + 1):
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = np.sqrt((2.0 * k + 1.0) * ((k - 1.0) ** 2 - m * m) / ((2.0 * k - 3.0) * (k * k - m * m)))
            P[:, k, m] = a * x * P[:, k - 1, m] - b * P[:, k - 2, m]
            Q[:, k, m] = a * x * Q[:, k - 1, m] - b * Q[:, k - 2, m]
    for k in range(1, nmax + 1):
        D[:, k, 0] = np.sqrt(k * (k + 1.0)) * P[:, k, 1]
        for m in range(1, k + 1):
            c = np.sqrt((2.0 * k + 1.0) / (2.0 * k - 1.0) * (k * k - m * m))
            D[:, k, m] = k * x * Q[:, k, m] - c * Q[:, k - 1, m]
    return P, Q, D


def legendre_table(nmax, thetas):
    """Return ``(P, Q, D)`` each of shape ``(len(thetas), nmax + 1, nmax + 1)``."""
    thetas = np.ascontiguousarray(thetas, dtype=float)
    if _jit.USE_JIT:
        return legendre_table_jit(nmax, thetas)
    return legendre_table_np(nmax, thetas)

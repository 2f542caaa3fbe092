"""Projected Gauss-Newton search for S-vanishing layer parameters.

The unknowns are ``(mu_1..mu_L, eps_1..eps_L)`` on fixed radii. The residual
collects every low-frequency coefficient ``W_{n,l}`` of the target order,
each divided by its value for the bare PEC core (all layers set to the
background) so the components start out comparable. For lossless layers the
coefficients are real; their imaginary parts are checked, not fitted.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, SchemaError
from .lowfreq import CoefficientTable, index_set, lowfreq_coefficients
from .multilayer import LayeredStructure

DESIGN_SCHEMA = "svanish-design/1"
RCOND = 1e-12
FD_REL_STEP = 1e-6
BACKTRACK_HALVINGS = 20
MIN_STEP = 1e-14
# imaginary parts of scaled coefficients above this are reported as a numerical failure
IMAG_TOL = 1e-8


@dataclass(frozen=True)
class DesignProblem:
    radii: tuple
    mu0: tuple
    eps0: tuple
    order: int = 2
    bounds: tuple = (0.1, 10.0)
    max_iters: int = 200
    residual_tol: float = 1e-10
    step_damping: float = 1.0
    restarts: int = 0
    seed: int | None = None
    background: tuple = (1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "mu0", tuple(float(v) for v in self.mu0))
        object.__setattr__(self, "eps0", tuple(float(v) for v in self.eps0))
        object.__setattr__(self, "bounds", (float(self.bounds[0]), float(self.bounds[1])))
        lo, hi = self.bounds
        if not 0 < lo < hi:
            raise DomainError(f"bounds must satisfy 0 < lower < upper, got {self.bounds}")
        if len(self.mu0) != len(self.eps0) or len(self.radii) != len(self.mu0) + 1:
            raise DomainError("radii, mu and eps lengths are inconsistent")
        if not all(lo <= v <= hi for v in self.mu0 + self.eps0):
            raise DomainError("initial parameters must lie within the bounds")
        if self.order < 1 or self.max_iters < 0 or not 0 < self.step_damping <= 1 or self.residual_tol <= 0:
            raise DomainError("order, max_iters, step_damping or residual_tol out of range")
        # fixes radii and background; validates them too
        object.__setattr__(self, "_frame", LayeredStructure(self.radii, self.mu0, self.eps0, *self.background))
        vac = lowfreq_coefficients(self._frame.vacuum(), self.order).vector()
        object.__setattr__(self, "_scale", np.abs(vac))

    @classmethod
    def example1(cls, **kw):
        """Six layers between radii 2 and 1, order 2, start ``(3,6,3,6,3,6)``."""
        radii = [2 - j / 6 for j in range(7)]
        start = (3.0, 6.0, 3.0, 6.0, 3.0, 6.0)
        return cls(radii, start, start, **kw)

    @property
    def n_layers(self):
        return len(self.mu0)

    @property
    def n_targets(self):
        return self.order * (self.order + 1)

    @property
    def overdetermined(self):
        return self.n_targets > 2 * self.n_layers

    @property
    def scale(self):
        """Bare-PEC magnitudes used to normalize each target."""
        return self._scale

    @property
    def initial(self):
        return np.array(self.mu0 + self.eps0)

    def structure(self, params):
        p = np.asarray(params, dtype=float)
        L = self.n_layers
        return self._frame.with_parameters(p[:L], p[L:])

    def to_dict(self):
        return {
            "schema": DESIGN_SCHEMA,
            "kind": "problem",
            "radii": list(self.radii),
            "mu0": list(self.mu0),
            "eps0": list(self.eps0),
            "order": self.order,
            "bounds": list(self.bounds),
            "max_iters": self.max_iters,
            "residual_tol": self.residual_tol,
            "step_damping": self.step_damping,
            "restarts": self.restarts,
            "seed": self.seed,
            "background": {"mu": self.background[0], "eps": self.background[1]},
        }

    @classmethod
    def from_dict(cls, doc):
        from .io import check_schema

        check_schema(doc, DESIGN_SCHEMA)
        if doc.get("kind", "problem") != "problem":
            raise SchemaError("expected a design problem document", field="kind")
        try:
            bg = doc.get("background", {"mu": 1.0, "eps": 1.0})
            kw = {k: doc[k] for k in ("order", "max_iters", "residual_tol", "step_damping", "restarts", "seed") if k in doc}
            if "bounds" in doc:
                kw["bounds"] = tuple(doc["bounds"])
            return cls(doc["radii"], doc["mu0"], doc["eps0"], background=(bg["mu"], bg["eps"]), **kw)
        except KeyError as exc:
            raise SchemaError(f"missing field {exc}", field=str(exc.args[0])) from exc
        except (DomainError, TypeError, ValueError) as exc:
            raise SchemaError(str(exc), field="problem") from exc


@dataclass
class DesignResult:
    mu: tuple
    eps: tuple
    residual_norm_history: list
    table: CoefficientTable = field(repr=False)
    converged: bool
    iterations: int
    reason: str
    seconds: float = 0.0
    start: tuple = ()
    metadata: dict = field(default_factory=dict)

    @property
    def residual_norm(self):
        return self.residual_norm_history[-1]

    @property
    def structure(self):
        return self.table.structure

    def to_dict(self):
        return {
            "schema": DESIGN_SCHEMA,
            "kind": "result",
            "converged": self.converged,
            "reason": self.reason,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "residual_norm_history": list(self.residual_norm_history),
            "mu": list(self.mu),
            "eps": list(self.eps),
            "start": list(self.start),
            "structure": self.structure.to_dict(),
            "coefficients": self.table.to_dict()["entries"],
            "metadata": self.metadata,
        }


def _scaled_values(problem, params):
    table = lowfreq_coefficients(problem.structure(params), problem.order)
    return table, table.vector() / problem.scale


def residual(problem, mu, eps):
    """Real residual vector: scaled ``W_{n,l}`` ordered TE then TM, ``n`` and ``l`` ascending."""
    params = np.concatenate([np.asarray(mu, dtype=float), np.asarray(eps, dtype=float)])
    return _residual(problem, params)


def _residual(problem, params):
    _, w = _scaled_values(problem, params)
    if not np.all(np.isfinite(w)):
        raise NumericalError(f"non-finite coefficients at parameters {list(params)}")
    imag = np.abs(w.imag).max()
    if imag > IMAG_TOL * max(1.0, np.abs(w.real).max()):
        raise NumericalError(f"coefficients carry an imaginary part of {imag:.3e}; expected real values")
    return w.real.copy()


def _fd_steps(problem, params):
    lo, hi = problem.bounds
    h = FD_REL_STEP * np.maximum(1.0, np.abs(params))
    return h, params - h >= lo, params + h <= hi


def _jacobian(problem, params, base=None):
    h, can_down, can_up = _fd_steps(problem, params)
    cols = []
    for k in range(params.size):
        up = params.copy()
        dn = params.copy()
        if can_up[k] and can_down[k]:
            up[k] += h[k]
            dn[k] -= h[k]
            cols.append((_residual(problem, up) - _residual(problem, dn)) / (2 * h[k]))
            continue
        if base is None:
            base = _residual(problem, params)
        if can_up[k]:
            up[k] += h[k]
            cols.append((_residual(problem, up) - base) / h[k])
        else:
            dn[k] -= h[k]
            cols.append((base - _residual(problem, dn)) / h[k])
    A = np.column_stack(cols)
    if not np.all(np.isfinite(A)):
        raise NumericalError("non-finite Jacobian")
    return A


def jacobian(problem, mu, eps):
    """Finite-difference Jacobian, columns ordered ``(mu_1..mu_L, eps_1..eps_L)``.

    Central differences with step ``1e-6 * max(1, |p|)``; one-sided where a
    central stencil would leave the bounds.
    """
    params = np.concatenate([np.asarray(mu, dtype=float), np.asarray(eps, dtype=float)])
    return _jacobian(problem, params)


def gauss_newton_step(A, b, rcond=RCOND):
    """Minimum-norm least-squares solution of ``A delta = b`` via the SVD pseudoinverse."""
    return np.linalg.pinv(A, rcond=rcond) @ b


def _active_mask(problem, params, A, b):
    lo, hi = problem.bounds
    g = A.T @ b  # descent direction is -g
    return ((params <= lo) & (g > 0)) | ((params >= hi) & (g < 0))


def projected_step(A, b, params, bounds, fixed=None, rcond=RCOND):
    """Gauss-Newton target ``params - delta`` kept inside ``bounds``.

    Variables that the minimum-norm step would push out of the box are pinned
    at the bound they cross and the step is recomputed for the rest, so the
    result solves the linearized problem on the face it lands on rather than
    being a clipped copy of the unconstrained step.
    """
    lo, hi = bounds
    fixed = np.zeros(params.size, dtype=bool) if fixed is None else fixed.copy()
    target = params.copy()
    for _ in range(params.size + 1):
        free = ~fixed
        b_lin = b + A[:, fixed] @ (target[fixed] - params[fixed])
        new = target.copy()
        if free.any():
            new[free] = params[free] - gauss_newton_step(A[:, free], b_lin, rcond)
        out = free & ((new < lo) | (new > hi))
        if not out.any():
            return new
        fixed |= out
        target[out] = np.clip(new[out], lo, hi)
    return np.clip(new, lo, hi)


def _line_search(problem, p, delta, norm, lam):
    """Halve ``lam`` until ``clip(p - lam delta)`` lowers the residual; best candidate or None."""
    lo, hi = problem.bounds
    best = None
    for _ in range(BACKTRACK_HALVINGS + 1):
        cand = np.clip(p - lam * delta, lo, hi)
        try:
            cb = _residual(problem, cand)
        except NumericalError:
            lam *= 0.5
            continue
        cn = float(np.linalg.norm(cb))
        if best is None or cn < best[2]:
            best = (cand, cb, cn)
        if cn < norm:
            return best
        lam *= 0.5
    return best if best is not None and best[2] < norm else None


def _regularized_steps(A, b, free):
    """Levenberg-Marquardt steps on the free variables for growing damping."""
    Af = A[:, free]
    G = Af.T @ Af
    g = Af.T @ b
    base = max(np.trace(G) / max(free.sum(), 1), 1e-300)
    for nu in base * 10.0 ** np.arange(-6, 7):
        delta = np.zeros(A.shape[1])
        delta[free] = np.linalg.solve(G + nu * np.eye(G.shape[0]), g)
        yield delta


def _solve(problem, start, deadline=None):
    lo, hi = problem.bounds
    p = np.clip(np.asarray(start, dtype=float), lo, hi)
    b = _residual(problem, p)
    norm = float(np.linalg.norm(b))
    history = [norm]
    steps = []
    reason = "max_iters"
    it = 0
    while True:
        if norm <= problem.residual_tol:
            reason = "residual_tol"
            break
        if it >= problem.max_iters:
            break
        if deadline is not None and time.monotonic() > deadline:
            reason = "time_limit"
            break
        A = _jacobian(problem, p, base=b)
        active = _active_mask(problem, p, A, b)
        goal = projected_step(A, b, p, problem.bounds, active)
        best = _line_search(problem, p, p - goal, norm, problem.step_damping)
        kind = "gauss-newton"
        if best is None and (~active).any():
            # the projected step is not a descent direction on this face
            kind = "levenberg-marquardt"
            for delta in _regularized_steps(A, b, ~active):
                best = _line_search(problem, p, delta, norm, 1.0)
                if best is not None:
                    break
        it += 1
        if best is None:
            reason = "stalled"
            break
        step = float(np.linalg.norm(best[0] - p))
        p, b, norm = best
        history.append(norm)
        steps.append(kind)
        if step < MIN_STEP:
            reason = "min_step"
            break
    return p, history, it, reason, steps


def design(problem, time_limit=None):
    """Run the projected Gauss-Newton iteration; optional seeded restarts if it fails."""
    t0 = time.monotonic()
    deadline = None if time_limit is None else t0 + time_limit
    starts = [problem.initial]
    if problem.restarts:
        rng = np.random.default_rng(problem.seed)
        lo, hi = problem.bounds
        starts += [rng.uniform(lo, hi, problem.initial.size) for _ in range(problem.restarts)]
    best = None
    for start in starts:
        p, history, it, reason, steps = _solve(problem, start, deadline)
        if best is None or history[-1] < best[1][-1]:
            best = (p, history, it, reason, start, steps)
        if history[-1] <= problem.residual_tol:
            break
    p, history, it, reason, start, steps = best
    if not np.all(np.isfinite(p)):
        raise NumericalError("design produced non-finite parameters")
    L = problem.n_layers
    table = lowfreq_coefficients(problem.structure(p), problem.order)
    return DesignResult(
        mu=tuple(float(v) for v in p[:L]),
        eps=tuple(float(v) for v in p[L:]),
        residual_norm_history=[float(v) for v in history],
        table=table,
        converged=history[-1] <= problem.residual_tol,
        iterations=it,
        reason=reason,
        seconds=time.monotonic() - t0,
        start=tuple(float(v) for v in start),
        metadata={
            "method": "projected Gauss-Newton, SVD pseudoinverse",
            "rcond": RCOND,
            "fd_rel_step": FD_REL_STEP,
            "backtrack_halvings": BACKTRACK_HALVINGS,
            "residual_scaling": "bare PEC |W_{n,l}|",
            "residual_components": [f"{pol.value}:{n},{l}" for pol, n, l in index_set(problem.order)],
            "overdetermined": problem.overdetermined,
            "step_kinds": steps,
        },
    )

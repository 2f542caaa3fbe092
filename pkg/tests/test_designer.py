import json

import numpy as np
import pytest

from svanish import DesignProblem, LayeredStructure, design, lowfreq_coefficients
from svanish.designer import (
    FD_REL_STEP,
    _residual,
    gauss_newton_step,
    jacobian,
    projected_step,
    residual,
)
from svanish.errors import DomainError, SchemaError


@pytest.fixture(scope="module")
def single_layer():
    problem = DesignProblem([2.0, 1.0], [2.0], [2.0], order=1)
    return problem, design(problem)


class TestProblem:
    def test_example1_shape(self):
        p = DesignProblem.example1()
        assert p.n_layers == 6 and p.n_targets == 6 and not p.overdetermined
        assert residual(p, p.mu0, p.eps0).shape == (6,)

    def test_overdetermined_flag(self):
        assert DesignProblem([2, 1], [2], [2], order=2).overdetermined

    @pytest.mark.parametrize(
        "kw",
        [
            {"bounds": (1.0, 0.5)},
            {"bounds": (3.5, 10.0)},
            {"step_damping": 0.0},
            {"residual_tol": -1.0},
        ],
    )
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            DesignProblem.example1(**kw)

    def test_json_round_trip(self):
        p = DesignProblem.example1(restarts=3, seed=7)
        assert DesignProblem.from_dict(json.loads(json.dumps(p.to_dict()))) == p

    def test_json_missing_field(self):
        doc = DesignProblem.example1().to_dict()
        del doc["mu0"]
        with pytest.raises(SchemaError) as info:
            DesignProblem.from_dict(doc)
        assert info.value.field == "mu0"


class TestResidual:
    def test_vacuum_layers_give_unit_scaled_pec_vector(self):
        p = DesignProblem([2, 1.5, 1], [1.0, 1.0], [1.0, 1.0], order=2)
        table = lowfreq_coefficients(LayeredStructure([2, 1.5, 1], [1, 1], [1, 1]), 2)
        r = residual(p, [1, 1], [1, 1])
        np.testing.assert_allclose(r, table.vector().real / p.scale, rtol=1e-14)
        np.testing.assert_allclose(np.abs(r), 1.0, rtol=1e-14)

    def test_order(self):
        p = DesignProblem.example1()
        mu, eps = [1.5, 2, 0.7, 3, 1.2, 4], [2, 0.5, 1, 3.5, 2.2, 0.9]
        table = lowfreq_coefficients(p.structure(mu + eps), 2)
        keys = [(1, 0, "TE"), (1, 1, "TE"), (2, 0, "TE"), (1, 0, "TM"), (1, 1, "TM"), (2, 0, "TM")]
        expected = np.array([table[k].real for k in keys]) / p.scale
        np.testing.assert_allclose(residual(p, mu, eps), expected, rtol=1e-15)


class TestJacobian:
    def test_columns_differ_between_layers(self):
        p = DesignProblem.example1()
        A = jacobian(p, [3.0] * 6, [3.0] * 6)
        for j in range(5):
            assert not np.allclose(A[:, j], A[:, j + 1])

    def test_against_five_point_stencil(self, rng):
        p = DesignProblem.example1()
        for _ in range(3):
            x = rng.uniform(1.0, 5.0, 12)
            A = jacobian(p, x[:6], x[6:])
            for j in range(12):
                h = 1e-3 * x[j]
                e = np.zeros(12)
                e[j] = h
                f = [_residual(p, x + k * e) for k in (-2, -1, 1, 2)]
                ref = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
                np.testing.assert_allclose(A[:, j], ref, rtol=1e-4, atol=1e-6 * np.abs(ref).max())

    def test_one_sided_at_bounds(self):
        p = DesignProblem.example1()
        A = jacobian(p, [0.1] * 6, [10.0] * 6)
        assert np.all(np.isfinite(A))
        assert FD_REL_STEP == 1e-6


class TestSteps:
    def test_pseudoinverse_minimum_norm(self, rng):
        A = rng.normal(size=(6, 12))
        b = rng.normal(size=6)
        d = gauss_newton_step(A, b)
        assert np.linalg.norm(A @ d - b) <= 1e-10 * np.linalg.norm(b)
        # minimum norm: no component in the null space of A
        _, _, vt = np.linalg.svd(A)
        assert np.abs(vt[6:] @ d).max() <= 1e-12 * np.linalg.norm(d)

    def test_projected_step_stays_in_box(self, rng):
        A = rng.normal(size=(6, 12))
        b = 10 * rng.normal(size=6)
        x = rng.uniform(0.2, 9.0, 12)
        new = projected_step(A, b, x, (0.1, 10.0))
        assert np.all((new >= 0.1) & (new <= 10.0))

    def test_projected_step_solves_face_problem(self, rng):
        A = rng.normal(size=(6, 12))
        x = np.full(12, 5.0)
        b = A @ np.r_[np.full(6, -10.0), np.zeros(6)]  # unconstrained step lands far outside
        new = projected_step(A, b, x, (0.1, 10.0))
        pinned = (new == 0.1) | (new == 10.0)
        assert pinned.any()
        # least-squares optimal over the variables left free
        free = ~pinned
        grad = A[:, free].T @ (A @ (x - new) - b)
        assert np.abs(grad).max() <= 1e-10 * np.linalg.norm(A) * np.linalg.norm(b)


class TestDesign:
    def test_single_layer_converges(self, single_layer):
        problem, r = single_layer
        assert r.converged and r.residual_norm <= 1e-10
        assert r.reason == "residual_tol"

    def test_history_non_increasing(self, single_layer):
        h = np.array(single_layer[1].residual_norm_history)
        assert np.all(np.isfinite(h)) and np.all(np.diff(h) <= 0)

    def test_local_minimality(self, single_layer, rng):
        problem, r = single_layer
        p = np.r_[r.mu, r.eps]
        for _ in range(10):
            d = rng.normal(size=2)
            d *= 1e-3 / np.linalg.norm(d)
            assert np.linalg.norm(_residual(problem, p + d)) > r.residual_norm

    def test_early_exit(self, single_layer):
        problem, r = single_layer
        again = design(DesignProblem([2.0, 1.0], r.mu, r.eps, order=1))
        assert again.converged and again.iterations == 0

    def test_deterministic(self):
        p = DesignProblem([2, 1.5, 1], [2.0, 2.0], [2.0, 2.0], order=1)
        assert design(p).residual_norm_history == design(p).residual_norm_history

    def test_within_bounds_and_serializable(self):
        p = DesignProblem.example1(max_iters=5)
        r = design(p)
        assert all(0.1 <= v <= 10.0 for v in r.mu + r.eps)
        doc = json.loads(json.dumps(r.to_dict()))
        assert doc["structure"]["schema"] == "svanish-structure/1"
        assert len(doc["coefficients"]) == 6
        assert LayeredStructure.from_dict(doc["structure"]) == r.structure

    def test_restarts_are_seeded(self):
        p = DesignProblem([2, 1.5, 1], [2.0, 2.0], [2.0, 2.0], order=2, restarts=2, seed=3, max_iters=10)
        assert design(p).residual_norm_history == design(p).residual_norm_history

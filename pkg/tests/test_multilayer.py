import json
import warnings

import numpy as np
import pytest

from conftest import random_structure
from svanish import TE, TM, LayeredStructure, SchemaError
from svanish.errors import DomainError
from svanish.multilayer import (
    interface_matrix,
    layer_fields,
    modal_coefficient,
    modal_coefficients,
    outgoing_amplitudes,
    reduced_coefficients,
    transfer_product,
)
from svanish.specfun import sph_bessel

POLS = [TE, TM]


def vacuum(L=3):
    return LayeredStructure.uniform_radii([1.0] * L, [1.0] * L)


class TestStructure:
    def test_validation(self):
        with pytest.raises(DomainError):
            LayeredStructure([2, 1], [1, 1], [1])
        with pytest.raises(DomainError):
            LayeredStructure([1, 2], [1], [1])
        with pytest.raises(DomainError):
            LayeredStructure([2, 1], [-1], [1])

    def test_create_warns_outside_frame(self):
        with pytest.warns(UserWarning):
            LayeredStructure.create([3, 1], [1], [1])
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            LayeredStructure.create([2, 1.5, 1], [1, 2], [1, 2])

    def test_json_round_trip(self, example_structure):
        doc = json.loads(json.dumps(example_structure.to_dict()))
        assert LayeredStructure.from_dict(doc) == example_structure

    @pytest.mark.parametrize(
        "doc, field",
        [
            ({"schema": "svanish-structure/2", "radii": [2, 1], "mu": [1], "eps": [1]}, "schema"),
            ({"schema": "svanish-structure/1", "radii": [2, 1], "mu": [1]}, "eps"),
            ({"schema": "svanish-structure/1", "radii": [2, 1], "mu": ["a"], "eps": [1]}, "mu"),
        ],
    )
    def test_schema_errors_name_field(self, doc, field):
        with pytest.raises(SchemaError) as info:
            LayeredStructure.from_dict(doc)
        assert info.value.field == field

    def test_material_lookup(self, example_structure):
        assert example_structure.material_at(2.5) == (1.0, 1.0)
        assert example_structure.material_at(1.95) == (3.0, 3.0)
        with pytest.raises(DomainError):
            example_structure.material_at(0.5)


class TestInterfaceMatrix:
    def test_entries(self):
        M = interface_matrix(1, TE, 1.0, 1.0, 1.0)
        b = sph_bessel(1, 1.0)
        np.testing.assert_allclose(M, [[b.j, b.h1], [b.J, b.H]], rtol=1e-15)

    @pytest.mark.parametrize("mu", [0.5, 2.0])
    def test_te_determinant(self, mu):
        k, r = 1.7, 1.3
        assert np.linalg.det(interface_matrix(2, TE, k, mu, r)) == pytest.approx(1j / (k * r) / mu, rel=1e-12)

    def test_tm_is_row_swap(self):
        np.testing.assert_array_equal(interface_matrix(3, TM, 0.8, 1.0, 1.4), interface_matrix(3, TE, 0.8, 1.0, 1.4)[::-1])


class TestModal:
    @pytest.mark.parametrize("omega", [0.3, 1.0, 4.0])
    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_vacuum_reduces_to_bare_pec(self, n, omega):
        b = sph_bessel(n, omega)
        p1, p2 = transfer_product(vacuum(), n, TE, omega)
        assert p1 / p2 == pytest.approx(b.j / b.h1, rel=1e-12)
        p1, p2 = transfer_product(vacuum(), n, TM, omega)
        assert p1 / p2 == pytest.approx(b.J / b.H, rel=1e-12)

    def test_bare_pec_n1(self):
        b = sph_bessel(1, 1.0)
        assert modal_coefficient(vacuum(), 1, TE, 1.0).value == pytest.approx(-2j * (-b.j / b.h1), rel=1e-13)

    def test_example_structure_p2_nonzero(self, example_structure):
        assert abs(transfer_product(example_structure, 1, TE, 1.0)[1]) > 0

    @pytest.mark.parametrize("pol", POLS)
    @pytest.mark.parametrize("rho", [0.5, 0.1])
    def test_scaling(self, rng, pol, rho):
        s = random_structure(rng, 4)
        for n in range(1, 5):
            a = outgoing_amplitudes(s.scaled(rho), n, pol, [1.1])[0]
            b = outgoing_amplitudes(s, n, pol, [rho * 1.1])[0]
            assert a == pytest.approx(b, rel=1e-12)
            # W carries 1/k0, so it picks up one factor of rho
            wa = modal_coefficients(s.scaled(rho), n, pol, [1.1])[0]
            wb = modal_coefficients(s, n, pol, [rho * 1.1])[0]
            assert wa == pytest.approx(rho * wb, rel=1e-12)

    @pytest.mark.parametrize("pol", POLS)
    @pytest.mark.parametrize("layers", [1, 2, 6])
    def test_unitarity(self, rng, pol, layers):
        s = random_structure(rng, layers, 0.1, 10.0)
        for n in range(1, 7):
            a0 = outgoing_amplitudes(s, n, pol, [0.5, 1.0, 2.0])
            np.testing.assert_allclose(np.abs(1 + 2 * a0), 1.0, atol=1e-10)

    @pytest.mark.parametrize("pol", POLS)
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_low_frequency_slope(self, rng, pol, n):
        s = random_structure(rng, 3)
        ts = np.logspace(-3, -2, 9)
        slope = np.polyfit(np.log(ts), np.log(np.abs(reduced_coefficients(s, n, pol, ts))), 1)[0]
        assert slope == pytest.approx(2 * n + 1, abs=0.05)

    def test_decay_bounded(self, example_structure):
        rhos = np.logspace(-4, -1, 4)
        for n in (1, 2):
            w = np.abs(modal_coefficients(example_structure, n, TE, rhos)) / rhos ** (2 * n)
            assert w.max() / w.min() < 1.1

    def test_background_enters_k0(self):
        s = LayeredStructure.uniform_radii([1.0], [1.0], background=(2.0, 2.0))
        assert s.k0(1.5) == pytest.approx(3.0)

    def test_nonpositive_frequency(self, example_structure):
        with pytest.raises(DomainError):
            modal_coefficients(example_structure, 1, TE, [0.0])


class TestLayerFields:
    def test_vacuum_constant(self):
        f = layer_fields(vacuum(4), 2, TE, 0.9)
        b = sph_bessel(2, 0.9)
        np.testing.assert_allclose(f.coefficients[:, 0], 1.0, rtol=1e-12)
        np.testing.assert_allclose(f.coefficients[:, 1], -b.j / b.h1, rtol=1e-12)

    @pytest.mark.parametrize("pol", POLS)
    def test_a0_consistent_with_modal(self, example_structure, pol):
        f = layer_fields(example_structure, 2, pol, 0.7)
        w = modal_coefficient(example_structure, 2, pol, 0.7).value
        assert w == pytest.approx(-6j / example_structure.k0(0.7) * f.a0, rel=1e-13)

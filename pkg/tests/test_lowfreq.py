import json

import numpy as np
import pytest

from conftest import random_structure
from svanish import TE, TM, CoefficientTable, LayeredStructure, SchemaError, lowfreq_coefficients, w_series
from svanish.lowfreq import (
    index_set,
    modal_series,
    reference_transfer_product,
    series_transfer_product,
)
from svanish.multilayer import modal_coefficients, reduced_coefficients

POLS = [TE, TM]


def vacuum(L=3):
    return LayeredStructure.uniform_radii([1.0] * L, [1.0] * L)


@pytest.mark.parametrize("pol", POLS)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_leading_exponents(rng, pol, n):
    p1, p2 = series_transfer_product(random_structure(rng, 3), n, pol, 3)
    assert p1.lead == n
    assert p2.lead == -n - 1
    assert p1.valid_to >= p1.lead + 2 * (3 - n)
    assert p2.valid_to >= p2.lead + 2 * (3 - n)


def test_g0_nonzero(rng):
    for _ in range(20):
        s = random_structure(rng, int(rng.integers(1, 7)))
        for pol in POLS:
            _, p2 = series_transfer_product(s, 1, pol, 2)
            assert abs(p2.coeffs[0]) > 0


@pytest.mark.parametrize("pol", POLS)
@pytest.mark.parametrize("n", [1, 2])
def test_kernel_matches_reference_composition(rng, pol, n):
    s = random_structure(rng, 4)
    p1, p2 = series_transfer_product(s, n, pol, 3)
    r1, r2 = reference_transfer_product(s, n, pol, 6)
    assert (p1 / p2).allclose(r1 / r2, rtol=1e-10)


def test_vacuum_leading_coefficient_matches_fit():
    # t^3 coefficient of -2i j_1/h_1 from numbers alone
    ts = np.array([1e-3, 2e-3])
    w = reduced_coefficients(vacuum(), 1, TE, ts)
    fitted = w / ts**3
    assert w_series(vacuum(), 1, TE, 2).coefficient(3) == pytest.approx(fitted[0], rel=1e-5)
    assert lowfreq_coefficients(vacuum(), 1)[1, 0, TE] == pytest.approx(-2 / 3, rel=1e-14)


def test_vacuum_table_values():
    t = lowfreq_coefficients(vacuum(), 2)
    assert t[1, 0, TM] == pytest.approx(4 / 3, rel=1e-14)
    assert t[1, 1, TE] == pytest.approx(0.4, rel=1e-13)
    assert t[2, 0, TE] == pytest.approx(-2 / 15, rel=1e-13)
    assert t[2, 0, TM] == pytest.approx(0.2, rel=1e-13)


@pytest.mark.parametrize("pol", POLS)
def test_odd_offsets_vanish_below_radiation_term(rng, pol):
    s = random_structure(rng, 6)
    for n in (1, 2):
        w = w_series(s, n, pol, 2 * n + 2)
        scale = np.abs(w.coeffs).max()
        for k in range(1, 2 * n + 1, 2):
            assert abs(w.coefficient(w.lead + k)) <= 1e-13 * scale
        # the first odd term, t**(4n+2), is the radiation reaction and is imaginary
        first = w.coefficient(w.lead + 2 * n + 1)
        assert abs(first) > 1e-8 * scale and abs(first.real) <= 1e-12 * scale


def test_series_agrees_with_direct(rng):
    for layers in (1, 3, 6, 1, 3, 6, 1, 3, 6, 2):
        s = random_structure(rng, layers)
        for pol in POLS:
            for n in (1, 2):
                series = modal_series(s, n, pol, 2, guard=1).value(1e-3)
                direct = modal_coefficients(s, n, pol, [1e-3])[0]
                assert series == pytest.approx(direct, rel=1e-6)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_index_set_complete(example_structure, order):
    t = lowfreq_coefficients(example_structure, order)
    assert len(t.entries) == order * (order + 1)
    assert set(t.entries) == {(n, l, p) for p, n, l in index_set(order)}
    assert np.all(np.isfinite(t.vector()))


def test_coefficients_real_for_lossless(example_structure):
    v = lowfreq_coefficients(example_structure, 3).vector()
    assert np.abs(v.imag).max() <= 1e-12 * np.abs(v).max()


def test_table_json_round_trip(example_structure):
    t = lowfreq_coefficients(example_structure, 2)
    back = CoefficientTable.from_dict(json.loads(json.dumps(t.to_dict())))
    assert back.entries == t.entries and back.structure == example_structure


def test_table_rejects_incomplete(example_structure):
    doc = lowfreq_coefficients(example_structure, 2).to_dict()
    doc["entries"].pop()
    with pytest.raises(SchemaError):
        CoefficientTable.from_dict(doc)


def test_format_has_one_row_per_entry(example_structure):
    t = lowfreq_coefficients(example_structure, 2)
    assert len(t.format(lowfreq_coefficients(vacuum(6), 2)).splitlines()) == 7


def test_order_must_cover_n(example_structure):
    with pytest.raises(ValueError):
        series_transfer_product(example_structure, 3, TE, 2)

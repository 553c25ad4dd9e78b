import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from drtool import prox
from drtool.core import (DisplacementEstimate, EstimationMethod, IterateRecord, OperatorHandle,
                         ProblemSpec, check_firm_nonexpansiveness, make_vector)
from drtool.errors import DimensionMismatch, Empty, NonFinite


def test_make_vector_basic():
    v = make_vector([1.0, 2.0])
    assert v.shape == (2,) and v.dtype == np.float64


def test_make_vector_is_immutable():
    v = make_vector([1.0, 2.0])
    with pytest.raises(ValueError):
        v[0] = 3.0


@pytest.mark.parametrize("bad, err", [([], Empty), ([math.nan], NonFinite), ([1.0, math.inf], NonFinite)])
def test_make_vector_rejects(bad, err):
    with pytest.raises(err):
        make_vector(bad)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=6))
def test_make_vector_roundtrip(coords):
    v = make_vector(coords)
    assert v.size == len(coords)
    assert list(v) == [float(c) for c in coords]


def _pairs(rng, k, m, scale=4.0):
    return [(scale * rng.standard_normal(m), scale * rng.standard_normal(m)) for _ in range(k)]


def test_firm_nonexpansive_half_identity():
    op = OperatorHandle(lambda y: 0.5 * np.asarray(y), "J of Id")
    rep = check_firm_nonexpansiveness(op, _pairs(np.random.default_rng(1), 50, 3))
    assert rep.passed and rep.pairs == 50


def test_firm_nonexpansive_box_projection():
    op = prox.box_operator([-1, -1, -1], [1, 1, 1])
    rep = check_firm_nonexpansiveness(op, _pairs(np.random.default_rng(2), 100, 3), tol=1e-12)
    assert rep.passed


def test_firm_nonexpansive_detects_expansive_map():
    op = OperatorHandle(lambda y: 2.0 * np.asarray(y), "2 Id")
    rep = check_firm_nonexpansiveness(op, _pairs(np.random.default_rng(3), 10, 2))
    assert not rep.passed and rep.max_violation > 0


def test_firm_nonexpansive_dimension_mismatch():
    op = prox.box_operator([-1, -1], [1, 1])
    with pytest.raises(DimensionMismatch):
        check_firm_nonexpansiveness(op, [(np.zeros(2), np.zeros(3))])


def test_problem_spec_dims_checked():
    a = prox.box_operator([-1, -1], [1, 1])
    b = prox.box_operator([-1, -1, -1], [1, 1, 1])
    with pytest.raises(DimensionMismatch):
        ProblemSpec(2, a, b, make_vector([0, 0]))
    with pytest.raises(DimensionMismatch):
        ProblemSpec(2, a, a, make_vector([0, 0, 0]))


def test_iterate_record_identities():
    x, p, q = np.array([3.0, 1.0]), np.array([1.0, 1.0]), np.array([0.5, -1.0])
    rec = IterateRecord(0, x, p, q, x - p, 2 * p - x - q, p - q)
    assert rec.identities_hold()
    bad = IterateRecord(0, x, p, q, x - p, 2 * p - x - q, p - q + 1e-6)
    assert not bad.identities_hold()


def test_displacement_estimate_orthogonality():
    est = DisplacementEstimate(make_vector([-1, 3]), make_vector([0, 3]), make_vector([-1, 0]),
                               EstimationMethod.LAST_DIFFERENCE, 0.0, 10)
    assert est.orthogonal() and est.orthogonality_gap == 0.0

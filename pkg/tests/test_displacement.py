import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from drtool import displacement as D, engine, oracles, prox
from drtool.core import DisplacementEstimate, EstimationMethod, ProblemSpec, make_vector
from drtool.engine import RunConfig
from drtool.errors import InsufficientData, NoConvergence

from conftest import affine_spec, cone_spec, halfspace_l1_spec

starts = arrays(np.float64, 2, elements=st.floats(-20, 20, width=64))


def boxes():
    return ProblemSpec(2, prox.box_operator([-1, -1], [1, 1]), prox.box_operator([0, -0.5], [2, 3]),
                       make_vector([3, -4]))


@pytest.mark.parametrize("method", list(EstimationMethod))
def test_consistent_all_methods(method):
    # the Cesaro estimate decays like |p_0 - p_N| / N, hence the long run
    spec = boxes().with_start([1.5, 1.2])
    tr = engine.run(spec, RunConfig(max_iters=1_000_000, stop_tol=None, record_every=1000))
    est = D.estimate_v(tr, method)
    for vec in (est.v, est.v_d, est.v_r):
        np.testing.assert_allclose(vec, 0, atol=1e-6)


def test_cone_estimates():
    tr = engine.run(cone_spec(-2, 3, -1, 0), RunConfig(max_iters=20000, stop_tol=None))
    for method in EstimationMethod:
        est = D.estimate_v(tr, method)
        np.testing.assert_allclose(est.v_d, [0, 3], atol=5e-3)
        np.testing.assert_allclose(est.v_r, [-1, 0], atol=5e-3)
        assert est.residual <= 1e-12
    est = D.estimate_v(tr)
    np.testing.assert_allclose(est.v, [-1, 3], atol=1e-12)


def test_affine_estimates():
    tr = engine.run(affine_spec([[1, 0]], [0, 3], [2, 0], [5, 7]), RunConfig(max_iters=100, stop_tol=None))
    est = D.estimate_v(tr)
    np.testing.assert_allclose(est.v_d, [0, 3], atol=1e-6)
    np.testing.assert_allclose(est.v_r, [2, 0], atol=1e-6)


def test_estimate_needs_ten_records():
    tr = engine.run(boxes(), RunConfig(max_iters=9, stop_tol=None))
    with pytest.raises(InsufficientData):
        D.estimate_v(tr)
    assert tr.final_estimate is None


def test_tail_average_with_sparse_records():
    tr = engine.run(cone_spec(-2, 3, -1, 0), RunConfig(max_iters=2000, stop_tol=None, record_every=13))
    est = D.estimate_v(tr, "tail_average")
    np.testing.assert_allclose(est.v, [-1, 3], atol=1e-6)


def test_orthogonal_decomposition_reports():
    tr = engine.run(cone_spec(-2, 3, -1, 0), RunConfig(max_iters=2000, stop_tol=None))
    assert D.check_orthogonal_decomposition(tr.final_estimate, 1e-4).passed
    z = make_vector([0.0, 0.0])
    zero = DisplacementEstimate(z, z, z, EstimationMethod.CESARO, 0.0, 1)
    assert D.check_orthogonal_decomposition(zero).passed
    est = tr.final_estimate
    bad = DisplacementEstimate(est.v, est.v_d + np.array([0.1, 0]), est.v_r, est.method, 0.0, 1)
    rep = D.check_orthogonal_decomposition(bad, 1e-4)
    assert not rep.passed and rep.status == "not converged"


def test_method_disagreement_is_a_status():
    tr = engine.run(halfspace_l1_spec([1, 0], -2, [1, 1], [50, 50]), RunConfig(max_iters=20, stop_tol=None))
    cmp = D.compare_methods(tr)
    assert not cmp.agreed and cmp.status == "not converged"


@given(start=starts)
def test_estimate_bounded_by_first_step(start):
    spec = halfspace_l1_spec([1, 0], -2, [1, 1], start)
    tr = engine.run(spec, RunConfig(max_iters=200, stop_tol=None))
    first = np.linalg.norm(start - engine.dr_step(spec, start))
    assert np.linalg.norm(tr.final_estimate.v) <= first + 1e-10


@given(start=starts)
def test_halfspace_l1_vr_vanishes(start):
    tr = engine.run(halfspace_l1_spec([1, 0], -2, [1, 1], start))
    assert np.linalg.norm(tr.final_estimate.v_r) <= 1e-5


# -- normal problem ---------------------------------------------------------------

def _samples(m, k=100, seed=0):
    return 5 * np.random.default_rng(seed).standard_normal((k, m))


def test_normal_problem_zero_shift():
    spec = boxes()
    nprob = D.build_normal_problem(spec, [0, 0])
    ys = _samples(2)
    np.testing.assert_array_equal(D.dr_map_rows(nprob.shifted, ys), D.dr_map_rows(spec, ys))


@pytest.mark.parametrize("spec, v", [
    (cone_spec(-2, 3, -1, 0), [-1, 3]),
    (halfspace_l1_spec([1, 0], -2, [1, 1], [0, 0]), [-1, 0]),
    (affine_spec([[1, 0]], [0, 3], [2, 0], [5, 7]), [2, 3]),
])
def test_normal_operator_is_argument_shift(spec, v):
    nprob = D.build_normal_problem(spec, v)
    assert D.normal_identity_error(nprob, _samples(spec.dim)) <= 1e-10


def test_normal_operator_output_shift_variant_differs_by_v():
    # T' is T(. + v); the variant T(. + v) - v is off by exactly v
    spec, v = cone_spec(-2, 3, -1, 0), np.array([-1.0, 3.0])
    nprob = D.build_normal_problem(spec, v)
    ys = _samples(2)
    gap = D.dr_map_rows(nprob.shifted, ys) - (D.dr_map_rows(spec, ys + v) - v)
    np.testing.assert_allclose(gap, np.broadcast_to(v, gap.shape), atol=1e-10)


def test_solve_normal_halfspace_l1():
    sol = D.solve_normal(D.build_normal_problem(halfspace_l1_spec([1, 0], -2, [1, 1], [0, 0]), [-1, 0]))
    np.testing.assert_allclose(sol.z, [-2, 0], atol=1e-12)
    assert sol.mu == pytest.approx(1.0)


def test_solve_normal_consistent_is_plain_dr():
    spec = halfspace_l1_spec([1, 0], 0.5, [1, 1], [3, 3])
    sol = D.solve_normal(D.build_normal_problem(spec, [0, 0]))
    np.testing.assert_allclose(sol.z, [0, 0], atol=1e-12)
    assert sol.mu == 0.0


def test_solve_normal_affine_solutions_in_z():
    spec = affine_spec([[1, 0]], [0, 3], [2, 0], [5, 7])
    truth = oracles.affine_example_truth(prox.AffineSubspaceSet([0, 0], [[1, 0]]), [0, 3], [2, 0])
    nprob = D.build_normal_problem(spec, [2, 3])
    z1 = D.solve_normal(nprob).z
    z2 = D.solve_normal(D.NormalProblem(spec, nprob.v, nprob.shifted.with_start([-4, 1]))).z
    assert not np.allclose(z1, z2)
    assert truth.in_z(z1) and truth.in_z(z2)


def test_solve_normal_cone_membership():
    t = oracles.cone_example_truth(oracles.ConeExampleParams(-2, 3, -1, 0))
    z = D.solve_normal(D.build_normal_problem(cone_spec(-2, 3, -1, 0), t.v)).z
    assert t.in_z(z)


def test_solve_normal_wrong_v_does_not_converge():
    nprob = D.build_normal_problem(cone_spec(-2, 3, -1, 0), [0, 0])
    with pytest.raises(NoConvergence) as info:
        D.solve_normal(nprob, RunConfig(max_iters=200, stop_tol=None))
    assert len(info.value.residuals) > 0


def test_shadow_limit_matches_normal_solution():
    spec = halfspace_l1_spec([1, 0], -2, [1, 1], [7, -3])
    tr = engine.run(spec)
    sol = D.solve_normal(D.build_normal_problem(spec, tr.final_estimate.v))
    assert np.linalg.norm(tr.p[-1] - sol.z) <= 1e-3

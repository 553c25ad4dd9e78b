import os

import numpy as np
import pytest
from hypothesis import settings

from drtool import prox
from drtool.core import ProblemSpec, make_vector
from drtool.scenario import bundled_scenarios, load_scenario

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def cone_spec(alpha, beta, gamma, delta, start=(0.3, -4.0)):
    A = prox.translated_cone_operator([alpha, beta])
    B = prox.add_vector(prox.translated_cone_operator([0.0, 0.0]), [gamma, delta])
    return ProblemSpec(2, A, B, make_vector(start), "cone")


def affine_spec(basis, a, b, start):
    basis = np.asarray(basis, dtype=float)
    A = prox.affine_operator(a, basis)
    B = prox.add_vector(prox.affine_operator(np.zeros(len(a)), basis), b)
    return ProblemSpec(len(a), A, B, make_vector(start), "affine")


def halfspace_l1_spec(u, eta, c, start):
    return ProblemSpec(len(u), prox.halfspace_operator(u, eta), prox.l1_box_operator(c),
                       make_vector(start), "halfspace_l1")


def catalog_operators(m):
    """One operator of every catalog family (and derived forms) in dimension ``m``."""
    rng = np.random.default_rng(m)
    u = rng.standard_normal(m)
    basis = np.linalg.qr(rng.standard_normal((m, m)))[0][: max(1, m // 2)]
    ops = [
        prox.halfspace_operator(u, 0.7),
        prox.box_operator(-np.ones(m), np.r_[np.inf, np.ones(m - 1)]),
        prox.translated_cone_operator(rng.standard_normal(m), axis=m - 1),
        prox.affine_operator(rng.standard_normal(m), basis),
        prox.point_operator(rng.standard_normal(m)),
        prox.l1_box_operator(np.r_[np.inf, np.full(m - 1, 0.8)]),
        prox.zero_operator(m),
        prox.linear_operator(rng.standard_normal(m)),
    ]
    w = rng.standard_normal(m)
    ops += [prox.resolvent_of_shift_plus(ops[0], w), prox.translate_operator_arg(ops[5], w),
            prox.inverse_resolvent(ops[2]), prox.add_vector(ops[1], w)]
    return ops


@pytest.fixture(scope="session")
def scenarios():
    return {p.stem: load_scenario(p) for p in bundled_scenarios()}


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])

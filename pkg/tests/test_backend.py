import os
import subprocess
import sys

import numpy as np
import pytest

from drtool import backend, engine, prox
from drtool.core import ProblemSpec, make_vector
from drtool.scenario import bundled_scenarios, load_scenario

needs_compiled = pytest.mark.skipif(not backend.COMPILED, reason="compiled kernel not built")


@needs_compiled
@pytest.mark.parametrize("path", bundled_scenarios(), ids=lambda p: p.stem)
def test_backends_bitwise_equal(path):
    sc = load_scenario(path)
    cfg = sc.config(max_iters=3000)
    X1, P1, Q1, s1, _ = backend.iterate(sc.spec.op_a, sc.spec.op_b, sc.start, cfg.max_iters,
                                        cfg.stop_tol, cfg.min_iters, "compiled")
    X2, P2, Q2, s2, _ = backend.iterate(sc.spec.op_a, sc.spec.op_b, sc.start, cfg.max_iters,
                                        cfg.stop_tol, cfg.min_iters, "python")
    assert s1 == s2
    for a, b in ((X1, X2), (P1, P2), (Q1, Q2)):
        assert a.shape == b.shape
        np.testing.assert_array_equal(a, b)


@needs_compiled
def test_compiled_handles_every_derived_form():
    rng = np.random.default_rng(5)
    w = rng.standard_normal(3)
    base = [prox.halfspace_operator([1, -2, 0.5], 0.3), prox.box_operator([-1, 0, -np.inf], [1, np.inf, 2]),
            prox.translated_cone_operator([0.5, 1, -1], axis=1),
            prox.affine_operator([0, 0, 1], [[0.6, 0.8, 0]]), prox.l1_box_operator([1, np.inf, 0.2]),
            prox.zero_operator(3), prox.linear_operator(w)]
    ops = base + [prox.inverse_resolvent(prox.translate_operator_arg(prox.resolvent_of_shift_plus(op, w), -w))
                  for op in base]
    x0 = 3 * rng.standard_normal(3)
    for a in ops:
        for b in ops[::3]:
            r1 = backend.iterate(a, b, x0, 60, None, 0, "compiled")
            r2 = backend.iterate(a, b, x0, 60, None, 0, "python")
            np.testing.assert_allclose(r1[0], r2[0], atol=1e-12, rtol=1e-14)


def test_opaque_resolvent_uses_python_loop():
    op = prox.wrap_resolvent(lambda y: np.minimum(y, 0.0), "opaque", 2)
    spec = ProblemSpec(2, op, prox.zero_operator(2), make_vector([1, 1]))
    assert engine.run(spec, engine.RunConfig(max_iters=30)).backend == "python"
    with pytest.raises(RuntimeError):
        backend.iterate(op, op, spec.start, 5, backend="compiled")


def test_stopping_rule_same_on_both_paths():
    spec = ProblemSpec(2, prox.box_operator([-1, -1], [1, 1]), prox.box_operator([0, -0.5], [2, 3]),
                       make_vector([3, -4]))
    a = engine.run(spec, engine.RunConfig(backend="python"))
    b = engine.run(spec)
    assert a.iterations == b.iterations and a.stopped_early


def test_env_var_forces_python():
    env = dict(os.environ, DRTOOL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import drtool.backend as b; print(b.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"

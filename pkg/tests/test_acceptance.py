"""Acceptance gate: one test and one reported pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are collected in
the "acceptance criteria" section of the terminal summary.
"""
import itertools
import time

import numpy as np

from drtool import displacement as D, engine, oracles as O
from drtool.core import IDENTITY_TOL, ProblemSpec, make_vector
from drtool.engine import RunConfig
from drtool.identities import identity_suite
from drtool.scenario import emit_trace_csv

from conftest import ACCEPTANCE_LINES, catalog_operators, halfspace_l1_spec

SEED = 20240611


def report(num, title, ok, detail):
    line = f"criterion {num} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[num] = line
    print(line)
    assert ok, line


def _catalog_pairs():
    """Catalog families paired with each other, in dimensions 1 to 4."""
    for m in range(1, 5):
        ops = catalog_operators(m)
        for a, b in itertools.product(ops[:8], ops[:8]):
            yield ProblemSpec(m, a, b, make_vector(np.zeros(m)))
        for a, b in zip(ops[8:], ops):
            yield ProblemSpec(m, a, b, make_vector(np.zeros(m)))


def test_criterion_1_identities(scenarios):
    rng = np.random.default_rng(SEED)
    specs = list(_catalog_pairs()) + [sc.spec for sc in scenarios.values()]
    t0 = time.perf_counter()
    worst = {}
    for spec in specs:
        for k, e in identity_suite(spec, 1000, rng).errors.items():
            worst[k] = max(worst.get(k, 0.0), e)
    elapsed = time.perf_counter() - t0
    top = max(worst.values())
    report(1, "pointwise identity suite", top <= IDENTITY_TOL and elapsed < 5.0,
           f"{len(specs)} pairs x 1000 points, max error {top:.2e}, {elapsed:.2f}s")


CONE_PARAMS = {"cone_example": (-2, 3, -1, 0), "cone_example_alpha_positive": (5, 0, -1, 7),
               "cone_example_alpha_zero": (0, 0, -1, 0)}


def test_criterion_2_cone_example(scenarios):
    worst, predicate_ok = 0.0, True
    for name, params in CONE_PARAMS.items():
        sc = scenarios[name]
        cfg = sc.config()
        assert cfg.max_iters <= 20000
        est = engine.run(sc.spec, cfg).final_estimate
        p = O.ConeExampleParams(*params)
        t = O.cone_example_truth(p)
        for got, want in ((est.v_d, t.v_d), (est.v_r, t.v_r), (est.v, t.v)):
            worst = max(worst, float(np.max(np.abs(got - want))))
        grid = O.certify_cone_inclusion(p)
        predicate_ok &= grid.subset and grid.strict == (p.alpha < 0) == t.strict_inclusion
    report(2, "shifted-cone example", worst <= 1e-4 and predicate_ok,
           f"max estimate error {worst:.2e}, strict inclusion matches alpha < 0: {predicate_ok}")


def test_criterion_3_affine_example(scenarios):
    worst_est, worst_drift = 0.0, 0.0
    for name in ("affine_2d", "affine_3d"):
        sc = scenarios[name]
        a, b = np.asarray(sc.operator_a["a"]), np.asarray(sc.operator_b["b"])
        est = engine.run(sc.spec, sc.config()).final_estimate
        worst_est = max(worst_est, float(np.max(np.abs(est.v_d - a))), float(np.max(np.abs(est.v_r - b))))
        rep = engine.anchored_shadow_check(sc.spec, sc.anchor, a + b, a, b, 1000)
        worst_drift = max(worst_drift, rep.governing_error)
    report(3, "affine example", worst_est <= 1e-6 and worst_drift <= 1.0,
           f"max (v_D, v_R) error {worst_est:.2e}, drift error {worst_drift:.2e} x (n * 1e-10)")


def test_criterion_4_halfspace_l1():
    u, eta, c = [1.0, 0.0], -2.0, [1.0, 1.0]
    hs_grid = O.GridSpec([-4, -4], [2, 2], 601)
    from drtool.prox import HalfspaceSet, L1BoxPrimitive

    oracle = O.grid_minimize(HalfspaceSet(u, eta).value, L1BoxPrimitive(c).value, [-1, 0], hs_grid)
    rng = np.random.default_rng(SEED)
    starts = [np.array([0.5, 3.7]), np.zeros(2)] + list(10 * rng.standard_normal((6, 2)))
    worst = dict(v_r=0.0, v=0.0, limit=0.0, value=0.0, eps=0.0, delta=0.0, seconds=0.0)
    for x0 in starts:
        spec = halfspace_l1_spec(u, eta, c, x0)
        t0 = time.perf_counter()
        tr = engine.run(spec, RunConfig(max_iters=50000, stop_tol=1e-12, min_iters=20))
        mon = engine.value_monitor(tr, test_point=oracle.argmin, v=tr.final_estimate.v)
        worst["seconds"] = max(worst["seconds"], time.perf_counter() - t0)
        est = tr.final_estimate
        worst["v_r"] = max(worst["v_r"], float(np.linalg.norm(est.v_r)))
        worst["v"] = max(worst["v"], float(np.max(np.abs(est.v - [-1, 0]))))
        worst["limit"] = max(worst["limit"], float(np.linalg.norm(tr.limit_primal - oracle.argmin)))
        worst["value"] = max(worst["value"], abs(mon.converged_value - oracle.min_value))
        worst["eps"] = max(worst["eps"], mon.eps_tail)
        worst["delta"] = max(worst["delta"], mon.delta_tail)
    ok = (worst["v_r"] <= 1e-5 and worst["v"] <= 1e-4 and worst["limit"] <= 1e-3
          and worst["value"] <= 1e-4 and worst["eps"] <= 1e-6 and worst["delta"] <= 1e-6
          and worst["seconds"] < 2.0)
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items())
    report(4, f"half-space/l1 scenario over {len(starts)} starts", ok, detail)


def test_criterion_5_regularity_dichotomy(scenarios):
    tol = 1e-6
    bad = []
    for name, sc in scenarios.items():
        rep = engine.asymptotic_regularity_report(engine.run(sc.spec, sc.config()), tol)
        if rep.primal_regular != (np.linalg.norm(sc.oracle.v_r) <= tol):
            bad.append(f"{name}:primal")
        if rep.dual_regular != (np.linalg.norm(sc.oracle.v_d) <= tol):
            bad.append(f"{name}:dual")
    report(5, "asymptotic-regularity dichotomy", not bad,
           f"{len(scenarios)} scenarios, disagreements: {bad or 'none'}")


def test_criterion_6_divergence_certificate(scenarios):
    N = 10000
    lines, ok = [], True
    for name, sc in sorted(scenarios.items()):
        v_r = sc.oracle.v_r
        if not np.any(v_r):
            continue
        tr = engine.run(sc.spec, RunConfig(max_iters=N + 1, stop_tol=None))
        assert tr.n[-1] == N
        # the constant comes from the first half of the run only
        half = tr.n <= N // 2
        C = float(np.max(np.linalg.norm(tr.p[half] + np.multiply.outer(tr.n[half], v_r), axis=1)))
        pn = float(np.linalg.norm(tr.p[-1]))
        ok &= pn >= 0.5 * N * float(np.linalg.norm(v_r)) - C
        lines.append(f"{name} C={C:.3g} |p_N|={pn:.6g}")
    report(6, "divergence certificate at N=10000", ok and bool(lines), "; ".join(lines))


def test_criterion_7_fejer(scenarios):
    lines, ok = [], True
    for name, sc in sorted(scenarios.items()):
        target = engine.fejer_target_from_anchor(sc.spec, sc.anchor)
        tr = engine.run(sc.spec, sc.config())
        rep = engine.fejer_monitor(tr, sc.oracle.v_d, sc.oracle.v_r, target, slack=1e-9)
        ok &= rep.monotone
        lines.append(f"{name} {rep.max_increase:.1e}")
    report(7, "Fejer monotonicity (max increase per scenario)", ok, "; ".join(lines))


def test_criterion_8_normal_problem(scenarios):
    rng = np.random.default_rng(SEED)
    worst_id, worst_variant, worst_lim, members = 0.0, 0.0, 0.0, True
    for name, sc in sorted(scenarios.items()):
        tr = engine.run(sc.spec, sc.config())
        v = tr.final_estimate.v
        nprob = D.build_normal_problem(sc.spec, v)
        ys = 5 * rng.standard_normal((100, sc.dim))
        worst_id = max(worst_id, D.normal_identity_error(nprob, ys))
        lhs = D.dr_map_rows(nprob.shifted, ys)
        variant_gap = lhs - (D.dr_map_rows(sc.spec, ys + v) - v)
        worst_variant = max(worst_variant, float(np.max(np.abs(variant_gap - v))))
        sol = D.solve_normal(nprob, RunConfig(max_iters=sc.config().max_iters))
        if np.any(sc.oracle.v_r):
            # shadows diverge, so the check is membership of the normal solution in Z
            members &= bool(np.linalg.norm(sc.oracle.z_set.prox(sol.z) - sol.z) <= 1e-6)
        else:
            worst_lim = max(worst_lim, float(np.linalg.norm(tr.p[-1] - sol.z)))
    ok = worst_id <= 1e-10 and worst_variant <= 1e-10 and worst_lim <= 1e-3 and members
    report(8, "normal-problem equivalence", ok,
           f"|T'(y) - T(y+v)| max {worst_id:.1e} (T(y+v) - v differs by exactly v, gap {worst_variant:.1e}); "
           f"shadow limit vs normal solution {worst_lim:.1e}; Z membership when shadows diverge: {members}")


def test_criterion_9_determinism(scenarios, tmp_path):
    differing = []
    for name, sc in sorted(scenarios.items()):
        blobs = []
        for k in range(2):
            tr = engine.run(sc.spec, sc.config())
            blobs.append(emit_trace_csv(tr, tmp_path / f"{name}_{k}.csv").read_bytes())
        if blobs[0] != blobs[1]:
            differing.append(name)
    report(9, "byte-identical trace CSV", not differing,
           f"{len(scenarios)} scenarios, differing: {differing or 'none'}")

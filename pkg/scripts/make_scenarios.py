"""Regenerate the bundled scenario corpus from the closed-form oracles.

Run from the repository root: ``python scripts/make_scenarios.py``.
"""
import json
import math
from pathlib import Path

import numpy as np

from drtool import oracles as O
from drtool.prox import AffineSubspaceSet

OUT = Path(__file__).resolve().parents[1] / "src" / "drtool" / "scenarios"


def vec(x):
    return [float(t) + 0.0 for t in np.asarray(x)]


def inf_vec(x):
    return [t if math.isfinite(t) else ("inf" if t > 0 else "-inf") for t in vec(x)]


def cone(name, alpha, beta, gamma, delta, start):
    p = O.ConeExampleParams(alpha, beta, gamma, delta)
    t = O.cone_example_truth(p)
    return {
        "name": name,
        "description": "A = N_{a+K}, B = b + N_K with K the nonnegative first axis",
        "dim": 2,
        "operator_a": {"type": "translated_cone", "a": vec(p.a), "axis": 0},
        "operator_b": {"type": "add_vector", "b": vec(p.b),
                       "of": {"type": "translated_cone", "a": [0.0, 0.0], "axis": 0}},
        "start": start,
        "run": {"max_iters": 20000, "stop_tol": None},
        "anchor": vec(t.anchor),
        "oracle": {"v": vec(t.v), "v_d": vec(t.v_d), "v_r": vec(t.v_r),
                   "z_set": {"type": "box", "lo": [t.z_left, t.z_level], "hi": ["inf", t.z_level]}},
    }


def affine(name, basis, a, b, start):
    basis = np.asarray(basis, dtype=float)
    t = O.affine_example_truth(AffineSubspaceSet(np.zeros(len(a)), basis), a, b)
    zero = [0.0] * len(a)
    return {
        "name": name,
        "description": "A = N_{a+U}, B = b + N_U with a in U-perp and b in U",
        "dim": len(a),
        "operator_a": {"type": "affine", "a": vec(a), "basis": [vec(r) for r in basis]},
        "operator_b": {"type": "add_vector", "b": vec(b),
                       "of": {"type": "affine", "a": zero, "basis": [vec(r) for r in basis]}},
        "start": start,
        "run": {"max_iters": 1000, "stop_tol": None},
        "anchor": vec(t.anchor),
        "oracle": {"v": vec(t.v), "v_d": vec(t.v_d), "v_r": vec(t.v_r),
                   "z_set": {"type": "affine", "a": vec(a), "basis": [vec(r) for r in basis]}},
    }


def halfspace_l1(name, u, eta, c, start, anchor=None):
    t = O.halfspace_l1_truth(u, eta, c)
    return {
        "name": name,
        "description": "f = indicator of <x,u> <= eta, g = l1 norm plus indicator of [-c, c]",
        "dim": len(u),
        "operator_a": {"type": "halfspace", "u": vec(u), "eta": float(eta)},
        "operator_b": {"type": "l1_box", "c": inf_vec(c)},
        "start": start,
        "run": {"max_iters": 50000, "stop_tol": 1e-12, "min_iters": 20},
        "anchor": vec(t.anchor) if t.anchor is not None else anchor,
        "test_point_y": vec(t.z_bar),
        "oracle": {"v": vec(t.v), "v_d": vec(t.v_d), "v_r": vec(t.v_r),
                   "z_point": vec(t.z_bar), "mu": t.mu},
    }


SCENARIOS = [
    {
        "name": "consistent_boxes",
        "description": "two intersecting boxes; plain feasibility",
        "dim": 2,
        "operator_a": {"type": "box", "lo": [-1.0, -1.0], "hi": [1.0, 1.0]},
        "operator_b": {"type": "box", "lo": [0.0, -0.5], "hi": [2.0, 3.0]},
        "start": [3.0, -4.0],
        "run": {"max_iters": 2000, "stop_tol": 1e-12, "min_iters": 20},
        "anchor": [0.5, 0.5],
        "test_point_y": [0.5, 0.5],
        "oracle": {"v": [0.0, 0.0], "v_d": [0.0, 0.0], "v_r": [0.0, 0.0],
                   "z_set": {"type": "box", "lo": [0.0, -0.5], "hi": [1.0, 1.0]}, "mu": 0.0},
    },
    halfspace_l1("consistent_halfspace_l1_3d", [1.0, 2.0, -1.0], -1.0, [1.0, 0.5, 2.0],
                 [2.0, -1.0, 0.5], anchor=[0.5, 0.5, -0.5]),
    cone("cone_example", -2.0, 3.0, -1.0, 0.0, [0.3, -4.0]),
    cone("cone_example_alpha_positive", 5.0, 0.0, -1.0, 7.0, [-2.0, 1.5]),
    cone("cone_example_alpha_zero", 0.0, 0.0, -1.0, 0.0, [1.0, 1.0]),
    affine("affine_2d", [[1.0, 0.0]], [0.0, 3.0], [2.0, 0.0], [5.0, 7.0]),
    affine("affine_3d", [[1 / math.sqrt(2), 1 / math.sqrt(2), 0.0]], [1.0, -1.0, 2.0],
           [-1.0, -1.0, 0.0], [0.5, -2.0, 4.0]),
    halfspace_l1("halfspace_l1", [1.0, 0.0], -2.0, [1.0, 1.0], [0.5, 3.7]),
    halfspace_l1("halfspace_l1_vertical", [0.0, 1.0], -3.0, [1.0, 1.0], [-4.0, 2.0]),
    halfspace_l1("halfspace_l1_3d", [1.0, 2.0, -1.0], -5.0, [1.0, 0.5, 2.0], [0.0, 0.0, 0.0]),
    {
        "name": "dual_shadow",
        "description": "A = normal cone of x1 <= 0, B = constant (-1, 1); v_D = 0 so dual shadows converge",
        "dim": 2,
        "operator_a": {"type": "halfspace", "u": [1.0, 0.0], "eta": 0.0},
        "operator_b": {"type": "linear", "w": [-1.0, 1.0]},
        "start": [2.0, -3.0],
        "run": {"max_iters": 10000, "stop_tol": None},
        "anchor": [1.0, 0.0],
        "oracle": {"v": [0.0, 1.0], "v_d": [0.0, 0.0], "v_r": [0.0, 1.0],
                   "z_set": {"type": "affine", "a": [0.0, 0.0], "basis": [[0.0, 1.0]]}},
    },
]


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    for sc in SCENARIOS:
        (OUT / f"{sc['name']}.json").write_text(json.dumps(sc, indent=2) + "\n")
        print("wrote", sc["name"])

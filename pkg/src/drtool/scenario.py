"""Scenario files: JSON ingestion, batch execution, trace CSV and summaries.

A scenario is one JSON document::

    {
      "name": "cone_example",
      "dim": 2,
      "operator_a": {"type": "translated_cone", "a": [-2, 3], "axis": 0},
      "operator_b": {"type": "add_vector", "b": [-1, 0],
                     "of": {"type": "translated_cone", "a": [0, 0]}},
      "start": [0.3, -4.0],
      "run": {"max_iters": 20000, "stop_tol": null},
      "anchor": [0.0, 3.0],
      "test_point_y": null,
      "oracle": {"v": [-1, 3], "v_d": [0, 3], "v_r": [-1, 0],
                 "z_set": {"type": "box", "lo": [-1, 3], "hi": ["inf", 3]}}
    }

Operator descriptor types: ``halfspace {u, eta}``, ``box {lo, hi}``,
``translated_cone {a, axis}``, ``affine {a, basis}``, ``point {a}``,
``l1_box {c}``, ``zero {}``, ``linear {w}`` and the composites
``add_vector {b, of}``, ``shift {w, of}``, ``translate {v, of}``,
``inverse {of}``.  Bounds accept the strings ``"inf"`` and ``"-inf"``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import prox
from .core import CONVERGENCE_TOL, ProblemSpec, make_vector
from .displacement import (build_normal_problem, check_orthogonal_decomposition, compare_methods,
                           solve_normal)
from .engine import RunConfig, RunTrace, asymptotic_regularity_report, run
from .errors import DRToolError, InsufficientData, ParseError, ValidationError

ORACLE_TOL = 1e-4
LIMIT_TOL = 1e-3
BUNDLED_DIR = Path(__file__).parent / "scenarios"

RUN_FIELDS = {"max_iters", "stop_tol", "record_every", "min_iters"}
ORACLE_FIELDS = {"v", "v_d", "v_r", "z_point", "z_set", "mu", "tol"}
TOP_FIELDS = {"name", "dim", "operator_a", "operator_b", "start", "run", "anchor",
              "test_point_y", "oracle", "description"}


def _reals(val, where, allow_inf=False):
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        val = [val]
    if not isinstance(val, list) or not val:
        raise ParseError("expected a nonempty list of numbers", where)
    out = []
    for i, x in enumerate(val):
        if allow_inf and x in ("inf", "+inf", "-inf"):
            out.append(-math.inf if x == "-inf" else math.inf)
        elif isinstance(x, (int, float)) and not isinstance(x, bool):
            out.append(float(x))
        else:
            raise ParseError(f"not a number: {x!r}", f"{where}[{i}]")
    return np.array(out)


def _get(d, key, where):
    if key not in d:
        raise ParseError(f"missing field '{key}'", where)
    return d[key]


_SET_TYPES = {"halfspace", "box", "translated_cone", "affine", "point"}


def _primitive(desc, where):
    """Set or function primitive named by a leaf descriptor."""
    kind = desc.get("type")
    if kind == "halfspace":
        return prox.HalfspaceSet(_reals(_get(desc, "u", where), f"{where}.u"),
                                 float(_reals(_get(desc, "eta", where), f"{where}.eta")[0]))
    if kind == "box":
        return prox.BoxSet(_reals(_get(desc, "lo", where), f"{where}.lo", True),
                           _reals(_get(desc, "hi", where), f"{where}.hi", True))
    if kind == "translated_cone":
        return prox.TranslatedConeSet(_reals(_get(desc, "a", where), f"{where}.a"), int(desc.get("axis", 0)))
    if kind == "affine":
        a = _reals(_get(desc, "a", where), f"{where}.a")
        rows = desc.get("basis", [])
        basis = np.array([_reals(r, f"{where}.basis[{i}]") for i, r in enumerate(rows)]).reshape(-1, a.size)
        return prox.AffineSubspaceSet(a, basis)
    if kind == "point":
        a = _reals(_get(desc, "a", where), f"{where}.a")
        return prox.AffineSubspaceSet(a, np.zeros((0, a.size)))
    if kind == "l1_box":
        return prox.L1BoxPrimitive(_reals(_get(desc, "c", where), f"{where}.c", True))
    raise ParseError(f"unknown primitive type {kind!r}", where)


def build_operator(desc, where="operator"):
    """Turn a descriptor into an :class:`OperatorHandle`."""
    if not isinstance(desc, dict):
        raise ParseError("operator descriptor must be an object", where)
    kind = desc.get("type")
    try:
        if kind == "zero":
            return prox.zero_operator(int(_get(desc, "dim", where)))
        if kind == "linear":
            return prox.linear_operator(_reals(_get(desc, "w", where), f"{where}.w"))
        if kind in ("add_vector", "shift", "translate", "inverse"):
            inner = build_operator(_get(desc, "of", where), f"{where}.of")
            if kind == "inverse":
                return prox.inverse_resolvent(inner)
            key = {"add_vector": "b", "shift": "w", "translate": "v"}[kind]
            vec = _reals(_get(desc, key, where), f"{where}.{key}")
            fn = {"add_vector": prox.add_vector, "shift": prox.resolvent_of_shift_plus,
                  "translate": prox.translate_operator_arg}[kind]
            return fn(inner, vec)
        return prox.operator_from_primitive(_primitive(desc, where), kind)
    except DRToolError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), where) from exc


@dataclass
class OracleBlock:
    v: Optional[np.ndarray] = None
    v_d: Optional[np.ndarray] = None
    v_r: Optional[np.ndarray] = None
    z_point: Optional[np.ndarray] = None
    z_set: Optional[object] = None
    mu: Optional[float] = None
    tol: float = ORACLE_TOL


@dataclass
class ScenarioFile:
    name: str
    dim: int
    operator_a: dict
    operator_b: dict
    start: np.ndarray
    run: dict
    oracle: Optional[OracleBlock] = None
    test_point_y: Optional[np.ndarray] = None
    anchor: Optional[np.ndarray] = None
    description: str = ""
    path: Optional[Path] = None
    spec: ProblemSpec = field(default=None, repr=False)

    def config(self, max_iters=None, stop_tol=None, **extra) -> RunConfig:
        kw = dict(self.run)
        if max_iters is not None:
            kw["max_iters"] = max_iters
        if stop_tol is not None:
            kw["stop_tol"] = stop_tol
        kw.update(extra)
        ref = self.oracle.v if self.oracle is not None else None
        return RunConfig(anchor=self.anchor, test_point=self.test_point_y, reference_v=ref, **kw)


def _vec_field(doc, key, where, problems, dim):
    if doc.get(key) is None:
        return None
    vec = _reals(doc[key], where)
    if not np.all(np.isfinite(vec)):
        problems.append(f"{where}: coordinates must be finite")
    elif vec.size != dim:
        problems.append(f"{where}: dimension {vec.size} != dim {dim}")
    return vec


def parse_scenario(doc, source="<scenario>") -> ScenarioFile:
    """Validate a decoded scenario document; collects every violated invariant."""
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", source)
    problems = []
    unknown = set(doc) - TOP_FIELDS
    if unknown:
        problems.append(f"unknown fields: {sorted(unknown)}")
    name = str(_get(doc, "name", source))
    dim = _get(doc, "dim", source)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError("dim must be a positive integer", f"{source}.dim")
    op_a = build_operator(_get(doc, "operator_a", source), "operator_a")
    op_b = build_operator(_get(doc, "operator_b", source), "operator_b")
    for label, op in (("operator_a", op_a), ("operator_b", op_b)):
        if op.dim != dim:
            problems.append(f"{label}: dimension {op.dim} != dim {dim}")
    start = _vec_field(doc, "start", "start", problems, dim)
    if start is None:
        raise ParseError("missing field 'start'", source)
    anchor = _vec_field(doc, "anchor", "anchor", problems, dim)
    test_y = _vec_field(doc, "test_point_y", "test_point_y", problems, dim)
    run_cfg = doc.get("run", {}) or {}
    if set(run_cfg) - RUN_FIELDS:
        problems.append(f"run: unknown fields {sorted(set(run_cfg) - RUN_FIELDS)}")
    try:
        RunConfig(**{k: run_cfg[k] for k in run_cfg if k in RUN_FIELDS})
    except (DRToolError, TypeError) as exc:
        problems.append(f"run: {exc}")
    oracle = None
    if doc.get("oracle") is not None:
        o = doc["oracle"]
        if set(o) - ORACLE_FIELDS:
            problems.append(f"oracle: unknown fields {sorted(set(o) - ORACLE_FIELDS)}")
        oracle = OracleBlock(
            v=_vec_field(o, "v", "oracle.v", problems, dim),
            v_d=_vec_field(o, "v_d", "oracle.v_d", problems, dim),
            v_r=_vec_field(o, "v_r", "oracle.v_r", problems, dim),
            z_point=_vec_field(o, "z_point", "oracle.z_point", problems, dim),
            mu=None if o.get("mu") is None else float(o["mu"]),
            tol=float(o.get("tol", ORACLE_TOL)),
        )
        if o.get("z_set") is not None:
            if o["z_set"].get("type") not in _SET_TYPES:
                problems.append("oracle.z_set: must be a set descriptor")
            else:
                oracle.z_set = _primitive(o["z_set"], "oracle.z_set")
                if oracle.z_set.dim != dim:
                    problems.append(f"oracle.z_set: dimension {oracle.z_set.dim} != dim {dim}")
        parts = (oracle.v, oracle.v_d, oracle.v_r)
        if all(p is not None and p.size == dim for p in parts):
            if np.max(np.abs(oracle.v - oracle.v_d - oracle.v_r)) > 1e-10:
                problems.append("oracle: decomposition identity v = v_d + v_r violated")
            if abs(float(oracle.v_d @ oracle.v_r)) > 1e-10:
                problems.append("oracle: orthogonality <v_d, v_r> = 0 violated")
    if problems:
        raise ValidationError(problems)
    sc = ScenarioFile(name, dim, doc["operator_a"], doc["operator_b"], make_vector(start),
                      dict(run_cfg), oracle, test_y, anchor, str(doc.get("description", "")))
    sc.spec = ProblemSpec(dim, op_a, op_b, sc.start, name)
    return sc


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc), str(path)) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc
    sc = parse_scenario(doc, str(path))
    sc.path = path
    return sc


def bundled_scenarios() -> list:
    return sorted(BUNDLED_DIR.glob("*.json"))


# -- output ---------------------------------------------------------------------

def trace_header(dim: int) -> list:
    cols = ["n"]
    for tag in ("x", "p", "q", "d", "e", "stepdiff"):
        cols += [f"{tag}_{i}" for i in range(1, dim + 1)]
    return cols + ["f_val", "g_val", "eps_n", "delta_n"]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def emit_trace_csv(trace: RunTrace, path) -> Path:
    """One row per recorded iteration; reals use 17 significant digits."""
    if len(trace) == 0:
        raise InsufficientData("empty trace")
    path = Path(path)
    nan = np.full(len(trace), math.nan)
    eps = nan if trace.eps is None else trace.eps
    delta = nan if trace.delta is None else trace.delta
    blocks = np.hstack([trace.x, trace.p, trace.q, trace.d, trace.e, trace.step_diff])
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(trace.spec.dim))
        for k in range(len(trace)):
            w.writerow([str(int(trace.n[k]))] + [_fmt(x) for x in blocks[k]]
                       + [_fmt(trace.f_val[k]), _fmt(trace.g_val[k]), _fmt(eps[k]), _fmt(delta[k])])
    return path


def read_trace_csv(path) -> dict:
    """Parse an emitted trace back into column arrays keyed by header name."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body]).reshape(len(body), len(header))
    return {h: data[:, i] for i, h in enumerate(header)}


# -- execution ------------------------------------------------------------------

def _vec(x):
    return None if x is None else [float(t) + 0.0 for t in np.asarray(x)]


@dataclass
class ScenarioResult:
    exit_code: int
    summary: dict
    trace: Optional[RunTrace] = None
    paths: dict = field(default_factory=dict)


def _compare(sc: ScenarioFile, trace: RunTrace, summary: dict) -> dict:
    """Oracle deltas and pass flags; every flag must hold for exit status 0."""
    o = sc.oracle
    checks, deltas = {}, {}
    est = trace.final_estimate
    if est is None:
        checks["estimate_available"] = False
        return {"checks": checks, "deltas": deltas}
    for key in ("v", "v_d", "v_r"):
        want = getattr(o, key)
        if want is not None:
            d = float(np.max(np.abs(getattr(est, key) - want)))
            deltas[key] = d
            checks[key] = d <= o.tol
    if o.z_point is not None or o.z_set is not None or o.mu is not None:
        try:
            sol = solve_normal(build_normal_problem(sc.spec, est.v),
                               RunConfig(max_iters=sc.config().max_iters))
        except DRToolError as exc:
            checks["normal_solve"] = False
            summary["normal_error"] = str(exc)
        else:
            summary["normal"] = {"z": _vec(sol.z), "mu": sol.mu, "residual": sol.residual,
                                 "iterations": sol.iterations}
            if o.z_point is not None:
                deltas["z_point"] = float(np.linalg.norm(sol.z - o.z_point))
                checks["z_point"] = deltas["z_point"] <= LIMIT_TOL
            if o.z_set is not None:
                deltas["z_set"] = float(np.linalg.norm(o.z_set.prox(sol.z) - sol.z))
                checks["z_set"] = deltas["z_set"] <= CONVERGENCE_TOL
            if o.mu is not None and sol.mu is not None:
                deltas["mu"] = abs(sol.mu - o.mu)
                checks["mu"] = deltas["mu"] <= o.tol
    if o.mu is not None and trace.limit_value is not None and o.v_r is not None and not np.any(o.v_r):
        deltas["limit_value"] = abs(trace.limit_value - o.mu)
        checks["limit_value"] = deltas["limit_value"] <= o.tol
    return {"checks": checks, "deltas": deltas}


def run_scenario(sc: ScenarioFile, out_dir=None, max_iters=None, stop_tol=None,
                 write_trace=True) -> ScenarioResult:
    """Run, estimate, compare with the oracle and optionally write artifacts.

    Exit status is 0 when every oracle check passes, 1 on a mismatch or
    unconverged estimate and 2 on a runtime failure.
    """
    summary = {"name": sc.name, "dim": sc.dim}
    try:
        cfg = sc.config(max_iters, stop_tol)
        trace = run(sc.spec, cfg)
    except DRToolError as exc:
        summary.update(error=f"{type(exc).__name__}: {exc}", exit_code=2, passed=False)
        return ScenarioResult(2, summary)
    summary.update(backend=trace.backend, iterations=trace.iterations,
                   stopped_early=trace.stopped_early,
                   limit_primal=_vec(trace.limit_primal), limit_value=trace.limit_value)
    est = trace.final_estimate
    if est is not None:
        summary["estimate"] = {"v": _vec(est.v), "v_d": _vec(est.v_d), "v_r": _vec(est.v_r),
                               "method": est.method.value, "residual": est.residual}
        summary["decomposition"] = vars(check_orthogonal_decomposition(est))
        cmp = compare_methods(trace)
        summary["method_agreement"] = {"max_disagreement": cmp.max_disagreement, "status": cmp.status}
        reg = asymptotic_regularity_report(trace)
        summary["regularity"] = {"primal_regular": reg.primal_regular, "dual_regular": reg.dual_regular}
    else:
        summary["estimate"] = None
        summary["status"] = "not converged: too few iterations for an estimate"
    code = 0
    if sc.oracle is not None:
        res = _compare(sc, trace, summary)
        summary["oracle"] = res
        if not all(res["checks"].values()):
            code = 1
    summary["passed"] = code == 0
    summary["exit_code"] = code
    out = ScenarioResult(code, summary, trace)
    if out_dir is not None:
        target = Path(out_dir) / sc.name
        target.mkdir(parents=True, exist_ok=True)
        if write_trace:
            out.paths["trace"] = emit_trace_csv(trace, target / "trace.csv")
        spath = target / "summary.json"
        spath.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")
        out.paths["summary"] = spath
    return out


def _json_default(x):
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x).__name__)

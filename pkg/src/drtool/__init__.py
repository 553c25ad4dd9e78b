"""Douglas-Rachford splitting for possibly inconsistent convex problems.

Tracks the governing sequence and its four shadows, estimates the minimal
displacement vector ``v = v_D + v_R`` and builds the associated normal
problem.  The iteration runs in a compiled kernel when available (see
:mod:`drtool.backend`).
"""
from .backend import BACKEND, COMPILED
from .core import (CONVERGENCE_TOL, IDENTITY_TOL, DisplacementEstimate, EstimationMethod,
                   IterateRecord, OperatorHandle, ProblemSpec, check_firm_nonexpansiveness,
                   make_vector)
from .displacement import (NormalProblem, build_normal_problem, check_orthogonal_decomposition,
                           compare_methods, estimate_v, normal_identity_error, solve_normal)
from .engine import (RunConfig, RunTrace, anchored_shadow_check, asymptotic_regularity_report,
                     divergence_constant, dr_step, fejer_monitor, fejer_target_from_anchor, run,
                     value_monitor)
from .errors import *  # noqa: F401,F403
from .prox import (AffineSubspaceSet, BoxSet, HalfspaceSet, L1BoxPrimitive, TranslatedConeSet,
                   add_vector, affine_operator, box_operator, halfspace_operator,
                   inverse_resolvent, l1_box_operator, linear_operator, point_operator,
                   project_affine, project_box, project_halfspace, project_translated_cone,
                   prox_l1_box, reflect, resolvent_of_shift_plus, translate_operator_arg,
                   translated_cone_operator, zero_operator)
from .scenario import emit_trace_csv, load_scenario, run_scenario

__version__ = "0.1.0"

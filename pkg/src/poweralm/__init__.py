"""Inexact power proximal point and power augmented Lagrangian methods.

The package is organized in layers: :mod:`poweralm.powers` holds the power
prox-function toolkit, :mod:`poweralm.proxpoint` the generic proximal point
loop and its diagnostics, :mod:`poweralm.inner` the subproblem engines,
:mod:`poweralm.alm` the multiplier machinery and outer loops,
:mod:`poweralm.problems` the instance generators and reference optima, and
:mod:`poweralm.bench` the sweep harness behind the ``poweralm-bench`` CLI.
"""

from .alm import (
    AlmInnerHandle,
    AlmState,
    ConstraintKind,
    OuterConfig,
    RunLog,
    StoppingRule,
    aug_lagrangian_grad_x,
    aug_lagrangian_value,
    baseline_adaptive_penalty,
    dual_update,
    ergodic_average,
    implicit_penalty,
    multiplier_argmax,
    primal_dual_gap,
    gradient_gap_bridge,
    run_classical_alm,
    run_power_alm,
    solve_inner,
)
from .inner import CompositeOracle, FunOracle, InnerReport, SmoothOracle, adaptive_apg_minimize, lbfgs_minimize
from .powers import (
    NormFamily,
    PowerParams,
    conjugate_exponent,
    dual_norm,
    epi_scaled_grad,
    epi_scaled_value,
    phi_conj_grad,
    phi_conj_value,
    phi_grad,
    phi_value,
    primal_norm,
    uniform_convexity_slack,
)
from .problems import (
    ProblemInstance,
    gen_l1_regression,
    gen_lp,
    gen_qp_eq_box,
    gen_qp_ineq,
    load_instance,
    reference_solution,
    save_instance,
)
from .proxpoint import (
    EpsMode,
    EpsSchedule,
    ThetaMode,
    ThetaSchedule,
    Trace,
    aniso_envelope,
    anchor,
    eps,
    eps_prox_check,
    local_order_estimate,
    ppm_step,
    run_ppm,
    theta,
)

__all__ = [name for name in dir() if not name.startswith("_")]

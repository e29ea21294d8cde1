"""Power augmented Lagrangian method and its classical baseline.

The augmented Lagrangian is built by sup-smoothing the multiplier with the
power penalty,

    L_lam(x, y) = f(x) + sup_eta  <Ax - b, eta> - lam*phi(y - eta),

where the supremum runs over the dual set of the constraint kind (all of
R^m for equality constraints, the nonnegative orthant for inequalities, the
unit box for an l1 term).  The maximizer eta* doubles as the next multiplier:
one outer iteration minimizes ``L_lam(., w_k)`` inexactly in x and then sets
``y_{k+1} = eta*(A x_{k+1} - b, w_k)``.

For separable norms the maximizer is a coordinatewise clip of the closed-form
unconstrained update.  For the Euclidean norm with a clipped dual set it
solves the scalar fixed point ``t = ||y - eta(t)||^(p-1)`` with
``eta(t) = clip(y + lam^p s / t)`` by bracketing and bisection; any root of
that equation satisfies the KKT system of the strictly concave maximization,
so the root is the unique maximizer.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .inner import CompositeOracle, InnerReport, SmoothOracle, adaptive_apg_minimize, lbfgs_minimize
from .powers import (
    NormFamily,
    PowerParams,
    dual_norm,
    epi_scaled_value,
    phi_conj_grad,
    phi_grad,
)
from .proxpoint import ThetaMode, ThetaSchedule, anchor, coefficient, theta


class ConstraintKind(Enum):
    EQUALITY = "equality"  # dual set R^m
    NONNEGATIVE_DUAL = "nonnegative_dual"  # dual set R_+^m, encodes Ax <= b
    UNIT_BOX_DUAL = "unit_box_dual"  # dual set [-1, 1]^m, encodes g = ||.||_1


def dual_set_project(y: np.ndarray, kind: ConstraintKind) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if kind is ConstraintKind.EQUALITY:
        return y
    if kind is ConstraintKind.NONNEGATIVE_DUAL:
        return np.maximum(0.0, y)
    return np.clip(y, -1.0, 1.0)


def in_dual_set(y: np.ndarray, kind: ConstraintKind, tol: float = 0.0) -> bool:
    y = np.asarray(y, dtype=float)
    if kind is ConstraintKind.EQUALITY:
        return True
    if kind is ConstraintKind.NONNEGATIVE_DUAL:
        return bool(np.all(y >= -tol))
    return bool(np.all(np.abs(y) <= 1.0 + tol))


def multiplier_argmax(
    s: np.ndarray,
    y: np.ndarray,
    params: PowerParams,
    kind: ConstraintKind,
) -> np.ndarray:
    """Maximizer eta* of <s, eta> - lam*phi(y - eta) over the dual set.

    ``s`` is the constraint residual ``Ax - b`` and ``y`` a point of the
    dual set.  For ``s = 0`` the maximizer is ``y`` itself.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    if kind is ConstraintKind.EQUALITY:
        return y + params.lam * phi_conj_grad(s, params)
    if params.norm is NormFamily.SEPARABLE_POWER or params.p == 1.0:
        return dual_set_project(y + params.lam * phi_conj_grad(s, params), kind)
    return _euclidean_clipped_argmax(s, y, params, kind)


def _euclidean_clipped_argmax(s, y, params, kind):
    lam, p = params.lam, params.p
    snorm = float(np.linalg.norm(s))
    if snorm == 0.0:
        return y.copy()
    lamp_s = lam**p * s

    def eta_of(t):
        with np.errstate(over="ignore"):
            return dual_set_project(y + lamp_s / t, kind)

    def fixed_point_gap(t):
        # F(t) - t with F(t) = ||y - eta(t)||^(p-1); positive below the root
        d = y - eta_of(t)
        nd = float(np.sqrt(np.sum(d * d))) if np.all(np.isfinite(d)) else np.inf
        return nd ** (p - 1.0) - t

    # with no clipping the root is exactly lam^(p-1) ||s||^((p-1)/p); clipping
    # only shrinks ||y - eta||, so this always brackets from above
    t_hi = lam ** (p - 1.0) * snorm ** ((p - 1.0) / p)
    if fixed_point_gap(t_hi) >= 0.0:
        return eta_of(t_hi)
    t_lo = t_hi
    bracketed = False
    for _ in range(2000):
        t_lo *= 0.5
        if t_lo < 1e-280:
            break
        if fixed_point_gap(t_lo) >= 0.0:
            bracketed = True
            break
    if not bracketed:
        # residual collapses as t -> 0: s lies in the normal cone at y and
        # the maximizer is y itself
        return y.copy()
    # geometric bisection localizes the exponent, then secant polishes
    for _ in range(400):
        if t_hi - t_lo <= 1e-12 * (1.0 + t_lo):
            break
        mid = float(np.sqrt(t_lo * t_hi))
        if fixed_point_gap(mid) >= 0.0:
            t_lo = mid
        else:
            t_hi = mid
    g_lo = fixed_point_gap(t_lo)
    g_hi = fixed_point_gap(t_hi)
    t = t_lo
    for _ in range(4):
        if g_lo == g_hi:
            break
        t = t_lo - g_lo * (t_hi - t_lo) / (g_hi - g_lo)
        if not t_lo <= t <= t_hi:
            t = 0.5 * (t_lo + t_hi)
        g = fixed_point_gap(t)
        if g >= 0.0:
            t_lo, g_lo = t, g
        else:
            t_hi, g_hi = t, g
    return eta_of(t)


def dual_gradient(
    s: np.ndarray,
    y: np.ndarray,
    params: PowerParams,
    kind: ConstraintKind,
    eta: np.ndarray | None = None,
) -> np.ndarray:
    """Gradient of L_lam in the multiplier, grad phi(lam^{-1}(eta* - y)).

    For equality constraints this is the residual s itself.
    """
    if kind is ConstraintKind.EQUALITY:
        return np.asarray(s, dtype=float)
    if eta is None:
        eta = multiplier_argmax(s, y, params, kind)
    return phi_grad((eta - np.asarray(y, float)) / params.lam, params)


def aug_lagrangian_value(x, y, problem, params: PowerParams) -> float:
    """L_lam(x, y) through the dual maximizer."""
    s = problem.residual(x)
    eta = multiplier_argmax(s, y, params, problem.kind)
    return float(problem.f_value(x) + s @ eta - epi_scaled_value(np.asarray(y, float) - eta, params))


def aug_lagrangian_grad_x(x, y, problem, params: PowerParams) -> np.ndarray:
    """Gradient of L_lam in x: grad f(x) + A^T eta* (envelope theorem)."""
    s = problem.residual(x)
    eta = multiplier_argmax(s, y, params, problem.kind)
    return problem.f_grad(x) + problem.A.T @ eta


def dual_update(x_next, w, problem, params: PowerParams) -> np.ndarray:
    """Multiplier step of the outer loop; equals the maximizer at the new residual."""
    return multiplier_argmax(problem.residual(x_next), w, params, problem.kind)


class AugLagOracle(SmoothOracle):
    """x -> L_lam(x, w) for a fixed anchor w, with fused value/gradient."""

    def __init__(self, problem, w, params: PowerParams):
        self.problem = problem
        self.w = np.asarray(w, dtype=float)
        self.params = params

    def _pieces(self, x):
        s = self.problem.residual(x)
        eta = multiplier_argmax(s, self.w, self.params, self.problem.kind)
        return s, eta

    def value(self, x):
        s, eta = self._pieces(x)
        return float(
            self.problem.f_value(x) + s @ eta - epi_scaled_value(self.w - eta, self.params)
        )

    def gradient(self, x):
        _, eta = self._pieces(x)
        return self.problem.f_grad(x) + self.problem.A.T @ eta

    def value_grad(self, x):
        s, eta = self._pieces(x)
        v = float(self.problem.f_value(x) + s @ eta - epi_scaled_value(self.w - eta, self.params))
        return v, self.problem.f_grad(x) + self.problem.A.T @ eta


@dataclass(frozen=True)
class StoppingRule:
    """Inner stationarity thresholds per outer iteration.

    ``practical`` uses c/k^(p+1) with k counted from 1, the rule the
    experiments run on.  ``grad_over_diameter`` divides the error schedule
    eps_k = c/(k+1)^(p+1) by the domain diameter D, which certifies the
    eps-subgradient and prox-distance criteria (the subgradient bridge).
    """

    mode: str = "practical"  # "practical" | "grad_over_diameter"
    c: float = 1e-3
    D: float | None = None

    def __post_init__(self):
        if self.mode not in ("practical", "grad_over_diameter"):
            raise ValueError(f"unknown stopping mode {self.mode!r}")
        if self.mode == "grad_over_diameter":
            if self.D is None or not np.isfinite(self.D) or self.D <= 0.0:
                raise ValueError("grad_over_diameter needs a finite positive diameter D")
        if self.c <= 0.0:
            raise ValueError("threshold constant must be positive")

    def threshold(self, k: int, p: float) -> float:
        """Threshold at 0-based outer index k; positive and nonincreasing."""
        num = self.c / float(k + 1) ** (p + 1.0)
        if self.mode == "grad_over_diameter":
            return num / self.D
        return num


def gradient_gap_bridge(inner_grad_norm: float, D: float) -> float:
    """Optimality gap certified by a gradient norm over a bounded domain.

    A subgradient of norm ``e`` at a point of a domain with diameter D
    bounds the suboptimality by ``eps = e * D``, simultaneously for the
    Lagrangian and the augmented Lagrangian; the dual step is then an
    eps-subgradient step and a 2^(p-1) eps proximal point.  Raises when no
    finite diameter is available (use the practical rule instead).
    """
    if D is None or not np.isfinite(D) or D <= 0.0:
        raise ValueError("domain diameter unavailable; the practical rule must be used")
    return float(inner_grad_norm) * float(D)


def baseline_adaptive_penalty(
    lambda_k: float,
    r_next: float,
    r_k: float,
    delta: float,
    tol_r: float | None = None,
) -> float:
    """Doubling rule of the classical adaptive baseline.

    Doubles the penalty whenever the residual has not decreased by the
    factor delta.  Once both residuals sit below ``tol_r`` the penalty is
    frozen, otherwise the test fires forever after convergence.
    """
    if not lambda_k > 0.0:
        raise ValueError("penalty must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if tol_r is not None and r_next <= tol_r and r_k <= tol_r:
        return lambda_k
    if r_next >= delta * r_k:
        return 2.0 * lambda_k
    return lambda_k


def implicit_penalty(y_next, y, params: PowerParams):
    """Penalty the equivalent classical ALM step would have used.

    Euclidean norms give the scalar ``lam^p ||dy||^(1-p)``; separable norms
    give its diagonal analogue coordinatewise.  Zero steps with p > 1 map to
    the +inf sentinel.
    """
    dy = np.asarray(y_next, float) - np.asarray(y, float)
    return implicit_penalty_of_step(dy, params)


def implicit_penalty_of_step(dy, params: PowerParams):
    """Same map evaluated directly on a multiplier step."""
    dy = np.asarray(dy, dtype=float)
    p, lam = params.p, params.lam
    if params.norm is NormFamily.EUCLIDEAN:
        if p == 1.0:
            return lam
        nd = float(np.linalg.norm(dy))
        return lam**p * nd ** (1.0 - p) if nd > 0.0 else np.inf
    if p == 1.0:
        return np.full(dy.shape, lam)
    ad = np.abs(dy)
    with np.errstate(divide="ignore"):
        return lam**p * ad ** (1.0 - p)


def ergodic_average(xs, p: float) -> np.ndarray:
    """Weighted primal average with weights a_k = k^(p+1) - (k-1)^(p+1)."""
    if len(xs) < 1:
        raise ValueError("need at least one iterate")
    acc = np.zeros_like(np.asarray(xs[0], dtype=float))
    wsum = 0.0
    for k, x in enumerate(xs, start=1):
        a = coefficient(k, p) - coefficient(k - 1, p)
        acc += a * np.asarray(x, dtype=float)
        wsum += a
    return acc / wsum


def primal_dual_gap(x, y, problem) -> float:
    """Primal cost minus a dual value; nonnegative up to inner-solve error.

    Multipliers outside the dual set are projected before evaluation.  The
    primal side ignores indicator terms, so it is meaningful near-feasible.
    """
    y_eval = dual_set_project(np.asarray(y, dtype=float), problem.kind)
    return float(problem.primal_cost(x)) - dual_value(problem, y_eval, x)


def dual_value(problem, y, x=None) -> float:
    """Closed-form dual function where the family admits one.

    Ridge-regularized l1 and quadratic objectives use the (pseudo-solved)
    quadratic conjugate; linear programs return -<b, y> at dually feasible
    multipliers (componentwise tolerance 1e-8) and otherwise fall back to
    the Lagrangian at the current primal point.
    """
    y = np.asarray(y, dtype=float)
    if getattr(problem, "theta", None) is not None:
        aty = problem.A.T @ y
        return float(-(aty @ aty) / (2.0 * problem.theta) - problem.b @ y)
    if getattr(problem, "Q", None) is not None:
        r = -(problem.A.T @ y) - problem.c
        z, in_range = problem.quad_conj_solve(r)
        if not in_range:
            return -np.inf
        return float(-0.5 * (r @ z) - problem.b @ y)
    # linear objective
    if float(np.max(np.abs(problem.A.T @ y + problem.c))) <= 1e-8:
        return float(-problem.b @ y)
    if x is None:
        return -np.inf
    x = np.asarray(x, dtype=float)
    return float(problem.c @ x + y @ (problem.A @ x - problem.b))


def feasibility_vector(s, y, params: PowerParams, kind: ConstraintKind) -> np.ndarray:
    """Violation vector whose norms are logged and drive termination.

    Equality: the raw residual.  Inequality: its positive part.  For the
    dualized l1 term there is no constraint to violate; the multiplier
    gradient ``grad_y L_lam`` plays the same role and vanishes exactly at a
    fixed point of the dual update.
    """
    s = np.asarray(s, dtype=float)
    if kind is ConstraintKind.EQUALITY:
        return s
    if kind is ConstraintKind.NONNEGATIVE_DUAL:
        return np.maximum(0.0, s)
    return dual_gradient(s, y, params, kind)


@dataclass(frozen=True)
class AlmInnerHandle:
    """Engine selection and budgets for the primal subproblem solves."""

    engine: str = "auto"  # "auto" | "lbfgs" | "apg"
    max_iter: int = 5000
    memory: int = 20
    m0: float = 1.0


def solve_inner(
    problem,
    w,
    params: PowerParams,
    rule: StoppingRule,
    warm,
    outer_index: int = 0,
    handle: AlmInnerHandle | None = None,
) -> InnerReport:
    """Minimize L_lam(., w) to the rule's threshold at this outer index.

    Box-constrained objectives go to the proximal-gradient engine with the
    scaled fixed-point residual standing in for the gradient norm; smooth
    ones go to L-BFGS.
    """
    handle = handle or AlmInnerHandle()
    tol = rule.threshold(outer_index, params.p)
    return _solve_inner_tol(problem, w, params, tol, warm, handle)


def _solve_inner_tol(problem, w, params, tol, warm, handle, callback=None):
    oracle = AugLagOracle(problem, w, params)
    warm = np.asarray(warm, dtype=float)
    use_apg = handle.engine == "apg" or (handle.engine == "auto" and problem.has_box)
    if use_apg:
        comp = CompositeOracle(oracle, lower=problem.lower, upper=problem.upper)
        return adaptive_apg_minimize(
            comp, warm, tol=tol, callback=callback, max_iter=handle.max_iter, m0=handle.m0
        )
    return lbfgs_minimize(oracle, warm, tol_grad=tol, max_iter=handle.max_iter, memory=handle.memory)


@dataclass
class OuterConfig:
    """Outer-loop configuration of the augmented Lagrangian runs."""

    theta: ThetaSchedule = ThetaSchedule(ThetaMode.PLAIN)
    stopping: StoppingRule = StoppingRule()
    tol_f: float = 1e-6
    tol_r: float = 1e-6
    max_outer: int = 200
    y0: np.ndarray | None = None
    x0: np.ndarray | None = None


@dataclass
class AlmState:
    """Mutable outer-loop state: multipliers, warm start, counters."""

    y: np.ndarray
    x: np.ndarray
    k: int = 0
    cum_inner: int = 0
    lambda_current: float | None = None  # classical baseline only

    def require_dual_feasible(self, kind: ConstraintKind):
        if not in_dual_set(self.y, kind, tol=1e-12):
            raise ValueError("multiplier left the dual set")


@dataclass
class RunLog:
    """Per-outer-iteration records of one solver run."""

    label: str = ""
    f_star: float | None = None
    status: str = "running"
    outer_iter: list[int] = field(default_factory=list)
    cum_inner: list[int] = field(default_factory=list)
    f_val: list[float] = field(default_factory=list)
    abs_subopt: list[float] = field(default_factory=list)
    feas2: list[float] = field(default_factory=list)
    feas_dual: list[float] = field(default_factory=list)
    pd_gap: list[float] = field(default_factory=list)
    pen_min: list[float] = field(default_factory=list)
    pen_max: list[float] = field(default_factory=list)
    elapsed_s: list[float] = field(default_factory=list)
    xs: list[np.ndarray] = field(default_factory=list)
    ys: list[np.ndarray] = field(default_factory=list)
    ws: list[np.ndarray] = field(default_factory=list)
    dys: list[np.ndarray] = field(default_factory=list)  # multiplier step as applied
    ergodic_x: list[np.ndarray] = field(default_factory=list)
    ergodic_feas_dual: list[float] = field(default_factory=list)

    def append(self, **kw):
        for name, value in kw.items():
            getattr(self, name).append(value)

    def last_row(self) -> dict:
        i = len(self.outer_iter) - 1
        return {
            "outer_iter": self.outer_iter[i],
            "cum_inner": self.cum_inner[i],
            "f_val": self.f_val[i],
            "abs_subopt": self.abs_subopt[i],
            "feas2": self.feas2[i],
            "feas_dual": self.feas_dual[i],
            "pd_gap": self.pd_gap[i],
            "implicit_penalty_min": self.pen_min[i],
            "implicit_penalty_max": self.pen_max[i],
            "elapsed_s": self.elapsed_s[i],
        }


class _OuterLoop:
    """Shared record/terminate plumbing of the power and classical loops."""

    def __init__(self, problem, cfg: OuterConfig, label: str, on_record=None, lambda0=None):
        self.problem = problem
        self.cfg = cfg
        self.on_record = on_record
        m, n = problem.A.shape
        y = np.zeros(m) if cfg.y0 is None else dual_set_project(np.asarray(cfg.y0, float), problem.kind)
        x0 = np.zeros(n) if cfg.x0 is None else np.asarray(cfg.x0, dtype=float)
        self.state = AlmState(y=y, x=problem.project_box(x0), lambda_current=lambda0)
        self.log = RunLog(label=label, f_star=problem.f_star)
        self.erg_sum = np.zeros(n)
        self.t0 = time.perf_counter()

    @property
    def y(self):
        return self.state.y

    @y.setter
    def y(self, value):
        self.state.y = value

    @property
    def x(self):
        return self.state.x

    @x.setter
    def x(self, value):
        self.state.x = value

    @property
    def cum_inner(self):
        return self.state.cum_inner

    @cum_inner.setter
    def cum_inner(self, value):
        self.state.cum_inner = value

    def record(self, k, x, y_next, w, s, params):
        problem = self.problem
        if problem.kind is ConstraintKind.EQUALITY:
            # the step as the update computes it; y_next - w re-rounds it
            dy = params.lam * phi_conj_grad(s, params)
        else:
            dy = y_next - w
        v = feasibility_vector(s, w, params, problem.kind)
        r2 = float(np.linalg.norm(v))
        rdual = float(dual_norm(v, params))
        pen = implicit_penalty_of_step(dy, params)
        if np.ndim(pen) == 0:
            pen_min = pen_max = float(pen)
        else:
            pen_min, pen_max = float(np.min(pen)), float(np.max(pen))
        K = k + 1
        a_K = coefficient(K, params.p) - coefficient(k, params.p)
        self.erg_sum += a_K * x
        x_erg = self.erg_sum / coefficient(K, params.p)
        if problem.kind is ConstraintKind.UNIT_BOX_DUAL:
            erg_feas = np.nan
        else:
            ev = feasibility_vector(problem.residual(x_erg), w, params, problem.kind)
            erg_feas = float(dual_norm(ev, params))
        f_val = float(problem.primal_cost(x))
        subopt = abs(f_val - problem.f_star) if problem.f_star is not None else np.nan
        gap = primal_dual_gap(x, y_next, problem)
        self.log.append(
            outer_iter=K,
            cum_inner=self.cum_inner,
            f_val=f_val,
            abs_subopt=subopt,
            feas2=r2,
            feas_dual=rdual,
            pd_gap=gap,
            pen_min=pen_min,
            pen_max=pen_max,
            elapsed_s=time.perf_counter() - self.t0,
            xs=x.copy(),
            ys=y_next.copy(),
            ws=w.copy(),
            dys=dy,
            ergodic_x=x_erg.copy(),
            ergodic_feas_dual=erg_feas,
        )
        if self.on_record is not None:
            self.on_record(self.log.last_row())
        return f_val, subopt, r2

    def converged(self, f_val, subopt, r2, y_next, w):
        if self.problem.f_star is not None:
            return subopt <= self.cfg.tol_f and r2 <= self.cfg.tol_r
        # no reference optimum: feasibility plus a small dual step
        dy = float(np.linalg.norm(np.asarray(y_next) - np.asarray(w)))
        return r2 <= self.cfg.tol_r and dy <= self.cfg.tol_r


def run_power_alm(
    problem,
    params: PowerParams,
    cfg: OuterConfig | None = None,
    inner: AlmInnerHandle | None = None,
    on_record=None,
) -> RunLog:
    """Inexact power augmented Lagrangian loop.

    Each outer iteration anchors the multiplier, warm-starts the inner solver
    on ``L_lam(., w_k)`` at the stopping rule's threshold, and applies the
    closed-form dual step.  Records are appended (and flushed through
    ``on_record``) every iteration, so interrupted runs stay inspectable.
    Terminates when suboptimality and feasibility reach their tolerances, on
    the outer budget, or as soon as an inner solve exhausts its own budget.
    """
    cfg = cfg or OuterConfig()
    inner = inner or AlmInnerHandle()
    loop = _OuterLoop(problem, cfg, label="power", on_record=on_record)
    y0_arr = loop.y.copy()
    status = "outer_budget"
    for k in range(cfg.max_outer):
        th = theta(k, params.p, cfg.theta)
        w = anchor(loop.y, y0_arr, th)
        rep = solve_inner(problem, w, params, cfg.stopping, loop.x, k, inner)
        loop.x = rep.x
        loop.cum_inner += rep.iterations
        s = problem.residual(loop.x)
        y_next = multiplier_argmax(s, w, params, problem.kind)
        f_val, subopt, r2 = loop.record(k, loop.x, y_next, w, s, params)
        loop.y = y_next
        if rep.status == "budget":
            status = "inner_budget"
            break
        if rep.status == "stalled":
            status = "inner_stalled"
            break
        if rep.status == "numerical_failure":
            status = "inner_failure"
            break
        if loop.converged(f_val, subopt, r2, y_next, w):
            status = "converged"
            break
    loop.log.status = status
    return loop.log


def run_classical_alm(
    problem,
    lam0: float,
    cfg: OuterConfig | None = None,
    inner: AlmInnerHandle | None = None,
    adaptive: bool = False,
    delta: float = 0.1,
    on_record=None,
) -> RunLog:
    """Classical ALM baseline with a fixed or doubling penalty.

    The quadratic-penalty subproblem is the p = 1 instance of the power
    augmented Lagrangian, so the inner solves share that oracle; the dual
    step is the textbook clipped update ``y_{k+1} = clip(y_k + lam_k s)``.
    With ``adaptive=True`` the penalty doubles whenever the residual has not
    decreased by the factor ``delta``.
    """
    cfg = cfg or OuterConfig()
    inner = inner or AlmInnerHandle()
    label = "classical_adaptive" if adaptive else "classical"
    loop = _OuterLoop(problem, cfg, label=label, on_record=on_record)
    lam_k = float(lam0)
    r_prev = _classical_residual(problem, loop.x, loop.y, lam_k)
    status = "outer_budget"
    for k in range(cfg.max_outer):
        params_k = PowerParams(p=1.0, lam=lam_k)
        w = loop.y
        rep = solve_inner(problem, w, params_k, cfg.stopping, loop.x, k, inner)
        loop.x = rep.x
        loop.cum_inner += rep.iterations
        s = problem.residual(loop.x)
        y_next = _classical_dual_step(s, w, lam_k, problem.kind)
        f_val, subopt, r2 = loop.record(k, loop.x, y_next, w, s, params_k)
        loop.y = y_next
        if adaptive:
            lam_k = baseline_adaptive_penalty(lam_k, r2, r_prev, delta, tol_r=cfg.tol_r)
        r_prev = r2
        if rep.status == "budget":
            status = "inner_budget"
            break
        if rep.status == "stalled":
            status = "inner_stalled"
            break
        if rep.status == "numerical_failure":
            status = "inner_failure"
            break
        if loop.converged(f_val, subopt, r2, y_next, w):
            status = "converged"
            break
    loop.log.status = status
    return loop.log


def _classical_dual_step(s, y, lam, kind):
    z = y + lam * s
    if kind is ConstraintKind.EQUALITY:
        return z
    if kind is ConstraintKind.NONNEGATIVE_DUAL:
        return np.maximum(0.0, z)
    return np.clip(z, -1.0, 1.0)


def _classical_residual(problem, x, y, lam):
    s = problem.residual(x)
    v = feasibility_vector(s, y, PowerParams(p=1.0, lam=lam), problem.kind)
    return float(np.linalg.norm(v))

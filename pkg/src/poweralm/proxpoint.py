"""Generic inexact power proximal point method and its diagnostics.

The loop minimizes a convex objective psi through repeated inexact proximal
steps with the power penalty ``lam * phi``.  Each iteration anchors at
``w_k = theta_k y_k + (1 - theta_k) y_0``, solves the prox subproblem to a
tolerance, and moves to ``y_{k+1} = w_k - lam grad phi*(v_k)`` where ``v_k``
is the certificate gradient of the penalty at the approximate prox.

Two anchor schedules are supported (plain and averaging with weights
``A_k = k^(p+1)``), and two error schedules: an absolute summable one,
``eps_k = c/(k+1)^(p+1)``, and a relative one that additionally shrinks the
allowed prox distance with the step length, which sharpens the local order
of convergence.  The relative mode needs a prox reference, either the
oracle's ``exact_prox`` or a deep inner solve.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .inner import FunOracle, InnerReport, lbfgs_minimize
from .oracles import ConvexOracle
from .powers import (
    PowerParams,
    epi_scaled_value,
    phi_conj_grad,
    phi_grad,
    primal_norm,
)


class ThetaMode(Enum):
    PLAIN = "plain"
    AVERAGING = "averaging"


@dataclass(frozen=True)
class ThetaSchedule:
    mode: ThetaMode = ThetaMode.PLAIN


class EpsMode(Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


@dataclass(frozen=True)
class EpsSchedule:
    """Error schedule; `t` is the step-length exponent of the relative mode."""

    mode: EpsMode = EpsMode.ABSOLUTE
    c: float = 0.0
    t: float = 1.0

    def __post_init__(self):
        if self.c < 0.0:
            raise ValueError("error constant c must be nonnegative")
        if self.mode is EpsMode.RELATIVE and not self.t > 0.0:
            raise ValueError("relative mode needs a positive exponent t")


def coefficient(k: int, p: float) -> float:
    """Averaging coefficient A_k = k^(p+1), with A_0 = 0."""
    return float(k) ** (p + 1.0)


def theta(k: int, p: float, sched: ThetaSchedule) -> float:
    """Anchor weight theta_k; A_k / A_{k+1} when averaging, else 1."""
    if k < 0:
        raise ValueError("iteration index must be nonnegative")
    if sched.mode is ThetaMode.PLAIN:
        return 1.0
    return coefficient(k, p) / coefficient(k + 1, p)


def anchor(yk: np.ndarray, y0: np.ndarray, theta_k: float) -> np.ndarray:
    """Convex combination theta_k * y_k + (1 - theta_k) * y_0."""
    return theta_k * np.asarray(yk, float) + (1.0 - theta_k) * np.asarray(y0, float)


def eps(k: int, p: float, sched: EpsSchedule) -> float:
    """Base error eps_k = c/(k+1)^(p+1).

    In relative mode the caller multiplies by min(1, ||y_{k+1} - y_k||^t)
    once the step is known.
    """
    if k < 0:
        raise ValueError("iteration index must be nonnegative")
    return sched.c / float(k + 1) ** (p + 1.0)


@dataclass(frozen=True)
class InnerSolverHandle:
    """Engine configuration for prox subproblems (L-BFGS on the smooth model)."""

    max_iter: int = 1000
    memory: int = 20

    def minimize(self, oracle, x0: np.ndarray, tol: float) -> InnerReport:
        return lbfgs_minimize(oracle, x0, tol_grad=tol, max_iter=self.max_iter, memory=self.memory)


@dataclass(frozen=True)
class StepCertificate:
    """What an inexact prox step can vouch for."""

    v: np.ndarray  # gradient of the penalty at the returned point
    inner_tol: float  # tolerance requested from the inner solver
    achieved: float  # stationarity actually reached (0 for exact prox)
    inner_iterations: int
    status: str


@dataclass
class TraceRecord:
    k: int
    w: np.ndarray
    y_next: np.ndarray
    v: np.ndarray
    eps_k: float
    psi_value: float | None
    prox_distance: float | None  # lam*phi distance to the reference prox, when known
    inner_iterations: int


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)
    status: str = "running"

    def __len__(self):
        return len(self.records)

    @property
    def iterates(self) -> list[np.ndarray]:
        return [r.y_next for r in self.records]


def _prox_subproblem(oracle: ConvexOracle, w: np.ndarray, params: PowerParams):
    lamp = params.lam ** (-params.p)

    def val(eta):
        return oracle.value(eta) + epi_scaled_value(w - eta, params)

    def grad(eta):
        return oracle.subgradient(eta) - lamp * phi_grad(w - eta, params)

    return FunOracle(val, grad)


def ppm_step(
    w: np.ndarray,
    oracle: ConvexOracle,
    params: PowerParams,
    inner: InnerSolverHandle | None = None,
    tol: float = 0.0,
):
    """One inexact power proximal step from anchor w.

    Solves ``argmin_eta psi(eta) + lam*phi(w - eta)``.  With ``tol == 0`` and
    an oracle that knows its exact prox, the closed form is used; otherwise
    the smooth subproblem is handed to the inner solver at the requested
    stationarity tolerance.  Returns the new point together with a
    certificate carrying ``v = grad phi(lam^{-1}(w - y_next))`` and the
    accuracy actually achieved.
    """
    w = np.asarray(w, dtype=float)
    if tol < 0.0:
        raise ValueError("tolerance must be nonnegative")
    if tol == 0.0 and oracle.exact_prox is not None:
        y_next = oracle.exact_prox(w, params)
        v = phi_grad((w - y_next) / params.lam, params)
        return y_next, StepCertificate(v, 0.0, 0.0, 0, "exact")
    if inner is None:
        inner = InnerSolverHandle()
    report = inner.minimize(_prox_subproblem(oracle, w, params), w.copy(), tol)
    y_next = report.x
    v = phi_grad((w - y_next) / params.lam, params)
    return y_next, StepCertificate(
        v, tol, report.stationarity, report.iterations, report.status
    )


def run_ppm(
    y0: np.ndarray,
    oracle: ConvexOracle,
    params: PowerParams,
    theta_sched: ThetaSchedule = ThetaSchedule(),
    eps_sched: EpsSchedule = EpsSchedule(),
    max_iter: int = 100,
    inner: InnerSolverHandle | None = None,
    record_values: bool = True,
) -> Trace:
    """Run the inexact power proximal point loop.

    With ``c == 0`` and an exact prox the updates are exact; otherwise each
    step maps the base error to an inner stationarity tolerance, and in
    relative mode the prox-distance criterion
    ``lam*phi(y_{k+1} - prox(w_k)) <= eps_k min(1, ||y_{k+1} - y_k||^t)``
    is enforced against a prox reference by tightening the inner solve.

    Objective values are recorded when psi is finite at the iterate, so
    extended-valued objectives degrade gracefully to envelope diagnostics.
    """
    if max_iter < 1:
        raise ValueError("iteration budget must be at least 1")
    y0 = np.asarray(y0, dtype=float)
    y = y0.copy()
    trace = Trace()
    exact_mode = eps_sched.c == 0.0 and oracle.exact_prox is not None
    for k in range(max_iter):
        th = theta(k, params.p, theta_sched)
        w = anchor(y, y0, th)
        eps_k = eps(k, params.p, eps_sched)
        prox_dist = None
        if exact_mode:
            y_next, cert = ppm_step(w, oracle, params, tol=0.0)
            prox_dist = 0.0
        elif eps_sched.mode is EpsMode.RELATIVE:
            y_next, cert, prox_dist = _relative_step(w, y, oracle, params, inner, eps_k, eps_sched.t)
        else:
            y_next, cert = ppm_step(w, oracle, params, inner=inner, tol=max(eps_k, 1e-12))
            if cert.status == "budget":
                trace.status = "inner_budget"
                trace.records.append(
                    TraceRecord(k, w, y_next, cert.v, eps_k, None, prox_dist, cert.inner_iterations)
                )
                return trace
        psi_val = None
        if record_values:
            val = oracle.value(y_next)
            psi_val = float(val) if np.isfinite(val) else None
        trace.records.append(
            TraceRecord(k, w, y_next, cert.v, eps_k, psi_val, prox_dist, cert.inner_iterations)
        )
        y = y_next
    trace.status = "completed"
    return trace


def _relative_step(w, y_prev, oracle, params, inner, eps_k, t_exp):
    """Inexact step meeting the relative prox-distance criterion."""
    if oracle.exact_prox is not None:
        prox_ref = oracle.exact_prox(w, params)
    else:
        prox_ref, _ = ppm_step(w, oracle, params, inner=inner, tol=1e-12)
    tol = max(eps_k, 1e-10)
    for _ in range(60):
        y_next, cert = ppm_step(w, oracle, params, inner=inner, tol=tol)
        dist = float(epi_scaled_value(y_next - prox_ref, params))
        step_len = primal_norm(y_next - y_prev, params)
        budget = eps_k * min(1.0, step_len ** t_exp)
        if dist <= budget:
            return y_next, cert, dist
        tol *= 0.1
        if tol < 1e-15:
            break
    # inner solver cannot resolve further; fall back to the reference itself
    v = phi_grad((w - prox_ref) / params.lam, params)
    return prox_ref, StepCertificate(v, 0.0, 0.0, 0, "reference"), 0.0


def aniso_envelope(
    y: np.ndarray,
    oracle: ConvexOracle,
    params: PowerParams,
    inner: InnerSolverHandle | None = None,
    tol: float = 0.0,
):
    """Anisotropic Moreau envelope of psi at y: value, prox point, gradient.

    The gradient is ``grad phi(lam^{-1}(y - prox))`` and satisfies
    ``y - lam grad phi*(grad) == prox`` up to roundoff, which is the
    gradient-descent reading of the proximal step.
    """
    y = np.asarray(y, dtype=float)
    prox, _ = ppm_step(y, oracle, params, inner=inner, tol=tol)
    env_value = float(oracle.value(prox)) + float(epi_scaled_value(y - prox, params))
    env_grad = phi_grad((y - prox) / params.lam, params)
    return env_value, prox, env_grad


def envelope_step_point(y: np.ndarray, env_grad: np.ndarray, params: PowerParams) -> np.ndarray:
    """Recover the prox point from the envelope gradient."""
    return np.asarray(y, float) - params.lam * phi_conj_grad(env_grad, params)


def eps_prox_check(
    y_next: np.ndarray,
    prox_true: np.ndarray,
    params: PowerParams,
    eps_k: float,
) -> bool:
    """Whether y_next is an eps_k-proximal point relative to the true prox."""
    return float(epi_scaled_value(np.asarray(y_next) - np.asarray(prox_true), params)) <= eps_k


def local_order_estimate(
    trace: Trace,
    y_star,
    params: PowerParams,
    window: int = 6,
    floor: float = 1e-12,
):
    """Fit the local order of convergence from the tail of a trace.

    Distances to the solution set are measured in the configured norm;
    ``y_star`` is a point or an ``(n_points, m)`` array describing the set.
    The last `window` iterations with distance above `floor` enter a least
    squares fit of ``log d_{k+1} = omega log d_k + log alpha``.  Returns
    ``(omega_hat, alpha_hat)`` or None when fewer than 4 usable points
    remain.
    """
    ys = [np.asarray(y0, float) for y0 in trace.iterates]
    targets = np.atleast_2d(np.asarray(y_star, dtype=float))
    dists = np.array(
        [min(primal_norm(y - t, params) for t in targets) for y in ys]
    )
    keep = [i for i, d in enumerate(dists) if d > floor]
    keep = keep[-window:]
    if len(keep) < 4:
        return None
    # require a consecutive, strictly decreasing tail
    pairs = [
        (dists[i], dists[j])
        for i, j in zip(keep[:-1], keep[1:])
        if j == i + 1 and dists[j] < dists[i]
    ]
    if len(pairs) < 3:
        return None
    xs = np.log([a for a, _ in pairs])
    yv = np.log([b for _, b in pairs])
    coef = np.polyfit(xs, yv, 1)
    omega_hat = float(coef[0])
    alpha_hat = float(np.exp(coef[1]))
    return omega_hat, alpha_hat

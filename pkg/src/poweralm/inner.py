"""Minimization engines for the augmented-Lagrangian subproblems.

Two engines are provided.  ``lbfgs_minimize`` is a limited-memory BFGS with a
weak-Wolfe line search for smooth unconstrained subproblems.
``adaptive_apg_minimize`` is an accelerated proximal-gradient method with a
backtracked local quadratic model, so no global Lipschitz constant is needed
and Holder-smooth objectives (the rule rather than the exception once the
penalty power drops below two) are handled.  Both engines are single-threaded
per solve and keep no global state, so independent solves may run
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_CURVATURE_SKIP = 1e-10
_WOLFE_C1 = 1e-4
_WOLFE_C2 = 0.9


class SmoothOracle:
    """Differentiable objective; ``value_grad`` may be overridden to share work."""

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value_grad(self, x: np.ndarray):
        return self.value(x), self.gradient(x)


class FunOracle(SmoothOracle):
    """Wrap plain callables into a :class:`SmoothOracle`."""

    def __init__(self, value_fn, grad_fn, value_grad_fn=None):
        self._value = value_fn
        self._grad = grad_fn
        self._value_grad = value_grad_fn

    def value(self, x):
        return self._value(x)

    def gradient(self, x):
        return self._grad(x)

    def value_grad(self, x):
        if self._value_grad is not None:
            return self._value_grad(x)
        return self._value(x), self._grad(x)


@dataclass
class CompositeOracle:
    """Smooth part plus a simple part whose prox is a box projection.

    ``lower``/``upper`` of None means the identity prox (no constraint).
    """

    smooth: SmoothOracle
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def prox(self, x: np.ndarray) -> np.ndarray:
        if self.lower is None and self.upper is None:
            return x
        lo = -np.inf if self.lower is None else self.lower
        hi = np.inf if self.upper is None else self.upper
        return np.clip(x, lo, hi)


@dataclass
class InnerReport:
    """Outcome of one inner solve."""

    x: np.ndarray
    iterations: int
    stationarity: float
    status: str  # "converged" | "budget" | "stalled" | "numerical_failure"
    f_value: float
    stat_m: float | None = None  # model constant used in the APG residual
    history: list = field(default_factory=list)


def _weak_wolfe(oracle, x, f0, g0, d, max_ls=60):
    """Bracketing line search for the weak Wolfe conditions.

    Near the floating-point noise floor of f the sufficient-decrease test is
    meaningless, so steps whose objective change is below roundoff are also
    accepted on gradient information alone (approximate Wolfe): the
    directional derivative must have risen toward zero without crossing it
    by more than the mirrored Armijo slope.
    """
    gd0 = float(g0 @ d)
    eps_f = 1e-12 * (1.0 + abs(f0))
    lo, hi = 0.0, np.inf
    t = 1.0
    for _ in range(max_ls):
        xt = x + t * d
        ft, gt = oracle.value_grad(xt)
        gtd = float(gt @ d)
        if np.isfinite(ft):
            armijo = ft <= f0 + _WOLFE_C1 * t * gd0
            armijo_apx = ft <= f0 + eps_f and gtd <= (2.0 * _WOLFE_C1 - 1.0) * gd0
        else:
            armijo = armijo_apx = False
        if not (armijo or armijo_apx):
            hi = t
        elif gtd < _WOLFE_C2 * gd0:
            lo = t
        else:
            return t, xt, ft, gt, True
        t = 0.5 * (lo + hi) if np.isfinite(hi) else 2.0 * t
    return t, None, None, None, False


def _backtrack_armijo(oracle, x, f0, g0, d, max_ls=80):
    gd0 = float(g0 @ d)
    t = 1.0
    for _ in range(max_ls):
        xt = x + t * d
        ft, gt = oracle.value_grad(xt)
        if np.isfinite(ft) and ft <= f0 + _WOLFE_C1 * t * gd0:
            return t, xt, ft, gt, True
        t *= 0.5
    return t, None, None, None, False


def lbfgs_minimize(
    oracle: SmoothOracle,
    x0: np.ndarray,
    tol_grad: float,
    max_iter: int = 500,
    memory: int = 20,
) -> InnerReport:
    """Limited-memory BFGS with a weak-Wolfe line search.

    Parameters
    ----------
    oracle : SmoothOracle
        Objective with value and gradient calls.
    x0 : ndarray
        Starting point.
    tol_grad : float
        Success once the Euclidean gradient norm drops to this level.
    max_iter : int
        Cap on accepted iterations.
    memory : int
        Number of curvature pairs kept for the two-loop recursion.  Pairs
        with nearly orthogonal step/gradient-change are skipped.

    Returns
    -------
    InnerReport
        Final iterate, iteration count, gradient norm and status.  A failed
        line search falls back to a backtracked steepest-descent step before
        giving up.
    """
    if not tol_grad > 0.0:
        raise ValueError("tol_grad must be positive")
    x = np.array(x0, dtype=float, copy=True)
    f, g = oracle.value_grad(x)
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rho_hist: list[float] = []
    best = (float(np.linalg.norm(g)), x.copy(), f)
    best_f = f
    since_improve = 0
    history = [(f, float(np.linalg.norm(g)))]
    it = 0
    while it < max_iter:
        gnorm = float(np.linalg.norm(g))
        improved = False
        if gnorm < best[0] * (1.0 - 1e-3):
            best = (gnorm, x.copy(), f)
            improved = True
        if f < best_f - 1e-14 * (1.0 + abs(best_f)):
            best_f = f
            improved = True
        since_improve = 0 if improved else since_improve + 1
        if gnorm <= tol_grad:
            return InnerReport(x, it, gnorm, "converged", f, history=history)
        if since_improve > 100:
            # neither the objective nor the gradient norm moves beyond
            # roundoff anymore; report the best point seen
            return InnerReport(best[1], it, best[0], "stalled", best[2], history=history)
        d = _two_loop(g, s_hist, y_hist, rho_hist)
        if float(g @ d) >= 0.0:
            d = -g
        t, xn, fn, gn, ok = _weak_wolfe(oracle, x, f, g, d)
        if not ok:
            t, xn, fn, gn, ok = _backtrack_armijo(oracle, x, f, g, -g)
            if not ok:
                return InnerReport(best[1], it, best[0], "stalled", best[2], history=history)
        s = xn - x
        yv = gn - g
        sy = float(s @ yv)
        if sy > _CURVATURE_SKIP * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)):
            s_hist.append(s)
            y_hist.append(yv)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)
        x, f, g = xn, fn, gn
        history.append((f, float(np.linalg.norm(g))))
        it += 1
    gnorm = float(np.linalg.norm(g))
    if gnorm > best[0]:
        x, gnorm, f = best[1], best[0], best[2]
    return InnerReport(x, it, gnorm, "budget", f, history=history)


def _two_loop(g, s_hist, y_hist, rho_hist):
    d = -g
    if not s_hist:
        return d
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * float(s @ d)
        alphas.append(a)
        d = d - a * y
    y_last = y_hist[-1]
    gamma = float(s_hist[-1] @ y_last) / float(y_last @ y_last)
    d = gamma * d
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * float(y @ d)
        d = d + (a - b) * s
    return d


def adaptive_apg_minimize(
    oracle: CompositeOracle,
    x0: np.ndarray,
    tol: float | None = None,
    callback=None,
    max_iter: int = 2000,
    m0: float = 1.0,
) -> InnerReport:
    """Accelerated proximal gradient with a backtracked quadratic model.

    The model constant M is doubled whenever the local descent inequality

        f(x+) <= f(y) + <grad f(y), x+ - y> + (M/2) ||x+ - y||^2

    fails at the extrapolated point y, and halved once per accepted step, so
    the method tracks the local curvature and needs no Lipschitz constant.
    Momentum restarts (on objective increase or when the extrapolation
    opposes the step) keep the scheme stable on the Holder-smooth
    penalties produced by powers below two.

    Stops when the scaled fixed-point residual
    ``M * ||x - prox(x - grad f(x)/M)||_2`` falls to `tol`, or when `callback`
    (called as ``callback(x, f, residual)``) returns True.

    Returns an :class:`InnerReport` whose ``stat_m`` records the model
    constant used in the reported residual, so the measurement can be
    reproduced exactly from the report.
    """
    if tol is None and callback is None:
        raise ValueError("need a residual tolerance or a stopping callback")
    smooth = oracle.smooth
    x = oracle.prox(np.array(x0, dtype=float, copy=True))
    xp = x.copy()
    f_x = smooth.value(x)
    M = float(m0)
    t_mom = 1.0
    history = []
    it = 0
    while it < max_iter:
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
        beta = (t_mom - 1.0) / t_next
        y = x + beta * (x - xp)
        fy, gy = smooth.value_grad(y)
        if not np.isfinite(fy):
            # extrapolation left the domain of a finite model; restart plain
            y = x
            fy, gy = smooth.value_grad(y)
            t_next = 1.0
        m_start = M
        clean_accept = True
        while True:
            x_new = oracle.prox(y - gy / M)
            step = x_new - y
            f_new = smooth.value(x_new)
            quad = 0.5 * M * float(step @ step)
            model = fy + float(gy @ step) + quad
            # cancellation noise of the comparison; beyond it the objective
            # carries no information and M must not be adapted on it
            noise = 32.0 * np.finfo(float).eps * (abs(fy) + abs(f_new) + quad)
            gap = f_new - model
            if gap <= noise:
                clean_accept = gap < -noise
                break
            M *= 2.0
            if M > m_start * 2.0**60 or M > 1e300:
                g_cur = smooth.gradient(x)
                resid = float(np.linalg.norm(x - oracle.prox(x - g_cur / m_start))) * m_start
                return InnerReport(x, it, resid, "stalled", f_x, stat_m=m_start, history=history)
        it += 1
        g_new = smooth.gradient(x_new)
        resid = M * float(np.linalg.norm(x_new - oracle.prox(x_new - g_new / M)))
        history.append((M, f_new, resid))
        stop = False
        if tol is not None and resid <= tol:
            stop = True
        if callback is not None and callback(x_new, f_new, resid):
            stop = True
        # adaptive restart: kill the momentum when it points against the step
        if float((y - x_new) @ (x_new - x)) > 0.0 or f_new > f_x:
            t_next = 1.0
        xp, x, f_x = x, x_new, f_new
        t_mom = t_next
        if stop:
            return InnerReport(x, it, resid, "converged", f_x, stat_m=M, history=history)
        if clean_accept:
            # in the noise regime M is frozen instead: the comparison can no
            # longer certify smaller constants and shrinking one would stall
            M = max(0.5 * M, 1e-12)
    g_fin = smooth.gradient(x)
    resid = M * float(np.linalg.norm(x - oracle.prox(x - g_fin / M)))
    return InnerReport(x, it, resid, "budget", f_x, stat_m=M, history=history)


def prox_gradient_residual(oracle: CompositeOracle, x: np.ndarray, M: float) -> float:
    """Recompute the scaled fixed-point residual reported by the APG engine."""
    g = oracle.smooth.gradient(x)
    return M * float(np.linalg.norm(x - oracle.prox(x - g / M)))

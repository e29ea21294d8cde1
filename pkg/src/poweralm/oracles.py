"""Closed-form convex objectives for exercising the proximal point loop.

Each oracle exposes ``value`` and ``subgradient``; the ones with a known
proximal map additionally expose ``exact_prox(w, params)``, which solves

    argmin_eta  psi(eta) + lam^(-p)/(p+1) ||w - eta||^(p+1)

in the configured norm.  For the quadratic-distance objective the prox
reduces to a monotone scalar equation (radially for the Euclidean norm,
coordinatewise for the separable one) that is solved by bisection.
"""

from __future__ import annotations

import numpy as np

from .powers import NormFamily, PowerParams


class ConvexOracle:
    """Convex, proper, lsc objective given by value and subgradient calls."""

    def value(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def subgradient(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    exact_prox = None


def _solve_move_fraction(r, mu: float, params: PowerParams):
    """Root gamma in [0, 1] of mu*gamma = lam^(-p) r^(p-1) (1-gamma)^p.

    This is the stationarity condition of the power prox of (mu/2) d^2 along
    a ray of length r; the left side is increasing and the right decreasing,
    so bisection converges unconditionally.  Vectorized over r.
    """
    r = np.asarray(r, dtype=float)
    coeff = params.lam ** (-params.p) * r ** (params.p - 1.0)
    lo = np.zeros_like(r)
    hi = np.ones_like(r)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        pos = mu * mid - coeff * (1.0 - mid) ** params.p > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    gamma = 0.5 * (lo + hi)
    return np.where(r > 0.0, gamma, 0.0)


class QuadraticDistance(ConvexOracle):
    """psi(y) = (mu/2) ||y - center||_2^2, the canonical growth-2 objective."""

    def __init__(self, center, mu: float = 1.0):
        self.center = np.asarray(center, dtype=float)
        self.mu = float(mu)

    def value(self, y):
        d = np.asarray(y, dtype=float) - self.center
        return 0.5 * self.mu * float(d @ d)

    def subgradient(self, y):
        return self.mu * (np.asarray(y, dtype=float) - self.center)

    def exact_prox(self, w, params: PowerParams):
        w = np.asarray(w, dtype=float)
        d = w - self.center
        if params.norm is NormFamily.EUCLIDEAN:
            r = float(np.sqrt(d @ d))
            gamma = float(_solve_move_fraction(r, self.mu, params))
            return self.center + gamma * d
        # separable: psi and the penalty both split over coordinates
        gamma = _solve_move_fraction(np.abs(d), self.mu, params)
        return self.center + gamma * d


class Zero(ConvexOracle):
    """psi identically zero; the prox is the identity."""

    def value(self, y):
        return 0.0

    def subgradient(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def exact_prox(self, w, params: PowerParams):
        return np.array(w, dtype=float, copy=True)


class IndicatorAtPoint(ConvexOracle):
    """Indicator of a single point; extended-valued with a trivial prox."""

    def __init__(self, point):
        self.point = np.asarray(point, dtype=float)

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return 0.0 if np.array_equal(y, self.point) else np.inf

    def subgradient(self, y):
        raise ValueError("indicator objective has no finite subgradient oracle")

    def exact_prox(self, w, params: PowerParams):
        return self.point.copy()

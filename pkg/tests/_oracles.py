"""Brute-force oracles used by the ALM tests.

These deliberately avoid the library's solvers: the multiplier maximizer is
checked against a plain projected gradient ascent with backtracking, written
from the definition of the objective.
"""

import numpy as np

from poweralm.alm import dual_set_project
from poweralm.powers import epi_scaled_value, phi_grad


def dual_objective(s, y, params, eta):
    """h(eta) = <s, eta> - lam*phi(y - eta), batched over rows of eta."""
    eta = np.atleast_2d(eta)
    lin = eta @ s
    pen = epi_scaled_value(y[None, :] - eta, params)
    return lin - pen


def projected_gradient_max(s, y, params, kind, tol=1e-10, max_iter=50000):
    """Maximize h over the dual set by projected gradient ascent.

    Backtracking halves the step until ascent holds; the fixed-point
    residual ||eta - P(eta + t g)|| / t certifies stationarity.
    """
    s = np.asarray(s, dtype=float)
    y = np.asarray(y, dtype=float)
    lamp = params.lam ** (-params.p)

    def value(eta):
        return float(eta @ s - epi_scaled_value(y - eta, params))

    def grad(eta):
        return s + lamp * phi_grad(y - eta, params)

    eta = dual_set_project(y.copy(), kind)
    t = 1.0
    f = value(eta)
    for _ in range(max_iter):
        g = grad(eta)
        while True:
            cand = dual_set_project(eta + t * g, kind)
            fc = value(cand)
            if fc >= f + 1e-4 * float(g @ (cand - eta)) - 1e-18:
                break
            t *= 0.5
            if t < 1e-18:
                break
        resid = float(np.linalg.norm(eta - cand)) / max(t, 1e-18)
        eta, f = cand, fc
        if resid <= tol:
            break
        t = min(t * 2.0, 1e6)
    return eta


def grid_refine_max(s, y, params, kind, span=6.0, rounds=12, pts=41):
    """Coordinate grid search with shrinking windows (2-D problems only)."""
    assert len(s) == 2
    center = dual_set_project(y.copy(), kind)
    width = span
    best = None
    for _ in range(rounds):
        g0 = np.linspace(center[0] - width, center[0] + width, pts)
        g1 = np.linspace(center[1] - width, center[1] + width, pts)
        mesh = np.stack(np.meshgrid(g0, g1), axis=-1).reshape(-1, 2)
        mesh = dual_set_project(mesh, kind)
        vals = dual_objective(s, y, params, mesh)
        best = mesh[int(np.argmax(vals))]
        center = best
        width /= pts / 4.0
    return best

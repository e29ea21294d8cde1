"""Power prox-functions, their conjugates, and the uniform-convexity toolkit.

The central object is the prox-function ``phi(x) = ||x||^(p+1) / (p+1)`` for a
power ``p >= 1``, where the norm is either the Euclidean norm (for every p) or
the (p+1)-norm, in which case phi is a separable sum of scalar powers.  Its
convex conjugate is ``phi*(v) = ||v||_*^(q+1) / (q+1)`` with ``q = 1/p`` and
the dual norm, and the gradient maps are mutually inverse.

All functions broadcast over leading axes: an input of shape ``(..., m)`` is
treated as a batch of m-vectors and reductions happen along the last axis.
Everything here is a pure function of immutable inputs and safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Magnitudes below this are treated as exact zeros inside fractional powers,
# so radial scalings like ||x||^(q-1) never produce inf * 0 at the origin.
_TINY = 1e-300


class NormFamily(Enum):
    EUCLIDEAN = "euclidean"
    SEPARABLE_POWER = "separable_power"


def conjugate_exponent(p: float) -> float:
    """Dual exponent q = 1/p, so that 1/(p+1) + 1/(q+1) = 1."""
    if p < 1.0:
        raise ValueError(f"power p must satisfy p >= 1, got {p}")
    return 1.0 / p


@dataclass(frozen=True)
class PowerParams:
    """Power p, step/penalty lambda, and norm family for one phi instance.

    q is derived from p at construction.  Passing q explicitly is allowed but
    it must be consistent with 1/p, which guards against drift between the
    primal and dual exponents in downstream formulas.
    """

    p: float
    lam: float
    norm: NormFamily = NormFamily.EUCLIDEAN
    q: float | None = None

    def __post_init__(self):
        if self.p < 1.0:
            raise ValueError(f"power p must satisfy p >= 1, got {self.p}")
        if not self.lam > 0.0:
            raise ValueError(f"step lambda must be positive, got {self.lam}")
        q = conjugate_exponent(self.p)
        if self.q is not None and abs(self.q - q) > 1e-12 * (1.0 + abs(q)):
            raise ValueError(f"inconsistent exponents: p={self.p} requires q={q}, got {self.q}")
        object.__setattr__(self, "q", q)

    @classmethod
    def from_q(cls, q: float, lam: float, norm: NormFamily = NormFamily.EUCLIDEAN) -> "PowerParams":
        """Build from the dual exponent, the parameterization used in experiments."""
        if not 0.0 < q <= 1.0:
            raise ValueError(f"dual exponent q must lie in (0, 1], got {q}")
        return cls(p=1.0 / q, lam=lam, norm=norm)


def _pow_factor(r, alpha: float):
    """r ** alpha with the convention 0 ** alpha = 0, for radial scalings."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape)
    np.power(r, alpha, out=out, where=(r > _TINY))
    return out if out.ndim else float(out)


def _norm2(x: np.ndarray):
    # max-abs scaling keeps the square sum in range without changing the result
    a = np.max(np.abs(x), axis=-1)
    safe = np.where(a > 0.0, a, 1.0)
    z = x / safe[..., None]
    r = a * np.sqrt(np.sum(z * z, axis=-1))
    return r if r.ndim else float(r)


def primal_norm(x, params: PowerParams):
    """Configured primal norm: 2-norm, or the (p+1)-norm in the separable family."""
    x = np.asarray(x, dtype=float)
    if params.norm is NormFamily.EUCLIDEAN:
        return _norm2(x)
    s = np.sum(np.abs(x) ** (params.p + 1.0), axis=-1)
    r = s ** (1.0 / (params.p + 1.0))
    return r if np.ndim(r) else float(r)


def dual_norm(v, params: PowerParams):
    """Norm dual to :func:`primal_norm`: 2-norm, or the (q+1)-norm."""
    v = np.asarray(v, dtype=float)
    if params.norm is NormFamily.EUCLIDEAN:
        return _norm2(v)
    s = np.sum(np.abs(v) ** (params.q + 1.0), axis=-1)
    r = s ** (1.0 / (params.q + 1.0))
    return r if np.ndim(r) else float(r)


def phi_value(x, params: PowerParams):
    """phi(x) = ||x||^(p+1) / (p+1) in the configured primal norm."""
    x = np.asarray(x, dtype=float)
    p = params.p
    if params.norm is NormFamily.EUCLIDEAN:
        r = _norm2(x) ** (p + 1.0) / (p + 1.0)
    else:
        r = np.sum(np.abs(x) ** (p + 1.0), axis=-1) / (p + 1.0)
    return r if np.ndim(r) else float(r)


def phi_grad(x, params: PowerParams) -> np.ndarray:
    """Gradient of phi; its dual norm equals ||x||^p."""
    x = np.asarray(x, dtype=float)
    p = params.p
    if params.norm is NormFamily.EUCLIDEAN:
        scale = np.asarray(_pow_factor(_norm2(x), p - 1.0))
        return scale[..., None] * x
    return np.sign(x) * np.abs(x) ** p


def phi_conj_value(v, params: PowerParams):
    """phi*(v) = ||v||_*^(q+1) / (q+1) in the dual norm."""
    v = np.asarray(v, dtype=float)
    q = params.q
    if params.norm is NormFamily.EUCLIDEAN:
        r = _norm2(v) ** (q + 1.0) / (q + 1.0)
    else:
        r = np.sum(np.abs(v) ** (q + 1.0), axis=-1) / (q + 1.0)
    return r if np.ndim(r) else float(r)


def phi_conj_grad(v, params: PowerParams) -> np.ndarray:
    """Gradient of phi*, the inverse map of :func:`phi_grad`."""
    v = np.asarray(v, dtype=float)
    q = params.q
    if params.norm is NormFamily.EUCLIDEAN:
        scale = np.asarray(_pow_factor(_norm2(v), q - 1.0))
        return scale[..., None] * v
    return np.sign(v) * np.abs(v) ** q


def epi_scaled_value(x, params: PowerParams):
    """Epi-scaling (lam * phi)(x) = lam^(-p) phi(x), the proximal penalty term."""
    return params.lam ** (-params.p) * phi_value(x, params)


def epi_scaled_grad(x, params: PowerParams) -> np.ndarray:
    """Gradient of x -> (lam * phi)(x), equal to grad phi(x / lam) by homogeneity."""
    return params.lam ** (-params.p) * phi_grad(x, params)


def uniform_convexity_slack(x, y, params: PowerParams):
    """Slack of the uniform-convexity inequality of phi.

    Returns ``phi(x) - phi(y) - <grad phi(y), x - y> - 2^(1-p) phi(x - y)``,
    which is nonnegative for every pair up to roundoff.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inner = np.sum(phi_grad(y, params) * (x - y), axis=-1)
    r = (
        phi_value(x, params)
        - phi_value(y, params)
        - inner
        - 2.0 ** (1.0 - params.p) * phi_value(x - y, params)
    )
    return r if np.ndim(r) else float(r)

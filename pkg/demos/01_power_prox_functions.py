"""Tour of the power prox-function toolkit.

The building block behind everything else is phi(x) = ||x||^(p+1) / (p+1)
with either the Euclidean norm or the separable (p+1)-norm, its conjugate
phi*(v) = ||v||_*^(q+1) / (q+1) with q = 1/p, and the mutually inverse
gradient maps.  This script demonstrates the identities numerically.
"""

import numpy as np

from poweralm import (
    NormFamily,
    PowerParams,
    dual_norm,
    epi_scaled_value,
    phi_conj_grad,
    phi_conj_value,
    phi_grad,
    phi_value,
    primal_norm,
    uniform_convexity_slack,
)

rng = np.random.default_rng(7)

print("=== exponent pairing ===")
for q in (0.7, 0.8, 0.9, 1.0):
    p = 1.0 / q
    print(f"q = {q:.2f}  ->  p = {p:.6f},  1/(p+1) + 1/(q+1) = {1/(p+1) + 1/(q+1):.16f}")

print("\n=== values and gradients at hand-checkable points ===")
pe1 = PowerParams(p=1.0, lam=1.0)
ps2 = PowerParams(p=2.0, lam=1.0, norm=NormFamily.SEPARABLE_POWER)
print("phi((3,4)), Euclidean, p=1      :", phi_value([3.0, 4.0], pe1), "(= 25/2)")
print("phi((2,-1)), separable, p=2     :", phi_value([2.0, -1.0], ps2), "(= (8+1)/3)")
print("grad phi((2,-1)), separable, p=2:", phi_grad([2.0, -1.0], ps2))
print("phi*((4,-9)), separable, p=2    :", phi_conj_value([4.0, -9.0], ps2), "(= 35/1.5)")
print("grad phi*((4,-9))               :", phi_conj_grad([4.0, -9.0], ps2), "(sign square root)")
print("epi-scaled (lam=2, p=1) of (3,4):", epi_scaled_value([3.0, 4.0], PowerParams(p=1.0, lam=2.0)))

print("\n=== conjugacy round trip and dual-norm identity ===")
for norm in NormFamily:
    for p in (1.0, 1.25, 2.0):
        params = PowerParams(p=p, lam=1.0, norm=norm)
        v = rng.standard_normal((5, 4)) * 3
        back = phi_grad(phi_conj_grad(v, params), params)
        roundtrip = np.abs(back - v).max()
        ident = np.abs(dual_norm(phi_grad(v, params), params) - primal_norm(v, params) ** p).max()
        print(f"{norm.value:<16} p={p:<5} max|grad phi(grad phi*(v)) - v| = {roundtrip:.1e}   "
              f"max| ||grad phi||_* - ||v||^p | = {ident:.1e}")

print("\n=== uniform convexity (the inequality behind every rate proof) ===")
for p in (1.0, 1.5, 2.0, 3.0):
    params = PowerParams(p=p, lam=1.0)
    slacks = [
        uniform_convexity_slack(rng.standard_normal(6), rng.standard_normal(6), params)
        for _ in range(1000)
    ]
    print(f"p = {p}: min slack over 1000 random pairs = {min(slacks):.3e} (>= 0 up to roundoff)")

"""The two dualized families: l1 regression and inequality-constrained LPs.

For l1 regression the nonsmooth term ||Ax - b||_1 is handled entirely by
the unit-box dual set, so inner problems stay smooth; the primal-dual gap
from the closed-form ridge dual certifies progress.  The LP family plants a
KKT pair at generation time, so the optimum is known exactly and the
effect of the separable power norm can be isolated.
"""

import numpy as np

from poweralm.alm import AlmInnerHandle, OuterConfig, primal_dual_gap, run_power_alm
from poweralm.powers import NormFamily, PowerParams
from poweralm.problems import gen_l1_regression, gen_lp, reference_solution

print("=== l1 regression, separable (q+1)-norms ===")
l1 = gen_l1_regression(20, 40, theta=100.0, seed=1)
f_star = reference_solution(l1, "auto")
print(f"m={l1.m}, n={l1.n}, theta={l1.theta}, f* = {f_star:.10f}")
for q in (1.0, 0.9, 0.8):
    params = PowerParams.from_q(q, 1.0, NormFamily.SEPARABLE_POWER)
    log = run_power_alm(l1, params, OuterConfig(max_outer=400), AlmInnerHandle(max_iter=50000))
    gap = primal_dual_gap(log.xs[-1], log.ys[-1], l1)
    print(
        f"q={q:.1f}: {log.status}, outer {len(log.outer_iter):3d}, inner {log.cum_inner[-1]:5d}, "
        f"|f - f*| = {log.abs_subopt[-1]:.1e}, pd gap = {gap:.1e}"
    )

print("\n=== inequality LP with cond(A) = 1000 ===")
lp = gen_lp(60, 20, cond_target=1000.0, seed=1)
print(f"m={lp.m}, n={lp.n}, cond(A) = {np.linalg.cond(lp.A):.1f}, f* = {lp.f_star:.6f}")
for q, lam in ((1.0, 100.0), (0.9, 100.0), (0.8, 100.0)):
    params = PowerParams.from_q(q, lam)
    log = run_power_alm(lp, params, OuterConfig(max_outer=400), AlmInnerHandle(max_iter=50000))
    print(
        f"q={q:.1f}, lam={lam:g}: {log.status}, outer {len(log.outer_iter):3d}, "
        f"inner {log.cum_inner[-1]:5d}, |f - f*| = {log.abs_subopt[-1]:.1e}, "
        f"feas = {log.feas2[-1]:.1e}"
    )

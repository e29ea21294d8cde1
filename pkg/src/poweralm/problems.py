"""Random instance generators, problem oracles, and reference optima.

Three families back the benchmark protocol:

* linear programs with inequality constraints and a controlled condition
  number, built around a planted KKT pair so the optimum is known exactly;
* positive semidefinite quadratic programs, either with equality
  constraints plus box bounds (the box is enforced by the inner solver's
  projection) or with inequality constraints and no box;
* l2-regularized l1-regression, whose dualized l1 term lives on the unit
  box.

Generation is driven entirely by the portable streams in :mod:`.rng`, so an
instance is a pure function of (family, dims, seed) and snapshots stay
bit-stable.  Instances serialize to a plain-text format for goldens.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .alm import (
    AlmInnerHandle,
    ConstraintKind,
    OuterConfig,
    StoppingRule,
    run_classical_alm,
)
from .inner import CompositeOracle, FunOracle, adaptive_apg_minimize
from .rng import Stream

GENERATOR_VERSION = 1

FAMILY_LP = "lp"
FAMILY_QP_EQ_BOX = "qp_eq_box"
FAMILY_QP_INEQ = "qp_ineq"
FAMILY_L1REG = "l1reg"


@dataclass
class ProblemInstance:
    """Affine-constrained convex problem with smooth-cost oracles.

    ``f_value``/``f_grad`` expose the smooth part of the cost; the box (when
    present) is handled by the inner solver's projection and the l1 term by
    the dual set.  ``primal_cost`` adds the real-valued part of g on top of
    the smooth cost.
    """

    family: str
    A: np.ndarray
    b: np.ndarray
    kind: ConstraintKind
    c: np.ndarray | None = None
    Q: np.ndarray | None = None
    theta: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    f_star: float | None = None
    x_opt: np.ndarray | None = None
    y_opt: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    _qeig: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def has_box(self) -> bool:
        return self.lower is not None or self.upper is not None

    @property
    def diameter(self) -> float | None:
        return self.meta.get("diameter")

    def residual(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) - self.b

    def f_value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        val = 0.0
        if self.Q is not None:
            val += 0.5 * float(x @ (self.Q @ x))
        if self.c is not None:
            val += float(self.c @ x)
        if self.theta is not None:
            val += 0.5 * self.theta * float(x @ x)
        return val

    def f_grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        if self.Q is not None:
            g += self.Q @ x
        if self.c is not None:
            g += self.c
        if self.theta is not None:
            g += self.theta * x
        return g

    def primal_cost(self, x) -> float:
        val = self.f_value(x)
        if self.kind is ConstraintKind.UNIT_BOX_DUAL:
            val += float(np.sum(np.abs(self.residual(x))))
        return val

    def project_box(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.has_box:
            return x
        lo = -np.inf if self.lower is None else self.lower
        hi = np.inf if self.upper is None else self.upper
        return np.clip(x, lo, hi)

    def quad_conj_solve(self, r):
        """Pseudo-solve Q z = r; flags whether r lies in range(Q)."""
        if self._qeig is None:
            vals, vecs = np.linalg.eigh(self.Q)
            self._qeig = (vals, vecs)
        vals, vecs = self._qeig
        cut = 1e-10 * max(float(vals[-1]), 1.0)
        coeff = vecs.T @ r
        inv = np.where(vals > cut, coeff / np.where(vals > cut, vals, 1.0), 0.0)
        z = vecs @ inv
        in_range = float(np.linalg.norm(self.Q @ z - r)) <= 1e-8 * (1.0 + float(np.linalg.norm(r)))
        return z, in_range


def gen_lp(m: int, n: int, cond_target: float = 1000.0, seed: int = 0) -> ProblemInstance:
    """Inequality-constrained LP with cond(A) pinned and a planted optimum.

    A = U diag(sigma) V^T with orthonormal factors from seeded Gaussian
    matrices and log-uniformly spaced singular values, so the condition
    number equals ``cond_target`` up to roundoff.  A primal point with
    exactly n active rows and a dual supported there are planted; c is set
    to -A^T y so the KKT system holds and ``f_star = <c, x_opt>``.
    """
    if not (m > n >= 1):
        raise ValueError("LP generator needs m > n >= 1")
    if cond_target < 1.0:
        raise ValueError("condition target must be >= 1")
    gu = Stream(seed, 0).normal(m * n).reshape(m, n)
    gv = Stream(seed, 1).normal(n * n).reshape(n, n)
    U = _orthonormal_columns(gu)
    V = _orthonormal_columns(gv)
    sigma = cond_target ** (np.arange(n) / max(n - 1, 1))
    A = (U * sigma) @ V.T
    x_hat = Stream(seed, 2).uniform(n)
    active = np.sort(Stream(seed, 3).permutation(m)[:n])
    slack = Stream(seed, 4).uniform_range(0.1, 1.1, m)
    slack[active] = 0.0
    b = A @ x_hat + slack
    y_hat = np.zeros(m)
    y_hat[active] = Stream(seed, 5).uniform_range(0.5, 1.5, n)
    c = -(A.T @ y_hat)
    inst = ProblemInstance(
        family=FAMILY_LP,
        A=A,
        b=b,
        kind=ConstraintKind.NONNEGATIVE_DUAL,
        c=c,
        f_star=float(c @ x_hat),
        x_opt=x_hat,
        y_opt=y_hat,
        meta={"seed": seed, "version": GENERATOR_VERSION, "cond_target": cond_target},
    )
    _check_lp_kkt(inst)
    return inst


def _orthonormal_columns(G):
    Qm, R = np.linalg.qr(G)
    # fix the sign convention so the factor is unique
    signs = np.sign(np.diag(R))
    signs[signs == 0.0] = 1.0
    return Qm * signs


def _check_lp_kkt(inst, tol=1e-10):
    slack = inst.b - inst.A @ inst.x_opt
    stat = inst.c + inst.A.T @ inst.y_opt
    comp = inst.y_opt * slack
    bad = (
        float(np.min(slack)) < -tol
        or float(np.max(np.abs(stat))) > tol
        or float(np.max(np.abs(comp))) > tol
        or float(np.min(inst.y_opt)) < -tol
    )
    if bad:
        raise RuntimeError("generated LP failed its KKT certificate")


def _gen_qp_data(m: int, n: int, seed: int):
    if n < 4 or m < 1:
        raise ValueError("QP generator needs n >= 4 and m >= 1")
    c = Stream(seed, 0).normal(n)
    d = Stream(seed, 1).normal(n) + 5.0
    d = np.maximum(d, 0.0)
    k = Stream(seed, 2).randint(int(np.ceil(n / 4)), int(np.floor(n / 2)))
    zero_idx = Stream(seed, 3).permutation(n)[:k]
    d[zero_idx] = 0.0
    G = Stream(seed, 4).normal(n * n).reshape(n, n)
    V = _orthonormal_columns(G)
    Q = (V * d) @ V.T
    Q = 0.5 * (Q + Q.T)
    A = Stream(seed, 5).normal(m * n).reshape(m, n)
    b = Stream(seed, 6).uniform_range(-1.0, 1.0, m)
    return c, Q, A, b, k


def gen_qp_eq_box(m: int, n: int, seed: int = 0) -> ProblemInstance:
    """Rank-deficient PSD QP with equality constraints and box bounds 0.8.

    Q = V diag(d) V^T where d ~ Normal(5, 1) clipped at zero with between
    n/4 and n/2 entries zeroed at random positions, V orthonormal from the
    QR of a Gaussian matrix; A Gaussian, b uniform on [-1, 1].
    """
    if m >= n:
        raise ValueError("equality-constrained variant needs m < n")
    c, Q, A, b, k = _gen_qp_data(m, n, seed)
    bound = 0.8 * np.ones(n)
    inst = ProblemInstance(
        family=FAMILY_QP_EQ_BOX,
        A=A,
        b=b,
        kind=ConstraintKind.EQUALITY,
        c=c,
        Q=Q,
        lower=-bound,
        upper=bound,
        meta={
            "seed": seed,
            "version": GENERATOR_VERSION,
            "rank_drop": k,
            "diameter": 1.6 * float(np.sqrt(n)),
        },
    )
    _check_box_feasibility(inst)
    return inst


def _check_box_feasibility(inst, tol=1e-6):
    """Equality system must be solvable inside the box (strong duality sanity)."""
    x_ls, *_ = np.linalg.lstsq(inst.A, inst.b, rcond=None)
    if bool(np.all((x_ls >= inst.lower) & (x_ls <= inst.upper))):
        if float(np.linalg.norm(inst.A @ x_ls - inst.b)) <= tol:
            return
    # minimum-norm solution leaves the box; project the residual problem
    oracle = FunOracle(
        lambda x: 0.5 * float(np.sum((inst.A @ x - inst.b) ** 2)),
        lambda x: inst.A.T @ (inst.A @ x - inst.b),
    )
    comp = CompositeOracle(oracle, lower=inst.lower, upper=inst.upper)
    rep = adaptive_apg_minimize(comp, inst.project_box(x_ls), tol=1e-8, max_iter=20000)
    if float(np.linalg.norm(inst.A @ rep.x - inst.b)) > tol:
        raise RuntimeError("generated instance has no feasible point in the box")


def gen_qp_ineq(m: int, n: int, seed: int = 0) -> ProblemInstance:
    """Same QP data with inequality constraints Ax <= b and no box.

    Dimensions are free beyond the recipe's n >= 4, but both regimes carry a
    hazard inherent to the random data: with m < n the region is always
    nonempty yet the cost can be unbounded below when the rank drop of Q
    approaches m, and with m > n roughly half the draws have an empty
    region (random half-spaces), which raises here.  Callers pick seeds.
    """
    c, Q, A, b, k = _gen_qp_data(m, n, seed)
    inst = ProblemInstance(
        family=FAMILY_QP_INEQ,
        A=A,
        b=b,
        kind=ConstraintKind.NONNEGATIVE_DUAL,
        c=c,
        Q=Q,
        meta={"seed": seed, "version": GENERATOR_VERSION, "rank_drop": k},
    )
    _check_ineq_feasibility(inst)
    return inst


def _check_ineq_feasibility(inst, tol=1e-8):
    """Random half-space intersections can be empty; reject such draws."""
    oracle = FunOracle(
        lambda x: 0.5 * float(np.sum(np.maximum(0.0, inst.A @ x - inst.b) ** 2)),
        lambda x: inst.A.T @ np.maximum(0.0, inst.A @ x - inst.b),
    )
    rep = adaptive_apg_minimize(CompositeOracle(oracle), np.zeros(inst.n), tol=1e-10, max_iter=20000)
    if float(np.max(np.maximum(0.0, inst.A @ rep.x - inst.b))) > tol:
        raise RuntimeError("generated inequality instance has no feasible point")


def gen_l1_regression(m: int, n: int, theta: float = 100.0, seed: int = 0) -> ProblemInstance:
    """Ridge-regularized l1 regression: (theta/2)||x||^2 + ||Ax - b||_1."""
    if theta <= 0.0:
        raise ValueError("ridge weight theta must be positive")
    A = Stream(seed, 0).uniform_range(-5.0, 5.0, m * n).reshape(m, n)
    b = Stream(seed, 1).normal(m)
    return ProblemInstance(
        family=FAMILY_L1REG,
        A=A,
        b=b,
        kind=ConstraintKind.UNIT_BOX_DUAL,
        theta=theta,
        meta={"seed": seed, "version": GENERATOR_VERSION},
    )


def reference_solution(problem: ProblemInstance, mode: str = "auto") -> float:
    """Compute (and store) a reference optimum f_star for the instance.

    ``kkt_direct`` solves the equality KKT system (valid without an active
    box) or returns the LP's planted optimum.  ``high_accuracy_alm`` runs
    classical ALM with a doubling penalty to tight tolerances and polishes
    through the identified active set, verifying the polished KKT residuals
    before accepting them.
    """
    if mode == "auto":
        mode = "kkt_direct" if problem.family == FAMILY_LP else "high_accuracy_alm"
    if mode == "kkt_direct":
        f_star = _kkt_direct(problem)
    elif mode == "high_accuracy_alm":
        f_star = _high_accuracy_alm(problem)
    else:
        raise ValueError(f"unknown reference mode {mode!r}")
    problem.f_star = f_star
    return f_star


def _kkt_direct(problem: ProblemInstance) -> float:
    if problem.family == FAMILY_LP:
        return float(problem.c @ problem.x_opt)
    if problem.Q is None or problem.kind is not ConstraintKind.EQUALITY:
        raise ValueError("kkt_direct applies to equality QPs and generated LPs")
    m, n = problem.m, problem.n
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = problem.Q
    kkt[:n, n:] = problem.A.T
    kkt[n:, :n] = problem.A
    rhs = np.concatenate([-problem.c, problem.b])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        warnings.warn("singular KKT system; falling back to the high-accuracy ALM reference")
        return _high_accuracy_alm(problem)
    x = sol[:n]
    if problem.has_box and bool(np.any((x < problem.lower - 1e-12) | (x > problem.upper + 1e-12))):
        warnings.warn("KKT solution leaves the box; falling back to the high-accuracy ALM reference")
        return _high_accuracy_alm(problem)
    return problem.f_value(x)


def _high_accuracy_alm(problem: ProblemInstance) -> float:
    # f_star is cleared so the loop terminates on feasibility and dual-step
    # norms alone; the active-set polish then recovers full precision and is
    # only accepted when the polished KKT system verifies
    saved = problem.f_star
    problem.f_star = None
    x0 = y0 = None
    try:
        for max_outer, c_in, tol_r in ((40, 1e-4, 1e-8), (120, 1e-6, 1e-10)):
            cfg = OuterConfig(
                stopping=StoppingRule(mode="practical", c=c_in),
                tol_f=np.inf,
                tol_r=tol_r,
                max_outer=max_outer,
                x0=x0,
                y0=y0,
            )
            log = run_classical_alm(
                problem,
                lam0=1.0,
                cfg=cfg,
                inner=AlmInnerHandle(max_iter=50000),
                adaptive=True,
                delta=0.1,
            )
            x, y = log.xs[-1], log.ys[-1]
            polished = _polish(problem, x, y)
            if polished is not None:
                return polished
            x0, y0 = x, y
    finally:
        problem.f_star = saved
    warnings.warn("active-set polish not verifiable; returning the raw ALM value")
    return float(problem.primal_cost(x))


def _polish(problem: ProblemInstance, x, y, tol=1e-9):
    """Active-set refinement of an accurate iterate; None when not verifiable."""
    if problem.family == FAMILY_L1REG:
        return _polish_l1(problem, y)
    if problem.Q is None:
        return None
    n = problem.n
    if problem.kind is ConstraintKind.EQUALITY:
        rows = problem.A
        rhs_rows = problem.b
    else:
        active = (y > 1e-8) | (problem.residual(x) > -1e-8)
        rows = problem.A[active]
        rhs_rows = problem.b[active]
    fixed = np.zeros(n, dtype=bool)
    fixed_vals = np.zeros(n)
    at_lo = np.zeros(n, dtype=bool)
    at_hi = np.zeros(n, dtype=bool)
    if problem.has_box:
        at_lo = x < problem.lower + 1e-6
        at_hi = x > problem.upper - 1e-6
        fixed = at_lo | at_hi
        fixed_vals[at_lo] = problem.lower[at_lo]
        fixed_vals[at_hi] = problem.upper[at_hi]
    free = ~fixed
    k = rows.shape[0]
    nf = int(np.sum(free))
    kkt = np.zeros((nf + k, nf + k))
    kkt[:nf, :nf] = problem.Q[np.ix_(free, free)]
    kkt[:nf, nf:] = rows[:, free].T
    kkt[nf:, :nf] = rows[:, free]
    rhs = np.concatenate(
        [
            -problem.c[free] - problem.Q[np.ix_(free, fixed)] @ fixed_vals[fixed],
            rhs_rows - rows[:, fixed] @ fixed_vals[fixed],
        ]
    )
    try:
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    except np.linalg.LinAlgError:
        return None
    x_pol = fixed_vals.copy()
    x_pol[free] = sol[:nf]
    nu = sol[nf:]
    # verify the full KKT system of the guessed active set
    if problem.has_box:
        if bool(np.any((x_pol < problem.lower - 1e-9) | (x_pol > problem.upper + 1e-9))):
            return None
    if float(np.linalg.norm(rows @ x_pol - rhs_rows)) > tol * (1.0 + float(np.linalg.norm(rhs_rows))):
        return None
    stat = problem.Q @ x_pol + problem.c + rows.T @ nu
    if float(np.max(np.abs(stat[free]))) > 1e-7 * (1.0 + float(np.linalg.norm(problem.c))):
        return None
    if problem.has_box and bool(np.any(fixed)):
        # bound multipliers: stationarity residual <= 0 at upper, >= 0 at lower
        if bool(np.any(stat[at_hi] > 1e-7)) or bool(np.any(stat[at_lo] < -1e-7)):
            return None
    if problem.kind is ConstraintKind.NONNEGATIVE_DUAL:
        if float(np.min(nu)) < -1e-7:
            return None
        if float(np.max(problem.residual(x_pol))) > 1e-9:
            return None
    if abs(problem.f_value(x_pol) - problem.f_value(x)) > 1e-4 * (1.0 + abs(problem.f_value(x))):
        return None
    return problem.f_value(x_pol)


def _polish_l1(problem: ProblemInstance, y, gap_tol=1e-10):
    """Exact finish of the l1 problem from the dual active structure.

    The dual is a concave box-QP; after a moderate dual ascent the bound
    pattern of y identifies which residual components vanish at the optimum
    (interior multipliers) and which carry their sign (bound multipliers).
    The remaining KKT system is linear and solved exactly, then certified by
    the primal-dual gap of the recovered pair.
    """
    y = np.clip(np.asarray(y, dtype=float), -1.0, 1.0)
    A, b, theta = problem.A, problem.b, problem.theta

    def neg_rho(v):
        at = A.T @ v
        return float((at @ at) / (2.0 * theta) + b @ v)

    def neg_rho_grad(v):
        return A @ (A.T @ v) / theta + b

    comp = CompositeOracle(
        FunOracle(neg_rho, neg_rho_grad), lower=-np.ones(problem.m), upper=np.ones(problem.m)
    )
    best = None
    for _ in range(6):
        rep = adaptive_apg_minimize(comp, y, tol=1e-11, max_iter=4000)
        y = rep.x
        at_bound = np.abs(y) > 1.0 - 1e-7
        sigma = np.sign(y[at_bound])
        interior = ~at_bound
        # stationarity theta x + A_B^T sigma + A_Z^T nu = 0 with (Ax - b)_Z = 0
        az = A[interior]
        nz = az.shape[0]
        kkt = np.zeros((problem.n + nz, problem.n + nz))
        kkt[: problem.n, : problem.n] = theta * np.eye(problem.n)
        kkt[: problem.n, problem.n :] = az.T
        kkt[problem.n :, : problem.n] = az
        rhs = np.concatenate([-(A[at_bound].T @ sigma), b[interior]])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        x_pol = sol[: problem.n]
        nu = sol[problem.n :]
        y_pol = np.empty(problem.m)
        y_pol[at_bound] = sigma
        y_pol[interior] = np.clip(nu, -1.0, 1.0)
        primal = problem.primal_cost(x_pol)
        rho = -neg_rho(y_pol)
        gap = primal - rho
        if best is None or gap < best[0]:
            best = (gap, 0.5 * (primal + rho))
        signs_ok = bool(np.all(sigma * (A[at_bound] @ x_pol - b[at_bound]) >= -1e-9))
        mult_ok = bool(np.all(np.abs(nu) <= 1.0 + 1e-9))
        if signs_ok and mult_ok and gap <= gap_tol:
            return 0.5 * (primal + rho)
    warnings.warn("l1 dual polish stopped above its gap target; reference may be coarse")
    return best[1]


# ---------------------------------------------------------------------------
# plain-text serialization for golden snapshots

_KIND_NAMES = {k.value: k for k in ConstraintKind}


def instance_to_text(problem: ProblemInstance) -> str:
    lines = [
        f"poweralm-instance {GENERATOR_VERSION} {problem.family} {problem.m} "
        f"{problem.n} {problem.meta.get('seed', 0)}"
    ]
    lines.append(f"kind {problem.kind.value}")
    for name in ("theta", "f_star"):
        val = getattr(problem, name)
        if val is not None:
            lines.append(f"{name} {float(val)!r}")
    for name in ("A", "b", "c", "Q", "lower", "upper", "x_opt", "y_opt"):
        arr = getattr(problem, name)
        if arr is None:
            continue
        mat = np.atleast_2d(np.asarray(arr, dtype=float))
        lines.append(f"{name} {mat.shape[0]} {mat.shape[1]}")
        for row in mat:
            lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def instance_from_text(text: str) -> ProblemInstance:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "poweralm-instance":
        raise ValueError("not a poweralm instance file")
    version, family, m, n, seed = int(head[1]), head[2], int(head[3]), int(head[4]), int(head[5])
    fields: dict = {"meta": {"seed": seed, "version": version}, "family": family}
    i = 1
    while i < len(lines):
        parts = lines[i].split()
        key = parts[0]
        if key == "kind":
            fields["kind"] = _KIND_NAMES[parts[1]]
            i += 1
        elif key in ("theta", "f_star"):
            fields[key] = float(parts[1])
            i += 1
        else:
            rows, cols = int(parts[1]), int(parts[2])
            data = [
                np.array([float(tok) for tok in lines[i + 1 + r].split()]) for r in range(rows)
            ]
            arr = np.vstack(data)
            fields[key] = arr[0] if rows == 1 and key not in ("Q", "A") else arr
            i += 1 + rows
    inst = ProblemInstance(**fields)
    return inst


def save_instance(problem: ProblemInstance, path) -> None:
    with open(path, "w") as fh:
        fh.write(instance_to_text(problem))


def load_instance(path) -> ProblemInstance:
    with open(path) as fh:
        return instance_from_text(fh.read())

"""Benchmark harness: seeded sweeps, per-iteration CSV logs, summary tables.

A sweep runs every (dims, seed, method) cell of an experiment config:
generate the instance, compute its reference optimum, run the solver, and
stream one CSV row per outer iteration.  Summaries report the lower median
and the nearest-rank 95th percentile of cumulative inner iterations over
the successful runs of each cell, which mirrors how the solver comparisons
are tabulated.

Logs are byte-reproducible for a fixed config: floats are written in their
shortest round-trip form and the wall-clock column stays at 0.0 unless
timings are explicitly requested.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

from .alm import AlmInnerHandle, OuterConfig, RunLog, StoppingRule, run_classical_alm, run_power_alm
from .powers import NormFamily, PowerParams
from .problems import (
    FAMILY_L1REG,
    FAMILY_LP,
    FAMILY_QP_EQ_BOX,
    FAMILY_QP_INEQ,
    gen_l1_regression,
    gen_lp,
    gen_qp_eq_box,
    gen_qp_ineq,
    reference_solution,
)

CSV_HEADER = (
    "outer_iter,cum_inner,f_val,abs_subopt,feas2,feas_dual,pd_gap,"
    "implicit_penalty_min,implicit_penalty_max,elapsed_s"
)

METHOD_POWER = "power"
METHOD_CLASSICAL = "classical"
METHOD_ADAPTIVE = "adaptive"

_NORM_NAMES = {
    "euclidean": NormFamily.EUCLIDEAN,
    "separable": NormFamily.SEPARABLE_POWER,
}


@dataclass(frozen=True)
class MethodSpec:
    """One solver column of the sweep grid."""

    method: str = METHOD_POWER
    q: float = 1.0
    lam: float = 0.1
    delta: float = 0.1
    norm: str = "euclidean"

    def __post_init__(self):
        if self.method not in (METHOD_POWER, METHOD_CLASSICAL, METHOD_ADAPTIVE):
            raise ValueError(f"unknown method {self.method!r}")
        if self.norm not in _NORM_NAMES:
            raise ValueError(f"unknown norm family {self.norm!r}")
        if not 0.0 < self.q <= 1.0:
            raise ValueError("power q must lie in (0, 1]")
        if self.lam <= 0.0:
            raise ValueError("penalty must be positive")

    def label(self) -> str:
        if self.method == METHOD_POWER:
            return f"power_q{self.q:g}_lam{self.lam:g}_{self.norm}"
        if self.method == METHOD_CLASSICAL:
            return f"classical_lam{self.lam:g}"
        return f"adaptive_lam0{self.lam:g}_delta{self.delta:g}"


@dataclass
class ExperimentConfig:
    family: str
    dims: list[tuple[int, int]]
    methods: list[MethodSpec]
    seeds: int = 10
    base_seed: int = 0
    tol_f: float = 1e-6
    tol_r: float = 1e-6
    max_outer: int = 1000
    max_inner: int = 50000
    inner_c: float = 1e-3
    l1_theta: float = 100.0
    lp_cond: float = 1000.0
    out_dir: str = "runs"
    timings: bool = False

    def __post_init__(self):
        if self.family not in (FAMILY_LP, FAMILY_QP_EQ_BOX, FAMILY_QP_INEQ, FAMILY_L1REG):
            raise ValueError(f"unknown family {self.family!r}")
        if not self.methods:
            raise ValueError("method grid is empty")
        if not self.dims:
            raise ValueError("no dimensions given")


@dataclass
class RunResult:
    m: int
    n: int
    seed: int
    label: str
    cum_inner: int
    converged: bool
    status: str
    csv_path: str | None = None


@dataclass(frozen=True)
class SummaryRow:
    m: int
    n: int
    method: str
    median_cum_inner: float
    p95_cum_inner: float
    success: int
    runs: int


def _generate(config: ExperimentConfig, m: int, n: int, seed: int):
    if config.family == FAMILY_LP:
        return gen_lp(m, n, cond_target=config.lp_cond, seed=seed)
    if config.family == FAMILY_QP_EQ_BOX:
        return gen_qp_eq_box(m, n, seed=seed)
    if config.family == FAMILY_QP_INEQ:
        return gen_qp_ineq(m, n, seed=seed)
    return gen_l1_regression(m, n, theta=config.l1_theta, seed=seed)


def _run_method(problem, spec: MethodSpec, config: ExperimentConfig, on_record) -> RunLog:
    cfg = OuterConfig(
        stopping=StoppingRule(mode="practical", c=config.inner_c),
        tol_f=config.tol_f,
        tol_r=config.tol_r,
        max_outer=config.max_outer,
    )
    handle = AlmInnerHandle(max_iter=config.max_inner)
    if spec.method == METHOD_POWER:
        params = PowerParams.from_q(spec.q, spec.lam, _NORM_NAMES[spec.norm])
        return run_power_alm(problem, params, cfg, handle, on_record=on_record)
    adaptive = spec.method == METHOD_ADAPTIVE
    return run_classical_alm(
        problem, spec.lam, cfg, handle, adaptive=adaptive, delta=spec.delta, on_record=on_record
    )


def format_row(row: dict, timings: bool) -> str:
    elapsed = row["elapsed_s"] if timings else 0.0
    cells = [str(int(row["outer_iter"])), str(int(row["cum_inner"]))]
    for key in ("f_val", "abs_subopt", "feas2", "feas_dual", "pd_gap",
                "implicit_penalty_min", "implicit_penalty_max"):
        cells.append(repr(float(row[key])))
    cells.append(repr(float(elapsed)))
    return ",".join(cells)


def read_run_csv(path) -> dict[str, np.ndarray]:
    """Parse a per-run CSV back into column arrays (round-trips exactly)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        cols = header.split(",")
        data = {c: [] for c in cols}
        for line in fh:
            for c, tok in zip(cols, line.strip().split(",")):
                data[c].append(float(tok))
    return {c: np.asarray(v) for c, v in data.items()}


def run_experiment(config: ExperimentConfig):
    """Execute the sweep; returns (summary rows, run results).

    Writes one CSV per run plus ``summary.csv`` in the output directory.
    Rows are flushed as they are produced so partial runs stay inspectable.
    Individual failures are recorded in the summary and never abort the
    sweep.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    results: list[RunResult] = []
    for m, n in config.dims:
        for i in range(config.seeds):
            seed = config.base_seed + i
            problem = _generate(config, m, n, seed)
            reference_solution(problem, "auto")
            for spec in config.methods:
                label = spec.label()
                path = os.path.join(
                    config.out_dir, f"{config.family}_m{m}_n{n}_seed{seed}_{label}.csv"
                )
                try:
                    with open(path, "w") as fh:
                        fh.write(CSV_HEADER + "\n")

                        def sink(row, fh=fh):
                            fh.write(format_row(row, config.timings) + "\n")
                            fh.flush()

                        log = _run_method(problem, spec, config, sink)
                    results.append(
                        RunResult(
                            m,
                            n,
                            seed,
                            label,
                            cum_inner=log.cum_inner[-1] if log.cum_inner else 0,
                            converged=log.status == "converged",
                            status=log.status,
                            csv_path=path,
                        )
                    )
                except Exception as exc:  # noqa: BLE001 - sweep must survive bad cells
                    results.append(
                        RunResult(m, n, seed, label, 0, False, f"error: {exc}", csv_path=path)
                    )
    rows = summarize(results)
    _write_summary(os.path.join(config.out_dir, "summary.csv"), rows)
    return rows, results


def lower_median(values) -> float:
    ordered = sorted(values)
    return float(ordered[(len(ordered) - 1) // 2])


def nearest_rank_p95(values) -> float:
    ordered = sorted(values)
    rank = int(np.ceil(0.95 * len(ordered)))
    return float(ordered[max(rank - 1, 0)])


def summarize(results) -> list[SummaryRow]:
    """Median and P95 of cumulative inner iterations per (dims, method) cell.

    Only successful runs enter the statistics; cells with no successes get a
    zero success count and NaN summaries.  Pure function of the results.
    """
    order: list[tuple] = []
    groups: dict[tuple, list[RunResult]] = {}
    for res in results:
        key = (res.m, res.n, res.label)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(res)
    rows = []
    for key in order:
        runs = groups[key]
        good = [r.cum_inner for r in runs if r.converged]
        if good:
            med, p95 = lower_median(good), nearest_rank_p95(good)
        else:
            med = p95 = float("nan")
        rows.append(
            SummaryRow(
                m=key[0],
                n=key[1],
                method=key[2],
                median_cum_inner=med,
                p95_cum_inner=p95,
                success=len(good),
                runs=len(runs),
            )
        )
    return rows


def _write_summary(path, rows: list[SummaryRow]) -> None:
    with open(path, "w") as fh:
        fh.write("m,n,method,median_cum_inner,p95_cum_inner,success,runs\n")
        for r in rows:
            fh.write(
                f"{r.m},{r.n},{r.method},{r.median_cum_inner!r},{r.p95_cum_inner!r},"
                f"{r.success},{r.runs}\n"
            )


def format_summary_table(rows: list[SummaryRow]) -> str:
    lines = [f"{'(m, n)':>12}  {'method':<34} {'median':>10} {'p95':>10} {'ok':>5}"]
    for r in rows:
        lines.append(
            f"{f'({r.m}, {r.n})':>12}  {r.method:<34} {r.median_cum_inner:>10.1f} "
            f"{r.p95_cum_inner:>10.1f} {r.success:>3}/{r.runs}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# flat key = value config files

def parse_method_token(token: str, default_norm: str = "euclidean") -> MethodSpec:
    parts = token.split()
    if not parts:
        raise ValueError("empty method cell")
    kind = parts[0]
    kw = {}
    for item in parts[1:]:
        key, _, val = item.partition("=")
        kw[key] = val
    if kind == METHOD_POWER:
        return MethodSpec(
            METHOD_POWER,
            q=float(kw.get("q", 0.8)),
            lam=float(kw.get("lam", 0.1)),
            norm=kw.get("norm", default_norm),
        )
    if kind == METHOD_CLASSICAL:
        return MethodSpec(METHOD_CLASSICAL, q=1.0, lam=float(kw.get("lam", 0.1)))
    if kind == METHOD_ADAPTIVE:
        return MethodSpec(
            METHOD_ADAPTIVE,
            q=1.0,
            lam=float(kw.get("lam0", 0.1)),
            delta=float(kw.get("delta", 0.1)),
        )
    raise ValueError(f"unknown method kind {kind!r}")


def parse_dims(text: str) -> list[tuple[int, int]]:
    dims = []
    for chunk in text.replace(";", ",").split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        m, _, n = chunk.partition("x")
        dims.append((int(m), int(n)))
    return dims


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` experiment format ('#' comments)."""
    kv = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"malformed config line: {line!r}")
        kv[key.strip()] = val.strip()
    default_norm = kv.get("norm", "euclidean")
    methods = [
        parse_method_token(tok.strip(), default_norm)
        for tok in kv.get("methods", "").split("|")
        if tok.strip()
    ]
    return ExperimentConfig(
        family=kv.get("family", FAMILY_QP_EQ_BOX),
        dims=parse_dims(kv.get("mn", "6x12")),
        methods=methods or [MethodSpec(METHOD_CLASSICAL, lam=0.1)],
        seeds=int(kv.get("seeds", 10)),
        base_seed=int(kv.get("base_seed", 0)),
        tol_f=float(kv.get("tol_f", 1e-6)),
        tol_r=float(kv.get("tol_r", 1e-6)),
        max_outer=int(kv.get("max_outer", 1000)),
        max_inner=int(kv.get("max_inner", 50000)),
        inner_c=float(kv.get("inner_c", 1e-3)),
        l1_theta=float(kv.get("l1_theta", 100.0)),
        lp_cond=float(kv.get("lp_cond", 1000.0)),
        out_dir=kv.get("out", "runs"),
        timings=kv.get("timings", "false").lower() in ("1", "true", "yes"),
    )


def with_overrides(config: ExperimentConfig, **kw) -> ExperimentConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(config, **kw)

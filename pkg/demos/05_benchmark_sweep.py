"""A miniature benchmark sweep through the harness API.

Runs the equality-QP family over a few seeds for a small method grid, then
prints the median / P95 summary table.  The same sweep is reachable from
the command line:

    poweralm-bench --family qp_eq_box --mn 20x40 --seeds 5 \
        --method power,classical --q 0.8,0.9 --lambda 0.1 --out runs/demo

Each run writes one CSV with the schema
outer_iter,cum_inner,f_val,abs_subopt,feas2,feas_dual,pd_gap,
implicit_penalty_min,implicit_penalty_max,elapsed_s so suboptimality,
feasibility, implicit-penalty, and gap trajectories can be plotted against
cumulative inner iterations by any external tool.
"""

import tempfile

from poweralm.bench import ExperimentConfig, MethodSpec, format_summary_table, run_experiment

config = ExperimentConfig(
    family="qp_eq_box",
    dims=[(20, 40)],
    methods=[
        MethodSpec("power", q=0.8, lam=0.1),
        MethodSpec("power", q=0.9, lam=0.1),
        MethodSpec("classical", q=1.0, lam=0.1),
        MethodSpec("adaptive", q=1.0, lam=0.1, delta=0.1),
    ],
    seeds=5,
    out_dir=tempfile.mkdtemp(prefix="poweralm_demo_"),
)

rows, results = run_experiment(config)
print(format_summary_table(rows))
print(f"\nper-run CSV logs and summary.csv written to {config.out_dir}")
failures = [r for r in results if not r.converged]
print(f"{len(results) - len(failures)}/{len(results)} runs converged")

import os

import numpy as np
import pytest

from poweralm.alm import AlmInnerHandle, ConstraintKind, OuterConfig, run_power_alm
from poweralm.powers import PowerParams
from poweralm.problems import (
    FAMILY_QP_EQ_BOX,
    ProblemInstance,
    gen_l1_regression,
    gen_lp,
    gen_qp_eq_box,
    gen_qp_ineq,
    instance_from_text,
    instance_to_text,
    load_instance,
    reference_solution,
)
from poweralm.rng import Stream

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


class TestStreams:
    def test_reproducible(self):
        a = Stream(7, 3).normal(64)
        b = Stream(7, 3).normal(64)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        assert not np.array_equal(Stream(7, 3).uniform(8), Stream(7, 4).uniform(8))
        assert not np.array_equal(Stream(7, 3).uniform(8), Stream(8, 3).uniform(8))

    def test_uniform_support(self):
        u = Stream(0, 0).uniform(200000)
        assert 0.0 < u.min() and u.max() <= 1.0
        assert abs(u.mean() - 0.5) < 5e-3

    def test_normal_moments(self):
        z = Stream(0, 1).normal(200000)
        assert abs(z.mean()) < 0.01
        assert abs(z.std() - 1.0) < 0.01

    def test_randint_bounds(self):
        s = Stream(2, 2)
        draws = [s.randint(3, 7) for _ in range(500)]
        assert min(draws) == 3 and max(draws) == 7

    def test_permutation(self):
        perm = Stream(3, 3).permutation(20)
        assert sorted(perm.tolist()) == list(range(20))

    def test_counter_chunking_invariance(self):
        s1 = Stream(5, 5)
        a = np.concatenate([s1.uniform(3), s1.uniform(5)])
        b = Stream(5, 5).uniform(8)
        np.testing.assert_array_equal(a, b)


class TestLpGenerator:
    def test_condition_number(self):
        for seed in range(3):
            lp = gen_lp(30, 10, cond_target=1000.0, seed=seed)
            assert np.linalg.cond(lp.A) == pytest.approx(1000.0, rel=1e-2)

    def test_condition_number_larger_sizes(self):
        for m, n in ((200, 80), (600, 300)):
            lp = gen_lp(m, n, cond_target=1000.0, seed=0)
            assert np.linalg.cond(lp.A) == pytest.approx(1000.0, rel=1e-2)

    def test_kkt_certificate(self):
        lp = gen_lp(12, 5, cond_target=100.0, seed=1)
        slack = lp.b - lp.A @ lp.x_opt
        assert slack.min() >= -1e-10
        assert np.abs(lp.c + lp.A.T @ lp.y_opt).max() <= 1e-10
        assert np.abs(lp.y_opt * slack).max() <= 1e-10
        assert lp.y_opt.min() >= 0.0
        assert lp.f_star == pytest.approx(float(lp.c @ lp.x_opt))

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            gen_lp(3, 3, seed=0)

    def test_determinism(self):
        a = gen_lp(8, 3, cond_target=50.0, seed=9)
        b = gen_lp(8, 3, cond_target=50.0, seed=9)
        np.testing.assert_array_equal(a.A, b.A)
        np.testing.assert_array_equal(a.b, b.b)
        np.testing.assert_array_equal(a.c, b.c)


class TestQpGenerators:
    def test_rank_deficiency(self):
        for seed in range(3):
            qp = gen_qp_eq_box(6, 12, seed=seed)
            eig = np.linalg.eigvalsh(qp.Q)
            n = qp.n
            assert int(np.sum(eig < 1e-8)) >= int(np.ceil(n / 4))
            assert eig.min() >= -1e-10

    def test_symmetry_and_psd(self):
        qp = gen_qp_eq_box(6, 12, seed=4)
        assert np.abs(qp.Q - qp.Q.T).max() <= 1e-12
        assert np.linalg.eigvalsh(qp.Q).min() >= -1e-10

    def test_box_and_diameter(self):
        qp = gen_qp_eq_box(6, 12, seed=0)
        np.testing.assert_array_equal(qp.upper, 0.8 * np.ones(12))
        np.testing.assert_array_equal(qp.lower, -0.8 * np.ones(12))
        assert qp.diameter == pytest.approx(1.6 * np.sqrt(12))

    def test_eq_box_requires_m_lt_n(self):
        with pytest.raises(ValueError):
            gen_qp_eq_box(12, 6, seed=0)

    def test_ineq_variant(self):
        qp = gen_qp_ineq(12, 6, seed=2)
        assert qp.kind is ConstraintKind.NONNEGATIVE_DUAL
        assert not qp.has_box
        eig = np.linalg.eigvalsh(qp.Q)
        assert int(np.sum(eig < 1e-8)) >= int(np.ceil(qp.n / 4))

    def test_infeasible_draw_rejected(self):
        # the raw recipe can produce empty half-space intersections
        with pytest.raises(RuntimeError):
            gen_qp_ineq(12, 6, seed=0)


class TestL1Generator:
    def test_defaults_and_ranges(self):
        l1 = gen_l1_regression(10, 20, seed=0)
        assert l1.theta == 100.0
        assert l1.A.min() >= -5.0 and l1.A.max() <= 5.0
        assert l1.kind is ConstraintKind.UNIT_BOX_DUAL

    def test_primal_cost_includes_l1_term(self):
        l1 = gen_l1_regression(4, 6, seed=1)
        x = Stream(0, 0).normal(6)
        expected = 50.0 * float(x @ x) + float(np.sum(np.abs(l1.A @ x - l1.b)))
        assert l1.primal_cost(x) == pytest.approx(expected, rel=1e-12)


class TestGoldenSnapshots:
    @pytest.mark.parametrize(
        "name, build",
        [
            ("lp_m4_n2_seed0.txt", lambda: gen_lp(4, 2, cond_target=1000.0, seed=0)),
            ("qp_eq_box_m6_n12_seed0.txt", lambda: gen_qp_eq_box(6, 12, seed=0)),
            ("qp_ineq_m12_n6_seed2.txt", lambda: gen_qp_ineq(12, 6, seed=2)),
            ("l1reg_m10_n20_seed0.txt", lambda: gen_l1_regression(10, 20, theta=100.0, seed=0)),
        ],
    )
    def test_regenerated_matches_golden(self, name, build):
        with open(os.path.join(GOLDEN_DIR, name)) as fh:
            frozen = fh.read()
        assert instance_to_text(build()) == frozen

    def test_serialization_roundtrip(self):
        qp = gen_qp_eq_box(6, 12, seed=0)
        back = instance_from_text(instance_to_text(qp))
        for fieldname in ("A", "b", "c", "Q", "lower", "upper"):
            np.testing.assert_array_equal(getattr(qp, fieldname), getattr(back, fieldname))
        assert back.kind is qp.kind
        assert back.family == qp.family
        assert instance_to_text(back) == instance_to_text(qp)

    def test_load_golden(self):
        lp = load_instance(os.path.join(GOLDEN_DIR, "lp_m4_n2_seed0.txt"))
        assert lp.kind is ConstraintKind.NONNEGATIVE_DUAL
        assert lp.f_star == pytest.approx(float(lp.c @ lp.x_opt))


class TestReferenceSolution:
    def _tiny_pd_qp(self, box=None):
        B = Stream(0, 50).normal(25).reshape(5, 5)
        Q = B @ B.T + 0.5 * np.eye(5)
        A = Stream(0, 51).normal(10).reshape(2, 5)
        b = 0.2 * Stream(0, 52).normal(2)
        c = Stream(0, 53).normal(5)
        bounds = None if box is None else box * np.ones(5)
        return ProblemInstance(
            family=FAMILY_QP_EQ_BOX,
            A=A,
            b=b,
            kind=ConstraintKind.EQUALITY,
            c=c,
            Q=Q,
            lower=None if bounds is None else -bounds,
            upper=bounds,
            meta={"seed": 0},
        )

    def test_kkt_direct_matches_hand_solve(self):
        prob = self._tiny_pd_qp()
        f = reference_solution(prob, "kkt_direct")
        kkt = np.block([[prob.Q, prob.A.T], [prob.A, np.zeros((2, 2))]])
        sol = np.linalg.solve(kkt, np.concatenate([-prob.c, prob.b]))
        assert f == pytest.approx(prob.f_value(sol[:5]), abs=1e-10)

    def test_lp_reference_is_planted_optimum(self):
        lp = gen_lp(8, 3, cond_target=10.0, seed=3)
        assert reference_solution(lp, "kkt_direct") == float(lp.c @ lp.x_opt)

    def test_modes_agree_when_box_inactive(self):
        # wide box: the equality KKT solution is interior, both modes apply
        prob = self._tiny_pd_qp(box=25.0)
        f_kkt = reference_solution(prob, "kkt_direct")
        f_alm = reference_solution(prob, "high_accuracy_alm")
        assert f_kkt == pytest.approx(f_alm, abs=1e-8)

    def test_reference_stored_on_instance(self):
        lp = gen_lp(8, 3, cond_target=10.0, seed=4)
        lp.f_star = None
        val = reference_solution(lp, "auto")
        assert lp.f_star == val

    def test_generated_qp_reference_certified(self):
        # the polished value must make power ALM terminate at tight tolerances
        qp = gen_qp_eq_box(6, 12, seed=5)
        reference_solution(qp, "auto")
        log = run_power_alm(
            qp, PowerParams.from_q(0.9, 0.5), OuterConfig(max_outer=400), AlmInnerHandle(max_iter=50000)
        )
        assert log.status == "converged"
        assert log.abs_subopt[-1] <= 1e-6

import numpy as np
import pytest

from homlim.analysis import (
    QuadratureConfig,
    boundary_identity_check,
    cauchy_table,
    jacobian_survey,
    make_rng,
    seminorm,
    stratified_tube_boxes,
)
from homlim.composite import build_stage
from homlim.tentacles import (
    StraightTentacleMap,
    solve_parameters,
    tentacle_seminorm_bound,
)


class _Identity:
    def forward(self, x):
        return np.asarray(x, dtype=float)

    def derivative(self, x):
        return np.eye(len(x))


class _Linear:
    def __init__(self, factor):
        self.factor = factor

    def forward(self, x):
        return self.factor * np.asarray(x, dtype=float)

    def derivative(self, x):
        return self.factor * np.eye(len(x))


class TestSeminorm:
    def test_identity_on_cube(self):
        boxes = [(-np.ones(3), np.ones(3))]
        res = seminorm(_Identity(), 2, boxes, QuadratureConfig(resolution=4))
        assert res.value == pytest.approx(24.0)
        assert res.rel_change < 1e-12

    def test_doubling_map(self):
        boxes = [(np.zeros(3), np.ones(3))]
        res = seminorm(_Linear(2.0), 2, boxes, QuadratureConfig(resolution=4))
        assert res.value == pytest.approx(12.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            QuadratureConfig(resolution=3)

    def test_straight_squeeze_matches_semianalytic_bound(self):
        # grid quadrature over P'_1 agrees with the exact-axial reduction
        from homlim.analysis import tube_axial_knots

        sched = solve_parameters(3, 4.0, "demo", "squeeze", 1)
        smap = StraightTentacleMap(sched, 1)
        lv = sched.level(1)
        boxes = stratified_tube_boxes(lv.d, lv.b, tube_axial_knots(sched, 1), 10)
        res = seminorm(smap, 2, boxes, QuadratureConfig(resolution=6))
        closed = tentacle_seminorm_bound(sched, 1)
        assert res.refined_value == pytest.approx(closed, rel=0.1)
        assert res.rel_change < 0.05

    def test_fd_fallback_used_without_derivative(self):
        class Fwd:
            def forward(self, x):
                return 2.0 * np.asarray(x, float)

        boxes = [(np.zeros(3), np.ones(3))]
        res = seminorm(Fwd(), 2, boxes, QuadratureConfig(resolution=4), refine=False)
        assert res.value == pytest.approx(12.0, rel=1e-6)


class TestJacobianSurvey:
    def test_identity(self):
        rep = jacobian_survey(_Identity(), 200, QuadratureConfig(seed=1), step=1e-6)
        assert rep.fraction_positive == 1.0
        assert rep.min_det == pytest.approx(1.0)

    def test_orientation_reversing(self):
        class Refl:
            def forward(self, x):
                y = np.asarray(x, dtype=float).copy()
                y[0] = -y[0]
                return y

        rep = jacobian_survey(Refl(), 100, QuadratureConfig(seed=2), step=1e-6)
        assert rep.fraction_positive == 0.0

    def test_t1_stage(self):
        rep = jacobian_survey(build_stage("T1", 2), 400, QuadratureConfig(seed=3))
        assert rep.fraction_positive >= 0.999
        assert not rep.hard_failures


class TestBoundary:
    def test_t1_exact(self):
        passed, dev = boundary_identity_check(build_stage("T1", 2), 3, 60)
        assert passed and dev == 0.0

    def test_translation_fails(self):
        class Shift:
            def forward(self, x):
                return np.asarray(x, dtype=float) + 0.1

        passed, dev = boundary_identity_check(Shift(), 3, 30)
        assert not passed
        assert dev == pytest.approx(0.1)


class TestCauchyTable:
    def test_rows_positive_and_fitted_envelope(self):
        cfg = QuadratureConfig(resolution=4, axial_resolution=10,
                               transverse_resolution=2, transverse_levels=4,
                               cells_cap=4, seed=0)
        table = cauchy_table("T1", 2, 3, cfg)
        assert [r.k for r in table.rows] == [2, 3]
        assert all(r.integral > 0 for r in table.rows)
        assert all(r.passed for r in table.rows)
        assert table.fitted_c > 0

    def test_deterministic_under_seed(self):
        cfg = QuadratureConfig(resolution=4, axial_resolution=8,
                               transverse_resolution=2, transverse_levels=3,
                               cells_cap=2, seed=9)
        t1 = cauchy_table("T1", 2, 3, cfg)
        t2 = cauchy_table("T1", 2, 3, cfg)
        assert [r.integral for r in t1.rows] == [r.integral for r in t2.rows]


class TestDeterminism:
    def test_philox_streams_replay(self):
        a = make_rng(123).random(8)
        b = make_rng(123).random(8)
        assert np.array_equal(a, b)

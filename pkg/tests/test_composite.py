import numpy as np
import pytest

from homlim.composite import (
    AxisCollapse,
    build_stage,
    composite_eval,
    continuum_witness,
)
from homlim.errors import DomainError
from homlim.geometry import Address, cell_center, cube_vertices, harmonic_schedule


class TestCompositions:
    def test_t1_boundary_corner(self):
        assert np.array_equal(composite_eval("T1", 2, (1.0, 1.0, 1.0)), (1.0, 1.0, 1.0))

    def test_t1_stage_one_frame_example(self):
        # squeeze and relocation are the identity there; only the
        # nested-cube inverse acts, with profile slope 1/2
        st = build_stage("T1", 1)
        assert np.allclose(st.forward((0.9, 0.9, 0.9)), (0.95, 0.95, 0.95))

    @pytest.mark.parametrize("variant", ["T1", "T2", "W"])
    def test_roundtrips(self, variant):
        st = build_stage(variant, 3)
        rng = np.random.default_rng(3)
        for x in rng.uniform(-1, 1, (200, 3)):
            assert np.max(np.abs(st.inverse(st.forward(x)) - x)) < 1e-10

    def test_w_is_generalized_inverse_of_t2(self):
        t2, w = build_stage("T2", 3), build_stage("W", 3)
        rng = np.random.default_rng(4)
        for x in rng.uniform(-1, 1, (200, 3)):
            assert np.max(np.abs(w.forward(t2.forward(x)) - x)) < 1e-10

    def test_domain_error(self):
        with pytest.raises(DomainError):
            build_stage("T1", 1).forward((1.5, 0.0, 0.0))

    def test_fl_has_no_inverse(self):
        with pytest.raises(DomainError):
            build_stage("FL", 1).inverse((0.1, 0.1, 0.1))

    def test_derivative_chain_matches_fd(self):
        st = build_stage("T1", 2)
        rng = np.random.default_rng(5)
        ok = 0
        for x in rng.uniform(-0.95, 0.95, (40, 3)):
            da = st.derivative(x)
            df = np.empty((3, 3))
            for d in range(3):
                e = np.zeros(3)
                e[d] = 1e-8
                df[:, d] = (st.forward(x + e) - st.forward(x - e)) / 2e-8
            if np.max(np.abs(da - df)) / max(1.0, np.abs(da).max()) < 1e-4:
                ok += 1
        assert ok >= 36


class TestWitness:
    def test_t1_endpoints_and_collapse(self):
        diams = []
        for k in range(1, 5):
            wit = continuum_witness([(1, 1, 1)] * k, k, "T1")
            assert wit.endpoint_separation >= 0.9
            diams.append(wit.image_diameter)
        assert all(b < a for a, b in zip(diams, diams[1:]))
        assert diams[-1] / diams[0] <= 0.2

    def test_cell_endpoint_maps_to_target(self):
        from homlim.geometry import ParameterSchedule

        A = ParameterSchedule(n=3, beta=4.0, kind="A")
        for k in (1, 2, 3):
            wit = continuum_witness([(1, 1, 1)] * k, k, "T1")
            err = np.max(np.abs(wit.images[-1] - wit.target_point))
            assert err <= A.r(k)

    def test_t2_collapse(self):
        diams = []
        for k in range(1, 5):
            wit = continuum_witness([(1, 1, 1)] * k, k, "T2")
            assert wit.endpoint_separation >= 0.5
            diams.append(wit.image_diameter)
        assert all(b < a for a, b in zip(diams, diams[1:]))
        assert diams[-1] / diams[0] <= 0.2

    def test_word_length_must_match_stage(self):
        with pytest.raises(ValueError):
            continuum_witness([(1, 1, 1)], 2, "T1")


class TestAxisCollapse:
    def test_axis_goes_to_origin(self):
        s = AxisCollapse(3)
        assert np.allclose(s.forward((0.0, 0.0, 0.7)), (0.0, 0.0, 0.0))

    def test_identity_on_boundary(self):
        s = AxisCollapse(3)
        x = np.array([1.0, 0.3, -0.2])
        assert np.allclose(s.forward(x), x)

    def test_fl_boundary_identity(self):
        st = build_stage("FL", 2)
        rng = np.random.default_rng(0)
        for axis in range(3):
            for side in (-1.0, 1.0):
                pts = rng.uniform(-1, 1, (20, 3))
                pts[:, axis] = side
                for x in pts:
                    assert np.max(np.abs(st.forward(x) - x)) < 1e-15

    def test_fl_collapse_rate(self):
        hs = harmonic_schedule(3)
        rng = np.random.default_rng(5)
        prev = None
        for k in (1, 2, 3, 4):
            st = build_stage("FL", k)
            pts = []
            for _ in range(60):
                word = tuple(tuple(cube_vertices(3)[rng.integers(8)]) for _ in range(k))
                c = cell_center(hs, Address("setA", word))
                pts.append(c + hs.r(k) * rng.uniform(-0.95, 0.95, 3))
            ims = st.forward_many(np.array(pts))
            diam = np.sqrt(((ims[:, None] - ims[None]) ** 2).sum(-1)).max()
            if prev is not None:
                assert diam <= prev / 2
            prev = diam

    def test_fl_lipschitz_quotients_bounded(self):
        rng = np.random.default_rng(6)
        cap = 2000.0  # pinned k-independent bound (see per-factor envelopes)
        for k in (1, 2, 3, 4):
            st = build_stage("FL", k)
            p = rng.uniform(-1, 1, (150, 3))
            q = np.clip(p + rng.uniform(-1e-3, 1e-3, (150, 3)), -1, 1)
            for a, b in zip(p, q):
                if np.linalg.norm(a - b) == 0:
                    continue
                quot = np.linalg.norm(st.forward(a) - st.forward(b)) / np.linalg.norm(a - b)
                assert quot < cap

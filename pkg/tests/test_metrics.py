import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from eocl.metrics import (MetricError, backward_transfer, delta_fs, delta_p,
                          final_acc, forgetting, moment_separation,
                          plasticity, relative_gain, wasserstein_1d)
from eocl.pooling import PoolerConfig


class TestAccMatrixMetrics:
    def test_final_acc_all_perfect(self):
        assert final_acc([[100.0], [100.0, 100.0]], [10, 10]) == 100.0

    def test_final_acc_equal_weights(self):
        assert final_acc([[50.0], [0.0, 100.0]], [25, 25]) == 50.0

    def test_final_acc_weighted(self):
        assert final_acc([[0.0], [0.0, 100.0]], [10, 30]) == 75.0

    def test_plasticity_diag(self):
        assert plasticity([[100.0], [0.0, 100.0]]) == 100.0
        assert plasticity([[100.0], [50.0, 0.0]]) == 50.0

    def test_forgetting_total(self):
        assert forgetting([[100.0], [0.0, 100.0]]) == 100.0

    def test_forgetting_constant_matrix_is_zero(self):
        assert forgetting([[70.0], [70.0, 70.0], [70.0, 70.0, 70.0]]) == 0.0

    def test_forgetting_not_clipped(self):
        # backward improvement shows up as negative forgetting
        assert forgetting([[50.0], [80.0, 90.0]]) == -30.0

    def test_forgetting_single_task(self):
        assert forgetting([[90.0]]) == 0.0

    def test_bwt_mean_of_final_row(self):
        assert backward_transfer([[0.0], [0.0, 0.0], [80.0, 90.0, 100.0]]) == 85.0
        assert backward_transfer([[100.0], [100.0, 100.0]]) == 100.0
        assert backward_transfer([[50.0]]) == 0.0

    def test_shape_validation(self):
        with pytest.raises(MetricError):
            plasticity([[1.0, 2.0]])
        with pytest.raises(MetricError):
            final_acc([[100.0]], [1, 2])

    def test_final_task_column_permutation_invariance(self):
        # relabeling tasks consistently in the final row and weights
        row = [[30.0], [10.0, 20.0], [60.0, 70.0, 80.0]]
        w = [5, 10, 15]
        perm = [2, 0, 1]
        permuted = [[30.0], [10.0, 20.0], [np.float64(row[2][p]) for p in perm]]
        assert final_acc(permuted, [w[p] for p in perm]) == pytest.approx(final_acc(row, w))


class TestRelativeGain:
    @pytest.mark.parametrize("a,b,expected", [
        (76.7, 85.5, 37.8),
        (83.8, 85.5, 10.5),
        (82.0, 85.5, 19.4),
    ])
    def test_reported_values(self, a, b, expected):
        assert relative_gain(a, b) == pytest.approx(expected, abs=0.05)

    def test_no_gain_is_zero(self):
        assert relative_gain(50.0, 50.0) == 0.0

    def test_full_headroom_is_hundred(self):
        for a in (0.0, 42.0, 99.0):
            assert relative_gain(a, 100.0) == pytest.approx(100.0)

    def test_undefined_at_ceiling(self):
        with pytest.raises(MetricError):
            relative_gain(100.0, 100.0)


class TestWasserstein:
    def test_identical_is_zero(self):
        assert wasserstein_1d([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_point_masses(self):
        assert wasserstein_1d([0.0], [1.0]) == 1.0

    def test_shifted_pair(self):
        assert wasserstein_1d([0.0, 1.0], [1.0, 2.0]) == 1.0

    def test_equal_size_sorted_l1(self):
        rng = np.random.default_rng(0)
        u = rng.standard_normal(64)
        v = rng.standard_normal(64)
        expected = np.mean(np.abs(np.sort(u) - np.sort(v)))
        assert wasserstein_1d(u, v) == pytest.approx(expected, abs=1e-12)

    def test_unequal_sizes_match_scipy(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            u = rng.standard_normal(int(rng.integers(1, 40)))
            v = rng.standard_normal(int(rng.integers(1, 40))) * 2 + 1
            assert wasserstein_1d(u, v) == pytest.approx(
                stats.wasserstein_distance(u, v), abs=1e-12)

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30),
           st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30))
    @settings(max_examples=200, deadline=None)
    def test_symmetric_nonnegative(self, u, v):
        d = wasserstein_1d(u, v)
        assert d >= 0.0
        assert d == pytest.approx(wasserstein_1d(v, u), rel=1e-12, abs=1e-12)

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20),
           st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20),
           st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20))
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, u, v, w):
        duw = wasserstein_1d(u, w)
        duv = wasserstein_1d(u, v)
        dvw = wasserstein_1d(v, w)
        assert duw <= duv + dvw + 1e-9

    def test_empty_rejected(self):
        with pytest.raises(MetricError):
            wasserstein_1d([], [1.0])


class TestMomentSeparation:
    def test_same_law_classes_are_close(self):
        rng = np.random.default_rng(3)
        feats = {0: rng.standard_normal((400, 6)), 1: rng.standard_normal((400, 6))}
        sep = moment_separation(feats, 2)
        assert sep.num_pairs == 1
        assert all(m < 0.2 for m in sep.mean)

    def test_mean_shifted_classes_separate_first_moment(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((300, 4))
        b = rng.standard_normal((300, 4))
        b[:, :2] += 5.0  # shift only the first (mean) block of R=2, d=2
        sep = moment_separation({0: a, 1: b}, 2)
        assert sep.mean[0] > 10 * sep.mean[1]

    def test_single_class_empty_report(self):
        sep = moment_separation({0: np.zeros((10, 4))}, 2)
        assert sep.num_pairs == 0
        assert sep.mean == ()

    def test_bad_shapes_rejected(self):
        with pytest.raises(MetricError):
            moment_separation({0: np.zeros((10, 5))}, 2)


class TestFootprintMetrics:
    def test_delta_p_arithmetic(self):
        # 10 classes, dim 80 prototypes + counts over a 1e6-param backbone
        class FakeState:
            def param_count(self):
                return 10 * 80 + 10

        assert delta_p(FakeState(), 10 ** 6) == pytest.approx(0.081)
        assert delta_p(810, 10 ** 6) == pytest.approx(0.081)

    def test_delta_fs_values(self):
        assert delta_fs(PoolerConfig("TAP", R=5), 16) == 5.0
        assert delta_fs(PoolerConfig("AVG"), 16) == 1.0
        assert delta_fs(PoolerConfig("FLAT", t_cap=40), 16) == 40.0

    def test_delta_p_needs_positive_backbone(self):
        with pytest.raises(MetricError):
            delta_p(10, 0)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smattr.exceptions import FormatError, InvalidArgumentError
from smattr.geometry import PatchGrid, RegionSet, apply_mask, divide_uniform
from smattr.instances import make_instance
from smattr.metrics import (
    Curve,
    auc,
    deletion_curve,
    highest_confidence_by_range,
    insertion_curve,
    order_to_saliency,
    read_curve_csv,
    write_curve_csv,
)
from smattr.oracle import SyntheticOracle, class_probs


def curve(points, kind="insertion"):
    f, p = zip(*points)
    return Curve(np.array(f), np.array(p), kind, 0)


@pytest.fixture(scope="module")
def inst():
    return make_instance(0, n=2, m=4, patch=3)


class TestAuc:
    def test_constant(self):
        assert auc(curve([(0, 0.3), (0.5, 0.3), (1, 0.3)])) == pytest.approx(0.3, abs=1e-15)

    def test_triangle(self):
        assert auc(curve([(0, 0), (1, 1)])) == 0.5

    def test_three_points(self):
        assert auc(curve([(0, 0), (0.5, 1), (1, 1)])) == 0.75

    def test_invalid_curves(self):
        with pytest.raises(InvalidArgumentError):
            curve([(0.1, 0), (1, 1)])
        with pytest.raises(InvalidArgumentError):
            curve([(0, 0), (0.5, 1), (0.5, 1), (1, 1)])
        with pytest.raises(InvalidArgumentError):
            curve([(0, 0), (1, 1)], kind="sideways")


class TestCurves:
    def test_constant_probability_oracle(self, inst):
        oracle = SyntheticOracle(inst.image.shape, seed=0, feature_dim=4, n_categories=4, zero_head=True)
        c = insertion_curve(inst.image, inst.regions, [3, 1, 0, 2], 2, oracle)
        assert c.points == [(i / 4, 0.25) for i in range(5)]
        assert auc(c) == 0.25

    def test_endpoints(self, inst):
        order = [2, 0, 3, 1]
        full = float(class_probs(inst.oracle.evidence(inst.image))[1])
        blank = float(class_probs(inst.oracle.evidence(np.zeros_like(inst.image)))[1])
        ins = insertion_curve(inst.image, inst.regions, order, 1, inst.oracle)
        dele = deletion_curve(inst.image, inst.regions, order, 1, inst.oracle)
        assert ins.probabilities[-1] == full and ins.probabilities[0] == blank
        assert dele.probabilities[0] == full and dele.probabilities[-1] == blank
        assert ins.fractions.tolist() == [0, 0.25, 0.5, 0.75, 1]

    def test_golden(self, inst):
        ins = insertion_curve(inst.image, inst.regions, [2, 0, 3, 1], 1, inst.oracle)
        dele = deletion_curve(inst.image, inst.regions, [2, 0, 3, 1], 1, inst.oracle)
        np.testing.assert_allclose(ins.probabilities, [0.2, 0.21837154007825324, 0.2126724865865637,
                                                       0.20117360343686005, 0.18636959681292423], rtol=1e-9)
        np.testing.assert_allclose(dele.probabilities, [0.18636959681292423, 0.204607230775118, 0.1529970967011839,
                                                        0.2171043776792892, 0.2], rtol=1e-9)
        assert auc(ins) == pytest.approx(0.2063506071270348, rel=1e-9)
        assert auc(dele) == pytest.approx(0.19197337589051328, rel=1e-9)

    def test_complementary_masks(self, inst):
        order = [1, 3, 0, 2]
        k = len(order)
        for i in range(k + 1):
            inserted = apply_mask(inst.image, order[:i], inst.regions)
            deleted = apply_mask(inst.image, order[i:], inst.regions)
            np.testing.assert_array_equal(inserted + deleted, inst.image)

    def test_reversal_symmetry(self, inst):
        order = [1, 3, 0, 2]
        rev = order[::-1]
        f = lambda o: (auc(insertion_curve(inst.image, inst.regions, o, 0, inst.oracle))  # noqa: E731
                       + auc(deletion_curve(inst.image, inst.regions, o, 0, inst.oracle)))
        assert f(order) == pytest.approx(f(rev), abs=1e-12)

    def test_threads(self, inst):
        a = insertion_curve(inst.image, inst.regions, [0, 1, 2, 3], 0, inst.oracle)
        b = insertion_curve(inst.image, inst.regions, [0, 1, 2, 3], 0, inst.oracle, n_jobs=3)
        assert a.points == b.points

    def test_bad_inputs(self, inst):
        with pytest.raises(InvalidArgumentError):
            insertion_curve(inst.image, inst.regions, [0, 0], 0, inst.oracle)
        with pytest.raises(InvalidArgumentError):
            insertion_curve(inst.image, inst.regions, [0, 1], 99, inst.oracle)
        with pytest.raises(InvalidArgumentError):
            deletion_curve(inst.image, inst.regions, [], 0, inst.oracle)


class TestHighestConfidence:
    def test_monotone(self):
        c = curve([(i / 4, 0.1 * i) for i in range(5)])
        assert highest_confidence_by_range(c).best == pytest.approx((0.1, 0.2, 0.3, 0.4))

    def test_constant(self):
        c = curve([(i / 8, 0.7) for i in range(9)])
        assert highest_confidence_by_range(c).best == (0.7, 0.7, 0.7, 0.7)

    def test_peak(self):
        c = curve([(0, 0.1), (0.1, 0.2), (0.3, 0.9), (0.6, 0.4), (1, 0.3)])
        assert highest_confidence_by_range(c).best == (0.2, 0.9, 0.9, 0.9)

    def test_rejects_deletion(self):
        with pytest.raises(InvalidArgumentError):
            highest_confidence_by_range(curve([(0, 1), (1, 0)], kind="deletion"))

    @settings(max_examples=100)
    @given(st.lists(st.floats(0, 1), min_size=2, max_size=40))
    def test_running_max(self, probs):
        k = len(probs) - 1
        c = Curve(np.arange(k + 1) / k, np.array(probs), "insertion", 0)
        best = highest_confidence_by_range(c).best
        assert all(a <= b for a, b in zip(best, best[1:]))
        assert best[-1] == max(probs)


class TestOrderToSaliency:
    def test_single(self):
        regions = divide_uniform(np.zeros((4, 4, 1)), 2)
        sal = order_to_saliency(regions, [2])
        assert sal[2:, :2].tolist() == [[1, 1], [1, 1]]
        assert sal.sum() == 4

    def test_two(self):
        regions = divide_uniform(np.zeros((2, 2, 1)), 2)
        sal = order_to_saliency(regions, [3, 1, 0, 2])
        assert sal.tolist() == [[0.5, 0.75], [0.25, 1.0]]

    def test_k_equals_m_two(self):
        regions = RegionSet(PatchGrid(2, 1, 1), ((0, 3), (1, 2)))
        sal = order_to_saliency(regions, [1, 0])
        assert sorted(set(sal.ravel().tolist())) == [0.5, 1.0]


def test_curve_csv_roundtrip(tmp_path):
    c = curve([(0, 0.123456789123), (0.5, 0.5), (1, 1 / 3)])
    path = tmp_path / "c.csv"
    write_curve_csv(c, path)
    lines = path.read_text().splitlines()
    assert lines == ["fraction,probability", "0,0.123456789", "0.5,0.5", "1,0.333333333"]
    back = read_curve_csv(path)
    np.testing.assert_allclose(back.probabilities, c.probabilities, rtol=1e-8)
    (tmp_path / "bad.csv").write_text("x,y\n0,1\n")
    with pytest.raises(FormatError):
        read_curve_csv(tmp_path / "bad.csv")

"""Tests for finite metric spaces and the Hausdorff distance."""

from fractions import Fraction
import itertools

import numpy as np
import pytest

from urysohn_fractals.exceptions import (
    AsymmetricMatrix,
    FractalParseException,
    MixedAmbient,
    NegativeEntry,
    NonzeroDiagonal,
    TriangleViolation,
    ZeroOffDiagonal,
)
from urysohn_fractals.metric import (
    CompactSet,
    EuclideanSpace,
    FiniteMetricSpace,
    LabelSet,
    PointCloud,
    directed_distance,
    hausdorff_distance,
    set_image,
    validate_metric,
)
from urysohn_fractals.moduli import AffineMap, TableMap

from .conftest import TRIANGLE_VIOLATION_LABELS, TRIANGLE_VIOLATION_MATRIX, random_rational_space


def triangle_oracle(dist: list[list[Fraction]]) -> bool:
    """Exhaustive scan of every ordered triple."""
    n = len(dist)
    return all(
        dist[i][k] <= dist[i][j] + dist[j][k]
        for i, j, k in itertools.product(range(n), repeat=3)
    )


def hausdorff_oracle(space: FiniteMetricSpace, a: list[str], b: list[str]) -> Fraction:
    """Double max over point-to-set distances."""
    forward = max(min(space.distance(x, y) for y in b) for x in a)
    backward = max(min(space.distance(x, y) for x in a) for y in b)
    return max(forward, backward)


def random_label_set(rng: np.random.Generator, space: FiniteMetricSpace) -> LabelSet:
    """Non-empty random subset of a finite space."""
    n = len(space.labels)
    picks = rng.choice(n, int(rng.integers(1, n + 1)), replace=False)
    return LabelSet(space, [space.labels[int(i)] for i in picks])


class TestValidateMetric:
    """Tests for validate_metric."""

    def test_single_point(self) -> None:
        """Test a 1-point matrix is a valid space."""
        space = validate_metric([[0]], ["x"])
        assert len(space) == 1
        assert space.diameter() == 0

    def test_two_points(self) -> None:
        """Test any positive symmetric 2-point matrix is a metric."""
        space = validate_metric([[0, "1/3"], ["1/3", 0]], ["x", "y"])
        assert space.distance("x", "y") == Fraction(1, 3)

    def test_triangle_violation(self) -> None:
        """Test the violating triple is named with the detour point last."""
        with pytest.raises(TriangleViolation) as exc:
            validate_metric(TRIANGLE_VIOLATION_MATRIX, TRIANGLE_VIOLATION_LABELS)
        assert exc.value.name == "TriangleViolation(0,2,1)"
        assert exc.value.witness == (0, 2, 1)

    @pytest.mark.parametrize(
        ("matrix", "exception", "name"),
        [
            ([[0, -1], [-1, 0]], NegativeEntry, "NegativeEntry(0,1)"),
            ([[0, 1], [1, 2]], NonzeroDiagonal, "NonzeroDiagonal(1)"),
            ([[0, 1], [2, 0]], AsymmetricMatrix, "AsymmetricMatrix(0,1)"),
            ([[0, 0], [0, 0]], ZeroOffDiagonal, "ZeroOffDiagonal(0,1)"),
        ],
    )
    def test_axiom_failures(self, matrix, exception, name) -> None:
        """Test each axiom failure names its first offending entry."""
        with pytest.raises(exception) as exc:
            validate_metric(matrix, ["x", "y"])
        assert exc.value.name == name

    @pytest.mark.parametrize(
        ("matrix", "labels"),
        [
            ([[0, 1], [1, 0]], ["x"]),
            ([[0, 1], [1]], ["x", "y"]),
            ([[0, 1], [1, 0]], ["x", "x"]),
            ([[0, "one"], ["one", 0]], ["x", "y"]),
        ],
    )
    def test_malformed_matrix(self, matrix, labels) -> None:
        """Test shape, label and literal errors are parse failures."""
        with pytest.raises(FractalParseException):
            validate_metric(matrix, labels)

    def test_agrees_with_triple_scan(self) -> None:
        """Test agreement with an exhaustive triple-scan oracle on random matrices."""
        rng = np.random.default_rng(7)
        verdicts = set()
        for trial in range(200):
            n = int(rng.integers(1, 11))
            if trial % 2:
                dist = [list(row) for row in random_rational_space(rng, n).dist]
            else:
                dist = [[Fraction(0)] * n for _ in range(n)]
                for i in range(n):
                    for j in range(i + 1, n):
                        dist[i][j] = dist[j][i] = Fraction(int(rng.integers(1, 5)))
            expected = triangle_oracle(dist)
            verdicts.add(expected)
            try:
                validate_metric(dist, [str(i) for i in range(n)])
            except TriangleViolation as e:
                i, k, j = e.witness
                assert dist[i][k] > dist[i][j] + dist[j][k]
                assert not expected
            else:
                assert expected
        assert verdicts == {True, False}


class TestFiniteMetricSpace:
    """Tests for FiniteMetricSpace."""

    def test_from_line_labels(self) -> None:
        """Test line points are labeled by their exact rational literals."""
        space = FiniteMetricSpace.from_line(["1/2", "0.25", 3])
        assert space.labels == ("1/2", "1/4", "3")
        assert space.distance("1/4", "3") == Fraction(11, 4)

    def test_csv_round_trip(self, half_line: FiniteMetricSpace) -> None:
        """Test CSV output parses back to the same space."""
        assert FiniteMetricSpace.from_csv(half_line.to_csv()) == half_line

    def test_json_round_trip(self, fractal: FiniteMetricSpace) -> None:
        """Test JSON output parses back to the same space."""
        assert FiniteMetricSpace.from_json(fractal.to_json()) == fractal

    def test_from_json_missing_keys(self) -> None:
        """Test a document without labels is a parse failure."""
        with pytest.raises(FractalParseException):
            FiniteMetricSpace.from_json(b'{"dist": [[0]]}')

    def test_csv_validates(self) -> None:
        """Test CSV input goes through the metric checks."""
        with pytest.raises(TriangleViolation):
            FiniteMetricSpace.from_csv("a,b,c\n0,1,3\n1,0,1\n3,1,0\n")

    def test_unknown_label(self, fractal: FiniteMetricSpace) -> None:
        """Test unknown labels are parse failures."""
        with pytest.raises(FractalParseException):
            fractal.index_of("2")

    def test_with_point_and_subspace(self, fractal: FiniteMetricSpace) -> None:
        """Test adjoining a point keeps the old space as an isometric copy."""
        grown = fractal.with_point(
            "13", {"0": Fraction(13), "1": Fraction(12), "3": Fraction(10)}
        )
        assert len(grown) == 4
        assert fractal.isometry_defect(grown) is None
        assert grown.subspace(["0", "1", "3"]) == fractal
        assert grown.realized_distances(["0", "13"]) == [Fraction(13)]

    def test_isometry_defect(self, fractal: FiniteMetricSpace) -> None:
        """Test a changed distance is reported."""
        other = FiniteMetricSpace.from_line(["0", "1", "4"])
        assert fractal.isometry_defect(other) == ("0", "3")
        stretched = validate_metric([[0, 2, 3], [2, 0, 2], [3, 2, 0]], ["0", "1", "3"])
        assert fractal.isometry_defect(stretched) == ("0", "1")


class TestHausdorffDistance:
    """Tests for hausdorff_distance and directed_distance."""

    def test_equal_sets(self, half_line: FiniteMetricSpace) -> None:
        """Test A = B gives 0."""
        a = LabelSet(half_line, ["0", "4"])
        assert hausdorff_distance(a, LabelSet(half_line, ["4", "0"])) == 0

    def test_singletons(self, half_line: FiniteMetricSpace) -> None:
        """Test singletons reduce to the point distance."""
        a, b = LabelSet(half_line, ["1"]), LabelSet(half_line, ["8"])
        assert hausdorff_distance(a, b) == 7

    def test_line_example(self, half_line: FiniteMetricSpace) -> None:
        """Test A={0,1}, B={0} on the line."""
        a, b = LabelSet(half_line, ["0", "1"]), LabelSet(half_line, ["0"])
        assert hausdorff_distance(a, b) == 1
        assert directed_distance(a, b) == 1
        assert directed_distance(b, a) == 0

    def test_matches_double_max_oracle(self) -> None:
        """Test exact agreement with a brute-force double max."""
        rng = np.random.default_rng(11)
        for _ in range(200):
            space = random_rational_space(rng, int(rng.integers(1, 11)))
            labels = list(space.labels)
            a, b = (
                [labels[int(i)] for i in rng.choice(len(labels), int(rng.integers(1, len(labels) + 1)), replace=False)]
                for _ in range(2)
            )
            value = hausdorff_distance(LabelSet(space, a), LabelSet(space, b))
            assert isinstance(value, Fraction)
            assert value == hausdorff_oracle(space, a, b)

    def test_point_clouds(self, plane: EuclideanSpace) -> None:
        """Test clouds agree with a loop over coordinates."""
        rng = np.random.default_rng(3)
        a, b = rng.random((40, 2)), rng.random((25, 2))
        expected = max(
            max(min(float(np.linalg.norm(p - q)) for q in b) for p in a),
            max(min(float(np.linalg.norm(p - q)) for p in a) for q in b),
        )
        value = hausdorff_distance(PointCloud(plane, a), PointCloud(plane, b))
        assert value == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_metric_on_subsets(self, seed: int) -> None:
        """Test symmetry and the triangle inequality on random subsets."""
        rng = np.random.default_rng(seed)
        for _ in range(20):
            space = random_rational_space(rng, 7)
            a, b, c = (random_label_set(rng, space) for _ in range(3))
            assert hausdorff_distance(a, a) == 0
            assert hausdorff_distance(a, b) == hausdorff_distance(b, a)
            assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c)

    def test_mixed_ambient(self, half_line: FiniteMetricSpace, fractal: FiniteMetricSpace) -> None:
        """Test sets over different spaces are rejected."""

        with pytest.raises(MixedAmbient):
            hausdorff_distance(LabelSet(half_line, ["0"]), LabelSet(fractal, ["0"]))

    def test_empty_set(self, fractal: FiniteMetricSpace) -> None:
        """Test compact sets are non-empty."""
        with pytest.raises(ValueError, match="non-empty"):
            LabelSet(fractal, [])


class TestCompactSets:
    """Tests for label sets, point clouds and set images."""

    def test_label_set_dedupes(self, fractal: FiniteMetricSpace) -> None:
        """Test repeated members collapse, keeping insertion order."""
        k = LabelSet(fractal, ["3", "0", "3"])
        assert k.members == ("3", "0")
        assert k.first() == "3"
        assert k.diameter() == 3

    def test_cloud_dedupes_within_tolerance(self, plane: EuclideanSpace) -> None:
        """Test points closer than the float tolerance are merged."""
        cloud = PointCloud(plane, np.array([[0.0, 0.0], [1e-14, 0.0], [1.0, 0.0], [-0.0, 0.0]]))
        assert len(cloud) == 2
        assert (0.0, 0.0) in cloud

    def test_cloud_equality(self, plane: EuclideanSpace) -> None:
        """Test clouds compare as sets."""
        a = CompactSet.of(plane, [(0.0, 0.0), (1.0, 1.0)])
        b = CompactSet.of(plane, [(1.0, 1.0), (0.0, 0.0)])
        assert a == b

    def test_affine_image(self, line: EuclideanSpace) -> None:
        """Test x -> x/2 on {0, 1}."""
        image = set_image(AffineMap.similarity(0.5, [0.0]), CompactSet.of(line, [(0.0,), (1.0,)]))
        assert image == CompactSet.of(line, [(0.0,), (0.5,)])

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_image_monotone(self, seed: int) -> None:
        """Test A inside B gives f(A) inside f(B)."""
        rng = np.random.default_rng(seed)
        space = random_rational_space(rng, 8)
        f = TableMap({x: space.labels[int(rng.integers(8))] for x in space.labels})
        for _ in range(20):
            a = random_label_set(rng, space)
            b = a.union(random_label_set(rng, space))
            image_a, image_b = set_image(f, a), set_image(f, b)
            assert isinstance(image_a, LabelSet) and isinstance(image_b, LabelSet)
            assert image_a.issubset(image_b)

    def test_large_cloud_diameter(self, plane: EuclideanSpace) -> None:
        """Test the hull path of the diameter on a dense grid."""
        grid = np.stack(np.meshgrid(np.linspace(0, 1, 50), np.linspace(0, 1, 50)), -1)
        cloud = PointCloud(plane, grid.reshape(-1, 2))
        assert len(cloud) == 2500
        assert cloud.diameter() == pytest.approx(2**0.5, abs=1e-12)

    def test_large_line_cloud_diameter(self, line: EuclideanSpace) -> None:
        """Test the one-dimensional path of the diameter."""
        cloud = PointCloud(line, np.linspace(0, 3, 2500))
        assert cloud.diameter() == pytest.approx(3.0, abs=1e-12)

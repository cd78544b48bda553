"""Exact finite metric spaces, compact point sets and the Hausdorff distance."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math
from typing import Any, Protocol

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import cdist

from .const import DENSE_DISTANCE_LIMIT, EUCLIDEAN_MAX_DIM, FLOAT_TOLERANCE
from .exceptions import (
    AsymmetricMatrix,
    FractalParseException,
    MixedAmbient,
    NegativeEntry,
    NonzeroDiagonal,
    TriangleViolation,
    ZeroOffDiagonal,
)
from .helpers import (
    Distance,
    dumps_json,
    loads_json,
    matrix_from_csv,
    matrix_to_csv,
    parse_rational,
)

_LOGGER = logging.getLogger(__name__)

Coordinates = tuple[float, ...]
Point = str | Coordinates


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Exact finite metric space over labeled points.

    Build instances with `validate_metric`; the constructor trusts its input.
    """

    labels: tuple[str, ...]
    dist: tuple[tuple[Fraction, ...], ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Index labels by position."""
        object.__setattr__(
            self, "_index", {label: i for i, label in enumerate(self.labels)}
        )

    @property
    def mode(self) -> str:
        """Arithmetic mode of the space."""
        return "exact"

    def __len__(self) -> int:
        """Return the number of points."""
        return len(self.labels)

    def __contains__(self, point: object) -> bool:
        """Check whether a label names a point of the space."""
        return isinstance(point, str) and point in self._index

    def index_of(self, label: str) -> int:
        """Position of a label in insertion order.

        Raises
        ------
        FractalParseException
            If the label is unknown.

        """
        try:
            return self._index[label]
        except KeyError as e:
            raise FractalParseException(f"Unknown point label {label!r}.") from e

    def distance(self, p: str, q: str) -> Fraction:
        """Exact distance between two labeled points."""
        return self.dist[self.index_of(p)][self.index_of(q)]

    def realized_distances(self, labels: Iterable[str] | None = None) -> list[Fraction]:
        """Sorted distinct positive distances between points of ``labels``."""
        rows = [self.index_of(x) for x in (self.labels if labels is None else labels)]
        return sorted(
            {self.dist[i][j] for a, i in enumerate(rows) for j in rows[a + 1 :]}
            - {Fraction(0)}
        )

    def diameter(self) -> Fraction:
        """Largest distance in the space."""
        return max((max(row) for row in self.dist), default=Fraction(0))

    def subspace(self, labels: Sequence[str]) -> FiniteMetricSpace:
        """Restrict the metric to ``labels`` (in the given order)."""
        rows = [self.index_of(x) for x in labels]
        return FiniteMetricSpace(
            tuple(labels), tuple(tuple(self.dist[i][j] for j in rows) for i in rows)
        )

    def with_point(
        self, label: str, distances: Mapping[str, Fraction]
    ) -> FiniteMetricSpace:
        """Adjoin one point with prescribed distances to every existing point.

        The caller is responsible for the one-point triangle inequalities.
        """
        if label in self._index:
            raise ValueError(f"Label {label} already exists.")
        column = tuple(distances[x] for x in self.labels)
        dist = tuple(row + (column[i],) for i, row in enumerate(self.dist))
        return FiniteMetricSpace(
            (*self.labels, label), (*dist, (*column, Fraction(0)))
        )

    def isometry_defect(self, other: FiniteMetricSpace) -> tuple[str, str] | None:
        """First pair whose distance differs inside ``other``, if any.

        A label missing from ``other`` is reported paired with itself.
        """
        for a, x in enumerate(self.labels):
            if x not in other:
                return (x, x)
            for y in self.labels[a + 1 :]:
                if y not in other or other.distance(x, y) != self.dist[a][
                    self.index_of(y)
                ]:
                    return (x, y)
        return None

    def to_json(self) -> bytes:
        """Serialize as ``{"labels": [...], "dist": [[...]]}``."""
        return dumps_json({"labels": list(self.labels), "dist": self.dist})

    @classmethod
    def from_json(cls, data: str | bytes) -> FiniteMetricSpace:
        """Parse and validate a JSON distance document."""
        document = loads_json(data)
        try:
            labels, matrix = document["labels"], document["dist"]
        except (KeyError, TypeError) as e:
            raise FractalParseException(
                "Distance document needs 'labels' and 'dist'."
            ) from e
        return validate_metric(
            [[parse_rational(v) for v in row] for row in matrix], labels
        )

    def to_csv(self) -> str:
        """Serialize as CSV with a header row of labels."""
        return matrix_to_csv(self.labels, self.dist)

    @classmethod
    def from_csv(cls, text: str) -> FiniteMetricSpace:
        """Parse and validate a CSV distance matrix."""
        labels, matrix = matrix_from_csv(text)
        return validate_metric(matrix, labels)

    @classmethod
    def from_line(cls, values: Sequence[Fraction | int | str]) -> FiniteMetricSpace:
        """Rational points of the real line with |x - y| as metric.

        Labels are the rational literals of the points.
        """
        points = [parse_rational(v) for v in values]
        return validate_metric(
            [[abs(x - y) for y in points] for x in points], [str(x) for x in points]
        )


@dataclass(frozen=True)
class EuclideanSpace:
    """Euclidean space of dimension 1 to 3 with float coordinates."""

    dim: int

    def __post_init__(self) -> None:
        """Check the dimension."""
        if not 1 <= self.dim <= EUCLIDEAN_MAX_DIM:
            raise ValueError(f"Dimension {self.dim} is outside 1..{EUCLIDEAN_MAX_DIM}.")

    @property
    def mode(self) -> str:
        """Arithmetic mode of the space."""
        return "float"

    def __contains__(self, point: object) -> bool:
        """Check whether a coordinate tuple has the right dimension."""
        return isinstance(point, tuple) and len(point) == self.dim

    def distance(self, p: Coordinates, q: Coordinates) -> float:
        """Euclidean distance."""
        return math.dist(p, q)


Ambient = FiniteMetricSpace | EuclideanSpace


class SupportsImage(Protocol):
    """A point map acting on labels or on coordinate arrays."""

    def __call__(self, point: Any) -> Any:
        """Image of one point."""

    def apply_cloud(self, points: np.ndarray) -> np.ndarray:
        """Images of an (n, d) coordinate array."""


def same_ambient(a: Ambient, b: Ambient) -> bool:
    """Check whether two ambients are the same space."""
    return a is b or a == b


class CompactSet(ABC):
    """Non-empty finite set of points standing for a compact subset."""

    ambient: Ambient

    @staticmethod
    def of(ambient: Ambient, members: Iterable[Any]) -> CompactSet:
        """Build the set type matching ``ambient``."""
        if isinstance(ambient, FiniteMetricSpace):
            return LabelSet(ambient, members)
        return PointCloud(ambient, np.asarray(list(members), dtype=float))

    @abstractmethod
    def __len__(self) -> int:
        """Return the number of members."""

    @abstractmethod
    def __iter__(self) -> Iterator[Any]:
        """Iterate over members in insertion order."""

    @abstractmethod
    def union(self, other: CompactSet) -> CompactSet:
        """Union of two sets over the same ambient."""

    def first(self) -> Any:
        """First member in insertion order."""
        return next(iter(self))

    def diameter(self) -> Distance:
        """Largest distance between two members."""
        return _diameter(self)

    def _check_ambient(self, other: CompactSet) -> None:
        if not same_ambient(self.ambient, other.ambient):
            raise MixedAmbient


class LabelSet(CompactSet):
    """Compact set of labeled points of a finite metric space."""

    def __init__(self, ambient: FiniteMetricSpace, members: Iterable[str]) -> None:
        """Deduplicate members, keeping insertion order.

        Raises
        ------
        ValueError
            If the set is empty.
        FractalParseException
            If a member is not a point of the ambient.

        """
        self.ambient = ambient
        self.members = tuple(dict.fromkeys(members))
        if not self.members:
            raise ValueError("A compact set must be non-empty.")
        for x in self.members:
            ambient.index_of(x)

    def __len__(self) -> int:
        """Return the number of members."""
        return len(self.members)

    def __iter__(self) -> Iterator[str]:
        """Iterate over member labels."""
        return iter(self.members)

    def __contains__(self, point: object) -> bool:
        """Check membership."""
        return point in self.members

    def __eq__(self, other: object) -> bool:
        """Set equality over the same ambient."""
        if not isinstance(other, LabelSet):
            return NotImplemented
        return same_ambient(self.ambient, other.ambient) and set(self.members) == set(
            other.members
        )

    def __hash__(self) -> int:
        """Hash by member set."""
        return hash(frozenset(self.members))

    def __repr__(self) -> str:
        """Represent by members."""
        return f"LabelSet({list(self.members)})"

    def union(self, other: CompactSet) -> LabelSet:
        """Union of two label sets."""
        self._check_ambient(other)
        assert isinstance(other, LabelSet)
        return LabelSet(self.ambient, (*self.members, *other.members))

    def issubset(self, other: LabelSet) -> bool:
        """Check inclusion."""
        return set(self.members) <= set(other.members)


class PointCloud(CompactSet):
    """Compact set of coordinate points in a Euclidean space."""

    def __init__(self, ambient: EuclideanSpace, points: np.ndarray) -> None:
        """Deduplicate points closer than the float tolerance, keeping order.

        Raises
        ------
        ValueError
            If the cloud is empty or has the wrong dimension.

        """
        points = np.asarray(points, dtype=float).reshape(-1, ambient.dim)
        if not len(points):
            raise ValueError("A compact set must be non-empty.")
        if not np.isfinite(points).all():
            raise ValueError("Point coordinates must be finite.")
        self.ambient = ambient
        self.points = dedupe_points(points)
        self.points.flags.writeable = False

    def __len__(self) -> int:
        """Return the number of points."""
        return len(self.points)

    def __iter__(self) -> Iterator[Coordinates]:
        """Iterate over coordinate tuples."""
        return (tuple(float(c) for c in row) for row in self.points)

    def __contains__(self, point: object) -> bool:
        """Check membership up to the float tolerance."""
        if not isinstance(point, tuple | list | np.ndarray):
            return False
        gaps = np.linalg.norm(self.points - np.asarray(point, dtype=float), axis=1)
        return bool(gaps.min() < FLOAT_TOLERANCE)

    def __eq__(self, other: object) -> bool:
        """Set equality up to the float tolerance."""
        if not isinstance(other, PointCloud):
            return NotImplemented
        return (
            same_ambient(self.ambient, other.ambient)
            and len(self) == len(other)
            and hausdorff_distance(self, other) < FLOAT_TOLERANCE
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        """Represent by size."""
        return f"PointCloud({len(self)} points in R^{self.ambient.dim})"

    def union(self, other: CompactSet) -> PointCloud:
        """Union of two clouds."""
        self._check_ambient(other)
        assert isinstance(other, PointCloud)
        return PointCloud(self.ambient, np.vstack([self.points, other.points]))


def dedupe_points(points: np.ndarray) -> np.ndarray:
    """Drop repeated points and points within the float tolerance of earlier ones."""
    points = points + 0.0  # -0.0 and 0.0 compare equal but differ bytewise
    if len(points) <= 1:
        return points
    _, first = np.unique(points, axis=0, return_index=True)
    points = points[np.sort(first)]
    if len(points) > 1:
        pairs = cKDTree(points).query_pairs(FLOAT_TOLERANCE, output_type="ndarray")
        if len(pairs):
            points = np.delete(points, np.unique(pairs.max(axis=1)), axis=0)
    return points


def validate_metric(
    matrix: Sequence[Sequence[Fraction | int | str]], labels: Sequence[str]
) -> FiniteMetricSpace:
    """Check the metric axioms on an exact matrix.

    Parameters
    ----------
    matrix
        Square matrix of nonnegative rational entries (or rational literals).
    labels
        Point identifiers, one per row, in insertion order.

    Returns
    -------
    FiniteMetricSpace
        The validated space.

    Raises
    ------
    FractalParseException
        If the matrix is not square, labels do not match or repeat.
    NegativeEntry, NonzeroDiagonal, AsymmetricMatrix, ZeroOffDiagonal, TriangleViolation
        Naming the first offending entry or triple.

    """
    n = len(labels)
    if len(set(labels)) != n:
        raise FractalParseException("Point labels must be distinct.")
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise FractalParseException(f"Distance matrix must be {n}x{n}.")
    dist = tuple(tuple(parse_rational(v) for v in row) for row in matrix)

    for i in range(n):
        for j in range(n):
            if dist[i][j] < 0:
                raise NegativeEntry(i, j)
    for i in range(n):
        if dist[i][i] != 0:
            raise NonzeroDiagonal(i)
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i][j] != dist[j][i]:
                raise AsymmetricMatrix(i, j)
            if dist[i][j] == 0:
                raise ZeroOffDiagonal(i, j)
    for i in range(n):
        row_i = dist[i]
        for k in range(i + 1, n):
            for j in range(n):
                if j not in (i, k) and row_i[k] > row_i[j] + dist[j][k]:
                    raise TriangleViolation(i, k, j)

    _LOGGER.debug("Validated %s-point metric space", n)
    return FiniteMetricSpace(tuple(str(label) for label in labels), dist)


def directed_distance(a: CompactSet, b: CompactSet) -> Distance:
    """One-sided Hausdorff semi-distance max over a of d(a, B).

    Raises
    ------
    MixedAmbient
        If the sets reference different spaces.

    """
    a._check_ambient(b)
    if isinstance(a, LabelSet):
        assert isinstance(b, LabelSet)
        space = a.ambient
        cols = [space.index_of(y) for y in b.members]
        return max(
            min(space.dist[space.index_of(x)][j] for j in cols) for x in a.members
        )
    assert isinstance(a, PointCloud) and isinstance(b, PointCloud)
    if len(a) * len(b) <= DENSE_DISTANCE_LIMIT:
        return float(cdist(a.points, b.points).min(axis=1).max())
    return float(cKDTree(b.points).query(a.points)[0].max())


def hausdorff_distance(a: CompactSet, b: CompactSet) -> Distance:
    """Hausdorff distance max{max_a d(a,B), max_b d(A,b)}.

    Exact for label sets, float (within 1e-12) for point clouds.

    Raises
    ------
    MixedAmbient
        If the sets reference different spaces.

    """
    a._check_ambient(b)
    if isinstance(a, PointCloud) and len(a) * len(b) <= DENSE_DISTANCE_LIMIT:
        assert isinstance(b, PointCloud)
        table = cdist(a.points, b.points)
        return float(max(table.min(axis=1).max(), table.min(axis=0).max()))
    return max(directed_distance(a, b), directed_distance(b, a))


def _diameter(k: CompactSet) -> Distance:
    if isinstance(k, LabelSet):
        space = k.ambient
        rows = [space.index_of(x) for x in k.members]
        return max(space.dist[i][j] for i in rows for j in rows)
    assert isinstance(k, PointCloud)
    if len(k) ** 2 <= DENSE_DISTANCE_LIMIT:
        return float(cdist(k.points, k.points).max())
    if k.ambient.dim == 1:
        return float(k.points.max() - k.points.min())
    # the diameter is attained between convex hull vertices
    try:
        hull = k.points[ConvexHull(k.points).vertices]
    except QhullError:
        _LOGGER.debug("Degenerate hull, falling back to a bounding sweep", exc_info=True)
        return float(
            max(cdist(k.points[i : i + 1024], k.points).max() for i in range(0, len(k), 1024))
        )
    return float(cdist(hull, hull).max())


def set_image(f: SupportsImage, k: CompactSet) -> CompactSet:
    """Image {f(x) : x in K} with duplicates merged.

    Raises
    ------
    DomainMiss
        If some member of K has no image.

    """
    if isinstance(k, LabelSet):
        return LabelSet(k.ambient, [f(x) for x in k.members])
    assert isinstance(k, PointCloud)
    return PointCloud(k.ambient, f.apply_cloud(k.points))

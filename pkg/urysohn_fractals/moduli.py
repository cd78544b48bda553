"""Continuity moduli, point maps and the contraction taxonomy."""

from __future__ import annotations

from bisect import bisect_right
from collections.abc import Callable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import logging
from typing import Any

from mashumaro.mixins.orjson import DataClassORJSONMixin
import numpy as np

from .const import EUCLIDEAN_MAX_DIM, FLOAT_TOLERANCE, MATKOWSKI_EPSILON, MATKOWSKI_MAX_ITER
from .exceptions import DomainMiss, EmptyGrid, InvalidModulus, MixedAmbient, NegativeArgument
from .helpers import Distance, parse_rational
from .metric import EuclideanSpace, FiniteMetricSpace, LabelSet, PointCloud
from .types import ClassificationReport, ModulusSpec, RationalConfig

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True)
class ContinuityModulus(DataClassORJSONMixin):
    """Piecewise-linear concave modulus with phi(0) = 0.

    Attributes
    ----------
    breakpoints
        Increasing ``(t, phi(t))`` pairs starting at ``(0, 0)``.
    tail_slope
        Slope of phi beyond the last breakpoint.

    """

    breakpoints: tuple[tuple[Fraction, Fraction], ...]
    tail_slope: Fraction

    class Config(RationalConfig):
        """Mashumaro config."""

    def __post_init__(self) -> None:
        """Normalize to rationals and check the modulus shape.

        Raises
        ------
        InvalidModulus
            If phi(0) != 0, breakpoints are not increasing, or phi is not
            nondecreasing and concave.

        """
        points = tuple(
            (parse_rational(t), parse_rational(v)) for t, v in self.breakpoints
        )
        object.__setattr__(self, "breakpoints", points)
        object.__setattr__(self, "tail_slope", parse_rational(self.tail_slope))

        if not points or points[0] != (0, 0):
            raise InvalidModulus("A modulus must start at the breakpoint (0, 0).")
        slopes = []
        for (t0, v0), (t1, v1) in zip(points, points[1:]):
            if t1 <= t0:
                raise InvalidModulus(f"Breakpoint {t1} does not increase.", t1)
            slopes.append((v1 - v0) / (t1 - t0))
        slopes.append(self.tail_slope)
        if any(s < 0 for s in slopes):
            raise InvalidModulus("A modulus must be nondecreasing.")
        for k, (s0, s1) in enumerate(zip(slopes, slopes[1:])):
            if s1 > s0:
                raise InvalidModulus(
                    f"Slope increases after breakpoint {points[k + 1][0]}.",
                    points[k + 1][0],
                )

    @classmethod
    def linear(cls, slope: Fraction | int | str) -> ContinuityModulus:
        """Modulus t -> slope * t."""
        return cls(breakpoints=((Fraction(0), Fraction(0)),), tail_slope=parse_rational(slope))

    @classmethod
    def from_samples(
        cls,
        phi: Callable[[Fraction], Fraction],
        ts: Sequence[Fraction | int | str],
        tail_slope: Fraction | int | str = 0,
    ) -> ContinuityModulus:
        """Chordal interpolation of ``phi`` at ``ts`` (zero is added)."""
        grid = sorted({Fraction(0), *(parse_rational(t) for t in ts)})
        return cls(
            breakpoints=tuple((t, Fraction(0) if t == 0 else phi(t)) for t in grid),
            tail_slope=parse_rational(tail_slope),
        )

    @classmethod
    def from_spec(cls, spec: ModulusSpec) -> ContinuityModulus:
        """Build from a config literal, prepending ``(0, 0)`` when absent."""
        points = [tuple(p) for p in spec.breakpoints]
        if not points or points[0][0] != 0:
            points.insert(0, (Fraction(0), Fraction(0)))
        return cls(breakpoints=tuple(points), tail_slope=spec.tail_slope)  # type: ignore[arg-type]

    @cached_property
    def slopes(self) -> tuple[Fraction, ...]:
        """Segment slopes followed by the tail slope."""
        pts = self.breakpoints
        return tuple(
            (v1 - v0) / (t1 - t0) for (t0, v0), (t1, v1) in zip(pts, pts[1:])
        ) + (self.tail_slope,)

    def __call__(self, t: Distance) -> Fraction:
        """Evaluate the modulus, see `eval_modulus`."""
        return eval_modulus(self, t)


def eval_modulus(phi: ContinuityModulus, t: Distance) -> Fraction:
    """Evaluate a modulus by linear interpolation, extending with the tail slope.

    Float arguments are converted exactly before evaluation.

    Raises
    ------
    NegativeArgument
        If ``t < 0``.

    """
    t = Fraction(t)
    if t < 0:
        raise NegativeArgument(t)
    ts = [p[0] for p in phi.breakpoints]
    k = bisect_right(ts, t) - 1
    t0, v0 = phi.breakpoints[k]
    return v0 + phi.slopes[k] * (t - t0)


def rakotch_constant(phi: ContinuityModulus, delta: Distance, d_max: Distance) -> Fraction:
    """Sup of phi(t)/t over [delta, d_max].

    The ratio is monotone on every linear piece, so segment endpoints suffice.
    """
    delta, d_max = Fraction(delta), Fraction(d_max)
    if not 0 < delta <= d_max:
        raise ValueError(f"delta {delta} must lie in (0, {d_max}].")
    ends = [delta, d_max, *(t for t, _ in phi.breakpoints if delta < t < d_max)]
    return max(phi(t) / t for t in ends)


def _banach_ratio(phi: ContinuityModulus, d_max: Fraction) -> Fraction:
    # the limit of phi(t)/t at 0+ is the first slope
    ends = [d_max, *(t for t, _ in phi.breakpoints if 0 < t < d_max)]
    return max(phi.slopes[0], *(phi(t) / t for t in ends))


def _matkowski_iterations(phi: ContinuityModulus, d_max: Fraction) -> int | None:
    epsilon = MATKOWSKI_EPSILON * float(d_max)
    t = float(d_max)
    for n in range(1, MATKOWSKI_MAX_ITER + 1):
        t_next = float(phi(t))
        if t_next < epsilon:
            return n
        if t_next >= t:
            return None
        t = t_next
    return None


def classify_modulus(
    phi: ContinuityModulus,
    d_max: Distance,
    delta_grid: Sequence[Distance],
) -> ClassificationReport:
    """Place a modulus in the Banach / Rakotch / Matkowski taxonomy at a finite scale.

    Parameters
    ----------
    phi
        The modulus.
    d_max
        Largest distance of interest, positive.
    delta_grid
        Lower cutoffs for the Rakotch test, each in (0, d_max].

    Returns
    -------
    ClassificationReport
        Verdicts with banach => rakotch => matkowski, the Banach ratio bound and
        one Rakotch constant per grid value, with the modulus itself.

    Raises
    ------
    EmptyGrid
        If ``delta_grid`` is empty.

    """
    if not delta_grid:
        raise EmptyGrid
    d_max = Fraction(d_max)
    if d_max <= 0:
        raise ValueError(f"d_max {d_max} must be positive.")

    bound = _banach_ratio(phi, d_max)
    constants = {
        str(Fraction(delta)): rakotch_constant(phi, delta, d_max) for delta in delta_grid
    }
    banach = bound < 1
    rakotch = all(c < 1 for c in constants.values())
    iterations = _matkowski_iterations(phi, d_max)
    matkowski = iterations is not None

    if banach and not rakotch:
        _LOGGER.warning("Banach modulus failed the Rakotch grid test, forcing rakotch")
        rakotch = True
    if rakotch and not matkowski:
        _LOGGER.warning(
            "Rakotch modulus did not reach %s within %s iterations, forcing matkowski",
            MATKOWSKI_EPSILON * float(d_max),
            MATKOWSKI_MAX_ITER,
        )
        matkowski = True

    _LOGGER.debug(
        "Classified modulus: banach=%s rakotch=%s matkowski=%s", banach, rakotch, matkowski
    )
    return ClassificationReport(
        banach=banach,
        rakotch=rakotch,
        matkowski=matkowski,
        lipschitz_bound=bound,
        rakotch_constants=constants,
        matkowski_iterations=iterations or 0,
        modulus=ModulusSpec.from_dict(phi.to_dict()),
    )


@dataclass(frozen=True)
class TableMap:
    """Explicit point -> point map between labels of finite metric spaces."""

    pairs: Mapping[str, str]
    name: str = ""

    @property
    def domain(self) -> tuple[str, ...]:
        """Declared domain labels."""
        return tuple(self.pairs)

    def __call__(self, point: Any) -> str:
        """Image of a label.

        Raises
        ------
        DomainMiss
            If the map has no image for the point.

        """
        try:
            return self.pairs[point]
        except (KeyError, TypeError) as e:
            raise DomainMiss(point) from e

    def apply_cloud(self, points: np.ndarray) -> np.ndarray:
        """Table maps act on labels only."""
        raise MixedAmbient("A table map cannot act on coordinates.")

    def compose(self, inner: TableMap) -> TableMap:
        """The map x -> self(inner(x)) on the domain of ``inner``."""
        return TableMap({x: self(y) for x, y in inner.pairs.items()})


@dataclass(frozen=True, eq=False)
class AffineMap:
    """Affine map x -> A x + b of R^d with d <= 3."""

    matrix: np.ndarray
    offset: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        """Convert to float arrays and check shapes."""
        matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        offset = np.atleast_1d(np.asarray(self.offset, dtype=float))
        dim = offset.shape[0]
        if matrix.shape != (dim, dim) or not 1 <= dim <= EUCLIDEAN_MAX_DIM:
            raise ValueError(f"Affine map needs a square matrix matching offset {dim}.")
        if not (np.isfinite(matrix).all() and np.isfinite(offset).all()):
            raise ValueError("Affine map entries must be finite.")
        matrix.flags.writeable = False
        offset.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def similarity(cls, scale: float, offset: Sequence[float]) -> AffineMap:
        """Map x -> scale * x + offset."""
        return cls(np.eye(len(offset)) * scale, np.asarray(offset, dtype=float))

    @property
    def dim(self) -> int:
        """Dimension of the acted-on space."""
        return int(self.offset.shape[0])

    @cached_property
    def lipschitz(self) -> float:
        """Spectral norm of the linear part."""
        return float(np.linalg.norm(self.matrix, 2))

    def __call__(self, point: Any) -> tuple[float, ...]:
        """Image of a coordinate tuple."""
        if isinstance(point, str):
            raise MixedAmbient("An affine map cannot act on labels.")
        image = self.matrix @ np.asarray(point, dtype=float) + self.offset
        return tuple(float(c) for c in image)

    def apply_cloud(self, points: np.ndarray) -> np.ndarray:
        """Images of an (n, d) coordinate array."""
        return points @ self.matrix.T + self.offset

    def __eq__(self, other: object) -> bool:
        """Compare coefficients."""
        if not isinstance(other, AffineMap):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix) and np.array_equal(
            self.offset, other.offset
        )

    __hash__ = None  # type: ignore[assignment]


PointMap = TableMap | AffineMap
Gauge = Callable[[Distance], Distance]
MapSpace = FiniteMetricSpace | LabelSet | PointCloud | EuclideanSpace


@dataclass(frozen=True)
class PairCheck:
    """Verdict of a pair scan; the witness is the first failing pair."""

    holds: bool
    witness: tuple[Any, Any] | None = None

    def __bool__(self) -> bool:
        """Truth of the verdict."""
        return self.holds


@dataclass(frozen=True)
class Oscillation:
    """Step function delta -> omega_f(delta) sampled at realized distances."""

    steps: tuple[tuple[Distance, Distance], ...] = field(default=())

    def __call__(self, t: Distance) -> Distance:
        """Largest image distance among pairs at distance <= t."""
        value: Distance = Fraction(0)
        for delta, omega in self.steps:
            if delta > t:
                break
            value = omega
        return value


def domain_points(f: PointMap, space: MapSpace) -> tuple[Any, list[Any]]:
    """Ambient and domain points the map is checked on."""
    if isinstance(space, LabelSet | PointCloud):
        return space.ambient, list(space)
    if isinstance(space, FiniteMetricSpace):
        if not isinstance(f, TableMap):
            raise MixedAmbient("An affine map cannot act on a finite metric space.")
        for x in f.domain:
            space.index_of(x)
        return space, list(f.domain)
    raise ValueError("Pair scans need a finite point set.")


def _pairs(
    f: PointMap, space: MapSpace, target: FiniteMetricSpace | None = None
) -> Iterator[tuple[Any, Any, Distance, Distance]]:
    """Unordered pairs (x, y, d(x, y), d(f x, f y)) in domain order.

    Images are measured in ``target`` when the map leaves its domain space.
    """
    ambient, points = domain_points(f, space)
    image_space = ambient if target is None else target
    if isinstance(ambient, EuclideanSpace):
        coords = np.asarray(points, dtype=float).reshape(-1, ambient.dim)
        images = f.apply_cloud(coords)
        for a in range(len(points)):
            gaps = np.linalg.norm(coords[a + 1 :] - coords[a], axis=1)
            image_gaps = np.linalg.norm(images[a + 1 :] - images[a], axis=1)
            for b, (d, e) in enumerate(zip(gaps, image_gaps), start=a + 1):
                yield points[a], points[b], float(d), float(e)
        return
    images = [f(x) for x in points]
    for a, x in enumerate(points):
        for b in range(a + 1, len(points)):
            yield (
                x,
                points[b],
                ambient.distance(x, points[b]),
                image_space.distance(images[a], images[b]),
            )


def _affine_phi_check(f: AffineMap, phi: ContinuityModulus) -> PairCheck:
    """phi(t) >= |A| t for all t, tested at breakpoints and on the tail."""
    norm = f.lipschitz
    _, _, vh = np.linalg.svd(f.matrix)
    direction = vh[0]
    for t, value in phi.breakpoints[1:]:
        if float(value) < norm * float(t) - FLOAT_TOLERANCE:
            return PairCheck(False, (tuple([0.0] * f.dim), tuple(float(t) * direction)))
    if float(phi.tail_slope) < norm - FLOAT_TOLERANCE:
        t = float(phi.breakpoints[-1][0]) + 1.0
        return PairCheck(False, (tuple([0.0] * f.dim), tuple(t * direction)))
    return PairCheck(True)


def check_phi_contracting(f: PointMap, phi: Gauge, space: MapSpace) -> PairCheck:
    """Check d(f x, f x') <= phi(d(x, x')) on every unordered pair.

    Parameters
    ----------
    f
        Table map (checked on its declared domain, or on a label set) or affine map
        (checked on a point cloud, or analytically on a whole Euclidean space).
    phi
        A `ContinuityModulus`, an `Oscillation` or any nondecreasing gauge.
    space
        Where the map is checked.

    Returns
    -------
    PairCheck
        Truthy verdict, with the first violating pair when false.

    """
    if isinstance(space, EuclideanSpace):
        if not isinstance(f, AffineMap) or not isinstance(phi, ContinuityModulus):
            raise ValueError("Whole-space checks need an affine map and a modulus.")
        return _affine_phi_check(f, phi)
    for x, y, d, e in _pairs(f, space):
        bound = phi(d)
        if isinstance(d, float):
            if e > float(bound) + FLOAT_TOLERANCE:
                return PairCheck(False, (x, y))
        elif e > bound:
            return PairCheck(False, (x, y))
    return PairCheck(True)


def check_edelstein(f: PointMap, space: MapSpace) -> PairCheck:
    """Check d(f x, f x') < d(x, x') for all distinct pairs."""
    if isinstance(space, EuclideanSpace):
        if not isinstance(f, AffineMap):
            raise MixedAmbient("A table map cannot act on a Euclidean space.")
        if f.lipschitz < 1:
            return PairCheck(True)
        _, _, vh = np.linalg.svd(f.matrix)
        return PairCheck(False, (tuple([0.0] * f.dim), tuple(float(c) for c in vh[0])))
    for x, y, d, e in _pairs(f, space):
        if e >= d:
            return PairCheck(False, (x, y))
    return PairCheck(True)


def empirical_oscillation(
    f: PointMap, space: MapSpace, target: FiniteMetricSpace | None = None
) -> Oscillation:
    """Oscillation omega_f(delta) = max{d(f x, f x') : d(x, x') <= delta}.

    Sampled at every realized positive distance; nondecreasing by construction.
    """
    largest: dict[Distance, Distance] = {}
    for _, _, d, e in _pairs(f, space, target):
        largest[d] = max(largest.get(d, e), e)
    steps = []
    running: Distance = Fraction(0)
    for d in sorted(largest):
        running = max(running, largest[d])
        steps.append((d, running))
    return Oscillation(tuple(steps))


def oscillation_modulus(
    f: PointMap, space: MapSpace, target: FiniteMetricSpace | None = None
) -> ContinuityModulus:
    """Least concave majorant of the empirical oscillation, flat beyond the last distance."""
    hull: list[tuple[Fraction, Fraction]] = [(Fraction(0), Fraction(0))]
    for d, omega in empirical_oscillation(f, space, target).steps:
        point = (Fraction(d), Fraction(omega))
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (x1 - x0) * (point[1] - y0) - (y1 - y0) * (point[0] - x0) >= 0:
                hull.pop()
            else:
                break
        hull.append(point)
    return ContinuityModulus(breakpoints=tuple(hull), tail_slope=Fraction(0))


def lipschitz_constant(f: PointMap, space: MapSpace) -> Distance:
    """Largest ratio d(f x, f x') / d(x, x'); the spectral norm on a Euclidean space."""
    if isinstance(space, EuclideanSpace):
        if not isinstance(f, AffineMap):
            raise MixedAmbient("A table map cannot act on a Euclidean space.")
        return f.lipschitz
    return max((e / d for _, _, d, e in _pairs(f, space)), default=Fraction(0))

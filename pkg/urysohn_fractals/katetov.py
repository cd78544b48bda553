"""Katetov extensions, modulus-preserving map extension and Urysohn approximations."""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
import logging
from typing import NamedTuple

import numpy as np

from .const import (
    EXTENSION_LABEL_PREFIX,
    EXTENSION_MAX_POINTS,
    URYSOHN_LABEL_PREFIX,
    URYSOHN_MAX_ATTEMPTS,
    URYSOHN_SUBSET_SIZE,
)
from .exceptions import (
    AlreadyAssigned,
    ExtensionBudgetExceeded,
    InjectivityUnavailable,
    MixedAmbient,
    ModulusViolation,
    NotIsometricCopy,
    NotKatetov,
    NotSelfSimilar,
    ZeroDistance,
)
from .hutchinson import IFSystem, hutchinson_image
from .metric import FiniteMetricSpace, LabelSet
from .moduli import ContinuityModulus, TableMap, check_phi_contracting
from .types import ExtensionStep, ExtensionTranscript

_LOGGER = logging.getLogger(__name__)

LOWER_INEQUALITY = "|k(z) - k(w)| <= d(z, w)"
UPPER_INEQUALITY = "d(z, w) <= k(z) + k(w)"


@dataclass(frozen=True)
class KatetovFunction:
    """Prescribed distances from a prospective new point to every point of ``base``."""

    base: FiniteMetricSpace
    values: Mapping[str, Fraction]

    def __call__(self, z: str) -> Fraction:
        """Prescribed distance to ``z``."""
        return self.values[z]

    def check(self) -> None:
        """Check both one-point triangle inequalities on every pair.

        Raises
        ------
        NotKatetov
            Naming the first violating pair and the broken inequality.

        """
        labels = self.base.labels
        for z in labels:
            if self.values[z] < 0:
                raise NotKatetov(z, z, "k(z) >= 0")
        for a, z in enumerate(labels):
            kz, row = self.values[z], self.base.dist[a]
            for b in range(a + 1, len(labels)):
                w = labels[b]
                kw, d = self.values[w], row[b]
                if abs(kz - kw) > d:
                    raise NotKatetov(z, w, LOWER_INEQUALITY)
                if d > kz + kw:
                    raise NotKatetov(z, w, UPPER_INEQUALITY)


@dataclass
class ExtensionState:
    """Progress of one map extension over a growing ambient.

    Attributes
    ----------
    domain
        The space A the map is extended over.
    ambient
        The growing target space.
    assigned
        The partial map, B_n -> ambient, in assignment order.
    modulus
        The modulus phi the extension must respect.
    order
        Unassigned domain points, in the order they are treated.

    """

    domain: FiniteMetricSpace
    ambient: FiniteMetricSpace
    assigned: dict[str, str]
    modulus: ContinuityModulus
    order: deque[str] = field(default_factory=deque)
    transcript: list[ExtensionStep] = field(default_factory=list)
    injective: bool = False
    reuse: bool = False
    map_index: int | None = None
    verified: int = 0

    def verify_modulus(self) -> None:
        """Check omega <= phi on pairs involving newly assigned points.

        Raises
        ------
        ModulusViolation
            Naming the first violating pair.

        """
        points = list(self.assigned)
        for n in range(self.verified, len(points)):
            x = points[n]
            for y in points[:n]:
                image_gap = self.ambient.distance(self.assigned[x], self.assigned[y])
                if image_gap > self.modulus(self.domain.distance(x, y)):
                    raise ModulusViolation(y, x)
        self.verified = len(points)


class Extension(NamedTuple):
    """Grown ambient, total map and the extension transcript."""

    ambient: FiniteMetricSpace
    map: TableMap
    transcript: ExtensionTranscript


class SystemExtension(NamedTuple):
    """Extended function system on the grown ambient and its transcript."""

    system: IFSystem
    transcript: ExtensionTranscript


def katetov_from_map(state: ExtensionState, a: str) -> KatetovFunction:
    """Distances for the image of ``a``: k(z) = min over b of d(z, f b) + phi(d(b, a)).

    ``z`` ranges over the whole current ambient.

    Raises
    ------
    AlreadyAssigned
        If ``a`` already has an image.
    ModulusViolation
        If the partial map already breaks omega <= phi.

    """
    if a in state.assigned:
        raise AlreadyAssigned(a)
    if not state.assigned:
        raise ValueError("The partial map needs at least one assigned point.")
    state.verify_modulus()

    ambient = state.ambient
    terms = [
        (ambient.index_of(image), state.modulus(state.domain.distance(b, a)))
        for b, image in state.assigned.items()
    ]
    values = {
        z: min(row[j] + bound for j, bound in terms)
        for z, row in zip(ambient.labels, ambient.dist)
    }
    return KatetovFunction(ambient, values)


def realize_point(
    ambient: FiniteMetricSpace,
    k: KatetovFunction,
    label: str,
    allow_collapse: bool = False,
) -> FiniteMetricSpace:
    """Adjoin one point at the prescribed distances (one-point amalgamation).

    Parameters
    ----------
    ambient
        The space to grow.
    k
        A Katetov function over ``ambient``.
    label
        Label of the new point.
    allow_collapse
        When ``k`` vanishes at a point, return ``ambient`` unchanged instead of
        failing; that point realizes ``k``.

    Raises
    ------
    MixedAmbient
        If ``k`` is defined over another space.
    NotKatetov
        If ``k`` breaks a one-point triangle inequality.
    ZeroDistance
        If ``k`` vanishes at a point and collapse is not allowed.

    """
    if k.base.labels != ambient.labels:
        raise MixedAmbient("The Katetov function is defined over another space.")
    k.check()
    zero = next((z for z in ambient.labels if k(z) == 0), None)
    if zero is not None:
        if allow_collapse:
            return ambient
        raise ZeroDistance(zero)
    return ambient.with_point(label, k.values)


def _fresh_label(ambient: FiniteMetricSpace, base: str) -> str:
    label, n = base, 1
    while label in ambient:
        n += 1
        label = f"{base}_{n}"
    return label


def _reuse_candidate(state: ExtensionState, a: str) -> str | None:
    """Existing point within phi(d(b, a)) of every f(b), closest to the images."""
    ambient = state.ambient
    bounds = [
        (ambient.index_of(image), state.modulus(state.domain.distance(b, a)))
        for b, image in state.assigned.items()
    ]
    taken = set(state.assigned.values()) if state.injective else set()
    best: tuple[Fraction, int] | None = None
    for i, row in enumerate(ambient.dist):
        if ambient.labels[i] in taken:
            continue
        if all(row[j] <= bound for j, bound in bounds):
            key = (min(row[j] for j, _ in bounds), i)
            if best is None or key < best:
                best = key
    return None if best is None else ambient.labels[best[1]]


def _extend_point(state: ExtensionState, a: str) -> None:
    """Assign an image to ``a``, growing the ambient when no existing point fits."""
    k = katetov_from_map(state, a)
    image = _reuse_candidate(state, a) if state.reuse else None
    reused = image is not None
    if image is None:
        zero = next((z for z in state.ambient.labels if k(z) == 0), None)
        if zero is not None:
            image, reused = zero, True
        else:
            image = _fresh_label(state.ambient, f"{EXTENSION_LABEL_PREFIX}{a}")
            state.ambient = realize_point(state.ambient, k, image)
    state.assigned[a] = image
    state.transcript.append(
        ExtensionStep(
            point=a,
            image=image,
            katetov=dict(k.values),
            ambient_size=len(state.ambient),
            reused=reused,
            map_index=state.map_index,
        )
    )
    _LOGGER.debug(
        "Extension step: %s -> %s (reused=%s, ambient size %s)",
        a,
        image,
        reused,
        len(state.ambient),
    )


def _check_injectivity(
    domain: FiniteMetricSpace, f: Mapping[str, str], phi: ContinuityModulus
) -> None:
    for t in domain.realized_distances():
        if phi(t) == 0:
            raise InjectivityUnavailable(
                f"The modulus vanishes at the realized distance {t}.", t
            )
    if len(set(f.values())) != len(f):
        raise InjectivityUnavailable("The partial map is not injective.")


def extend_map(
    domain: FiniteMetricSpace,
    subset: Sequence[str],
    f: Mapping[str, str],
    phi: ContinuityModulus,
    ambient: FiniteMetricSpace,
    order: Sequence[str] | None = None,
    injective: bool = False,
    reuse: bool = False,
) -> Extension:
    """Extend f: B -> ambient to all of A keeping omega <= phi.

    Parameters
    ----------
    domain
        The space A.
    subset
        The non-empty set B of A where ``f`` is defined.
    f
        The partial map, images labeled in ``ambient``.
    phi
        The modulus to preserve.
    ambient
        Target space, grown by one-point amalgamation as needed.
    order
        Enumeration of A minus B; insertion order of A by default. Points of B
        are skipped.
    injective
        Require an injective extension.
    reuse
        Map a point onto an existing ambient point whenever one satisfies
        every modulus constraint, before adjoining a new one.

    Returns
    -------
    Extension
        Grown ambient, the total map and the step transcript.

    Raises
    ------
    ModulusViolation
        If ``f`` already breaks omega <= phi on B.
    InjectivityUnavailable
        If injectivity is requested but phi vanishes at a realized positive
        distance or ``f`` is not injective.

    """
    b_set = set(subset)
    if not b_set:
        raise ValueError("The subset B must be non-empty.")
    if set(f) != b_set:
        raise ValueError("The partial map must be defined exactly on B.")
    for x in b_set:
        domain.index_of(x)
        ambient.index_of(f[x])
    if order is None:
        order = [x for x in domain.labels if x not in b_set]
    for x in order:
        domain.index_of(x)
    missing = set(domain.labels) - b_set - set(order)
    if missing:
        raise ValueError(f"The order misses points {sorted(missing)}.")

    state = ExtensionState(
        domain=domain,
        ambient=ambient,
        assigned={x: f[x] for x in domain.labels if x in b_set},
        modulus=phi,
        order=deque(order),
        injective=injective,
        reuse=reuse,
    )
    state.verify_modulus()
    if injective:
        _check_injectivity(domain, state.assigned, phi)

    while state.order:
        a = state.order.popleft()
        if a in state.assigned:
            continue
        _extend_point(state, a)

    state.verify_modulus()
    if any(state.assigned[x] != f[x] for x in b_set):
        raise ValueError("The extension changed the map on B.")
    return Extension(
        state.ambient,
        TableMap({x: state.assigned[x] for x in domain.labels}),
        ExtensionTranscript(steps=state.transcript),
    )


def extend_system(
    space: FiniteMetricSpace,
    system: IFSystem,
    moduli: Sequence[ContinuityModulus],
    ambient: FiniteMetricSpace,
    order: Sequence[str] | None = None,
) -> SystemExtension:
    """Extend every map of a fractal's function system to self-maps of an ambient.

    Parameters
    ----------
    space
        The fractal X, with X equal to the union of its images.
    system
        Table maps of X into itself.
    moduli
        One modulus per map, each verified on X.
    ambient
        A space containing X isometrically under the same labels.
    order
        Enumeration of the ambient points outside X; insertion order by default.

    Returns
    -------
    SystemExtension
        The extended system on the grown ambient (moduli attached and verified)
        and the transcript of all steps.

    Raises
    ------
    NotIsometricCopy
        If X does not sit isometrically in ``ambient``.
    NotSelfSimilar
        If X is not the union of its images.
    ModulusViolation
        If a map breaks its modulus on X.
    ExtensionBudgetExceeded
        If the ambient grows beyond the point budget.

    """
    if len(moduli) != len(system):
        raise ValueError("Moduli must pair up with maps.")
    defect = space.isometry_defect(ambient)
    if defect is not None:
        raise NotIsometricCopy(*defect)
    images = {f(x) for f in system.maps for x in space.labels}
    if images != set(space.labels):
        raise NotSelfSimilar(images ^ set(space.labels))
    for f, phi in zip(system.maps, moduli):
        check = check_phi_contracting(f, phi, space)
        if not check:
            assert check.witness is not None
            raise ModulusViolation(*check.witness)

    assigned = [
        {x: f(x) for x in space.labels} for f in system.maps  # type: ignore[union-attr]
    ]
    queue = deque(
        order if order is not None else [x for x in ambient.labels if x not in space]
    )
    transcript: list[ExtensionStep] = []
    grown = ambient
    while queue:
        a = queue.popleft()
        for i, phi in enumerate(moduli):
            if a in assigned[i]:
                continue
            state = ExtensionState(
                domain=grown,
                ambient=grown,
                assigned=assigned[i],
                modulus=phi,
                transcript=transcript,
                reuse=True,
                map_index=i,
                verified=len(assigned[i]),
            )
            _extend_point(state, a)
            if state.ambient is not grown:
                queue.extend(state.ambient.labels[len(grown) :])
                grown = state.ambient
                if len(grown) > EXTENSION_MAX_POINTS:
                    raise ExtensionBudgetExceeded(EXTENSION_MAX_POINTS)

    extended = IFSystem(
        tuple(TableMap({x: m[x] for x in grown.labels}) for m in assigned),
        grown,
        tuple(moduli),
    )
    fixed = LabelSet(grown, space.labels)
    if hutchinson_image(extended, fixed) != fixed:
        raise NotSelfSimilar(set(hutchinson_image(extended, fixed)) ^ set(space.labels))
    _LOGGER.debug("Extended %s maps over %s points", len(extended), len(grown))
    return SystemExtension(extended, ExtensionTranscript(steps=transcript))


def _grid_katetov(
    space: FiniteMetricSpace,
    grid: Sequence[Fraction],
    rng: np.random.Generator,
) -> dict[str, Fraction] | None:
    """Random grid values on a random small subset satisfying both inequalities."""
    size = int(rng.integers(1, min(URYSOHN_SUBSET_SIZE, len(space)) + 1))
    for _ in range(URYSOHN_MAX_ATTEMPTS):
        picks = sorted(int(i) for i in rng.choice(len(space), size=size, replace=False))
        values = {space.labels[i]: grid[int(rng.integers(len(grid)))] for i in picks}
        try:
            KatetovFunction(space.subspace(list(values)), values).check()
        except NotKatetov:
            continue
        return values
    return None


def katetov_closure(
    space: FiniteMetricSpace, values: Mapping[str, Fraction]
) -> KatetovFunction:
    """Extend prescribed distances on a subset to the whole space by min(d(z, s) + k(s))."""
    columns = [(space.index_of(s), v) for s, v in values.items()]
    return KatetovFunction(
        space,
        {z: min(row[j] + v for j, v in columns) for z, row in zip(space.labels, space.dist)},
    )


def build_urysohn_approx(
    seed_space: FiniteMetricSpace,
    rounds: int,
    grid: Sequence[Fraction],
    seed: int,
) -> FiniteMetricSpace:
    """Grow a finite approximation of the Urysohn space.

    Each round draws grid-valued distances on a random subset of at most four
    points, resampling candidates that break the triangle inequalities, and
    adjoins a point realizing them. A round without a valid candidate after
    1000 attempts is skipped.
    """
    if rounds < 0:
        raise ValueError("rounds must be nonnegative.")
    grid = [Fraction(g) for g in grid]
    if not grid or any(g <= 0 for g in grid):
        raise ValueError("Grid values must be positive.")
    rng = np.random.default_rng(seed)
    space = seed_space
    for n in range(rounds):
        values = _grid_katetov(space, grid, rng)
        if values is None:
            _LOGGER.warning("Urysohn round %s found no valid candidate, skipping", n)
            continue
        k = katetov_closure(space, values)
        label = _fresh_label(space, f"{URYSOHN_LABEL_PREFIX}{len(space)}")
        space = realize_point(space, k, label)
    _LOGGER.debug("Urysohn approximation grew to %s points", len(space))
    return space


def extension_coverage(
    space: FiniteMetricSpace,
    grid: Sequence[Fraction],
    samples: int,
    seed: int,
) -> Fraction:
    """Share of random grid Katetov candidates already realized by an existing point.

    A candidate over a subset is realized when some point matches every
    prescribed distance within the grid resolution.
    """
    grid = sorted({Fraction(g) for g in grid})
    gaps = [b - a for a, b in zip(grid, grid[1:])]
    resolution = min(gaps) if gaps else grid[0]
    rng = np.random.default_rng(seed)
    hits = checked = 0
    for _ in range(samples):
        values = _grid_katetov(space, grid, rng)
        if values is None:
            continue
        checked += 1
        columns = [(space.index_of(s), v) for s, v in values.items()]
        if any(all(abs(row[j] - v) <= resolution for j, v in columns) for row in space.dist):
            hits += 1
    return Fraction(hits, checked) if checked else Fraction(0)


def modulus_defect(
    domain: FiniteMetricSpace,
    ambient: FiniteMetricSpace,
    f: Callable[[str], str],
    phi: ContinuityModulus,
    points: Iterable[str] | None = None,
) -> Fraction:
    """Largest d(f x, f x') - phi(d(x, x')) over pairs; nonpositive when omega <= phi."""
    labels = list(domain.labels if points is None else points)
    return max(
        (
            ambient.distance(f(x), f(y)) - phi(domain.distance(x, y))
            for a, x in enumerate(labels)
            for y in labels[a + 1 :]
        ),
        default=Fraction(0),
    )

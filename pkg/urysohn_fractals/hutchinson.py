"""Function systems, the Hutchinson operator and attractor approximation."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
import logging
from typing import Any, NamedTuple

import numpy as np

from .const import HYPERSPACE_CLOUD_SIZE, HYPERSPACE_MAX_SUBSET
from .exceptions import EmptyCode, MixedAmbient, ModulusViolation, NonConvergence
from .helpers import Distance
from .metric import (
    Ambient,
    CompactSet,
    EuclideanSpace,
    FiniteMetricSpace,
    LabelSet,
    PointCloud,
    hausdorff_distance,
    same_ambient,
    set_image,
)
from .moduli import AffineMap, ContinuityModulus, PointMap, TableMap, check_phi_contracting
from .types import HyperspaceReport

_LOGGER = logging.getLogger(__name__)

Code = Sequence[int]


@dataclass(frozen=True)
class IFSystem:
    """Finite function system over one ambient space.

    Attributes
    ----------
    maps
        Table maps over a finite metric space, or affine maps of R^d.
    ambient
        The shared ambient space.
    moduli
        Optional per-map modulus claims, verified on construction.

    """

    maps: tuple[PointMap, ...]
    ambient: Ambient
    moduli: tuple[ContinuityModulus, ...] | None = None

    def __post_init__(self) -> None:
        """Check that all maps act on the ambient and honor their moduli.

        Raises
        ------
        ValueError
            If the system is empty or moduli do not pair up with maps.
        MixedAmbient
            If a map does not act on the ambient space.
        ModulusViolation
            If a map breaks its modulus claim; names the first failing pair.

        """
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.maps:
            raise ValueError("A function system needs at least one map.")
        for f in self.maps:
            self._check_map(f)
        if self.moduli is not None:
            object.__setattr__(self, "moduli", tuple(self.moduli))
            if len(self.moduli) != len(self.maps):
                raise ValueError("Moduli must pair up with maps.")
            for f, phi in zip(self.maps, self.moduli):
                check = check_phi_contracting(f, phi, self.ambient)
                if not check:
                    assert check.witness is not None
                    raise ModulusViolation(*check.witness)

    def _check_map(self, f: PointMap) -> None:
        if isinstance(self.ambient, FiniteMetricSpace):
            if not isinstance(f, TableMap):
                raise MixedAmbient("Affine maps need a Euclidean ambient.")
            for x, y in f.pairs.items():
                self.ambient.index_of(x)
                self.ambient.index_of(y)
        elif not isinstance(f, AffineMap) or f.dim != self.ambient.dim:
            raise MixedAmbient("Maps must be affine maps of the ambient dimension.")

    def __len__(self) -> int:
        """Return the number of maps."""
        return len(self.maps)

    @property
    def domain(self) -> tuple[Any, ...] | None:
        """Points every table map is defined on; None for affine systems."""
        if isinstance(self.ambient, EuclideanSpace):
            return None
        shared = set.intersection(*(set(f.pairs) for f in self.maps))  # type: ignore[union-attr]
        return tuple(x for x in self.ambient.labels if x in shared)


class AttractorResult(NamedTuple):
    """Attractor approximation and the successive Hausdorff steps."""

    attractor: CompactSet
    history: list[Distance]


def hutchinson_image(system: IFSystem, k: CompactSet) -> CompactSet:
    """Union of the images of ``k`` under every map of the system.

    Raises
    ------
    MixedAmbient
        If ``k`` lives outside the system's ambient.
    DomainMiss
        If a table map has no image for a member of ``k``.

    """
    if not same_ambient(system.ambient, k.ambient):
        raise MixedAmbient
    if isinstance(k, LabelSet):
        return LabelSet(k.ambient, [f(x) for f in system.maps for x in k.members])
    assert isinstance(k, PointCloud)
    return PointCloud(
        k.ambient, np.vstack([f.apply_cloud(k.points) for f in system.maps])
    )


def iterate_to_attractor(
    system: IFSystem, k0: CompactSet, tol: Distance, max_iter: int
) -> AttractorResult:
    """Iterate the Hutchinson operator until one step moves by at most ``tol``.

    Parameters
    ----------
    system
        The function system.
    k0
        Starting compact set.
    tol
        Positive step tolerance on d_H(K_n, K_{n+1}).
    max_iter
        Iteration budget.

    Returns
    -------
    AttractorResult
        The iterate K_{n+1} of the first small step, and every step distance.

    Raises
    ------
    NonConvergence
        If no step is small enough within ``max_iter`` iterations.

    """
    if tol <= 0:
        raise ValueError(f"Tolerance {tol} must be positive.")
    history: list[Distance] = []
    current = k0
    for n in range(1, max_iter + 1):
        following = hutchinson_image(system, current)
        step = hausdorff_distance(current, following)
        history.append(step)
        _LOGGER.debug("Hutchinson step %s: %s points, d_H=%s", n, len(following), step)
        if step <= tol:
            return AttractorResult(following, history)
        current = following
    raise NonConvergence(max_iter, history)


def _check_code(system: IFSystem, code: Code) -> None:
    if not code:
        raise EmptyCode
    for i in code:
        if not 0 <= i < len(system):
            raise ValueError(f"Map index {i} is out of range.")


def code_point(system: IFSystem, code: Code, d: CompactSet) -> Any:
    """Evaluate f_0 o ... o f_n at the first member of ``d``.

    The last letter acts first. The result depends on the representative by at
    most `code_diameter`.

    Raises
    ------
    EmptyCode
        If the code has no letters.

    """
    _check_code(system, code)
    point = d.first()
    for i in reversed(code):
        point = system.maps[i](point)
    return point


def code_diameter(system: IFSystem, code: Code, d: CompactSet) -> Distance:
    """Diameter of f_0 o ... o f_n (D).

    Raises
    ------
    EmptyCode
        If the code has no letters.

    """
    _check_code(system, code)
    image = d
    for i in reversed(code):
        image = set_image(system.maps[i], image)
    return image.diameter()


def chaos_game(
    system: IFSystem, x0: Any, n_steps: int, burn_in: int, seed: int
) -> CompactSet:
    """Random orbit under uniformly chosen maps, kept after the burn-in.

    The orbit x_1, ..., x_n is deterministic given ``seed``; points x_k with
    k > burn_in are returned.
    """
    if not 0 <= burn_in < n_steps:
        raise ValueError("Chaos game needs n_steps > burn_in >= 0.")
    rng = np.random.default_rng(seed)
    choices = rng.integers(len(system), size=n_steps)
    if isinstance(system.ambient, FiniteMetricSpace):
        labels = []
        point = x0
        for step, i in enumerate(choices, start=1):
            point = system.maps[i](point)
            if step > burn_in:
                labels.append(point)
        return LabelSet(system.ambient, labels)

    orbit = np.empty((n_steps, system.ambient.dim))
    point = np.asarray(x0, dtype=float)
    for step, i in enumerate(choices):
        f = system.maps[i]
        assert isinstance(f, AffineMap)
        point = f.matrix @ point + f.offset
        orbit[step] = point
    _LOGGER.debug("Chaos game emitted %s points", n_steps - burn_in)
    return PointCloud(system.ambient, orbit[burn_in:])


def random_compact_set(
    ambient: Ambient, cloud: Sequence[Any] | np.ndarray, rng: np.random.Generator
) -> CompactSet:
    """Uniform subset of 1 to 8 points drawn from ``cloud``."""
    size = int(rng.integers(1, HYPERSPACE_MAX_SUBSET + 1))
    picks = rng.choice(len(cloud), size=min(size, len(cloud)), replace=False)
    return CompactSet.of(ambient, [cloud[int(i)] for i in sorted(picks)])


def hyperspace_contraction_report(
    system: IFSystem, n_pairs: int, seed: int
) -> HyperspaceReport:
    """Largest observed ratio d_H(F(A), F(B)) / d_H(A, B) over random pairs.

    Pairs are drawn from the common domain of a table system, or from 64 seeded
    uniform points of the unit cube for an affine system. Pairs with A = B are
    skipped and counted.
    """
    rng = np.random.default_rng(seed)
    cloud: Sequence[Any] | np.ndarray
    if system.domain is None:
        assert isinstance(system.ambient, EuclideanSpace)
        cloud = rng.random((HYPERSPACE_CLOUD_SIZE, system.ambient.dim))
    else:
        cloud = system.domain

    ratio: Distance = Fraction(0) if system.domain is not None else 0.0
    skipped = 0
    for _ in range(n_pairs):
        a = random_compact_set(system.ambient, cloud, rng)
        b = random_compact_set(system.ambient, cloud, rng)
        spread = hausdorff_distance(a, b)
        if spread == 0:
            skipped += 1
            continue
        image_spread = hausdorff_distance(
            hutchinson_image(system, a), hutchinson_image(system, b)
        )
        ratio = max(ratio, image_spread / spread)
    _LOGGER.debug("Hyperspace report: max ratio %s, %s degenerate pairs", ratio, skipped)
    return HyperspaceReport(
        max_ratio=float(ratio),
        pairs_evaluated=n_pairs - skipped,
        degenerate_skipped=skipped,
        exact_ratio=ratio if isinstance(ratio, Fraction) else None,
    )

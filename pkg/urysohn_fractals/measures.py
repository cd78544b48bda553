"""Discrete probability measures and the exact Wasserstein-1 lift."""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
import logging
from typing import Any

import numpy as np

from .const import MEASURE_SUPPORT_RANGE, MEASURE_WEIGHT_DENOMINATOR
from .exceptions import InvalidMeasure, MixedAmbient, NotContractingInput
from .hutchinson import IFSystem
from .metric import Ambient, EuclideanSpace, same_ambient
from .moduli import Gauge, MapSpace, PointMap, check_phi_contracting, domain_points
from .types import LiftReport, LiftTrial

_LOGGER = logging.getLogger(__name__)

Cell = tuple[int, int]


def _as_point(ambient: Ambient, point: Any) -> Any:
    if isinstance(ambient, EuclideanSpace):
        return tuple(float(c) for c in point)
    return point


def _exact_distance(ambient: Ambient, p: Any, q: Any) -> Fraction:
    return Fraction(ambient.distance(p, q))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure with rational weights."""

    ambient: Ambient
    support: tuple[Any, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        """Check positivity, total mass and distinct support.

        Raises
        ------
        InvalidMeasure
            If weights are not positive, do not sum to one or the support repeats.

        """
        support = tuple(_as_point(self.ambient, p) for p in self.support)
        weights = tuple(Fraction(w) for w in self.weights)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if not support or len(support) != len(weights):
            raise InvalidMeasure("Support and weights must be non-empty and pair up.")
        if any(w <= 0 for w in weights):
            raise InvalidMeasure("Weights must be positive.")
        if sum(weights) != 1:
            raise InvalidMeasure(f"Weights sum to {sum(weights)}, not 1.")
        if len(set(support)) != len(support):
            raise InvalidMeasure("Support points must be distinct.")
        for p in support:
            if p not in self.ambient:
                raise MixedAmbient(f"Point {p} is not in the ambient space.")

    @classmethod
    def from_masses(cls, ambient: Ambient, masses: Iterable[tuple[Any, Fraction]]) -> DiscreteMeasure:
        """Merge repeated points, keeping first-appearance order and dropping zeros."""
        merged: dict[Any, Fraction] = {}
        for p, w in masses:
            p = _as_point(ambient, p)
            merged[p] = merged.get(p, Fraction(0)) + w
        kept = [(p, w) for p, w in merged.items() if w]
        return cls(ambient, tuple(p for p, _ in kept), tuple(w for _, w in kept))

    def as_dict(self) -> dict[Any, Fraction]:
        """Mass of each support point."""
        return dict(zip(self.support, self.weights))

    def __len__(self) -> int:
        """Return the support size."""
        return len(self.support)

    def __eq__(self, other: object) -> bool:
        """Equal masses on equal points."""
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return same_ambient(self.ambient, other.ambient) and self.as_dict() == other.as_dict()

    def __hash__(self) -> int:
        """Hash by masses."""
        return hash(frozenset(self.as_dict().items()))

    def __repr__(self) -> str:
        """Represent by masses."""
        masses = ", ".join(f"{w}*{p}" for p, w in zip(self.support, self.weights))
        return f"DiscreteMeasure({masses})"


@dataclass(frozen=True)
class TransportPlan:
    """Coupling of two discrete measures: rows over one support, columns over the other."""

    ambient: Ambient
    rows: tuple[Any, ...]
    columns: tuple[Any, ...]
    matrix: tuple[tuple[Fraction, ...], ...]

    def first_marginal(self) -> DiscreteMeasure:
        """Row sums as a measure."""
        return DiscreteMeasure.from_masses(
            self.ambient, ((x, sum(row)) for x, row in zip(self.rows, self.matrix))
        )

    def second_marginal(self) -> DiscreteMeasure:
        """Column sums as a measure."""
        return DiscreteMeasure.from_masses(
            self.ambient,
            (
                (y, sum(row[j] for row in self.matrix))
                for j, y in enumerate(self.columns)
            ),
        )

    def cells(self) -> Iterable[tuple[Any, Any, Fraction]]:
        """Support of the plan as (x, y, mass)."""
        for x, row in zip(self.rows, self.matrix):
            for y, mass in zip(self.columns, row):
                if mass:
                    yield x, y, mass

    def cost(self, gauge: Callable[[Fraction], Fraction] | None = None) -> Fraction:
        """Integral of d (or of gauge o d) against the plan."""
        total = Fraction(0)
        for x, y, mass in self.cells():
            d = _exact_distance(self.ambient, x, y)
            total += mass * (d if gauge is None else Fraction(gauge(d)))
        return total

    def far_mass(self, delta: Fraction) -> Fraction:
        """Mass the plan moves across a distance of at least ``delta``."""
        return sum(
            (
                mass
                for x, y, mass in self.cells()
                if _exact_distance(self.ambient, x, y) >= delta
            ),
            Fraction(0),
        )


def dirac(ambient: Ambient, x: Any) -> DiscreteMeasure:
    """Point mass at ``x``."""
    return DiscreteMeasure(ambient, (x,), (Fraction(1),))


def pushforward(f: PointMap, mu: DiscreteMeasure) -> DiscreteMeasure:
    """Image measure of ``mu`` under ``f``; masses of colliding images add up.

    Raises
    ------
    DomainMiss
        If ``f`` has no image for a support point.

    """
    return DiscreteMeasure.from_masses(
        mu.ambient, ((f(x), w) for x, w in zip(mu.support, mu.weights))
    )


def coupling_pushforward(plan: TransportPlan, f: PointMap) -> TransportPlan:
    """Image of a coupling under f x f.

    The marginals of the result are the pushforwards of the plan's marginals.
    """
    rows = tuple(dict.fromkeys(_as_point(plan.ambient, f(x)) for x in plan.rows))
    columns = tuple(dict.fromkeys(_as_point(plan.ambient, f(y)) for y in plan.columns))
    row_at = {x: i for i, x in enumerate(rows)}
    column_at = {y: j for j, y in enumerate(columns)}
    matrix = [[Fraction(0)] * len(columns) for _ in rows]
    for x, row in zip(plan.rows, plan.matrix):
        i = row_at[_as_point(plan.ambient, f(x))]
        for y, mass in zip(plan.columns, row):
            matrix[i][column_at[_as_point(plan.ambient, f(y))]] += mass
    return TransportPlan(plan.ambient, rows, columns, tuple(map(tuple, matrix)))


def _northwest_corner(
    supply: list[Fraction], demand: list[Fraction]
) -> tuple[dict[Cell, Fraction], list[Cell]]:
    supply, demand = list(supply), list(demand)
    m, n = len(supply), len(demand)
    flow: dict[Cell, Fraction] = {}
    basis: list[Cell] = []
    i = j = 0
    while i < m and j < n:
        q = min(supply[i], demand[j])
        flow[(i, j)] = q
        basis.append((i, j))
        supply[i] -= q
        demand[j] -= q
        if supply[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    return flow, basis


def _tree_links(basis: Iterable[Cell]) -> dict[tuple[str, int], list[tuple[str, int]]]:
    links: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for i, j in basis:
        links.setdefault(("r", i), []).append(("c", j))
        links.setdefault(("c", j), []).append(("r", i))
    return links


def _potentials(
    cost: list[list[Fraction]], basis: Iterable[Cell], m: int, n: int
) -> tuple[list[Fraction], list[Fraction]]:
    links = _tree_links(basis)
    u: list[Fraction | None] = [None] * m
    v: list[Fraction | None] = [None] * n
    u[0] = Fraction(0)
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        for other_kind, other in links.get((kind, k), []):
            if kind == "r" and v[other] is None:
                v[other] = cost[k][other] - u[k]  # type: ignore[operator]
                queue.append((other_kind, other))
            elif kind == "c" and u[other] is None:
                u[other] = cost[other][k] - v[k]  # type: ignore[operator]
                queue.append((other_kind, other))
    return u, v  # type: ignore[return-value]


def _cycle(basis: Iterable[Cell], entering: Cell) -> list[Cell]:
    """Entering cell followed by the tree path closing the cycle."""
    links = _tree_links(basis)
    start, goal = ("r", entering[0]), ("c", entering[1])
    parent: dict[tuple[str, int], tuple[str, int] | None] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nxt in links.get(node, []):
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = [goal]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])  # type: ignore[arg-type]
    path.reverse()
    cells = [entering]
    for a, b in zip(path, path[1:]):
        row, column = (a[1], b[1]) if a[0] == "r" else (b[1], a[1])
        cells.append((row, column))
    return cells


def _transport_simplex(
    supply: list[Fraction], demand: list[Fraction], cost: list[list[Fraction]]
) -> dict[Cell, Fraction]:
    """Exact transportation simplex with smallest-index pivoting."""
    m, n = len(supply), len(demand)
    flow, basis = _northwest_corner(supply, demand)
    pivots = 0
    while True:
        u, v = _potentials(cost, basis, m, n)
        in_basis = set(basis)
        entering = next(
            (
                (i, j)
                for i in range(m)
                for j in range(n)
                if (i, j) not in in_basis and cost[i][j] - u[i] - v[j] < 0
            ),
            None,
        )
        if entering is None:
            break
        cycle = _cycle(basis, entering)
        minus = cycle[1::2]
        theta = min(flow[c] for c in minus)
        leaving = min(c for c in minus if flow[c] == theta)
        for c in cycle[0::2]:
            flow[c] = flow.get(c, Fraction(0)) + theta
        for c in minus:
            flow[c] -= theta
        basis.remove(leaving)
        del flow[leaving]
        basis.append(entering)
        pivots += 1
    _LOGGER.debug("Transport simplex finished after %s pivots", pivots)
    return flow


def wasserstein1(mu: DiscreteMeasure, eta: DiscreteMeasure) -> tuple[Fraction, TransportPlan]:
    """Exact Wasserstein-1 distance with one optimal coupling.

    Float distances of Euclidean ambients are converted exactly to rationals.

    Returns
    -------
    tuple[Fraction, TransportPlan]
        Optimal transport cost and an optimal plan (rows over ``mu``'s support).

    Raises
    ------
    MixedAmbient
        If the measures live in different spaces.

    """
    if not same_ambient(mu.ambient, eta.ambient):
        raise MixedAmbient
    cost = [[_exact_distance(mu.ambient, x, y) for y in eta.support] for x in mu.support]
    flow = _transport_simplex(list(mu.weights), list(eta.weights), cost)
    matrix = tuple(
        tuple(flow.get((i, j), Fraction(0)) for j in range(len(eta))) for i in range(len(mu))
    )
    plan = TransportPlan(mu.ambient, mu.support, eta.support, matrix)
    return plan.cost(), plan


def random_measure(
    ambient: Ambient, points: Sequence[Any], rng: np.random.Generator
) -> DiscreteMeasure:
    """Random measure on 2 to 6 of ``points`` with weights over denominator 1000.

    Weights are the gaps between sorted distinct cut points, a rational
    stand-in for a flat Dirichlet draw.
    """
    low, high = MEASURE_SUPPORT_RANGE
    size = min(int(rng.integers(low, high + 1)), len(points))
    picks = sorted(int(i) for i in rng.choice(len(points), size=size, replace=False))
    cuts = sorted(
        int(c)
        for c in rng.choice(
            np.arange(1, MEASURE_WEIGHT_DENOMINATOR), size=size - 1, replace=False
        )
    )
    bounds = [0, *cuts, MEASURE_WEIGHT_DENOMINATOR]
    weights = tuple(
        Fraction(b - a, MEASURE_WEIGHT_DENOMINATOR) for a, b in zip(bounds, bounds[1:])
    )
    return DiscreteMeasure(ambient, tuple(points[i] for i in picks), weights)


def lift_system(system: IFSystem) -> tuple[Callable[[DiscreteMeasure], DiscreteMeasure], ...]:
    """The lifted maps mu -> Pf(mu), one per map of the system."""
    return tuple(partial(pushforward, f) for f in system.maps)


def lifted_hutchinson_image(
    system: IFSystem, measures: Iterable[DiscreteMeasure]
) -> list[DiscreteMeasure]:
    """Distinct images of a finite family of measures under the lifted system."""
    lifted = lift_system(system)
    return list(dict.fromkeys(pf(mu) for pf in lifted for mu in measures))


def _check_lift_input(f: PointMap, phi: Gauge, space: MapSpace) -> None:
    check = check_phi_contracting(f, phi, space)
    if not check:
        assert check.witness is not None
        raise NotContractingInput(*check.witness)
    ambient, points = domain_points(f, space)
    for a, x in enumerate(points):
        for y in points[a + 1 :]:
            d = _exact_distance(ambient, x, y)
            if d and Fraction(phi(d)) >= d:
                raise NotContractingInput(x, y)


def _half_diameter(ambient: Ambient, points: Sequence[Any]) -> Fraction:
    return max(
        _exact_distance(ambient, x, y) for a, x in enumerate(points) for y in points[a + 1 :]
    ) / 2


def _lift_trial(
    f: PointMap,
    phi: Gauge,
    ambient: Ambient,
    points: Sequence[Any],
    delta: Fraction,
    rng: np.random.Generator,
) -> LiftTrial:
    mu = random_measure(ambient, points, rng)
    eta = random_measure(ambient, points, rng)
    while eta == mu:
        eta = random_measure(ambient, points, rng)

    value, plan = wasserstein1(mu, eta)
    image_mu, image_eta = pushforward(f, mu), pushforward(f, eta)
    image_value, _ = wasserstein1(image_mu, image_eta)
    coupled = coupling_pushforward(plan, f)
    coupled_cost = coupled.cost()
    modulus_cost = plan.cost(lambda d: Fraction(phi(d)))
    return LiftTrial(
        value=value,
        image_value=image_value,
        coupled_cost=coupled_cost,
        modulus_cost=modulus_cost,
        delta=delta,
        far_mass=plan.far_mass(delta),
        marginals_exact=coupled.first_marginal() == image_mu
        and coupled.second_marginal() == image_eta,
        chain_holds=image_value <= coupled_cost <= modulus_cost,
    )


def verify_measure_contraction(
    f: PointMap,
    phi: Gauge,
    space: MapSpace,
    n_trials: int,
    seed: int,
    check_input: bool = True,
    delta: Fraction | None = None,
) -> LiftReport:
    """Check that the lifted map shrinks Wasserstein distances on random measure pairs.

    Parameters
    ----------
    f
        The map, phi-contracting on ``space``.
    phi
        Its modulus, strictly below the identity at realized positive distances.
    space
        Finite point set the measures are drawn on.
    n_trials
        Number of random distinct measure pairs.
    seed
        Master seed; trial ``k`` uses the ``k``-th spawned child seed.
    check_input
        Verify the contraction precondition first.
    delta
        Far threshold: each trial reports the plan mass moved at least this
        far. Defaults to half the diameter of the domain points.

    Returns
    -------
    LiftReport
        Fraction of strictly contracted pairs, the largest W1 ratio and the
        smallest coupling gap, with every trial.

    Raises
    ------
    NotContractingInput
        If the precondition fails, naming a failing pair.
    ValueError
        If there are too few trials or points, or ``delta`` is not positive.

    """
    if n_trials < 1:
        raise ValueError("At least one trial is required.")
    if check_input:
        _check_lift_input(f, phi, space)
    ambient, points = domain_points(f, space)
    if len(points) < 2:
        raise ValueError("Random measure pairs need at least two points.")
    if delta is None:
        delta = _half_diameter(ambient, points)
    elif delta <= 0:
        raise ValueError("The far threshold must be positive.")

    trials = [
        _lift_trial(f, phi, ambient, points, delta, np.random.default_rng(child))
        for child in np.random.SeedSequence(seed).spawn(n_trials)
    ]
    for k, trial in enumerate(trials):
        if not (trial.chain_holds and trial.marginals_exact):
            _LOGGER.warning("Lift trial %s broke the coupling inequality chain", k)
    strict = sum(1 for t in trials if t.image_value < t.value)
    _LOGGER.debug("Lift verification: %s of %s trials strict", strict, n_trials)
    return LiftReport(
        strict_fraction=Fraction(strict, n_trials),
        max_ratio=max(t.image_value / t.value for t in trials),
        coupling_gap_min=min(t.value - t.coupled_cost for t in trials),
        trials=trials,
    )

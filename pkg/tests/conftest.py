"""Unit tests for urysohn-fractals."""

from fractions import Fraction

import numpy as np
import pytest

from urysohn_fractals.hutchinson import IFSystem
from urysohn_fractals.metric import EuclideanSpace, FiniteMetricSpace
from urysohn_fractals.moduli import AffineMap, ContinuityModulus, TableMap

TRIANGLE_VIOLATION_LABELS = ["a", "b", "c"]
TRIANGLE_VIOLATION_MATRIX = [[0, 1, 3], [1, 0, 1], [3, 1, 0]]

HALF_LINE_POINTS = ["0", "1", "2", "3", "4", "5", "6", "8", "10"]
HALF_SCALING_PAIRS = {"0": "0", "2": "1", "4": "2", "6": "3", "8": "4", "10": "5"}

FRACTAL_POINTS = ["0", "1", "3"]
FOLD_PAIRS = {"0": "0", "1": "0", "3": "1"}
PEAK_PAIRS = {"0": "3", "1": "3", "3": "3"}

SIERPINSKI_OFFSETS = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5)]
SIERPINSKI_VERTICES = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]

# t/(1+t) at 1, 2 and 4, keeping slope 1 on a segment below 1e-10
SAMPLED_BREAKPOINTS = [
    ("0", "0"),
    ("1/10000000000", "1/10000000000"),
    ("1", "1/2"),
    ("2", "2/3"),
    ("4", "4/5"),
]

BUILTIN_SIERPINSKI = "builtin:sierpinski"
BUILTIN_HALF_LINE = "builtin:half_line"
BUILTIN_RAKOTCH_FRACTAL = "builtin:rakotch_fractal"
BUILTIN_TRIANGLE_VIOLATION = "builtin:triangle_violation"


def random_rational_space(rng: np.random.Generator, n: int) -> FiniteMetricSpace:
    """Shortest-path closure of random rational weights, a valid metric."""
    dist = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            dist[i][j] = dist[j][i] = Fraction(int(rng.integers(1, 13)), int(rng.integers(1, 5)))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                dist[i][j] = min(dist[i][j], dist[i][k] + dist[k][j])
    return FiniteMetricSpace(tuple(f"p{i}" for i in range(n)), tuple(map(tuple, dist)))


@pytest.fixture(name="half_line")
def half_line_space() -> FiniteMetricSpace:
    """The 9-point rational line carrying the half-scaling map."""
    return FiniteMetricSpace.from_line(HALF_LINE_POINTS)


@pytest.fixture(name="half_scaling")
def half_scaling_map() -> TableMap:
    """x -> x/2 on the even points of the half line."""
    return TableMap(HALF_SCALING_PAIRS, "half")


@pytest.fixture(name="half")
def half_modulus() -> ContinuityModulus:
    """phi(t) = t/2."""
    return ContinuityModulus.linear(Fraction(1, 2))


@pytest.fixture(name="identity_modulus")
def identity_modulus() -> ContinuityModulus:
    """phi(t) = t."""
    return ContinuityModulus.linear(1)


@pytest.fixture(name="sampled")
def sampled_modulus() -> ContinuityModulus:
    """Piecewise-linear sample of t/(1+t) that is not Banach."""
    return ContinuityModulus(breakpoints=tuple(SAMPLED_BREAKPOINTS), tail_slope=Fraction(0))


@pytest.fixture(name="fractal")
def fractal_space() -> FiniteMetricSpace:
    """Three points of the line, the union of their fold and peak images."""
    return FiniteMetricSpace.from_line(FRACTAL_POINTS)


@pytest.fixture(name="fractal_system")
def fractal_function_system(fractal: FiniteMetricSpace) -> IFSystem:
    """Fold and peak maps of the three-point fractal."""
    return IFSystem((TableMap(FOLD_PAIRS, "fold"), TableMap(PEAK_PAIRS, "peak")), fractal)


@pytest.fixture(name="plane")
def plane_space() -> EuclideanSpace:
    """The Euclidean plane."""
    return EuclideanSpace(2)


@pytest.fixture(name="line")
def line_space() -> EuclideanSpace:
    """The Euclidean line."""
    return EuclideanSpace(1)


@pytest.fixture(name="sierpinski")
def sierpinski_system(plane: EuclideanSpace) -> IFSystem:
    """Right-angle Sierpinski system of three half scalings."""
    return IFSystem(
        tuple(AffineMap.similarity(0.5, offset) for offset in SIERPINSKI_OFFSETS), plane
    )


@pytest.fixture(name="halving")
def halving_system(line: EuclideanSpace) -> IFSystem:
    """x -> x/2 and x -> x/2 + 1/2 on the line."""
    return IFSystem(
        (AffineMap.similarity(0.5, [0.0]), AffineMap.similarity(0.5, [0.5])), line
    )

"""Urysohn fractals exceptions."""

from collections.abc import Sequence
from typing import Any


class FractalException(Exception):
    """General exception occurred."""

    witness: tuple[Any, ...] = ()

    @property
    def name(self) -> str:
        """Structured error name, e.g. ``TriangleViolation(0,2,1)``."""
        if not self.witness:
            return type(self).__name__
        return f"{type(self).__name__}({','.join(str(w) for w in self.witness)})"


class FractalValidationException(FractalException):
    """When an input violates a mathematical precondition."""


class FractalConvergenceException(FractalException):
    """When an iterative procedure does not settle within its budget."""


class FractalParseException(FractalException):
    """When parsing a config, a CSV or a rational literal fails."""


class FractalMissingFieldException(FractalParseException):
    """When a required field is missing in a config document."""

    def __init__(self, e: Exception):
        """Initialize the exception.

        Parameters
        ----------
        e : Exception
            The original exception that was raised.

        """
        super().__init__(f"Failed to parse config document: {e!s}")


class _WitnessedException(FractalValidationException):
    """Validation error that names its offending entries."""

    def __init__(self, message: str, *witness: Any) -> None:
        super().__init__(message)
        self.witness = witness


class AsymmetricMatrix(_WitnessedException):
    """When dist[i][j] differs from dist[j][i]."""

    def __init__(self, i: int, j: int) -> None:
        """Initialize with the first asymmetric entry."""
        super().__init__(f"dist[{i}][{j}] differs from dist[{j}][{i}].", i, j)


class NonzeroDiagonal(_WitnessedException):
    """When a diagonal entry is not zero."""

    def __init__(self, i: int) -> None:
        """Initialize with the first nonzero diagonal index."""
        super().__init__(f"dist[{i}][{i}] is not zero.", i)


class ZeroOffDiagonal(_WitnessedException):
    """When two distinct points are at distance zero."""

    def __init__(self, i: int, j: int) -> None:
        """Initialize with the first zero off-diagonal entry."""
        super().__init__(f"dist[{i}][{j}] is zero for distinct points.", i, j)


class NegativeEntry(_WitnessedException):
    """When a distance matrix holds a negative entry."""

    def __init__(self, i: int, j: int) -> None:
        """Initialize with the first negative entry."""
        super().__init__(f"dist[{i}][{j}] is negative.", i, j)


class TriangleViolation(_WitnessedException):
    """When dist[i][k] > dist[i][j] + dist[j][k]."""

    def __init__(self, i: int, k: int, j: int) -> None:
        """Initialize with the violating triple, the detour point last."""
        super().__init__(
            f"dist[{i}][{k}] exceeds dist[{i}][{j}] + dist[{j}][{k}].", i, k, j
        )


class MixedAmbient(_WitnessedException):
    """When two objects reference different ambient spaces."""

    def __init__(self, message: str = "Operands live in different ambient spaces.") -> None:
        """Initialize the exception."""
        super().__init__(message)


class DomainMiss(_WitnessedException):
    """When a map has no image for a point."""

    def __init__(self, point: Any) -> None:
        """Initialize with the point lacking an image."""
        super().__init__(f"Point {point} is outside the domain of the map.", point)


class NegativeArgument(_WitnessedException):
    """When a modulus is evaluated at a negative distance."""

    def __init__(self, t: Any) -> None:
        """Initialize with the offending argument."""
        super().__init__(f"Modulus argument {t} is negative.", t)


class InvalidModulus(_WitnessedException):
    """When breakpoints do not describe a concave nondecreasing modulus."""


class EmptyGrid(_WitnessedException):
    """When classify_modulus receives no delta values."""

    def __init__(self) -> None:
        """Initialize the exception."""
        super().__init__("The delta grid is empty.")


class EmptyCode(_WitnessedException):
    """When a code word has no letters."""

    def __init__(self) -> None:
        """Initialize the exception."""
        super().__init__("A code must contain at least one map index.")


class InvalidMeasure(_WitnessedException):
    """When weights are not positive or do not sum to one."""


class NotContractingInput(_WitnessedException):
    """When a map fails the modulus check required by the measure lift."""

    def __init__(self, x: Any, y: Any) -> None:
        """Initialize with the failing pair."""
        super().__init__(
            f"The map is not strictly contracting under the modulus at ({x}, {y}).",
            x,
            y,
        )


class AlreadyAssigned(_WitnessedException):
    """When a domain point already has an image."""

    def __init__(self, point: Any) -> None:
        """Initialize with the assigned point."""
        super().__init__(f"Point {point} already has an image.", point)


class ModulusViolation(_WitnessedException):
    """When d(f x, f x') exceeds phi(d(x, x'))."""

    def __init__(self, x: Any, y: Any) -> None:
        """Initialize with the violating pair."""
        super().__init__(f"The modulus bound fails at ({x}, {y}).", x, y)


class NotKatetov(_WitnessedException):
    """When prescribed distances violate a one-point triangle inequality."""

    def __init__(self, z: Any, w: Any, inequality: str) -> None:
        """Initialize with the violating pair and the broken inequality."""
        super().__init__(f"Katetov inequality {inequality} fails at ({z}, {w}).", z, w)
        self.inequality = inequality


class ZeroDistance(_WitnessedException):
    """When a Katetov function vanishes at an existing point."""

    def __init__(self, z: Any) -> None:
        """Initialize with the point at distance zero."""
        super().__init__(f"The new point would coincide with {z}.", z)


class InjectivityUnavailable(_WitnessedException):
    """When an injective extension was requested but cannot exist."""


class NotSelfSimilar(_WitnessedException):
    """When a set is not the union of its images."""

    def __init__(self, missing: Sequence[Any]) -> None:
        """Initialize with the points where X and F(X) differ."""
        super().__init__(
            f"The set differs from its Hutchinson image at {sorted(missing, key=str)}.",
            *sorted(missing, key=str),
        )


class NotIsometricCopy(_WitnessedException):
    """When a space does not sit isometrically inside an ambient."""

    def __init__(self, x: Any, y: Any) -> None:
        """Initialize with the mismatching pair."""
        super().__init__(f"Distance between {x} and {y} differs in the ambient.", x, y)


class NonConvergence(FractalConvergenceException):
    """When Hutchinson iteration does not reach the tolerance."""

    def __init__(self, max_iter: int, history: list[Any]) -> None:
        """Initialize with the iteration budget and the step history."""
        super().__init__(f"No convergence within {max_iter} iterations.")
        self.witness = (max_iter,)
        self.history = history


class ExtensionBudgetExceeded(FractalConvergenceException):
    """When extending a system keeps adjoining fresh points."""

    def __init__(self, max_points: int) -> None:
        """Initialize with the ambient size budget."""
        super().__init__(f"The ambient grew beyond {max_points} points.")
        self.witness = (max_points,)

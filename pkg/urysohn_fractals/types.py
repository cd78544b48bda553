"""Urysohn fractals types."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from mashumaro.config import BaseConfig
from mashumaro.mixins.orjson import DataClassORJSONMixin
from mashumaro.types import SerializationStrategy

from .helpers import format_rational, parse_rational


class RationalStrategy(SerializationStrategy):
    """Rationals travel as ``"p/q"`` strings; decimals and integers are accepted."""

    def serialize(self, value: Fraction) -> str:
        """Serialize a rational."""
        return format_rational(value)

    def deserialize(self, value: str | int | float) -> Fraction:
        """Deserialize a rational literal."""
        return parse_rational(value)


class RationalConfig(BaseConfig):
    """Mashumaro config shared by every type holding rationals."""

    serialization_strategy = {Fraction: RationalStrategy()}
    omit_none = True


@dataclass(kw_only=True)
class ModulusSpec(DataClassORJSONMixin):
    """A modulus literal: breakpoints (t, phi(t)) and the slope beyond them."""

    breakpoints: list[tuple[Fraction, Fraction]]
    tail_slope: Fraction

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class SpaceSpec(DataClassORJSONMixin):
    """Ambient space of a run.

    kind "table": ``labels`` + ``dist`` inline or ``csv`` path.
    kind "euclidean": ``dim`` in 1..3.
    kind "line": rational ``points`` of the real line.
    """

    kind: str
    labels: list[str] | None = None
    dist: list[list[Fraction]] | None = None
    csv: str | None = None
    dim: int | None = None
    points: list[Fraction] | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class MapSpec(DataClassORJSONMixin):
    """A member of a function system.

    kind "affine": ``matrix`` rows and ``offset``.
    kind "table": explicit ``pairs`` point -> image.
    """

    kind: str
    name: str = ""
    matrix: list[list[Fraction]] | None = None
    offset: list[Fraction] | None = None
    pairs: dict[str, str] | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class MeasureSpec(DataClassORJSONMixin):
    """A discrete measure: support point references and rational weights.

    Points are labels of a table space or coordinate lists of rational literals.
    """

    support: list[Any]
    weights: list[Fraction]

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class ClassifySpec(DataClassORJSONMixin):
    """Scale of a modulus classification."""

    d_max: Fraction
    delta_grid: list[Fraction]

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class ChaosSpec(DataClassORJSONMixin):
    """Chaos game parameters."""

    x0: Any
    n_steps: int = 10_000
    burn_in: int = 50

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class ExtendSpec(DataClassORJSONMixin):
    """Extension of a partial map from a subset of a domain space."""

    domain: SpaceSpec
    subset: list[str]
    images: dict[str, str]
    order: list[str] | None = None
    injective: bool = False
    reuse: bool = False

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class UrysohnSpec(DataClassORJSONMixin):
    """Growth of a finite Urysohn approximation."""

    rounds: int
    grid: list[Fraction]

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class RealizeSpec(DataClassORJSONMixin):
    """Realization of a self-similar table set inside a grown ambient."""

    fractal: list[str]
    rounds: int
    grid: list[Fraction]
    order: list[str] | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class RunConfig(DataClassORJSONMixin):
    """A batch run configuration."""

    space: SpaceSpec
    maps: list[MapSpec] = field(default_factory=list)
    moduli: list[ModulusSpec] | None = None
    initial: list[Any] | None = None
    tol: Fraction = Fraction(1, 1000)
    max_iter: int = 100
    seed: int = 0
    trials: int = 100
    pairs: int = 200
    lift_delta: Fraction | None = None
    classify: ClassifySpec | None = None
    chaos: ChaosSpec | None = None
    measures: dict[str, MeasureSpec] | None = None
    extend: ExtendSpec | None = None
    realize: RealizeSpec | None = None
    urysohn: UrysohnSpec | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class MetricReport(DataClassORJSONMixin):
    """Outcome of a metric validation."""

    valid: bool
    points: int
    error: str | None = None
    diameter: Fraction | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class ClassificationReport(DataClassORJSONMixin):
    """Contraction taxonomy of a modulus at a finite scale.

    banach: sup phi(t)/t over (0, d_max] is below one.
    rakotch: sup phi(t)/t over [delta, d_max] is below one for every grid delta.
    matkowski: iterates of phi from d_max drop below the epsilon cap.
    modulus: the classified modulus, in config form.
    """

    banach: bool
    rakotch: bool
    matkowski: bool
    lipschitz_bound: Fraction
    rakotch_constants: dict[str, Fraction] = field(default_factory=dict)
    matkowski_iterations: int = 0
    modulus: ModulusSpec | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class HyperspaceReport(DataClassORJSONMixin):
    """Observed contraction ratios of the Hutchinson operator."""

    max_ratio: float
    pairs_evaluated: int
    degenerate_skipped: int
    exact_ratio: Fraction | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class AttractorReport(DataClassORJSONMixin):
    """Outcome of attractor iteration."""

    converged: bool
    steps: int
    points: int
    history: list[str]

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class WassersteinReport(DataClassORJSONMixin):
    """Optimal transport value with one optimal plan."""

    value: Fraction
    rows: list[str]
    columns: list[str]
    plan: list[list[Fraction]]

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class LiftTrial(DataClassORJSONMixin):
    """One measure pair of a lift verification.

    The chain ``image_value <= coupled_cost <= modulus_cost`` is checked per trial.
    """

    value: Fraction
    image_value: Fraction
    coupled_cost: Fraction
    modulus_cost: Fraction
    delta: Fraction
    far_mass: Fraction
    marginals_exact: bool
    chain_holds: bool

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class LiftReport(DataClassORJSONMixin):
    """Summary of the measure-lift contraction check."""

    strict_fraction: Fraction
    max_ratio: Fraction
    coupling_gap_min: Fraction
    trials: list[LiftTrial] = field(default_factory=list)

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class ExtensionStep(DataClassORJSONMixin):
    """One step of a Katetov extension."""

    point: str
    image: str
    katetov: dict[str, Fraction]
    ambient_size: int
    reused: bool = False
    map_index: int | None = None

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class ExtensionTranscript(DataClassORJSONMixin):
    """All steps of an extension, in order."""

    steps: list[ExtensionStep] = field(default_factory=list)

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class RealizeReport(DataClassORJSONMixin):
    """Outcome of the fractal realization pipeline."""

    fixed_set: bool
    ambient_size: int
    converged: bool
    history: list[Fraction]
    maps: list[dict[str, str]]

    class Config(RationalConfig):
        """Mashumaro config."""


@dataclass(kw_only=True)
class UrysohnReport(DataClassORJSONMixin):
    """Outcome of Urysohn approximation growth."""

    points: int
    rounds_realized: int
    rounds_skipped: int
    coverage: Fraction | None = None

    class Config(RationalConfig):
        """Mashumaro config."""

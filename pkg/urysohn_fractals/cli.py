"""Command line front end: config ingestion, subcommand dispatch and report files."""

from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction
import logging
import os
from pathlib import Path
import sys
from typing import Any, NoReturn

from mashumaro.exceptions import MissingField
import numpy as np

from .const import (
    BUILTIN_CONFIG_PREFIX,
    BUILTIN_CONFIGS,
    COMMANDS,
    EXIT_MALFORMED,
    EXIT_NON_CONVERGENCE,
    EXIT_OK,
    EXIT_VALIDATION,
)
from .exceptions import (
    FractalConvergenceException,
    FractalException,
    FractalMissingFieldException,
    FractalParseException,
    FractalValidationException,
    NonConvergence,
)
from .helpers import dumps_json, format_distance, parse_rational, points_to_csv
from .hutchinson import (
    IFSystem,
    chaos_game,
    hutchinson_image,
    hyperspace_contraction_report,
    iterate_to_attractor,
)
from .katetov import build_urysohn_approx, extend_map, extend_system, extension_coverage
from .measures import DiscreteMeasure, verify_measure_contraction, wasserstein1
from .metric import (
    Ambient,
    CompactSet,
    EuclideanSpace,
    FiniteMetricSpace,
    LabelSet,
    validate_metric,
)
from .moduli import (
    AffineMap,
    ContinuityModulus,
    PointMap,
    TableMap,
    classify_modulus,
    oscillation_modulus,
)
from .types import (
    AttractorReport,
    MapSpec,
    MeasureSpec,
    MetricReport,
    RealizeReport,
    RunConfig,
    SpaceSpec,
    UrysohnReport,
    WassersteinReport,
)

_LOGGER = logging.getLogger(__name__)


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="UTF-8") as f:
            return f.read()
    except OSError as e:
        _LOGGER.debug("Exception: Cannot read %s:", path, exc_info=True)
        raise FractalParseException(f"Cannot read file {path}.") from e


def load_config(reference: str) -> tuple[RunConfig, str]:
    """Load a run config from a path or a bundled ``builtin:<name>`` reference.

    Returns
    -------
    tuple[RunConfig, str]
        The config and the directory relative paths inside it resolve against.

    Raises
    ------
    FractalParseException
        If the file cannot be read or parsed.
    FractalMissingFieldException
        If a required field is missing.

    """
    if reference.startswith(BUILTIN_CONFIG_PREFIX):
        name = reference.removeprefix(BUILTIN_CONFIG_PREFIX)
        if name not in BUILTIN_CONFIGS:
            raise FractalParseException(
                f"Unknown bundled config {name}, choose one of {', '.join(BUILTIN_CONFIGS)}."
            )
        path = os.path.join(
            os.path.dirname(os.path.abspath(__file__)), "configs", f"{name}.json"
        )
    else:
        path = reference
    data = _read_text(path)
    try:
        config = RunConfig.from_json(data)
    except MissingField as e:
        raise FractalMissingFieldException(e) from e
    except FractalException:
        raise
    except ValueError as e:
        _LOGGER.debug("Exception: Cannot parse config %s:", path, exc_info=True)
        raise FractalParseException(f"Cannot parse config {path}.") from e
    return config, os.path.dirname(os.path.abspath(path))


def build_space(spec: SpaceSpec, base_dir: str = ".") -> Ambient:
    """Build and validate the ambient space of a config."""
    if spec.kind == "euclidean":
        if spec.dim is None:
            raise FractalParseException("A euclidean space needs 'dim'.")
        try:
            return EuclideanSpace(spec.dim)
        except ValueError as e:
            raise FractalParseException(str(e)) from e
    if spec.kind == "line":
        if not spec.points:
            raise FractalParseException("A line space needs 'points'.")
        return FiniteMetricSpace.from_line(spec.points)
    if spec.kind == "table":
        if spec.csv is not None:
            return FiniteMetricSpace.from_csv(_read_text(os.path.join(base_dir, spec.csv)))
        if spec.labels is None or spec.dist is None:
            raise FractalParseException("A table space needs 'labels' and 'dist' or 'csv'.")
        return validate_metric(spec.dist, spec.labels)
    raise FractalParseException(f"Unknown space kind {spec.kind!r}.")


def parse_point(ambient: Ambient, reference: Any) -> Any:
    """Resolve a label or a coordinate list against the ambient."""
    if isinstance(ambient, FiniteMetricSpace):
        label = str(reference)
        ambient.index_of(label)
        return label
    if not isinstance(reference, list) or len(reference) != ambient.dim:
        raise FractalParseException(f"Point {reference!r} needs {ambient.dim} coordinates.")
    return tuple(float(parse_rational(c)) for c in reference)


def build_map(spec: MapSpec, ambient: Ambient) -> PointMap:
    """Build one map of a function system."""
    if spec.kind == "table":
        if spec.pairs is None:
            raise FractalParseException("A table map needs 'pairs'.")
        return TableMap(dict(spec.pairs), spec.name)
    if spec.kind == "affine":
        if spec.matrix is None or spec.offset is None:
            raise FractalParseException("An affine map needs 'matrix' and 'offset'.")
        try:
            return AffineMap(
                np.array([[float(v) for v in row] for row in spec.matrix]),
                np.array([float(v) for v in spec.offset]),
                spec.name,
            )
        except ValueError as e:
            raise FractalParseException(str(e)) from e
    raise FractalParseException(f"Unknown map kind {spec.kind!r}.")


def build_measure(spec: MeasureSpec, ambient: Ambient) -> DiscreteMeasure:
    """Build a discrete measure of a config."""
    return DiscreteMeasure(
        ambient,
        tuple(parse_point(ambient, p) for p in spec.support),
        tuple(spec.weights),
    )


@dataclass
class Run:
    """Resolved inputs of one command."""

    config: RunConfig
    ambient: Ambient
    out: Path
    base_dir: str = "."

    @property
    def moduli(self) -> list[ContinuityModulus]:
        """Configured moduli."""
        return [ContinuityModulus.from_spec(m) for m in self.config.moduli or []]

    def system(self, with_moduli: bool = True) -> IFSystem:
        """The configured function system."""
        moduli = self.moduli if with_moduli and self.config.moduli else None
        return IFSystem(
            tuple(build_map(m, self.ambient) for m in self.config.maps), self.ambient, moduli
        )

    def initial(self) -> CompactSet:
        """The configured starting set; the first point of a table space by default."""
        if self.config.initial:
            points = [parse_point(self.ambient, p) for p in self.config.initial]
        elif isinstance(self.ambient, FiniteMetricSpace):
            points = [self.ambient.labels[0]]
        else:
            points = [tuple([0.0] * self.ambient.dim)]
        return CompactSet.of(self.ambient, points)

    def require(self, section: str) -> Any:
        """A command section of the config."""
        value = getattr(self.config, section)
        if value is None:
            raise FractalParseException(f"This command needs a '{section}' section.")
        return value

    def write(self, name: str, data: bytes | str) -> None:
        """Write one output file."""
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        if isinstance(data, str):
            data = data.encode("UTF-8")
        path.write_bytes(data)
        _LOGGER.debug("Wrote %s (%s bytes)", path, len(data))


def _validate(run: Run) -> None:
    ambient = run.ambient
    if isinstance(ambient, FiniteMetricSpace):
        report = MetricReport(valid=True, points=len(ambient), diameter=ambient.diameter())
    else:
        report = MetricReport(valid=True, points=0)
    run.write("metric.json", dumps_json(report.to_dict()))


def _classify(run: Run) -> None:
    scale = run.require("classify")
    moduli = run.moduli
    if not moduli:
        raise FractalParseException("This command needs a 'moduli' section.")
    reports = [classify_modulus(phi, scale.d_max, scale.delta_grid) for phi in moduli]
    run.write("classification.json", dumps_json([r.to_dict() for r in reports]))


def _attractor(run: Run) -> None:
    system = run.system()
    history: list[Any]
    try:
        attractor, history = iterate_to_attractor(
            system, run.initial(), run.config.tol, run.config.max_iter
        )
    except NonConvergence as e:
        run.write("history.json", _history_report(False, e.history, 0))
        raise
    run.write("attractor.csv", points_to_csv(attractor))
    run.write("history.json", _history_report(True, history, len(attractor)))
    hyperspace = hyperspace_contraction_report(system, run.config.pairs, run.config.seed)
    run.write("hyperspace.json", dumps_json(hyperspace.to_dict()))


def _history_report(converged: bool, history: Sequence[Any], points: int) -> bytes:
    report = AttractorReport(
        converged=converged,
        steps=len(history),
        points=points,
        history=[format_distance(step) for step in history],
    )
    return dumps_json(report.to_dict())


def _chaos(run: Run) -> None:
    spec = run.require("chaos")
    cloud = chaos_game(
        run.system(),
        parse_point(run.ambient, spec.x0),
        spec.n_steps,
        spec.burn_in,
        run.config.seed,
    )
    run.write("chaos.csv", points_to_csv(cloud))


def _wasserstein(run: Run) -> None:
    measures = run.require("measures")
    try:
        mu, eta = measures["mu"], measures["eta"]
    except KeyError as e:
        raise FractalParseException("Measures 'mu' and 'eta' are required.") from e
    value, plan = wasserstein1(build_measure(mu, run.ambient), build_measure(eta, run.ambient))
    report = WassersteinReport(
        value=value,
        rows=[str(p) for p in plan.rows],
        columns=[str(p) for p in plan.columns],
        plan=[list(row) for row in plan.matrix],
    )
    run.write("wasserstein.json", dumps_json(report.to_dict()))


def _lift_check(run: Run) -> None:
    system = run.system(with_moduli=False)
    moduli = run.moduli
    if len(moduli) != len(system):
        raise FractalParseException("lift-check needs one modulus per map.")
    space: Any = run.ambient if isinstance(run.ambient, FiniteMetricSpace) else run.initial()
    reports = [
        verify_measure_contraction(
            f, phi, space, run.config.trials, run.config.seed, delta=run.config.lift_delta
        )
        for f, phi in zip(system.maps, moduli)
    ]
    run.write("lift.json", dumps_json([r.to_dict() for r in reports]))


def _table_ambient(run: Run) -> FiniteMetricSpace:
    if not isinstance(run.ambient, FiniteMetricSpace):
        raise FractalParseException("This command needs a table or line space.")
    return run.ambient


def _extend(run: Run) -> None:
    spec = run.require("extend")
    ambient = _table_ambient(run)
    domain = build_space(spec.domain, run.base_dir)
    if not isinstance(domain, FiniteMetricSpace):
        raise FractalParseException("The extension domain must be a table or line space.")
    partial = TableMap(dict(spec.images))
    moduli = run.moduli
    phi = moduli[0] if moduli else oscillation_modulus(partial, domain, ambient)
    grown, total, transcript = extend_map(
        domain,
        spec.subset,
        spec.images,
        phi,
        ambient,
        spec.order,
        injective=spec.injective,
        reuse=spec.reuse,
    )
    run.write("extension.json", dumps_json(transcript.to_dict()))
    run.write("extended_map.json", dumps_json(dict(total.pairs)))
    run.write("ambient.csv", grown.to_csv())


def _realize(run: Run) -> None:
    spec = run.require("realize")
    table = _table_ambient(run)
    fractal = table.subspace(spec.fractal)
    system = IFSystem(tuple(build_map(m, table) for m in run.config.maps), fractal)
    grown_space = build_urysohn_approx(fractal, spec.rounds, spec.grid, run.config.seed)
    extended, transcript = extend_system(
        fractal, system, run.moduli, grown_space, spec.order
    )
    ambient = extended.ambient
    assert isinstance(ambient, FiniteMetricSpace)
    target = LabelSet(ambient, fractal.labels)
    fixed_set = hutchinson_image(extended, target) == target
    if not fixed_set:
        _LOGGER.warning("The extended system does not fix the fractal")
    # start from the point farthest from the fractal
    far = max(
        ambient.labels,
        key=lambda z: (min(ambient.distance(z, x) for x in fractal.labels), -ambient.index_of(z)),
    )
    converged = True
    history: list[Any]
    try:
        result, history = iterate_to_attractor(
            extended, LabelSet(ambient, [far]), run.config.tol, run.config.max_iter
        )
    except NonConvergence as e:
        converged, history, result = False, e.history, None
    report = RealizeReport(
        fixed_set=fixed_set,
        ambient_size=len(ambient),
        converged=converged and result == target,
        history=[Fraction(step) for step in history],
        maps=[dict(f.pairs) for f in extended.maps],  # type: ignore[union-attr]
    )
    run.write("realize.json", dumps_json(report.to_dict()))
    run.write("extension.json", dumps_json(transcript.to_dict()))
    run.write("ambient.csv", ambient.to_csv())
    if not converged:
        raise NonConvergence(run.config.max_iter, history)


def _urysohn(run: Run) -> None:
    spec = run.require("urysohn")
    seed_space = _table_ambient(run)
    space = build_urysohn_approx(seed_space, spec.rounds, spec.grid, run.config.seed)
    realized = len(space) - len(seed_space)
    report = UrysohnReport(
        points=len(space),
        rounds_realized=realized,
        rounds_skipped=spec.rounds - realized,
        coverage=extension_coverage(space, spec.grid, run.config.pairs, run.config.seed),
    )
    run.write("urysohn.csv", space.to_csv())
    run.write("urysohn.json", dumps_json(report.to_dict()))


HANDLERS: dict[str, Callable[[Run], None]] = {
    "validate": _validate,
    "classify": _classify,
    "attractor": _attractor,
    "chaos": _chaos,
    "wasserstein": _wasserstein,
    "lift-check": _lift_check,
    "extend": _extend,
    "realize": _realize,
    "urysohn": _urysohn,
}


def _fail(err: FractalException) -> None:
    print(f"{err.name}: {err}", file=sys.stderr)


def run(
    config: RunConfig, command: str, out: str | Path = ".", base_dir: str = "."
) -> int:
    """Run one command and write its report files.

    Returns
    -------
    int
        0 on success, 1 on a validation failure, 2 on non-convergence and 3 on
        malformed input. The structured error name goes to stderr.

    """
    if command not in HANDLERS:
        raise ValueError(f"Unknown command {command}.")
    out = Path(out)
    try:
        try:
            ambient = build_space(config.space, base_dir)
        except FractalValidationException as e:
            if command == "validate":
                report = MetricReport(
                    valid=False, points=len(config.space.labels or []), error=e.name
                )
                out.mkdir(parents=True, exist_ok=True)
                (out / "metric.json").write_bytes(dumps_json(report.to_dict()))
            raise
        HANDLERS[command](Run(config, ambient, out, base_dir))
    except FractalValidationException as e:
        _fail(e)
        return EXIT_VALIDATION
    except FractalConvergenceException as e:
        _fail(e)
        return EXIT_NON_CONVERGENCE
    except FractalParseException as e:
        _fail(e)
        return EXIT_MALFORMED
    except ValueError as e:
        # config values out of range for the library
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    return EXIT_OK


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors as malformed input."""

    def error(self, message: str) -> NoReturn:
        """Print the usage and exit with the malformed-input code."""
        self.print_usage(sys.stderr)
        self.exit(EXIT_MALFORMED, f"{self.prog}: error: {message}\n")


def _parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = _ArgumentParser(
        prog="urysohn-fractals",
        description="Attractors, Wasserstein lifts and Katetov extensions on finite metric spaces.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument(
        "--config",
        required=True,
        help=f"Run config path, or {BUILTIN_CONFIG_PREFIX}<name> for a bundled one",
    )
    parser.add_argument("--out", default=".", help="Output directory")
    parser.add_argument("--tol", help="Step tolerance, a rational literal")
    parser.add_argument("--max-iter", dest="max_iter", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument(
        "--log-level",
        dest="log_level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``urysohn-fractals`` command."""
    args = _parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=args.log_level,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config, base_dir = load_config(args.config)
        if args.tol is not None:
            config.tol = parse_rational(args.tol)
        if args.max_iter is not None:
            config.max_iter = args.max_iter
        if args.seed is not None:
            config.seed = args.seed
        if args.trials is not None:
            config.trials = args.trials
    except FractalParseException as e:
        _fail(e)
        return EXIT_MALFORMED
    return run(config, args.command, args.out, base_dir)

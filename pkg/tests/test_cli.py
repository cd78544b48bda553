"""Tests for the command line front end."""

from fractions import Fraction
from pathlib import Path

import orjson
import pytest

from urysohn_fractals.cli import load_config, main, run
from urysohn_fractals.const import (
    EXIT_MALFORMED,
    EXIT_NON_CONVERGENCE,
    EXIT_OK,
    EXIT_VALIDATION,
)
from urysohn_fractals.exceptions import FractalMissingFieldException, FractalParseException
from urysohn_fractals.metric import LabelSet
from urysohn_fractals.types import RunConfig

from .conftest import (
    BUILTIN_HALF_LINE,
    BUILTIN_RAKOTCH_FRACTAL,
    BUILTIN_SIERPINSKI,
    BUILTIN_TRIANGLE_VIOLATION,
)


def read_json(path: Path):
    """Load one report file."""
    return orjson.loads(path.read_bytes())


def quick(reference: str) -> RunConfig:
    """A bundled config scaled down for unit tests."""
    config, _ = load_config(reference)
    config.tol = Fraction(1, 100)
    config.trials = 10
    config.pairs = 20
    if config.chaos is not None:
        config.chaos.n_steps = 500
    return config


class TestLoadConfig:
    """Tests for load_config."""

    def test_builtin(self) -> None:
        """Test bundled configs resolve by name."""
        config, base_dir = load_config(BUILTIN_SIERPINSKI)
        assert config.space.kind == "euclidean"
        assert len(config.maps) == 3
        assert config.tol == Fraction(1, 1000)
        assert Path(base_dir).name == "configs"

    def test_unknown_builtin(self) -> None:
        """Test unknown bundled names are parse failures."""
        with pytest.raises(FractalParseException, match="Unknown bundled config"):
            load_config("builtin:koch")

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test unreadable paths are parse failures."""
        with pytest.raises(FractalParseException):
            load_config(str(tmp_path / "absent.json"))

    def test_malformed(self, tmp_path: Path) -> None:
        """Test invalid JSON is a parse failure."""
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="UTF-8")
        with pytest.raises(FractalParseException):
            load_config(str(path))

    def test_missing_field(self, tmp_path: Path) -> None:
        """Test a config without a space."""
        path = tmp_path / "empty.json"
        path.write_text("{}", encoding="UTF-8")
        with pytest.raises(FractalMissingFieldException):
            load_config(str(path))


class TestRun:
    """Tests for the command handlers."""

    def test_validate_triangle_violation(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test the violating triple reaches stderr and the report."""
        config, _ = load_config(BUILTIN_TRIANGLE_VIOLATION)
        assert run(config, "validate", tmp_path) == EXIT_VALIDATION
        assert capsys.readouterr().err.startswith("TriangleViolation(0,2,1):")
        report = read_json(tmp_path / "metric.json")
        assert report == {"error": "TriangleViolation(0,2,1)", "points": 3, "valid": False}

    def test_validate(self, tmp_path: Path) -> None:
        """Test a valid space reports its size and diameter."""
        config, _ = load_config(BUILTIN_HALF_LINE)
        assert run(config, "validate", tmp_path) == EXIT_OK
        report = read_json(tmp_path / "metric.json")
        assert report == {"diameter": "10", "points": 9, "valid": True}

    def test_validate_csv(self, tmp_path: Path) -> None:
        """Test CSV paths resolve against the config directory."""
        (tmp_path / "space.csv").write_text("a,b\n0,1/2\n1/2,0\n", encoding="UTF-8")
        path = tmp_path / "space.json"
        path.write_text('{"space": {"kind": "table", "csv": "space.csv"}}', encoding="UTF-8")
        config, base_dir = load_config(str(path))
        assert run(config, "validate", tmp_path / "out", base_dir) == EXIT_OK
        assert read_json(tmp_path / "out" / "metric.json")["diameter"] == "1/2"

    def test_classify(self, tmp_path: Path) -> None:
        """Test t/2 is Banach at every scale."""
        config, _ = load_config(BUILTIN_HALF_LINE)
        assert run(config, "classify", tmp_path) == EXIT_OK
        (report,) = read_json(tmp_path / "classification.json")
        assert report["banach"]
        assert report["rakotch"]
        assert report["matkowski"]
        assert report["lipschitz_bound"] == "1/2"
        assert report["modulus"] == {"breakpoints": [["0", "0"]], "tail_slope": "1/2"}

    def test_classify_without_section(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test commands refuse configs missing their section."""
        config, _ = load_config(BUILTIN_HALF_LINE)
        config.classify = None
        assert run(config, "classify", tmp_path) == EXIT_MALFORMED
        assert "classify" in capsys.readouterr().err

    def test_attractor(self, tmp_path: Path) -> None:
        """Test the Sierpinski attractor writes its three reports."""
        assert run(quick(BUILTIN_SIERPINSKI), "attractor", tmp_path) == EXIT_OK
        history = read_json(tmp_path / "history.json")
        assert history["converged"]
        assert history["steps"] == 8
        rows = (tmp_path / "attractor.csv").read_text(encoding="UTF-8").splitlines()
        assert len(rows) == history["points"]
        hyperspace = read_json(tmp_path / "hyperspace.json")
        assert hyperspace["max_ratio"] <= 0.5 + 1e-9

    def test_attractor_non_convergence(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test an exhausted budget exits with 2 and keeps the history."""
        config = quick(BUILTIN_SIERPINSKI)
        config.max_iter = 1
        assert run(config, "attractor", tmp_path) == EXIT_NON_CONVERGENCE
        assert capsys.readouterr().err.startswith("NonConvergence(1):")
        history = read_json(tmp_path / "history.json")
        assert not history["converged"]
        assert history["steps"] == 1
        assert not (tmp_path / "attractor.csv").exists()

    def test_table_attractor(self, tmp_path: Path) -> None:
        """Test the table fractal converges exactly."""
        assert run(quick(BUILTIN_RAKOTCH_FRACTAL), "attractor", tmp_path) == EXIT_OK
        history = read_json(tmp_path / "history.json")
        assert history["history"] == ["2", "1", "0"]
        rows = (tmp_path / "attractor.csv").read_text(encoding="UTF-8").splitlines()
        assert sorted(rows) == ["0", "1", "3"]

    def test_chaos(self, tmp_path: Path) -> None:
        """Test the chaos game writes its orbit."""
        assert run(quick(BUILTIN_SIERPINSKI), "chaos", tmp_path) == EXIT_OK
        rows = (tmp_path / "chaos.csv").read_text(encoding="UTF-8").splitlines()
        assert 0 < len(rows) <= 450

    def test_wasserstein(self, tmp_path: Path) -> None:
        """Test W1 of (delta_0 + delta_1)/2 and delta_0."""
        assert run(quick(BUILTIN_HALF_LINE), "wasserstein", tmp_path) == EXIT_OK
        report = read_json(tmp_path / "wasserstein.json")
        assert report["value"] == "1/2"
        assert report["rows"] == ["0", "1"]
        assert report["columns"] == ["0"]
        assert report["plan"] == [["1/2"], ["1/2"]]

    def test_lift_check(self, tmp_path: Path) -> None:
        """Test the half scaling lifts to a contraction of measures."""
        assert run(quick(BUILTIN_HALF_LINE), "lift-check", tmp_path) == EXIT_OK
        (report,) = read_json(tmp_path / "lift.json")
        assert len(report["trials"]) == 10
        assert Fraction(report["max_ratio"]) <= Fraction(1, 2)
        assert {trial["delta"] for trial in report["trials"]} == {"5"}

    def test_lift_check_threshold(self, tmp_path: Path) -> None:
        """Test the configured far threshold reaches every trial."""
        config = quick(BUILTIN_HALF_LINE)
        config.lift_delta = Fraction(2)
        assert run(config, "lift-check", tmp_path) == EXIT_OK
        (report,) = read_json(tmp_path / "lift.json")
        assert all(trial["delta"] == "2" for trial in report["trials"])
        assert all(Fraction(trial["far_mass"]) > 0 for trial in report["trials"])

    def test_extend(self, tmp_path: Path) -> None:
        """Test the partial half scaling extends over its domain."""
        assert run(quick(BUILTIN_HALF_LINE), "extend", tmp_path) == EXIT_OK
        total = read_json(tmp_path / "extended_map.json")
        assert total["0"] == "0"
        assert total["2"] == "1"
        assert total["1"] == "e1"
        transcript = read_json(tmp_path / "extension.json")
        assert [step["point"] for step in transcript["steps"]] == ["1", "4"]
        header = (tmp_path / "ambient.csv").read_text(encoding="UTF-8").splitlines()[0]
        assert "e1" in header.split(",")

    def test_realize(self, tmp_path: Path) -> None:
        """Test the fractal is recovered from the farthest grown point."""
        assert run(quick(BUILTIN_RAKOTCH_FRACTAL), "realize", tmp_path) == EXIT_OK
        report = read_json(tmp_path / "realize.json")
        assert report["fixed_set"]
        assert report["converged"]
        assert report["history"][-1] == "0"
        assert Fraction(report["history"][0]) >= 8
        assert len(report["maps"]) == 2
        assert all(len(m) == report["ambient_size"] for m in report["maps"])

    def test_realize_reports_fixed_check(
        self,
        tmp_path: Path,
        monkeypatch: pytest.MonkeyPatch,
        caplog: pytest.LogCaptureFixture,
    ) -> None:
        """Test the fixed-set verdict comes from the Hutchinson image of the fractal."""
        monkeypatch.setattr(
            "urysohn_fractals.cli.hutchinson_image",
            lambda system, labels: LabelSet(labels.ambient, list(labels)[:1]),
        )
        assert run(quick(BUILTIN_RAKOTCH_FRACTAL), "realize", tmp_path) == EXIT_OK
        report = read_json(tmp_path / "realize.json")
        assert report["fixed_set"] is False
        assert report["converged"]
        assert "does not fix the fractal" in caplog.text

    def test_realize_needs_table(self, tmp_path: Path) -> None:
        """Test realization refuses Euclidean ambients."""
        config = quick(BUILTIN_SIERPINSKI)
        config.realize = quick(BUILTIN_RAKOTCH_FRACTAL).realize
        assert run(config, "realize", tmp_path) == EXIT_MALFORMED

    def test_urysohn(self, tmp_path: Path) -> None:
        """Test rounds are accounted for."""
        assert run(quick(BUILTIN_RAKOTCH_FRACTAL), "urysohn", tmp_path) == EXIT_OK
        report = read_json(tmp_path / "urysohn.json")
        assert report["rounds_realized"] + report["rounds_skipped"] == 20
        assert report["points"] == 3 + report["rounds_realized"]
        assert 0 <= Fraction(report["coverage"]) <= 1

    def test_unknown_command(self, tmp_path: Path) -> None:
        """Test commands are checked before running."""
        config, _ = load_config(BUILTIN_HALF_LINE)
        with pytest.raises(ValueError, match="Unknown command"):
            run(config, "draw", tmp_path)

    @pytest.mark.parametrize(
        ("reference", "command"),
        [
            (BUILTIN_SIERPINSKI, "attractor"),
            (BUILTIN_SIERPINSKI, "chaos"),
            (BUILTIN_SIERPINSKI, "lift-check"),
            (BUILTIN_SIERPINSKI, "classify"),
            (BUILTIN_HALF_LINE, "validate"),
            (BUILTIN_HALF_LINE, "classify"),
            (BUILTIN_HALF_LINE, "wasserstein"),
            (BUILTIN_HALF_LINE, "extend"),
            (BUILTIN_RAKOTCH_FRACTAL, "realize"),
            (BUILTIN_RAKOTCH_FRACTAL, "urysohn"),
        ],
    )
    def test_byte_identical_reruns(self, tmp_path: Path, reference: str, command: str) -> None:
        """Test equal configs and seeds give byte-identical reports."""
        assert run(quick(reference), command, tmp_path / "first") == EXIT_OK
        assert run(quick(reference), command, tmp_path / "second") == EXIT_OK
        first = sorted((tmp_path / "first").iterdir())
        assert first
        for path in first:
            assert path.read_bytes() == (tmp_path / "second" / path.name).read_bytes()


class TestMain:
    """Tests for argument handling."""

    def test_overrides(self, tmp_path: Path) -> None:
        """Test flags override config values."""
        code = main(
            [
                "attractor",
                "--config",
                BUILTIN_SIERPINSKI,
                "--out",
                str(tmp_path),
                "--tol",
                "1/100",
                "--max-iter",
                "3",
            ]
        )
        assert code == EXIT_NON_CONVERGENCE
        assert read_json(tmp_path / "history.json")["steps"] == 3

    def test_malformed_config(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """Test unreadable configs exit with 3."""
        path = tmp_path / "bad.json"
        path.write_text("[1, 2", encoding="UTF-8")
        assert main(["validate", "--config", str(path), "--out", str(tmp_path)]) == EXIT_MALFORMED
        assert capsys.readouterr().err.startswith("FractalParseException")

    def test_bad_tolerance(self, tmp_path: Path) -> None:
        """Test rational flags are parsed."""
        code = main(
            ["validate", "--config", BUILTIN_HALF_LINE, "--out", str(tmp_path), "--tol", "x"]
        )
        assert code == EXIT_MALFORMED

    @pytest.mark.parametrize(
        "argv",
        [
            ["draw", "--config", BUILTIN_HALF_LINE],
            ["validate"],
            ["validate", "--config", BUILTIN_HALF_LINE, "--seed", "many"],
        ],
    )
    def test_usage_error(self, argv: list[str], capsys: pytest.CaptureFixture[str]) -> None:
        """Test argument errors exit with the malformed-input code."""
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_MALFORMED
        assert "usage: urysohn-fractals" in capsys.readouterr().err


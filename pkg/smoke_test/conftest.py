"""Fixtures for the acceptance-scale smoke tests.

Seeds and scales can be overridden from a local ``.env`` file:

    SMOKE_SEED=3
    SMOKE_TRIALS=500
"""

import logging
import os

from dotenv import load_dotenv
import pytest

from urysohn_fractals.cli import load_config
from urysohn_fractals.hutchinson import IFSystem
from urysohn_fractals.metric import EuclideanSpace
from urysohn_fractals.moduli import AffineMap
from urysohn_fractals.types import RunConfig

load_dotenv()

_LOGGER = logging.getLogger(__name__)

SIERPINSKI_OFFSETS = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5)]
SIERPINSKI_VERTICES = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]


@pytest.fixture(name="seed")
def smoke_seed() -> int:
    """Seed of every randomized check."""
    seed = int(os.environ.get("SMOKE_SEED", "0"))
    _LOGGER.info("Smoke seed: %s", seed)
    return seed


@pytest.fixture(name="trials")
def smoke_trials() -> int:
    """Number of random measure pairs per lift check."""
    return int(os.environ.get("SMOKE_TRIALS", "1000"))


@pytest.fixture(name="sierpinski")
def sierpinski_system() -> IFSystem:
    """Right-angle Sierpinski system of three half scalings."""
    return IFSystem(
        tuple(AffineMap.similarity(0.5, offset) for offset in SIERPINSKI_OFFSETS),
        EuclideanSpace(2),
    )


@pytest.fixture(name="rakotch_config")
def rakotch_run_config(seed: int) -> RunConfig:
    """The bundled table fractal config with the smoke seed."""
    config, _ = load_config("builtin:rakotch_fractal")
    config.seed = seed
    return config

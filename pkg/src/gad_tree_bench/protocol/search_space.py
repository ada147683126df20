"""Random-search distributions and per-family search spaces."""

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Choice:
    """Uniform pick from a fixed list."""

    options: tuple[Any, ...]

    def sample(self, rng: np.random.Generator) -> Any:
        """Draw one option."""
        return self.options[int(rng.integers(len(self.options)))]


@dataclass(frozen=True)
class Uniform:
    """Continuous uniform on (low, high]."""

    low: float
    high: float

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one value."""
        return float(self.high - (self.high - self.low) * rng.random())


@dataclass(frozen=True)
class LogUniform:
    """``scale * 10 ** Uniform(low_exp, high_exp)``."""

    low_exp: float
    high_exp: float
    scale: float = 1.0

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one value."""
        return float(self.scale * 10.0 ** Uniform(self.low_exp, self.high_exp).sample(rng))


@dataclass(frozen=True)
class RandInt:
    """Integer uniform on [low, high], both ends included."""

    low: int
    high: int

    def sample(self, rng: np.random.Generator) -> int:
        """Draw one value."""
        return int(rng.integers(self.low, self.high, endpoint=True))


Distribution = Choice | Uniform | LogUniform | RandInt
HyperSpace = Mapping[str, Distribution]

FOREST_SPACE: HyperSpace = {
    "n_estimators": RandInt(10, 200),
    "criterion": Choice(("gini", "entropy")),
    "max_samples": Uniform(0.1, 1.0),
}

BOOST_SPACE: HyperSpace = {
    "n_estimators": RandInt(10, 200),
    "learning_rate": LogUniform(-1.0, 0.0, scale=0.5),
    "l2_lambda": Choice((0.0, 1.0, 10.0)),
    "subsample": Choice((0.5, 0.75, 1.0)),
}

KNN_SPACE: HyperSpace = {
    "k": RandInt(1, 50),
}

GRAPH_SPACE: HyperSpace = {
    "layers": Choice((1, 2, 3, 4)),
    "agg": Choice(("sum", "mean", "max")),
}

NA_SPACE: HyperSpace = {
    "num_neighbors": RandInt(0, 50),
}


def sample_config(space: HyperSpace, rng: np.random.Generator) -> dict[str, Any]:
    """One independent draw per parameter, in the space's key order."""
    return {name: distribution.sample(rng) for name, distribution in space.items()}

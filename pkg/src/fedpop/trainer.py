"""Local update producers standing in for real model training.

Two kinds at desk scale: `synthetic` emits a seeded pseudo-random vector in
[-1, 1]^d, `linear` runs gradient-descent epochs on a per-client synthetic
regression task and returns the weight delta.  Both are pure functions of
(spec, client seed, current params), so rounds replay exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import ParameterError
from .rng import Drbg

KINDS = ("synthetic", "linear")


@dataclass(frozen=True)
class TrainerSpec:
    kind: str = "synthetic"
    dimension: int = 16
    data_seed: int = 0
    samples: int = 32
    learning_rate: float = 0.05
    epochs: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"trainer kind must be one of {KINDS}")
        if self.dimension < 1:
            raise ParameterError("dimension must be >= 1")
        if self.kind == "linear":
            if self.samples < 1:
                raise ParameterError("linear trainer needs >= 1 sample")
            if self.learning_rate < 0:
                raise ParameterError("learning rate must be >= 0")
            if self.epochs < 1:
                raise ParameterError("linear trainer needs >= 1 epoch")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "data_seed": self.data_seed,
            "samples": self.samples,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrainerSpec":
        return cls(
            kind=data.get("kind", "synthetic"),
            dimension=int(data["dimension"]),
            data_seed=int(data.get("data_seed", 0)),
            samples=int(data.get("samples", 32)),
            learning_rate=float(data.get("learning_rate", 0.05)),
            epochs=int(data.get("epochs", 1)),
        )


def _client_dataset(spec: TrainerSpec, client_seed: int):
    """Seeded regression task: y = X w* + noise, fixed per (data_seed, client)."""
    drbg = Drbg.from_seed(f"trainer-data/{spec.data_seed}/{client_seed}")
    np_rng = np.random.Generator(np.random.PCG64(int.from_bytes(drbg.bytes(8), "big")))
    X = np_rng.normal(0.0, 1.0, size=(spec.samples, spec.dimension))
    w_true = np_rng.normal(0.0, 1.0, size=spec.dimension)
    noise = np_rng.normal(0.0, 0.05, size=spec.samples)
    y = X @ w_true + noise
    return X, y


def regression_gradient(X: np.ndarray, y: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Mean-squared-error gradient, also the test oracle."""
    return X.T @ (X @ weights - y) / len(y)


def local_train(
    spec: TrainerSpec,
    client_seed: int,
    params: Optional[Sequence[float]] = None,
) -> List[float]:
    """Produce a local update m_i from the broadcast model parameters."""
    if spec.kind == "synthetic":
        drbg = Drbg.from_seed(f"trainer-synth/{spec.data_seed}/{client_seed}")
        return [
            int.from_bytes(drbg.bytes(8), "big") / 2**63 - 1.0
            for _ in range(spec.dimension)
        ]
    X, y = _client_dataset(spec, client_seed)
    start = np.zeros(spec.dimension) if params is None else np.asarray(params, dtype=float)
    if start.shape != (spec.dimension,):
        raise ParameterError("model parameters have wrong dimension")
    weights = start.copy()
    for _ in range(spec.epochs):
        weights = weights - spec.learning_rate * regression_gradient(X, y, weights)
    return (weights - start).tolist()


def regression_loss(spec: TrainerSpec, client_seed: int, weights: Sequence[float]) -> float:
    X, y = _client_dataset(spec, client_seed)
    residual = X @ np.asarray(weights, dtype=float) - y
    return float(residual @ residual / (2 * len(y)))

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError

ACTIVATIONS = ("relu", "none")


@dataclass(frozen=True, eq=False)
class MlpSpec:
    """Dense layer stack.

    ``layers`` is a sequence of ``(weight, bias)`` with ``weight`` shaped
    ``out x in``.  ``activation`` follows every layer except the last, which
    gets it only when ``final_activation`` is set.
    """

    layers: tuple
    activation: str = "relu"
    final_activation: bool = False

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(f"unknown activation {self.activation!r}")
        if len(self.layers) == 0:
            raise ConfigurationError("an MLP needs at least one layer")
        layers = []
        prev = None
        for k, (w, b) in enumerate(self.layers):
            w = np.array(w, dtype=np.float64)
            b = np.array(b, dtype=np.float64).reshape(-1)
            if w.ndim != 2 or b.shape[0] != w.shape[0]:
                raise ConfigurationError(f"layer {k}: weight {w.shape} and bias {b.shape} disagree")
            if prev is not None and w.shape[1] != prev:
                raise ConfigurationError(f"layer {k} expects {w.shape[1]} inputs, previous layer gives {prev}")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ConfigurationError(f"layer {k} has non-finite parameters")
            w.setflags(write=False)
            b.setflags(write=False)
            layers.append((w, b))
            prev = w.shape[0]
        object.__setattr__(self, "layers", tuple(layers))

    @property
    def in_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1][0].shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.in_dim:
            raise ConfigurationError(f"MLP expects {self.in_dim} input channels, got {x.shape[-1]}")
        last = len(self.layers) - 1
        for k, (w, b) in enumerate(self.layers):
            x = x @ w.T + b
            if self.activation == "relu" and (k < last or self.final_activation):
                np.maximum(x, 0.0, out=x)
        return x

    # construction helpers

    @classmethod
    def identity(cls, dim: int) -> "MlpSpec":
        return cls(((np.eye(dim), np.zeros(dim)),), activation="none")

    @classmethod
    def zeros(cls, dims) -> "MlpSpec":
        return cls(tuple((np.zeros((o, i)), np.zeros(o)) for i, o in zip(dims[:-1], dims[1:])))

    @classmethod
    def random(cls, dims, seed: int = 0, activation: str = "relu",
               final_activation: bool = False) -> "MlpSpec":
        """He-style normal weights, small normal biases, seeded."""
        rng = np.random.default_rng(seed)
        layers = []
        for i, o in zip(dims[:-1], dims[1:]):
            layers.append((rng.normal(0.0, np.sqrt(2.0 / i), (o, i)), rng.normal(0.0, 0.1, o)))
        return cls(tuple(layers), activation, final_activation)

    # serialisation

    def to_dict(self) -> dict:
        return {
            "activation": self.activation,
            "final_activation": self.final_activation,
            "layers": [
                {
                    "in": int(w.shape[1]),
                    "out": int(w.shape[0]),
                    "weight": w.ravel().tolist(),
                    "bias": b.tolist(),
                }
                for w, b in self.layers
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpSpec":
        try:
            layers = tuple(
                (np.asarray(l["weight"], dtype=np.float64).reshape(l["out"], l["in"]),
                 np.asarray(l["bias"], dtype=np.float64))
                for l in d["layers"]
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigurationError(f"malformed MLP document: {exc}") from None
        return cls(layers, d.get("activation", "relu"), bool(d.get("final_activation", False)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MlpSpec":
        return cls.from_dict(json.loads(text))

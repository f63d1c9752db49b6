"""Scalar time -> embedding vector.

The default is the transformer positional encoding applied to a raw
t in [0, 1]: out[2i] = sin(t / 10000^(2i/dim)), out[2i+1] = cos(same angle).
Two ablation variants hide behind the config kind: a learnable sin(w*t + b)
layer and a small ReLU MLP on top of the sinusoidal vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from .errors import ConfigError, DomainError

SINUSOIDAL = "sinusoidal"
LINEAR_SIN = "linear_sin"
SINUSOIDAL_MLP = "sinusoidal_mlp"
_KINDS = (SINUSOIDAL, LINEAR_SIN, SINUSOIDAL_MLP)


@dataclass(frozen=True)
class TimeEmbeddingConfig:
    kind: str = SINUSOIDAL
    dim: int = 128
    mlp_hidden: int = 128  # only used by the sinusoidal_mlp kind

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown embedding kind {self.kind!r}; expected one of {_KINDS}")
        if self.dim < 2 or self.dim % 2 != 0:
            raise ConfigError(f"embedding dim must be even and >= 2; got {self.dim}")
        if self.kind == SINUSOIDAL_MLP and self.mlp_hidden < 1:
            raise ConfigError(f"mlp_hidden must be >= 1; got {self.mlp_hidden}")


def frequencies(dim: int) -> np.ndarray:
    """Angular frequencies 1/10000^(2i/dim) for i = 0..dim/2-1."""
    i = np.arange(dim // 2)
    return np.power(10000.0, -2.0 * i / dim)


def sinusoidal_matrix(t: np.ndarray, dim: int) -> np.ndarray:
    """Rows of sinusoidal embeddings for a vector of times, shape (B, dim)."""
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    angles = t[:, None] * frequencies(dim)[None, :]
    out = np.empty((t.shape[0], dim))
    out[:, 0::2] = np.sin(angles)
    out[:, 1::2] = np.cos(angles)
    return out


def init_embed_params(cfg: TimeEmbeddingConfig, generator: np.random.Generator) -> dict[str, np.ndarray] | None:
    """Learnable weights for the non-default kinds (None for sinusoidal).

    Uniform fan-in initialization, matching the model layers; biases zero.
    """
    if cfg.kind == SINUSOIDAL:
        return None
    if cfg.kind == LINEAR_SIN:
        # scalar input: fan_in = 1
        return {
            "w": generator.uniform(-1.0, 1.0, size=cfg.dim),
            "b": np.zeros(cfg.dim),
        }
    bound1 = np.sqrt(1.0 / cfg.dim)
    bound2 = np.sqrt(1.0 / cfg.mlp_hidden)
    return {
        "W1": generator.uniform(-bound1, bound1, size=(cfg.dim, cfg.mlp_hidden)),
        "b1": np.zeros(cfg.mlp_hidden),
        "W2": generator.uniform(-bound2, bound2, size=(cfg.mlp_hidden, cfg.dim)),
        "b2": np.zeros(cfg.dim),
    }


def embed(t: float, cfg: TimeEmbeddingConfig, params: dict[str, np.ndarray] | None = None) -> np.ndarray:
    """Embedding vector for one time value; pure given (t, cfg, params)."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1]; got {t}")
    if cfg.kind == SINUSOIDAL:
        return sinusoidal_matrix(np.asarray([t]), cfg.dim)[0]
    if params is None:
        raise ConfigError(f"embedding kind {cfg.kind!r} requires learnable params")
    if cfg.kind == LINEAR_SIN:
        return np.sin(params["w"] * t + params["b"])
    h = sinusoidal_matrix(np.asarray([t]), cfg.dim)[0]
    h = np.maximum(h @ params["W1"] + params["b1"], 0.0)
    return h @ params["W2"] + params["b2"]

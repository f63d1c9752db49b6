"""The time-conditioned velocity field and everything derived from it.

f([z; Embed(t)]) is a 3-layer ReLU MLP (two hidden layers, default width 256)
whose output has the input's feature width. Training pushes f toward the
constant target -z on normal rows, so at test time the residual
f([z; Embed(t_fixed)]) + z is near zero for normal-looking rows and large
otherwise. Its euclidean norm is the anomaly score; the absolute residual
entries are the per-feature attributions.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as _rng
from .embedding import (
    LINEAR_SIN,
    SINUSOIDAL,
    SINUSOIDAL_MLP,
    TimeEmbeddingConfig,
    init_embed_params,
    sinusoidal_matrix,
)
from .errors import ConfigError, DimensionError, DomainError, NumericalError
from .tape import Node, Tape


@dataclass
class ModelParams:
    """Weights of the velocity field plus its embedding configuration.

    Layer shapes chain as (d+dim) -> hidden[0] -> hidden[1] -> d. Arrays are
    mutated in place only by the trainer; scoring treats them as frozen.
    """

    input_dim: int
    embed_cfg: TimeEmbeddingConfig
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    embed_params: dict[str, np.ndarray] | None = None

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        """Parameter arrays in a fixed, stable order (the optimizer's view)."""
        items = [
            ("W1", self.W1), ("b1", self.b1),
            ("W2", self.W2), ("b2", self.b2),
            ("W3", self.W3), ("b3", self.b3),
        ]
        if self.embed_params is not None:
            items.extend((f"embed.{k}", v) for k, v in sorted(self.embed_params.items()))
        return items

    @property
    def hidden_sizes(self) -> tuple[int, int]:
        return (self.W1.shape[1], self.W2.shape[1])

    def copy(self) -> "ModelParams":
        ep = None if self.embed_params is None else {k: v.copy() for k, v in self.embed_params.items()}
        return replace(
            self,
            W1=self.W1.copy(), b1=self.b1.copy(),
            W2=self.W2.copy(), b2=self.b2.copy(),
            W3=self.W3.copy(), b3=self.b3.copy(),
            embed_params=ep,
        )


@dataclass(frozen=True)
class ScoreReport:
    """Per-row anomaly scores at a fixed time, with optional attributions."""

    scores: np.ndarray
    t_fixed: float
    attributions: np.ndarray | None = None


def init_params(
    input_dim: int,
    embed_cfg: TimeEmbeddingConfig | None = None,
    seed: int = 0,
    hidden: tuple[int, int] = (256, 256),
) -> ModelParams:
    """Fresh weights: uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)), zero biases."""
    if input_dim < 1:
        raise ConfigError(f"input_dim must be >= 1; got {input_dim}")
    cfg = embed_cfg if embed_cfg is not None else TimeEmbeddingConfig()
    gen = _rng.derive(seed, _rng.INIT)
    h1, h2 = hidden
    n_in = input_dim + cfg.dim

    def layer(fan_in: int, fan_out: int) -> tuple[np.ndarray, np.ndarray]:
        bound = np.sqrt(1.0 / fan_in)
        return gen.uniform(-bound, bound, size=(fan_in, fan_out)), np.zeros(fan_out)

    W1, b1 = layer(n_in, h1)
    W2, b2 = layer(h1, h2)
    W3, b3 = layer(h2, input_dim)
    return ModelParams(
        input_dim=input_dim,
        embed_cfg=cfg,
        W1=W1, b1=b1, W2=W2, b2=b2, W3=W3, b3=b3,
        embed_params=init_embed_params(cfg, gen),
    )


def param_leaves(tape: Tape, params: ModelParams) -> dict[str, Node]:
    """One leaf node per parameter array; the trainer reads .grad off these."""
    return {name: tape.leaf(arr) for name, arr in params.named_arrays()}


def _embedding_node(
    tape: Tape,
    params: ModelParams,
    nodes: dict[str, Node],
    t: np.ndarray,
) -> Node:
    cfg = params.embed_cfg
    if cfg.kind == SINUSOIDAL:
        # The embedding of a sampled/fixed t is data, never differentiated.
        return tape.constant(sinusoidal_matrix(t, cfg.dim))
    if params.embed_params is None:
        raise ConfigError(f"embedding kind {cfg.kind!r} requires learnable params")
    if cfg.kind == LINEAR_SIN:
        t_col = tape.constant(t.reshape(-1, 1))
        return tape.sin_affine(t_col, nodes["embed.w"], nodes["embed.b"])
    assert cfg.kind == SINUSOIDAL_MLP
    base = tape.constant(sinusoidal_matrix(t, cfg.dim))
    h = tape.relu(tape.affine(base, nodes["embed.W1"], nodes["embed.b1"]))
    return tape.affine(h, nodes["embed.W2"], nodes["embed.b2"])


def velocity_node(
    tape: Tape,
    params: ModelParams,
    z: Node,
    t: np.ndarray,
    nodes: dict[str, Node] | None = None,
) -> Node:
    """Forward graph of the velocity field for a batch; t is one time per row."""
    if z.value.ndim != 2 or z.value.shape[1] != params.input_dim:
        raise DimensionError(
            f"batch has shape {z.value.shape}; model expects (B, {params.input_dim})"
        )
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    if t.shape[0] == 1 and z.value.shape[0] != 1:
        t = np.full(z.value.shape[0], t[0])
    if t.shape[0] != z.value.shape[0]:
        raise DimensionError(f"{t.shape[0]} time values for {z.value.shape[0]} rows")
    if nodes is None:
        # Pure scoring: weights are constants, so backward (if any) only
        # propagates to the input rows.
        nodes = {name: tape.constant(arr) for name, arr in params.named_arrays()}
    emb = _embedding_node(tape, params, nodes, t)
    h = tape.concat(z, emb)
    h = tape.relu(tape.affine(h, nodes["W1"], nodes["b1"]))
    h = tape.relu(tape.affine(h, nodes["W2"], nodes["b2"]))
    return tape.affine(h, nodes["W3"], nodes["b3"])


def velocity(params: ModelParams, z: np.ndarray, t: float | np.ndarray) -> np.ndarray:
    """Velocity field values for a batch (no gradients retained)."""
    tape = Tape()
    z_node = tape.leaf(np.asarray(z, dtype=np.float64))
    return velocity_node(tape, params, z_node, np.asarray(t, dtype=np.float64)).value


def _check_t_fixed(t_fixed: float) -> float:
    t = float(t_fixed)
    if not 0.0 < t <= 1.0:
        raise DomainError(f"t_fixed must lie in (0, 1]; got {t_fixed}")
    return t


def score(
    params: ModelParams,
    z: np.ndarray,
    t_fixed: float = 1.0,
    with_attributions: bool = False,
) -> ScoreReport:
    """Residual-norm anomaly scores: ||f([z; Embed(t_fixed)]) + z|| per row."""
    t = _check_t_fixed(t_fixed)
    z = np.asarray(z, dtype=np.float64)
    squeeze = z.ndim == 1
    if squeeze:
        z = z[None, :]
    tape = Tape()
    z_node = tape.leaf(z)
    v = velocity_node(tape, params, z_node, np.asarray([t]))
    residual = v.value + z
    scores = np.sqrt(np.einsum("ij,ij->i", residual, residual))
    attributions = np.abs(residual) if with_attributions else None
    return ScoreReport(scores=scores, t_fixed=t, attributions=attributions)


def attribute(params: ModelParams, z: np.ndarray, t_fixed: float = 1.0) -> np.ndarray:
    """Per-feature attribution of one row: |f([z; Embed(t)])_j + z_j|.

    Sorting descending gives the top-k explanation; the vector's euclidean
    norm equals the row's anomaly score by construction.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise DimensionError(f"attribute expects a single row; got shape {z.shape}")
    report = score(params, z, t_fixed=t_fixed, with_attributions=True)
    assert report.attributions is not None
    return report.attributions[0]


def score_with_input_grad(
    params: ModelParams,
    z: np.ndarray,
    t_fixed: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Scores and d(score)/d(z) per row (what the PGD attack iterates on).

    Rows are independent, so backpropagating the sum of scores yields each
    row's own gradient.
    """
    t = _check_t_fixed(t_fixed)
    z = np.asarray(z, dtype=np.float64)
    tape = Tape()
    z_node = tape.leaf(z)
    v = velocity_node(tape, params, z_node, np.asarray([t]))
    residual = tape.add(v, z_node)
    scores = tape.row_l2(residual)
    total = tape.vsum(scores)
    tape.backward(total)
    assert z_node.grad is not None
    return scores.value, z_node.grad


def flatten_params(params: ModelParams) -> np.ndarray:
    """All parameter arrays raveled into one vector (fixed order)."""
    return np.concatenate([arr.ravel() for _, arr in params.named_arrays()])


def unflatten_params(template: ModelParams, flat: np.ndarray) -> ModelParams:
    """Inverse of flatten_params against a template's shapes."""
    out = template.copy()
    offset = 0
    for name, arr in out.named_arrays():
        chunk = flat[offset: offset + arr.size]
        if chunk.size != arr.size:
            raise DimensionError("flat vector does not match parameter sizes")
        arr[...] = chunk.reshape(arr.shape)
        offset += arr.size
    if offset != flat.size:
        raise DimensionError(f"flat vector has {flat.size} entries; model needs {offset}")
    return out


def spectral_norm(
    matrix: np.ndarray,
    rel_tol: float = 1e-6,
    max_iters: int = 10_000,
) -> float:
    """Largest singular value by power iteration on A^T A."""
    a = np.asarray(matrix, dtype=np.float64)
    if a.size == 0 or not a.any():
        return 0.0
    gen = np.random.Generator(np.random.PCG64(0))
    v = gen.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    sigma_prev = -1.0
    for _ in range(max_iters):
        w = a.T @ (a @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        sigma = float(np.linalg.norm(a @ v))
        if abs(sigma - sigma_prev) <= rel_tol * max(sigma, 1e-300):
            return sigma
        sigma_prev = sigma
    raise NumericalError(f"power iteration did not converge in {max_iters} steps")


def lipschitz_upper_bound(params: ModelParams) -> float:
    """Sound Lipschitz bound for z -> f([z; Embed(t)]) at any fixed t.

    Product of spectral norms; layer 1 restricted to the rows multiplying z,
    since the embedding block contributes a constant once t is fixed. ReLU is
    1-Lipschitz, so the product dominates the true constant.
    """
    d = params.input_dim
    return (
        spectral_norm(params.W1[:d, :])
        * spectral_norm(params.W2)
        * spectral_norm(params.W3)
    )

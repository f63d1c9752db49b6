"""Minibatch training of the velocity field toward the constant target -z.

Each step samples one time value per row, embeds it, runs the MLP forward on
[z; Embed(t)] and pulls the output toward -z, i.e. the loss is the mean of
||f([z_i; Embed(t_i)]) + z_i|| over the batch (optionally squared norms). The
two ablation toggles perturb only the *input* rows, never the target:

* noise_injection: input row becomes z + t * eps with eps ~ N(0, I);
* time_interpolation: input row becomes t * z.

All randomness is drawn from purpose-separated streams derived from the one
seed, so turning a toggle on never reshuffles the batch order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng as _rng
from .errors import ConfigError, NumericalError
from .model import ModelParams, param_leaves, velocity_node
from .tape import Node, Tape

LOSS_ROW_L2 = "l2"  # mean of per-row euclidean norms
LOSS_ROW_L2_SQUARED = "mse"  # mean of per-row squared norms
_LOSS_KINDS = (LOSS_ROW_L2, LOSS_ROW_L2_SQUARED)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int | None = None  # None -> 1024 if n > 10_000 else min(512, n)
    learning_rate: float = 0.005
    loss_kind: str = LOSS_ROW_L2
    noise_injection: bool = False
    time_interpolation: bool = False
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1; got {self.epochs}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1; got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be > 0; got {self.learning_rate}")
        if self.loss_kind not in _LOSS_KINDS:
            raise ConfigError(f"loss_kind must be one of {_LOSS_KINDS}; got {self.loss_kind!r}")

    def resolve_batch_size(self, n_rows: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return 1024 if n_rows > 10_000 else min(512, n_rows)


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0


def init_adam(params: ModelParams) -> AdamState:
    return AdamState(
        m={name: np.zeros_like(arr) for name, arr in params.named_arrays()},
        v={name: np.zeros_like(arr) for name, arr in params.named_arrays()},
    )


def adam_step(
    arrays: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One bias-corrected Adam update, in place on the given arrays."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient for parameter {name!r}")
    state.step += 1
    t = state.step
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for name, arr in arrays.items():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        arr -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def _transform_inputs(
    batch: np.ndarray,
    t: np.ndarray,
    cfg: TrainConfig,
    noise: np.ndarray | None,
) -> np.ndarray:
    inputs = batch
    if cfg.time_interpolation:
        inputs = t[:, None] * inputs
    if cfg.noise_injection:
        if noise is None:
            raise ConfigError("noise_injection requires a noise draw")
        inputs = inputs + t[:, None] * noise
    return inputs


def _loss_node(
    tape: Tape,
    params: ModelParams,
    nodes: dict[str, Node],
    batch: np.ndarray,
    t: np.ndarray,
    cfg: TrainConfig,
    noise: np.ndarray | None,
) -> Node:
    inputs = _transform_inputs(batch, t, cfg, noise)
    z_in = tape.leaf(inputs)
    v = velocity_node(tape, params, z_in, t, nodes)
    residual = tape.add(v, tape.leaf(batch))  # target is -original z, always
    if cfg.loss_kind == LOSS_ROW_L2:
        rows = tape.row_l2(residual)
    else:
        rows = tape.row_sumsq(residual)
    return tape.mean(rows)


def loss(
    params: ModelParams,
    batch: np.ndarray,
    t_samples: np.ndarray,
    cfg: TrainConfig,
    noise: np.ndarray | None = None,
) -> float:
    """Batch loss value under cfg (one t per row, each in [0, 1]).

    With noise_injection on, ``noise`` supplies the N(0, I) draw; by default
    it is taken fresh from the seed's noise stream, which is what a single
    detached evaluation should see.
    """
    batch = np.asarray(batch, dtype=np.float64)
    t_samples = np.asarray(t_samples, dtype=np.float64).reshape(-1)
    if cfg.noise_injection and noise is None:
        noise = _rng.box_muller(_rng.derive(cfg.seed, _rng.NOISE), batch.shape)
    tape = Tape()
    nodes = param_leaves(tape, params)
    return float(_loss_node(tape, params, nodes, batch, t_samples, cfg, noise).value)


def format_epoch_line(epoch: int, mean_loss: float) -> str:
    return f"epoch={epoch} loss={mean_loss:.17g}"


def train(
    x_train: np.ndarray,
    params: ModelParams,
    cfg: TrainConfig,
    log: Callable[[str], None] | None = None,
    epoch_callback: Callable[[int, ModelParams], None] | None = None,
) -> tuple[ModelParams, list[float]]:
    """Run the full training loop; returns (params, mean loss per epoch).

    ``x_train`` holds training rows only (normals under the semi-supervised
    protocol, already scaled). Params are updated in place and also returned.
    ``log`` receives one "epoch=<n> loss=<float>" line per epoch;
    ``epoch_callback(epoch, params)`` fires after each epoch's updates.
    """
    x_train = np.asarray(x_train, dtype=np.float64)
    if x_train.ndim != 2 or x_train.shape[0] == 0:
        raise ConfigError(f"training set must be a nonempty matrix; got shape {x_train.shape}")
    n = x_train.shape[0]
    batch_size = cfg.resolve_batch_size(n)

    shuffle_rng = _rng.derive(cfg.seed, _rng.SHUFFLE)
    t_rng = _rng.derive(cfg.seed, _rng.TSAMPLE)
    noise_rng = _rng.derive(cfg.seed, _rng.NOISE)

    arrays = dict(params.named_arrays())
    state = init_adam(params)
    trace: list[float] = []

    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        for batch_index, start in enumerate(range(0, n, batch_size)):
            rows = order[start: start + batch_size]
            batch = x_train[rows]
            t = t_rng.random(rows.shape[0])
            noise = _rng.box_muller(noise_rng, batch.shape) if cfg.noise_injection else None

            tape = Tape()
            nodes = param_leaves(tape, params)
            loss_node = _loss_node(tape, params, nodes, batch, t, cfg, noise)
            batch_loss = float(loss_node.value)
            if not np.isfinite(batch_loss):
                raise NumericalError(
                    f"non-finite loss at epoch={epoch} batch={batch_index}"
                )
            tape.backward(loss_node)
            grads = {
                name: node.grad if node.grad is not None else np.zeros_like(arrays[name])
                for name, node in nodes.items()
            }
            adam_step(
                arrays, grads, state, cfg.learning_rate,
                beta1=cfg.adam_beta1, beta2=cfg.adam_beta2, eps=cfg.adam_eps,
            )
            epoch_loss += batch_loss * rows.shape[0]
        mean_loss = epoch_loss / n
        trace.append(mean_loss)
        if log is not None:
            log(format_epoch_line(epoch, mean_loss))
        if epoch_callback is not None:
            epoch_callback(epoch, params)
    return params, trace

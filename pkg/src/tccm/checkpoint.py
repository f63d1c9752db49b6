"""Checkpoint files: canonical, human-diffable, byte-stable JSON.

Keys are written in a fixed order and every float is rendered with 17
significant digits (enough for exact float64 round-trips), so
save -> load -> save reproduces the file byte for byte. Negative zero is
normalized to zero at write time for the same reason.
"""
from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .data import Scaler
from .embedding import SINUSOIDAL_MLP, TimeEmbeddingConfig
from .errors import DataFormatError
from .model import ModelParams

SCHEMA_VERSION = 1


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise DataFormatError(f"cannot serialize non-finite value {x}")
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return format(x, ".17g")


def _canonical(value: Any, out: list[str], indent: int) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(value.items()):
            out.append(f"{pad}  {json.dumps(str(k))}: ")
            _canonical(v, out, indent + 1)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, v in enumerate(value):
            _canonical(v, out, indent)
            if i < len(value) - 1:
                out.append(", ")
        out.append("]")
    elif isinstance(value, bool):
        out.append("true" if value else "false")
    elif isinstance(value, (int, np.integer)):
        out.append(str(int(value)))
    elif isinstance(value, (float, np.floating)):
        out.append(_fmt_float(float(value)))
    elif isinstance(value, str):
        out.append(json.dumps(value))
    else:
        raise DataFormatError(f"cannot serialize {type(value).__name__} in checkpoint")


def canonical_json(payload: dict) -> str:
    out: list[str] = []
    _canonical(payload, out, 0)
    out.append("\n")
    return "".join(out)


def _array(a: np.ndarray) -> list:
    if a.ndim == 1:
        return [float(x) for x in a]
    return [[float(x) for x in row] for row in a]


def checkpoint_payload(
    params: ModelParams,
    scaler: Scaler,
    t_fixed: float = 1.0,
    provenance: dict | None = None,
) -> dict:
    cfg = params.embed_cfg
    embed: dict[str, Any] = {"kind": cfg.kind, "dim": cfg.dim}
    if cfg.kind == SINUSOIDAL_MLP:
        embed["mlp_hidden"] = cfg.mlp_hidden
    weights = {name: _array(arr) for name, arr in params.named_arrays()}
    prov = provenance or {}
    return {
        "schema_version": SCHEMA_VERSION,
        "input_dim": params.input_dim,
        "embed": embed,
        "hidden_sizes": list(params.hidden_sizes),
        "weights": weights,
        "scaler": {"mean": _array(scaler.mean), "std": _array(scaler.std)},
        "t_fixed": float(t_fixed),
        "provenance": {
            "seed": int(prov.get("seed", 0)),
            "epochs": int(prov.get("epochs", 0)),
            "dataset": str(prov.get("dataset", "")),
            "config_hash": str(prov.get("config_hash", "")),
        },
    }


def save_checkpoint(
    path: str,
    params: ModelParams,
    scaler: Scaler,
    t_fixed: float = 1.0,
    provenance: dict | None = None,
) -> None:
    text = canonical_json(checkpoint_payload(params, scaler, t_fixed, provenance))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_checkpoint(path: str) -> tuple[ModelParams, Scaler, float, dict]:
    """Returns (params, scaler, t_fixed, provenance)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DataFormatError(f"cannot read checkpoint {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not a valid checkpoint: {exc}") from exc

    if payload.get("schema_version") != SCHEMA_VERSION:
        raise DataFormatError(
            f"{path}: unsupported schema_version {payload.get('schema_version')!r}"
        )
    try:
        embed = payload["embed"]
        cfg = TimeEmbeddingConfig(
            kind=embed["kind"],
            dim=int(embed["dim"]),
            mlp_hidden=int(embed.get("mlp_hidden", 128)),
        )
        weights = payload["weights"]
        core = {k: np.asarray(weights[k], dtype=np.float64)
                for k in ("W1", "b1", "W2", "b2", "W3", "b3")}
        embed_params = {
            k.split(".", 1)[1]: np.asarray(v, dtype=np.float64)
            for k, v in weights.items()
            if k.startswith("embed.")
        } or None
        params = ModelParams(
            input_dim=int(payload["input_dim"]),
            embed_cfg=cfg,
            embed_params=embed_params,
            **core,
        )
        scaler = Scaler(
            mean=np.asarray(payload["scaler"]["mean"], dtype=np.float64),
            std=np.asarray(payload["scaler"]["std"], dtype=np.float64),
        )
        t_fixed = float(payload["t_fixed"])
        provenance = dict(payload.get("provenance", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed checkpoint field: {exc}") from exc

    d, dim = params.input_dim, cfg.dim
    if params.W1.shape[0] != d + dim or params.W3.shape[1] != d:
        raise DataFormatError(
            f"{path}: weight shapes {params.W1.shape}/{params.W3.shape} do not chain "
            f"with input_dim {d} and embed dim {dim}"
        )
    if scaler.mean.shape != (d,) or scaler.std.shape != (d,):
        raise DataFormatError(f"{path}: scaler shape does not match input_dim {d}")
    return params, scaler, t_fixed, provenance

"""Reverse-mode automatic differentiation for the fixed scoring/loss graph.

This is deliberately not a general autograd. The model is a small MLP with a
known shape (affine -> relu -> affine -> relu -> affine over a concatenated
input), and the losses are row-wise L2 norms reduced by a mean. A tape records
the handful of primitives executed during one forward pass; ``backward`` then
replays them in reverse, accumulating adjoints into every node, including
input leaves (the PGD attack differentiates the score with respect to its
input row).

Conventions baked in here:

* all values are float64 ndarrays (2-D matrices, 1-D vectors, 0-D scalars);
* ReLU's gradient at exactly 0 is 0;
* the gradient of ``row_l2`` at an all-zero row is the zero vector;
* one backward pass per tape;
* adjoints start from zero buffers allocated lazily during the pass itself,
  so reusing a node in two places accumulates both contributions.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DimensionError, NumericalError


class Node:
    """One value in the graph. ``grad`` is filled by ``Tape.backward``."""

    __slots__ = ("value", "grad")

    def __init__(self, value: np.ndarray):
        self.value = value
        self.grad: np.ndarray | None = None


class Const(Node):
    """A node the backward pass never differentiates.

    Scoring and attacks treat the trained weights as constants; marking them
    as such skips the x^T @ g weight-gradient matmuls, which otherwise
    dominate the cost of input-gradient (PGD) loops.
    """

    __slots__ = ()


def _accumulate(node: Node, delta: np.ndarray) -> None:
    if isinstance(node, Const):
        return
    if node.grad is None:
        node.grad = np.zeros_like(node.value)
    node.grad += delta


class Tape:
    """Records primitives in forward order; replays them reversed."""

    def __init__(self) -> None:
        # (output node, backward closure) in execution order
        self._steps: list[tuple[Node, Callable[[np.ndarray], None]]] = []
        self._spent = False

    # -- graph construction ------------------------------------------------

    def leaf(self, value: np.ndarray | float) -> Node:
        return Node(np.asarray(value, dtype=np.float64))

    def constant(self, value: np.ndarray | float) -> Const:
        return Const(np.asarray(value, dtype=np.float64))

    def affine(self, x: Node, w: Node, b: Node) -> Node:
        """x @ w + b with x:(B,n), w:(n,m), b:(m,)."""
        xv, wv, bv = x.value, w.value, b.value
        if xv.ndim != 2 or wv.ndim != 2 or bv.ndim != 1:
            raise DimensionError(
                f"affine expects matrix, matrix, vector; got shapes "
                f"{xv.shape}, {wv.shape}, {bv.shape}"
            )
        if xv.shape[1] != wv.shape[0] or bv.shape[0] != wv.shape[1]:
            raise DimensionError(
                f"affine shapes do not conform: x{xv.shape} @ w{wv.shape} + b{bv.shape}"
            )
        out = Node(xv @ wv + bv)

        def backward(g: np.ndarray) -> None:
            if not isinstance(x, Const):
                _accumulate(x, g @ wv.T)
            if not isinstance(w, Const):
                _accumulate(w, xv.T @ g)
            if not isinstance(b, Const):
                _accumulate(b, g.sum(axis=0))

        self._steps.append((out, backward))
        return out

    def relu(self, x: Node) -> Node:
        mask = x.value > 0.0
        out = Node(np.where(mask, x.value, 0.0))

        def backward(g: np.ndarray) -> None:
            _accumulate(x, g * mask)

        self._steps.append((out, backward))
        return out

    def concat(self, x: Node, y: Node) -> Node:
        """Column-wise concatenation of two matrices with equal row counts."""
        if x.value.ndim != 2 or y.value.ndim != 2 or x.value.shape[0] != y.value.shape[0]:
            raise DimensionError(
                f"concat expects matrices with equal rows; got {x.value.shape}, {y.value.shape}"
            )
        nx = x.value.shape[1]
        out = Node(np.concatenate([x.value, y.value], axis=1))

        def backward(g: np.ndarray) -> None:
            _accumulate(x, g[:, :nx])
            _accumulate(y, g[:, nx:])

        self._steps.append((out, backward))
        return out

    def add(self, x: Node, y: Node) -> Node:
        if x.value.shape != y.value.shape:
            raise DimensionError(f"add shapes differ: {x.value.shape} vs {y.value.shape}")
        out = Node(x.value + y.value)

        def backward(g: np.ndarray) -> None:
            _accumulate(x, g)
            _accumulate(y, g)

        self._steps.append((out, backward))
        return out

    def sin_affine(self, t: Node, w: Node, b: Node) -> Node:
        """sin(t * w + b) rowwise: t:(B,1), w:(m,), b:(m,) -> (B,m).

        The learnable-frequency time embedding ("Linear+Sin" variant).
        """
        if t.value.ndim != 2 or t.value.shape[1] != 1:
            raise DimensionError(f"sin_affine expects t of shape (B,1); got {t.value.shape}")
        pre = t.value * w.value[None, :] + b.value[None, :]
        out = Node(np.sin(pre))
        cos_pre = np.cos(pre)

        def backward(g: np.ndarray) -> None:
            dpre = g * cos_pre
            if not isinstance(t, Const):
                _accumulate(t, (dpre * w.value[None, :]).sum(axis=1, keepdims=True))
            if not isinstance(w, Const):
                _accumulate(w, (dpre * t.value).sum(axis=0))
            if not isinstance(b, Const):
                _accumulate(b, dpre.sum(axis=0))

        self._steps.append((out, backward))
        return out

    def row_l2(self, x: Node) -> Node:
        """Per-row euclidean norm, (B,n) -> (B,). Zero rows get zero gradient."""
        if x.value.ndim != 2:
            raise DimensionError(f"row_l2 expects a matrix; got shape {x.value.shape}")
        norms = np.sqrt(np.einsum("ij,ij->i", x.value, x.value))
        out = Node(norms)
        safe = np.where(norms > 0.0, norms, 1.0)

        def backward(g: np.ndarray) -> None:
            # x[i]/||x[i]|| scaled by g[i]; a zero row contributes zeros.
            _accumulate(x, (g / safe)[:, None] * x.value)

        self._steps.append((out, backward))
        return out

    def row_sumsq(self, x: Node) -> Node:
        """Per-row sum of squares (the squared-norm loss path, no sqrt kink)."""
        if x.value.ndim != 2:
            raise DimensionError(f"row_sumsq expects a matrix; got shape {x.value.shape}")
        out = Node(np.einsum("ij,ij->i", x.value, x.value))

        def backward(g: np.ndarray) -> None:
            _accumulate(x, 2.0 * g[:, None] * x.value)

        self._steps.append((out, backward))
        return out

    def mean(self, v: Node) -> Node:
        if v.value.ndim != 1:
            raise DimensionError(f"mean expects a vector; got shape {v.value.shape}")
        out = Node(np.asarray(v.value.mean()))
        n = v.value.shape[0]

        def backward(g: np.ndarray) -> None:
            _accumulate(v, np.full(n, float(g) / n))

        self._steps.append((out, backward))
        return out

    def vsum(self, v: Node) -> Node:
        if v.value.ndim != 1:
            raise DimensionError(f"vsum expects a vector; got shape {v.value.shape}")
        out = Node(np.asarray(v.value.sum()))
        n = v.value.shape[0]

        def backward(g: np.ndarray) -> None:
            _accumulate(v, np.full(n, float(g)))

        self._steps.append((out, backward))
        return out

    # -- reverse pass --------------------------------------------------------

    def backward(self, root: Node) -> None:
        """Seed d(root)/d(root) = 1 and accumulate adjoints into every node."""
        if self._spent:
            raise NumericalError("tape already consumed: one backward pass per forward pass")
        self._spent = True
        if root.value.ndim != 0:
            raise DimensionError("backward root must be a scalar node")
        root.grad = np.ones_like(root.value)
        for node, backward_fn in reversed(self._steps):
            if node.grad is not None:
                backward_fn(node.grad)


def grad_check(
    fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    point: np.ndarray,
    eps: float = 1e-5,
) -> float:
    """Max relative error between fn's analytic gradient and central differences.

    ``fn`` maps a flat 1-D point to ``(value, gradient)``; the gradient is
    expected to come from a tape backward pass. Error per coordinate is
    |analytic - cd| / max(1, |cd|); the max over coordinates is returned.
    """
    if eps <= 0:
        raise NumericalError("grad_check requires eps > 0")
    point = np.asarray(point, dtype=np.float64)
    _, analytic = fn(point)
    analytic = np.asarray(analytic, dtype=np.float64)
    if analytic.shape != point.shape:
        raise DimensionError(
            f"analytic gradient shape {analytic.shape} != point shape {point.shape}"
        )
    worst = 0.0
    for i in range(point.size):
        shifted = point.copy()
        shifted[i] = point[i] + eps
        hi, _ = fn(shifted)
        shifted[i] = point[i] - eps
        lo, _ = fn(shifted)
        cd = (hi - lo) / (2.0 * eps)
        if not np.isfinite(cd) or not np.isfinite(analytic[i]):
            raise NumericalError(f"non-finite value in grad_check at coordinate {i}")
        err = abs(analytic[i] - cd) / max(1.0, abs(cd))
        if err > worst:
            worst = err
    return worst

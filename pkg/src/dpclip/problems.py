"""Loss oracles (ridge, logistic, synthetic quadratics) and a reference minimizer.

The logistic loss here is ``log(1 + exp(1 + y * <x, xi>))``, i.e. it keeps the
"+1" shift inside the exponent and the ``+y`` sign.  This is deliberate and is
what every benchmark in this package optimizes.  A conventional
``log(1 + exp(-y * <x, xi>))`` variant is available through
:func:`make_standard_logistic` for sanity comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import ReferenceSolveError

CONVEXITY_CLASSES = ("convex_smooth", "strongly_convex", "holder")
LOSS_KINDS = ("ridge", "logistic", "quadratic1d", "custom")


@dataclass(frozen=True)
class ProblemSpec:
    """Problem constants consumed by every schedule builder.

    ``grad_variance`` is the known upper bound on the second moment of the
    stochastic gradient noise; ``holder_exponent``/``holder_constant`` describe
    gradient Hoelder continuity (exponent 1 means plain smoothness, in which
    case the Hoelder constant plays the role of the smoothness constant).
    """

    dim: int
    smoothness: float = 0.0
    strong_convexity: float = 0.0
    grad_variance: float = 0.0
    holder_exponent: float = 1.0
    holder_constant: float = 0.0
    convexity_class: str = "convex_smooth"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        for name in ("smoothness", "strong_convexity", "grad_variance", "holder_constant"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0.0 <= self.holder_exponent <= 1.0:
            raise ValueError("holder_exponent must lie in [0, 1]")
        if self.convexity_class not in CONVEXITY_CLASSES:
            raise ValueError(f"unknown convexity_class {self.convexity_class!r}")
        if 0 < self.smoothness < self.strong_convexity:
            raise ValueError("strong_convexity cannot exceed smoothness")


@dataclass(frozen=True)
class LossKind:
    """Tag selecting one of the supported per-sample losses.

    ``quadratic1d`` is the data-free quadratic ``0.5 * a * ||x||^2`` used for
    deterministic optimizer tests; ``custom`` carries user callables
    ``loss_fn(x, example)`` / ``grad_fn(x, example)``.
    """

    kind: str
    curvature: Optional[float] = None
    loss_fn: Optional[Callable] = field(default=None, compare=False)
    grad_fn: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == "quadratic1d":
            if self.curvature is None or self.curvature <= 0:
                raise ValueError("quadratic1d requires positive curvature")
        if self.kind == "custom" and (self.loss_fn is None or self.grad_fn is None):
            raise ValueError("custom loss requires loss_fn and grad_fn")

    @classmethod
    def ridge(cls):
        return cls("ridge")

    @classmethod
    def logistic(cls):
        return cls("logistic")

    @classmethod
    def quadratic1d(cls, curvature):
        return cls("quadratic1d", curvature=curvature)

    @classmethod
    def custom(cls, loss_fn, grad_fn):
        return cls("custom", loss_fn=loss_fn, grad_fn=grad_fn)


def make_standard_logistic():
    """Conventional logistic loss ``log(1 + exp(-y * <x, xi>))`` as a custom kind."""

    def loss_fn(x, example):
        u = -example.label * _sparse_dot(x, example)
        return float(np.logaddexp(0.0, u))

    def grad_fn(x, example):
        y = example.label
        u = -y * _sparse_dot(x, example)
        out = np.zeros_like(x)
        out[example.indices] = -y * expit(u) * example.values
        return out

    return LossKind.custom(loss_fn, grad_fn)


def _sparse_dot(x, example):
    if example.indices.size and example.indices[-1] >= x.shape[0]:
        raise ValueError(
            f"example index {int(example.indices[-1])} out of range for dim {x.shape[0]}"
        )
    return float(np.dot(x[example.indices], example.values))


def eval_loss(kind: LossKind, x: np.ndarray, example) -> float:
    """Per-sample loss value at ``x`` for one labeled sparse example."""
    x = np.asarray(x, dtype=float)
    if kind.kind == "ridge":
        r = _sparse_dot(x, example) - example.label
        return float(r * r)
    if kind.kind == "logistic":
        u = 1.0 + example.label * _sparse_dot(x, example)
        return float(np.logaddexp(0.0, u))
    if kind.kind == "quadratic1d":
        return float(0.5 * kind.curvature * np.dot(x, x))
    return float(kind.loss_fn(x, example))


def eval_grad(kind: LossKind, x: np.ndarray, example) -> np.ndarray:
    """Gradient of :func:`eval_loss` with respect to ``x``, returned dense."""
    x = np.asarray(x, dtype=float)
    if kind.kind == "ridge":
        r = _sparse_dot(x, example) - example.label
        out = np.zeros_like(x)
        out[example.indices] = 2.0 * r * example.values
        return out
    if kind.kind == "logistic":
        y = example.label
        u = 1.0 + y * _sparse_dot(x, example)
        out = np.zeros_like(x)
        out[example.indices] = y * expit(u) * example.values
        return out
    if kind.kind == "quadratic1d":
        return kind.curvature * x
    return np.asarray(kind.grad_fn(x, example), dtype=float)


def batch_losses(kind: LossKind, x, rows, labels):
    """Vectorized per-sample losses over dense feature rows ``(B, d)``."""
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if kind.kind == "ridge":
        r = rows @ x - labels
        return r * r
    if kind.kind == "logistic":
        u = 1.0 + labels * (rows @ x)
        return np.logaddexp(0.0, u)
    if kind.kind == "quadratic1d":
        return np.full(rows.shape[0], 0.5 * kind.curvature * float(np.dot(x, x)))
    raise ValueError(f"no vectorized path for loss kind {kind.kind!r}")


def batch_grads(kind: LossKind, x, rows, labels):
    """Vectorized per-sample gradients ``(B, d)`` over dense feature rows."""
    rows = np.asarray(rows, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if kind.kind == "ridge":
        r = rows @ x - labels
        return 2.0 * r[:, None] * rows
    if kind.kind == "logistic":
        u = 1.0 + labels * (rows @ x)
        return (labels * expit(u))[:, None] * rows
    if kind.kind == "quadratic1d":
        return np.tile(kind.curvature * x, (rows.shape[0], 1))
    raise ValueError(f"no vectorized path for loss kind {kind.kind!r}")


def empirical_risk(kind: LossKind, x, dataset) -> float:
    """Mean per-sample loss over the whole dataset."""
    if kind.kind == "custom":
        return float(np.mean([eval_loss(kind, x, e) for e in dataset.examples]))
    rows, labels = dataset.dense()
    return float(np.mean(batch_losses(kind, np.asarray(x, dtype=float), rows, labels)))


def empirical_grad(kind: LossKind, x, dataset) -> np.ndarray:
    """Mean per-sample gradient over the whole dataset."""
    x = np.asarray(x, dtype=float)
    if kind.kind == "custom":
        acc = np.zeros_like(x)
        for e in dataset.examples:
            acc += eval_grad(kind, x, e)
        return acc / dataset.n
    rows, labels = dataset.dense()
    return batch_grads(kind, x, rows, labels).mean(axis=0)


def _empirical_smoothness(kind: LossKind, dataset) -> float:
    """Upper bound on the smoothness constant of the empirical risk."""
    rows, labels = dataset.dense()
    n = dataset.n
    if kind.kind == "ridge":
        gram = rows.T @ rows / n
        return 2.0 * float(np.linalg.eigvalsh(gram)[-1])
    if kind.kind == "logistic":
        # second derivative of log(1 + e^u) is at most 1/4
        weighted = rows * (labels**2)[:, None]
        gram = rows.T @ weighted / (4.0 * n)
        return float(np.linalg.eigvalsh(gram)[-1])
    raise ValueError(f"no smoothness bound for loss kind {kind.kind!r}")


def _gradient_descent_min(kind, dataset, x0, tol, max_iter):
    smooth = _empirical_smoothness(kind, dataset)
    if smooth <= 0:
        return np.array(x0, dtype=float)
    step = 1.0 / smooth
    x = np.array(x0, dtype=float)
    grad_norm = np.inf
    for _ in range(max_iter):
        g = empirical_grad(kind, x, dataset)
        grad_norm = float(np.linalg.norm(g))
        if grad_norm < tol:
            return x
        x -= step * g
    raise ReferenceSolveError(
        f"reference solve stalled at gradient norm {grad_norm:.3e} "
        f"after {max_iter} iterations",
        grad_norm=grad_norm,
    )


def solve_reference_min(kind: LossKind, dataset, *, tol=1e-10, max_iter=10**6,
                        method="auto"):
    """High-accuracy minimizer of the empirical risk, for excess-risk measurement.

    Ridge solves the normal equations directly and falls back to full-gradient
    descent when they are singular; logistic always takes the gradient-descent
    path.  ``method="gd"`` forces gradient descent (used to cross-check the
    direct solver).  Returns ``(x_star, f_min)``.
    """
    if dataset.n < 1:
        raise ValueError("dataset must be nonempty")
    if kind.kind == "quadratic1d":
        x = np.zeros(dataset.d)
        return x, 0.0

    x0 = np.zeros(dataset.d)
    if kind.kind == "ridge" and method == "auto":
        rows, labels = dataset.dense()
        gram = rows.T @ rows
        rhs = rows.T @ labels
        try:
            x = np.linalg.solve(gram, rhs)
        except np.linalg.LinAlgError:
            x = _gradient_descent_min(kind, dataset, x0, tol, max_iter)
    elif kind.kind in ("ridge", "logistic"):
        x = _gradient_descent_min(kind, dataset, x0, tol, max_iter)
    else:
        raise ValueError(f"reference solve not defined for loss kind {kind.kind!r}")
    return x, empirical_risk(kind, x, dataset)

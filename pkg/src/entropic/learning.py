"""A probabilistic table learner trained by gradient descent.

Row ``i`` of the learner maps input ``i`` to a distribution over the
``N`` candidate outputs.  Rows are a row-wise softmax of a real weight
matrix, so every prediction stays strictly inside the simplex at finite
``t``.  Training drives each row toward the one-hot vector of its target;
the traces record how the normalized Shannon entropy and the per-row
Renyi entropies fall along the way.

This is the supervised case: inputs and outputs are distinct sets and the
target of every input is given.  The unsupervised case (outputs are
subsets of the inputs) lives in :mod:`entropic.selforg`.

Memorizing an arbitrary target table is exactly what this learner does;
detecting or preventing overtraining is not attempted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .entropy import DiscreteDistribution, LogBase, normalized_entropy, renyi_entropy
from .trace import RunTrace

__all__ = [
    "CONVERGED_LOSS",
    "STOP_LOSS",
    "LearnerState",
    "init_learner",
    "loss",
    "loss_gradient",
    "mapping_entropy",
    "predictions",
    "step",
    "train",
    "trace_columns",
]

#: Loss below which a learner counts as converged.
CONVERGED_LOSS = 1e-6
#: Default stopping loss for :func:`train`.  Deeper than CONVERGED_LOSS:
#: at a squared loss of 1e-6 the order-1/2 Renyi entropy is still ~0.1 bit.
STOP_LOSS = 1e-12

MAX_HALVINGS = 20
RATE_GROWTH = 1.1
MAX_RATE = 1e9

SHANNON = "shannon"


@dataclass(frozen=True)
class LearnerState:
    """Weights, targets and step bookkeeping of a table learner.

    ``rho`` is the base learning rate.  ``rate`` is the effective rate the
    next step starts from; it grows by ``RATE_GROWTH`` after each accepted
    step and is halved while a trial step would increase the loss.
    """

    weights: np.ndarray
    targets: np.ndarray
    rho: float
    rate: float
    t: int = 0
    seed: int | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        tg = np.array(self.targets, dtype=np.int64)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise ValueError(f"weights must be a non-empty M x N matrix, got shape {w.shape}")
        if tg.shape != (w.shape[0],):
            raise ValueError(f"need {w.shape[0]} targets, got {tg.size}")
        if np.any(tg < 0) or np.any(tg >= w.shape[1]):
            raise ValueError(f"targets must lie in [0, {w.shape[1]})")
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise ValueError(f"learning rate must be positive and finite, got {self.rho}")
        w.flags.writeable = False
        tg.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "targets", tg)

    @property
    def shape(self) -> tuple[int, int]:
        return self.weights.shape

    @property
    def predictions(self) -> np.ndarray:
        return predictions(self.weights)

    @property
    def one_hot(self) -> np.ndarray:
        y = np.zeros(self.weights.shape)
        y[np.arange(y.shape[0]), self.targets] = 1.0
        return y


def predictions(weights: np.ndarray) -> np.ndarray:
    """Row-wise softmax."""
    z = weights - weights.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def init_learner(
    num_inputs: int,
    num_outputs: int,
    targets: Sequence[int],
    rho: float,
    seed: int,
) -> LearnerState:
    """Fresh learner with weights drawn uniformly from [-0.1, 0.1]."""
    if num_inputs < 1 or num_outputs < 1:
        raise ValueError("learner needs at least one input and one output")
    if len(targets) != num_inputs:
        raise ValueError(f"{num_inputs} inputs but {len(targets)} targets")
    rng = np.random.default_rng(seed)
    w = rng.uniform(-0.1, 0.1, size=(num_inputs, num_outputs))
    return LearnerState(w, np.asarray(targets), float(rho), float(rho), 0, seed)


def _loss_of(weights: np.ndarray, one_hot: np.ndarray) -> float:
    diff = predictions(weights) - one_hot
    return float(np.sum(diff * diff) / weights.shape[0])


def loss(state: LearnerState) -> float:
    """Mean over inputs of the squared distance from prediction row to one-hot target."""
    return _loss_of(state.weights, state.one_hot)


def loss_gradient(state: LearnerState) -> np.ndarray:
    """Analytic gradient of :func:`loss` with respect to the weights."""
    p = state.predictions
    g = 2.0 * (p - state.one_hot) / p.shape[0]
    # softmax Jacobian-vector product, row by row
    return p * (g - np.sum(g * p, axis=1, keepdims=True))


def step(state: LearnerState) -> LearnerState:
    """One descent step with step halving.

    The trial rate is halved (at most ``MAX_HALVINGS`` times) until the
    loss does not increase.  If no trial is accepted the weights are kept,
    so the loss never goes up.
    """
    grad = loss_gradient(state)
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError(f"non-finite gradient at t={state.t}")
    y = state.one_hot
    current = _loss_of(state.weights, y)
    rate = state.rate
    for _ in range(MAX_HALVINGS + 1):
        trial = state.weights - rate * grad
        if _loss_of(trial, y) <= current:
            return replace(
                state, weights=trial, t=state.t + 1, rate=min(rate * RATE_GROWTH, MAX_RATE)
            )
        rate /= 2.0
    return replace(state, t=state.t + 1, rate=rate)


def mapping_entropy(state: LearnerState, alpha=SHANNON, base: LogBase = LogBase.TWO) -> float:
    """Mean per-input entropy of the prediction rows.

    ``alpha="shannon"`` (or ``None``) gives the normalized Shannon
    entropy; a number gives the mean Renyi entropy of that order.
    """
    rows = [DiscreteDistribution(r) for r in state.predictions]
    if alpha is None or alpha == SHANNON:
        return normalized_entropy(rows, base)
    return float(np.mean([renyi_entropy(r, alpha, base) for r in rows]))


def trace_columns(alphas: Sequence[float]) -> tuple[str, ...]:
    return (
        ("t", "loss", "distance", "entropy_shannon")
        + tuple(f"entropy_renyi_{a:g}" for a in alphas)
        + ("rate",)
    )


def _record(trace: RunTrace, state: LearnerState, alphas) -> float:
    d = loss(state)
    renyi = [mapping_entropy(state, a) for a in alphas]
    # the loss is the distance itself, so both columns carry the same value
    trace.append(state.t, d, d, mapping_entropy(state), *renyi, state.rate)
    return d


def train(
    state: LearnerState,
    max_iters: int,
    entropy_alphas: Sequence[float] = (0.5, 2.0),
    tol: float = STOP_LOSS,
) -> tuple[LearnerState, RunTrace]:
    """Run :func:`step` until ``loss < tol`` or ``max_iters`` steps.

    The trace holds one record per visited state, starting at ``t = 0``.
    ``metadata["converged_at"]`` is the first ``t`` whose loss fell below
    :data:`CONVERGED_LOSS` (``None`` if never).
    """
    if max_iters < 0:
        raise ValueError("max_iters must be non-negative")
    alphas = tuple(float(a) for a in entropy_alphas)
    for a in alphas:
        renyi_entropy([1.0], a)  # domain check up front
    trace = RunTrace("learning", trace_columns(alphas))
    started = time.perf_counter()
    converged_at = None
    d = _record(trace, state, alphas)
    for _ in range(max_iters):
        if converged_at is None and d < CONVERGED_LOSS:
            converged_at = state.t
        if d < tol:
            break
        state = step(state)
        d = _record(trace, state, alphas)
    if converged_at is None and d < CONVERGED_LOSS:
        converged_at = state.t
    m, n = state.shape
    trace.metadata.update(
        inputs=m,
        outputs=n,
        rho=state.rho,
        seed=state.seed,
        alphas=list(alphas),
        tol=tol,
        converged_at=converged_at,
        iterations=state.t,
        duration_s=time.perf_counter() - started,
    )
    return state, trace

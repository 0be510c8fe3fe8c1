"""An agent that wanders a surface and tries to spread its height histogram.

The agent records the height ``z`` of every position it visits into an
equal-width histogram over ``[0, 1]``.  After a random-walk warmup it
greedily takes whichever of its eight compass moves would leave the
histogram with the highest entropy, so over time the distribution of
visited heights tends toward uniform.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .entropy import (
    Histogram,
    LogBase,
    _check_renyi_order,
    distribution_from_histogram,
    renyi_entropy,
    shannon_entropy,
)
from .trace import RunTrace, write_json

__all__ = [
    "AgentState",
    "ExploreConfig",
    "Surface",
    "candidate_moves",
    "entropy_gain_step",
    "histogram_payload",
    "init_agent",
    "move_scores",
    "random_walk_step",
    "run_exploration",
    "surface_eval",
    "write_histogram_json",
]

DEFAULT_BOUNDS = {"S1": (-2.0, 2.0, -2.0, 2.0), "S2": (-10.0, 10.0, -10.0, 10.0)}
# step as a fraction of the bound span on each axis
DEFAULT_STEP_FRACTION = 0.01

_HALF_PI = 0.5 * math.pi


def surface_eval(surface_id: str, x: float, y: float) -> float:
    """Height of surface ``S1`` or ``S2`` at ``(x, y)``.

    S1 is ``exp(-(x^2 + y^2))``.  S2 is
    ``exp(-((x/10)^2 + (y/10)^2)) * (cos(pi y / 2) + sin(pi x / 2) + 2) / 4``.
    """
    if surface_id == "S1":
        return math.exp(-(x * x + y * y))
    if surface_id == "S2":
        envelope = math.exp(-((x / 10.0) ** 2 + (y / 10.0) ** 2))
        return 0.25 * envelope * (math.cos(_HALF_PI * y) + math.sin(_HALF_PI * x) + 2.0)
    raise ValueError(f"unknown surface {surface_id!r}; expected S1 or S2")


@dataclass(frozen=True)
class Surface:
    id: str
    bounds: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        sid = str(self.id).upper()
        if sid in ("1", "2"):
            sid = "S" + sid
        if sid not in DEFAULT_BOUNDS:
            raise ValueError(f"unknown surface {self.id!r}; expected S1 or S2")
        bounds = tuple(float(b) for b in (self.bounds or DEFAULT_BOUNDS[sid]))
        if len(bounds) != 4:
            raise ValueError("bounds are (x_min, x_max, y_min, y_max)")
        x0, x1, y0, y1 = bounds
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"bounds need x_min < x_max and y_min < y_max, got {bounds}")
        object.__setattr__(self, "id", sid)
        object.__setattr__(self, "bounds", bounds)
        xs, ys = np.meshgrid(np.linspace(x0, x1, 41), np.linspace(y0, y1, 41))
        z = np.array([surface_eval(sid, a, b) for a, b in zip(xs.ravel(), ys.ravel())])
        if z.min() < 0.0 or z.max() > 1.0:
            raise ValueError(f"surface {sid} leaves [0, 1] on {bounds}")

    def __call__(self, x: float, y: float) -> float:
        return surface_eval(self.id, x, y)

    @property
    def center(self) -> tuple[float, float]:
        x0, x1, y0, y1 = self.bounds
        return (0.5 * (x0 + x1), 0.5 * (y0 + y1))

    def default_epsilon(self) -> tuple[float, float]:
        x0, x1, y0, y1 = self.bounds
        return (DEFAULT_STEP_FRACTION * (x1 - x0), DEFAULT_STEP_FRACTION * (y1 - y0))


@dataclass(frozen=True)
class AgentState:
    """Position, step sizes and z-histogram of the agent.

    ``counts`` has one entry per equal-width bin of ``[0, 1]`` and always
    sums to ``t``.
    """

    position: tuple[float, float]
    bounds: tuple[float, float, float, float]
    epsilon: tuple[float, float]
    counts: tuple[int, ...]
    t: int = 0

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def histogram(self) -> Histogram:
        return Histogram(np.linspace(0.0, 1.0, self.bins + 1), np.array(self.counts))


def init_agent(
    surface: Surface,
    start: tuple[float, float] | None = None,
    epsilon: tuple[float, float] | None = None,
    bins: int = 10,
) -> AgentState:
    if bins < 2:
        raise ValueError("need at least 2 histogram bins")
    eps = tuple(float(e) for e in (epsilon or surface.default_epsilon()))
    if len(eps) != 2 or min(eps) <= 0 or not all(map(math.isfinite, eps)):
        raise ValueError(f"epsilon must be two positive finite reals, got {epsilon}")
    x0, x1, y0, y1 = surface.bounds
    sx, sy = start if start is not None else surface.center
    if not (x0 <= sx <= x1 and y0 <= sy <= y1):
        raise ValueError(f"start {(sx, sy)} lies outside bounds {surface.bounds}")
    return AgentState((float(sx), float(sy)), surface.bounds, eps, (0,) * bins, 0)


def _bin_of(z: float, bins: int) -> int:
    return min(max(int(z * bins), 0), bins - 1)


def _clamped_targets(pos, eps, bounds):
    x, y = pos
    ex, ey = eps
    x0, x1, y0, y1 = bounds
    out = []
    for dx in (-ex, 0.0, ex):
        for dy in (-ey, 0.0, ey):
            if dx == 0.0 and dy == 0.0:
                continue
            out.append((min(max(x + dx, x0), x1), min(max(y + dy, y0), y1)))
    return out


def candidate_moves(a: AgentState) -> list[tuple[float, float]]:
    """The eight compass moves ``{-e, 0, +e}^2 minus (0, 0)``, clamped to the bounds.

    Returned as displacements from the current position; a move pointing
    out of bounds is shortened so it stops on the boundary.
    """
    x, y = a.position
    return [(nx - x, ny - y) for nx, ny in _clamped_targets(a.position, a.epsilon, a.bounds)]


class _Scorer:
    """Entropy of the histogram after one hypothetical extra count.

    The score of adding to bin ``b`` depends only on ``counts[b]`` and the
    total, so bins with equal counts tie exactly.
    """

    def __init__(self, alpha, max_count: int, base: LogBase = LogBase.TWO):
        self.shannon = alpha is None or alpha == "shannon"
        self.alpha = None if self.shannon else _check_renyi_order(alpha)
        self.ln_base = math.log(base.value)
        self.table: list[float] = []
        self._build(max_count + 2)

    def _build(self, size: int) -> None:
        c = np.arange(size, dtype=float)
        if self.shannon:
            with np.errstate(divide="ignore", invalid="ignore"):
                self.table = np.where(c > 0, c * np.log(c), 0.0).tolist()
        else:
            self.table = np.where(c > 0, c**self.alpha, 0.0).tolist()

    def scores(self, counts) -> list[float]:
        """Score for incrementing each bin."""
        total = sum(counts) + 1
        if total >= len(self.table):
            self._build(2 * total)
        tab = self.table
        base = math.fsum(tab[c] for c in counts)
        ln_total = math.log(total)
        out = []
        for c in counts:
            s = base - tab[c] + tab[c + 1]
            if self.shannon:
                h = ln_total - s / total
            else:
                h = (math.log(s) - self.alpha * ln_total) / (1.0 - self.alpha)
            out.append(h / self.ln_base)
        return out


def move_scores(a: AgentState, surface: Surface, alpha=2.0) -> list[float]:
    """Hypothetical histogram entropy (bits) for each of :func:`candidate_moves`."""
    per_bin = _Scorer(alpha, a.t + 1).scores(a.counts)
    targets = _clamped_targets(a.position, a.epsilon, a.bounds)
    return [per_bin[_bin_of(surface(nx, ny), a.bins)] for nx, ny in targets]


def _greedy_target(pos, eps, bounds, counts, surface, scorer, rng):
    per_bin = scorer.scores(counts)
    bins = len(counts)
    targets = _clamped_targets(pos, eps, bounds)
    zs = [surface(nx, ny) for nx, ny in targets]
    scores = [per_bin[_bin_of(z, bins)] for z in zs]
    top = max(scores)
    ties = [i for i, s in enumerate(scores) if s == top]
    pick = ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]
    return targets[pick], zs[pick]


def _random_target(pos, eps, bounds, surface, rng):
    nx, ny = _clamped_targets(pos, eps, bounds)[int(rng.integers(8))]
    return (nx, ny), surface(nx, ny)


def _record(a: AgentState, target, z) -> AgentState:
    counts = list(a.counts)
    counts[_bin_of(z, a.bins)] += 1
    return replace(a, position=target, counts=tuple(counts), t=a.t + 1)


def entropy_gain_step(
    a: AgentState, surface: Surface, alpha=2.0, rng: np.random.Generator | None = None
) -> AgentState:
    """Take the move whose z maximizes the entropy of the updated histogram.

    Ties are broken uniformly at random with ``rng``.
    """
    rng = rng if rng is not None else np.random.default_rng()
    target, z = _greedy_target(
        a.position, a.epsilon, a.bounds, a.counts, surface, _Scorer(alpha, a.t + 1), rng
    )
    return _record(a, target, z)


def random_walk_step(a: AgentState, surface: Surface, rng: np.random.Generator) -> AgentState:
    """Take one of the eight moves uniformly at random."""
    target, z = _random_target(a.position, a.epsilon, a.bounds, surface, rng)
    return _record(a, target, z)


@dataclass(frozen=True)
class ExploreConfig:
    surface: Surface = field(default_factory=lambda: Surface("S1"))
    total_steps: int = 100_000
    warmup_steps: int = 1000
    start: tuple[float, float] | None = None
    epsilon: tuple[float, float] | None = None
    bins: int = 10
    alpha: float | str = 2.0
    seed: int = 0
    policy: str = "entropy"

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be positive")
        if not 0 <= self.warmup_steps <= self.total_steps:
            raise ValueError("warmup_steps must lie in [0, total_steps]")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.policy not in ("entropy", "random"):
            raise ValueError(f"policy must be 'entropy' or 'random', got {self.policy!r}")
        if self.alpha is None or self.alpha == "shannon":
            object.__setattr__(self, "alpha", "shannon")
        else:
            object.__setattr__(self, "alpha", _check_renyi_order(self.alpha))
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def _shannon_bits(counts, total: int, xlogx) -> float:
    if total == 0:
        return 0.0
    h = math.log(total) - math.fsum(xlogx[c] for c in counts) / total
    return max(0.0, h / math.log(2.0))


def run_exploration(cfg: ExploreConfig) -> RunTrace:
    """Random-walk warmup followed by greedy entropy-gain steps.

    With ``policy="random"`` every step is a random-walk step.  The trace
    has one record ``(t, x, y, z, entropy)`` per step; ``entropy`` is the
    Shannon entropy in bits of the histogram after recording ``z``.  The
    final agent is ``metadata["final_state"]`` and its histogram is
    ``metadata["histogram"]``.
    """
    started = time.perf_counter()
    surface = cfg.surface
    agent = init_agent(surface, cfg.start, cfg.epsilon, cfg.bins)
    rng = np.random.default_rng(cfg.seed)
    scorer = _Scorer(cfg.alpha, cfg.total_steps + 1)
    xlogx = _Scorer("shannon", cfg.total_steps + 1).table

    pos, eps, bounds = agent.position, agent.epsilon, agent.bounds
    counts = [0] * cfg.bins
    trace = RunTrace("explore", ("t", "x", "y", "z", "entropy"))
    warmup_entropy = 0.0
    for t in range(1, cfg.total_steps + 1):
        if cfg.policy == "random" or t <= cfg.warmup_steps:
            pos, z = _random_target(pos, eps, bounds, surface, rng)
        else:
            pos, z = _greedy_target(pos, eps, bounds, counts, surface, scorer, rng)
        counts[_bin_of(z, cfg.bins)] += 1
        h = _shannon_bits(counts, t, xlogx)
        trace.append(t, pos[0], pos[1], z, h)
        if t == cfg.warmup_steps:
            warmup_entropy = h

    final = replace(agent, position=pos, counts=tuple(counts), t=cfg.total_steps)
    dist = distribution_from_histogram(final.histogram)
    trace.metadata.update(
        surface=surface.id,
        bounds=list(surface.bounds),
        epsilon=list(eps),
        start=list(agent.position),
        bins=cfg.bins,
        alpha=cfg.alpha,
        policy=cfg.policy,
        seed=cfg.seed,
        total_steps=cfg.total_steps,
        warmup_steps=cfg.warmup_steps,
        warmup_entropy=warmup_entropy,
        final_entropy=shannon_entropy(dist),
        final_renyi=None if cfg.alpha == "shannon" else renyi_entropy(dist, cfg.alpha),
        final_state=final,
        histogram=histogram_payload(final),
        duration_s=time.perf_counter() - started,
    )
    return trace


def histogram_payload(a: AgentState) -> dict:
    h = a.histogram
    dist = distribution_from_histogram(h).probs if h.total else np.zeros(a.bins)
    return {
        "edges": [float(e) for e in h.edges],
        "counts": [int(c) for c in h.counts],
        "distribution": [float(p) for p in dist],
    }


def write_histogram_json(a: AgentState, path) -> None:
    """``{"edges": [...], "counts": [...], "distribution": [...]}``."""
    write_json(path, histogram_payload(a))

"""Entropic self-organization: partition a dataset to minimize entropy.

Every column is cut into ``bins_per_dim`` equal-width bins spanning that
column's global range, so all partitions are scored on one fixed
discretization.  The objective of a partition is

    sum over clusters c of |c|/n * sum over columns d of H(bin counts of c in d)

with ``H`` the Shannon or Renyi entropy of the normalized counts.  The
minimizer is searched with an elitist (mu + lambda) genetic algorithm;
:func:`brute_force_min` enumerates tiny instances exactly.

The objective is assembled from integer-count lookup tables, and the
per-(cluster, column) terms are summed with :func:`math.fsum`.  A given
partition therefore scores bit-identically whether evaluated alone, in
a batch, or after its clusters are relabeled.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataio import Dataset
from .entropy import LogBase, _check_renyi_order
from .trace import RunTrace, write_csv

__all__ = [
    "BRUTE_FORCE_LIMIT",
    "EntropyObjectiveConfig",
    "GaConfig",
    "InfeasibleError",
    "Partition",
    "brute_force_min",
    "discretize",
    "entropic_self_organize",
    "mutate",
    "partition_entropy",
    "random_partition",
    "write_assignments_csv",
]

BRUTE_FORCE_LIMIT = 2**22
MUTATION_RETRIES = 100


class InfeasibleError(ValueError):
    """No valid partition exists for the requested cluster count."""


@dataclass(frozen=True)
class EntropyObjectiveConfig:
    bins_per_dim: int = 8
    alpha: float | str = "shannon"
    base: LogBase = LogBase.TWO
    min_cluster_size: int = 2

    def __post_init__(self):
        if self.bins_per_dim < 2:
            raise ValueError(f"bins_per_dim must be >= 2, got {self.bins_per_dim}")
        if self.min_cluster_size < 1:
            raise ValueError("min_cluster_size must be positive")
        if self.alpha is None or self.alpha == "shannon":
            object.__setattr__(self, "alpha", "shannon")
        else:
            object.__setattr__(self, "alpha", _check_renyi_order(self.alpha))
        object.__setattr__(self, "base", LogBase.parse(self.base))

    @property
    def is_shannon(self) -> bool:
        return self.alpha == "shannon"


@dataclass(frozen=True)
class GaConfig:
    population: int = 32
    iterations: int = 10000
    mutation_moves_per_child: int = 1
    tournament_size: int = 3
    seed: int = 0
    guided: bool = False

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.iterations < 1 or self.mutation_moves_per_child < 1:
            raise ValueError("iterations and mutation moves must be positive")
        if not 1 <= self.tournament_size <= self.population:
            raise ValueError("tournament_size must lie in [1, population]")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


@dataclass(frozen=True)
class Partition:
    """Cluster index per row; every row lies in exactly one of ``k`` clusters."""

    assignment: np.ndarray
    k: int

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64).ravel()
        if self.k < 1:
            raise ValueError("partition needs k >= 1")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise ValueError(f"cluster indices must lie in [0, {self.k})")
        a.flags.writeable = False
        object.__setattr__(self, "assignment", a)

    @property
    def n(self) -> int:
        return self.assignment.size

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def check(self, n: int, min_cluster_size: int = 1) -> None:
        if self.n != n:
            raise ValueError(f"partition covers {self.n} rows, dataset has {n}")
        small = self.sizes < min_cluster_size
        if np.any(small):
            raise ValueError(
                f"clusters {np.flatnonzero(small).tolist()} hold fewer than "
                f"{min_cluster_size} rows"
            )

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.assignment, other.assignment)

    def __hash__(self):
        return hash((self.k, self.assignment.tobytes()))


def discretize(rows: np.ndarray, bins: int) -> np.ndarray:
    """Equal-width bin index of every cell, edges spanning each column's range.

    Constant columns map entirely to bin 0.
    """
    rows = np.asarray(rows, dtype=float)
    lo = rows.min(axis=0)
    span = rows.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    codes = np.floor((rows - lo) / safe * bins).astype(np.int64)
    return np.clip(codes, 0, bins - 1)


class _Objective:
    """Batched objective for one dataset and config."""

    def __init__(self, ds: Dataset, cfg: EntropyObjectiveConfig, k: int):
        self.cfg = cfg
        self.k = k
        self.n, self.dim = ds.rows.shape
        self.bins = cfg.bins_per_dim
        self.codes = discretize(ds.rows, self.bins)
        self._cell = np.arange(self.dim) * self.bins + self.codes  # (n, D)
        self._block = self.dim * self.bins
        c = np.arange(self.n + 1, dtype=float)
        log = cfg.base.log
        if cfg.is_shannon:
            with np.errstate(divide="ignore", invalid="ignore"):
                self._table = np.where(c > 0, c * log(c), 0.0)
        else:
            self._table = np.where(c > 0, c**cfg.alpha, 0.0)
            self._log_size = [0.0] + [float(log(s)) for s in range(1, self.n + 1)]
            self._ln_base = math.log(cfg.base.value)

    def counts(self, assignments: np.ndarray) -> np.ndarray:
        """Bin counts, shape (P, k, D, B), for a (P, n) block of assignments."""
        p = assignments.shape[0]
        flat = (
            np.arange(p)[:, None, None] * (self.k * self._block)
            + assignments[:, :, None] * self._block
            + self._cell[None]
        )
        out = np.bincount(flat.ravel(), minlength=p * self.k * self._block)
        return out.reshape(p, self.k, self.dim, self.bins)

    def __call__(self, assignments: np.ndarray) -> np.ndarray:
        return self.from_counts(self.counts(np.atleast_2d(assignments)))

    def from_counts(self, counts: np.ndarray) -> np.ndarray:
        sizes = counts[:, :, 0, :].sum(axis=-1)  # (P, k)
        tab = self._table[counts]
        # fixed left-to-right sum over bins
        acc = tab[..., 0].copy()
        for b in range(1, self.bins):
            acc += tab[..., b]
        if self.cfg.is_shannon:
            size_term = self._table[sizes][:, :, None]
            terms = (size_term - acc) / self.n
            return np.array([math.fsum(t.ravel().tolist()) for t in terms])
        alpha = self.cfg.alpha
        scale = 1.0 / ((1.0 - alpha) * self._ln_base)
        out = np.empty(counts.shape[0])
        for i in range(counts.shape[0]):
            row_terms = []
            for c in range(self.k):
                s = int(sizes[i, c])
                if s == 0:
                    continue
                w = s / self.n
                shift = alpha * self._log_size[s]
                for q in acc[i, c].tolist():
                    h = scale * math.log(q) - shift / (1.0 - alpha)
                    row_terms.append(w * h)
            out[i] = math.fsum(row_terms)
        return out


def partition_entropy(ds: Dataset, p: Partition, cfg: EntropyObjectiveConfig | None = None) -> float:
    """Size-weighted sum of per-column entropies within each cluster."""
    cfg = cfg or EntropyObjectiveConfig()
    p.check(ds.n, cfg.min_cluster_size)
    value = float(_Objective(ds, cfg, p.k)(p.assignment)[0])
    return max(0.0, value)


def _check_feasible(n: int, k: int, min_size: int) -> None:
    if k < 1:
        raise InfeasibleError("k must be positive")
    if n < k * min_size:
        raise InfeasibleError(
            f"{n} rows cannot fill {k} clusters of at least {min_size} rows each"
        )


def random_partition(n: int, k: int, min_size: int, rng: np.random.Generator) -> Partition:
    """Random valid partition: ``min_size`` rows seeded per cluster, the rest uniform."""
    _check_feasible(n, k, min_size)
    order = rng.permutation(n)
    a = np.empty(n, dtype=np.int64)
    seeded = k * min_size
    a[order[:seeded]] = np.repeat(np.arange(k), min_size)
    a[order[seeded:]] = rng.integers(0, k, size=n - seeded)
    return Partition(a, k)


def _move_one(a: np.ndarray, sizes: list[int], k: int, min_size: int, rng) -> bool:
    """Move a random row to a different random cluster, in place."""
    if k < 2 or max(sizes) <= min_size:
        return False
    n = a.size
    draw = rng.integers
    for _ in range(MUTATION_RETRIES):
        row = int(draw(n))
        src = int(a[row])
        if sizes[src] <= min_size:
            continue
        dst = (src + 1 + int(draw(k - 1))) % k
        a[row] = dst
        sizes[src] -= 1
        sizes[dst] += 1
        return True
    return False


def mutate(p: Partition, rng: np.random.Generator, min_cluster_size: int = 2) -> Partition:
    """Move one uniformly chosen row to another uniformly chosen cluster.

    Draws are retried (up to 100) until the donor cluster can spare a row.
    Returns ``p`` itself when no legal move exists.
    """
    a = p.assignment.copy()
    sizes = np.bincount(a, minlength=p.k).tolist()
    if not _move_one(a, sizes, p.k, min_cluster_size, rng):
        return p
    return Partition(a, p.k)


class _GuidedMover:
    """Moves a high-surprise row to the cluster where it is least surprising."""

    def __init__(self, obj: _Objective, candidates: int):
        self.obj = obj
        self.candidates = candidates
        self._dims = np.arange(obj.dim)

    def move(self, a, sizes, counts, min_size, rng) -> bool:
        k = self.obj.k
        movable = sizes > min_size
        if k < 2 or not np.any(movable):
            return False
        n = a.size
        rows = rng.integers(n, size=self.candidates)
        rows = rows[movable[a[rows]]]
        if rows.size == 0:
            return False
        codes = self.obj.codes[rows]  # (r, D)
        src = a[rows]
        own = counts[src[:, None], self._dims[None], codes]  # (r, D)
        surprise = -np.log2(own / sizes[src][:, None]).sum(axis=1)
        pick = int(np.argmax(surprise))
        row, s, code = int(rows[pick]), int(src[pick]), codes[pick]
        there = counts[:, self._dims, code] + 1  # (k, D)
        cost = -np.log2(there / (sizes[:, None] + 1)).sum(axis=1)
        cost[s] = np.inf
        dst = int(np.argmin(cost))
        a[row] = dst
        counts[s, self._dims, code] -= 1
        counts[dst, self._dims, code] += 1
        sizes[s] -= 1
        sizes[dst] += 1
        return True


def entropic_self_organize(
    ds: Dataset,
    k: int,
    obj: EntropyObjectiveConfig | None = None,
    ga: GaConfig | None = None,
) -> tuple[Partition, RunTrace]:
    """Search for the minimum-entropy partition with an elitist GA.

    Each generation draws ``population`` children.  A child copies a
    tournament-selected parent and receives ``mutation_moves_per_child``
    single-row moves; parents and children are then pooled and the best
    ``population`` survive (parents win ties).  The trace holds the best
    objective at generation 0 and after every generation.
    """
    obj = obj or EntropyObjectiveConfig()
    ga = ga or GaConfig()
    n = ds.n
    min_size = obj.min_cluster_size
    _check_feasible(n, k, min_size)
    started = time.perf_counter()
    rng = np.random.default_rng(ga.seed)
    score = _Objective(ds, obj, k)
    guide = _GuidedMover(score, ga.tournament_size) if ga.guided else None

    pop = np.stack([random_partition(n, k, min_size, rng).assignment for _ in range(ga.population)])
    pop_counts = score.counts(pop)
    fit = score.from_counts(pop_counts)
    best = int(np.argmin(fit))
    best_fit, best_assign = float(fit[best]), pop[best].copy()
    initial = best_fit

    trace = RunTrace("selforg", ("generation", "best_objective"))
    trace.append(0, best_fit)
    lam = ga.population
    for gen in range(1, ga.iterations + 1):
        entrants = rng.integers(0, ga.population, size=(lam, ga.tournament_size))
        parents = entrants[np.arange(lam), np.argmin(fit[entrants], axis=1)]
        children = pop[parents].copy()
        child_counts = pop_counts[parents].copy() if guide else None
        for j in range(lam):
            a = children[j]
            if guide is not None:
                sizes = np.bincount(a, minlength=k)
            else:
                sizes = np.bincount(a, minlength=k).tolist()
            for _ in range(ga.mutation_moves_per_child):
                if guide is not None:
                    guide.move(a, sizes, child_counts[j], min_size, rng)
                else:
                    _move_one(a, sizes, k, min_size, rng)
        child_counts = score.counts(children)
        child_fit = score.from_counts(child_counts)

        pool = np.concatenate([fit, child_fit])
        keep = np.argsort(pool, kind="stable")[: ga.population]
        pop = np.concatenate([pop, children])[keep]
        pop_counts = np.concatenate([pop_counts, child_counts])[keep]
        fit = pool[keep]
        if fit[0] < best_fit:
            best_fit, best_assign = float(fit[0]), pop[0].copy()
        trace.append(gen, best_fit)

    result = Partition(best_assign, k)
    trace.metadata.update(
        k=k,
        n=n,
        seed=ga.seed,
        objective=_config_echo(obj),
        ga=asdict(ga),
        initial_objective=initial,
        final_objective=best_fit,
        duration_s=time.perf_counter() - started,
    )
    return result, trace


def _config_echo(cfg: EntropyObjectiveConfig) -> dict:
    return {
        "bins_per_dim": cfg.bins_per_dim,
        "alpha": cfg.alpha,
        "base": cfg.base.unit,
        "min_cluster_size": cfg.min_cluster_size,
    }


def brute_force_min(
    ds: Dataset, k: int, obj: EntropyObjectiveConfig | None = None, chunk: int = 8192
) -> tuple[Partition, float]:
    """Exhaustive minimum over every valid assignment (``k**n <= 2**22``).

    Ties resolve to the first assignment in lexicographic order.
    """
    obj = obj or EntropyObjectiveConfig()
    n = ds.n
    _check_feasible(n, k, obj.min_cluster_size)
    total = k**n
    if total > BRUTE_FORCE_LIMIT:
        raise ValueError(f"{k}**{n} assignments exceed the brute-force limit {BRUTE_FORCE_LIMIT}")
    score = _Objective(ds, obj, k)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_fit, best_assign = math.inf, None
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        block = (idx[:, None] // powers[None, :]) % k
        sizes = np.stack([(block == c).sum(axis=1) for c in range(k)], axis=1)
        block = block[np.all(sizes >= obj.min_cluster_size, axis=1)]
        if block.size == 0:
            continue
        fit = score(block)
        i = int(np.argmin(fit))
        if fit[i] < best_fit:
            best_fit, best_assign = float(fit[i]), block[i].copy()
    return Partition(best_assign, k), max(0.0, best_fit)


def write_assignments_csv(p: Partition, path) -> None:
    write_csv(path, ("row_index", "cluster"), enumerate(p.assignment.tolist()))

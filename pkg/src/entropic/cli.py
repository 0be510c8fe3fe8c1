"""Command-line entry point: ``entropic <command> ...``.

Exit codes: 0 success, 2 usage or input error, 3 infeasible problem.
Every command that takes ``--seed`` writes byte-identical files for an
identical flag set; timings go to stdout only.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .dataio import MAX_MATCH_CLUSTERS, DataError, SyntheticSpec, default300_spec, error_rate, generate_synthetic, load_csv, write_dataset_csv
from .entropy import DiscreteDistribution, LogBase, renyi_entropy, shannon_entropy
from .explorer import ExploreConfig, Surface, run_exploration, write_histogram_json
from .learning import STOP_LOSS, init_learner, train
from .selforg import EntropyObjectiveConfig, GaConfig, InfeasibleError, entropic_self_organize, write_assignments_csv

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 2, 3


class UsageError(Exception):
    pass


def _floats(text: str, count: int | None = None) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"expected {count} numbers, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
    return values


def _pair(text):
    return _floats(text, 2)


def _quad(text):
    return _floats(text, 4)


def _alpha(text: str):
    if text.lower() == "shannon":
        return "shannon"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number or 'shannon', got {text!r}")


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _seed_range(text: str) -> list[int]:
    try:
        lo, hi = (int(v) for v in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed range must look like 'a..b', got {text!r}")
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}")
    return list(range(lo, hi + 1))


def _emit(label: str, value) -> None:
    if isinstance(value, float):
        value = repr(value + 0.0)
    print(f"{label}: {value}")


# -- entropy ---------------------------------------------------------------

def cmd_entropy(args) -> int:
    try:
        d = DiscreteDistribution(_floats(args.probs))
        base = LogBase.parse(args.base)
        if args.alpha == "shannon":
            value = shannon_entropy(d, base)
        else:
            value = renyi_entropy(d, args.alpha, base)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc))
    print(repr(value + 0.0))
    return EXIT_OK


# -- cluster ---------------------------------------------------------------

def _cluster_one(args, seed: int, prefix: str) -> dict:
    ds = load_csv(args.file, has_header=args.header, label_column=args.labels_col)
    obj = EntropyObjectiveConfig(
        bins_per_dim=args.bins, alpha=args.alpha, min_cluster_size=args.min_size
    )
    ga = GaConfig(
        population=args.population,
        iterations=args.iterations,
        tournament_size=args.tournament,
        mutation_moves_per_child=args.moves,
        seed=seed,
        guided=args.guided_mutation,
    )
    part, trace = entropic_self_organize(ds, args.k, obj, ga)
    write_assignments_csv(part, f"{prefix}_assignments.csv")
    trace.to_csv(f"{prefix}_trace.csv")
    out = {
        "seed": seed,
        "objective": trace.metadata["final_objective"],
        "initial": trace.metadata["initial_objective"],
        "iterations": ga.iterations,
        "duration": trace.metadata["duration_s"],
    }
    if ds.labels is not None:
        if max(args.k, int(max(ds.labels)) + 1) <= MAX_MATCH_CLUSTERS:
            out["error_rate"] = error_rate(part, ds.labels)
        else:
            out["error_rate"] = f"n/a (label matching supports at most {MAX_MATCH_CLUSTERS} clusters)"
    return out


def cmd_cluster(args) -> int:
    seeds = args.seeds or [args.seed]
    prefixes = [args.out if args.seeds is None else f"{args.out}_seed{s}" for s in seeds]
    # validate once up front so errors surface before any worker starts
    ds = load_csv(args.file, has_header=args.header, label_column=args.labels_col)
    if ds.n < args.k * args.min_size:
        raise InfeasibleError(
            f"{ds.n} rows cannot fill {args.k} clusters of at least {args.min_size} rows"
        )
    EntropyObjectiveConfig(bins_per_dim=args.bins, alpha=args.alpha, min_cluster_size=args.min_size)
    GaConfig(args.population, args.iterations, args.moves, args.tournament, 0)
    results = _fan_out(_cluster_one, args, seeds, prefixes)
    for r in results:
        if len(results) > 1:
            _emit("seed", r["seed"])
        _emit("initial objective", r["initial"])
        _emit("final objective", r["objective"])
        _emit("iterations", r["iterations"])
        print(f"duration: {r['duration']:.3f} s")
        if "error_rate" in r:
            _emit("error rate", r["error_rate"])
    return EXIT_OK


# -- generate --------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.default300:
        spec = default300_spec(noise_dims=args.noise_dims, seed=args.seed)
    else:
        spec = SyntheticSpec.from_json(args.spec)
    ds = generate_synthetic(spec)
    write_dataset_csv(ds, args.out, header=args.header)
    print(f"wrote {ds.n} rows x {ds.dim} features (+ label) to {args.out}")
    return EXIT_OK


# -- learn -----------------------------------------------------------------

def _targets(text: str, m: int, n: int) -> list[int]:
    if text == "identity":
        if m > n:
            raise UsageError(f"identity targets need outputs >= inputs ({n} < {m})")
        return list(range(m))
    try:
        targets = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"targets must be 'identity' or comma-separated integers, got {text!r}")
    if len(targets) != m:
        raise UsageError(f"{m} inputs need {m} targets, got {len(targets)}")
    bad = [t for t in targets if not 0 <= t < n]
    if bad:
        raise UsageError(f"targets {bad} out of range [0, {n})")
    return targets


def cmd_learn(args) -> int:
    if args.inputs < 1 or args.outputs < 1:
        raise UsageError("--inputs and --outputs must be positive")
    if args.iters < 0:
        raise UsageError("--iters must be non-negative")
    state = init_learner(
        args.inputs, args.outputs, _targets(args.targets, args.inputs, args.outputs),
        args.rho, args.seed,
    )
    final, trace = train(state, args.iters, args.alphas, tol=args.tol)
    trace.to_csv(args.out)
    _emit("final loss", trace.last("loss"))
    _emit("final normalized entropy", trace.last("entropy_shannon"))
    _emit("iterations", final.t)
    _emit("converged at", trace.metadata["converged_at"])
    print(f"duration: {trace.metadata['duration_s']:.3f} s")
    return EXIT_OK


# -- explore ---------------------------------------------------------------

def _explore_one(args, seed: int, prefix: str) -> dict:
    warmup = args.warmup if args.warmup is not None else min(1000, args.steps)
    cfg = ExploreConfig(
        surface=Surface(args.surface, args.bounds),
        total_steps=args.steps,
        warmup_steps=warmup,
        start=args.start,
        epsilon=args.epsilon,
        bins=args.bins,
        alpha=args.alpha,
        seed=seed,
        policy=args.policy,
    )
    trace = run_exploration(cfg)
    trace.to_csv(f"{prefix}_trace.csv")
    write_histogram_json(trace.metadata["final_state"], f"{prefix}_histogram.json")
    return {
        "seed": seed,
        "final": trace.metadata["final_entropy"],
        "warmup": trace.metadata["warmup_entropy"],
        "duration": trace.metadata["duration_s"],
    }


def cmd_explore(args) -> int:
    seeds = args.seeds or [args.seed]
    prefixes = [args.out if args.seeds is None else f"{args.out}_seed{s}" for s in seeds]
    warmup = args.warmup if args.warmup is not None else min(1000, args.steps)
    ExploreConfig(
        Surface(args.surface, args.bounds), args.steps, warmup, args.start, args.epsilon,
        args.bins, args.alpha, 0, args.policy,
    )
    for r in _fan_out(_explore_one, args, seeds, prefixes):
        if len(seeds) > 1:
            _emit("seed", r["seed"])
        _emit("warmup entropy", r["warmup"])
        _emit("final entropy", r["final"])
        print(f"duration: {r['duration']:.3f} s")
    return EXIT_OK


def _fan_out(fn, args, seeds, prefixes):
    if args.jobs <= 1 or len(seeds) == 1:
        return [fn(args, s, p) for s, p in zip(seeds, prefixes)]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        return list(pool.map(fn, [args] * len(seeds), seeds, prefixes))


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="entropic",
        description="Entropy toolkit: entropy math, a table learner, "
        "entropic clustering and an entropy-seeking explorer.",
        formatter_class=fmt,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="Shannon or Renyi entropy of a distribution", formatter_class=fmt)
    p.add_argument("--probs", required=True, help="comma-separated probabilities")
    p.add_argument("--alpha", type=_alpha, default="shannon", help="Renyi order or 'shannon'")
    p.add_argument("--base", default="2", choices=["2", "e", "10"], help="logarithm base")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("cluster", help="entropy-minimizing clustering of a CSV", formatter_class=fmt)
    p.add_argument("-f", "--file", required=True, help="input CSV of numeric rows")
    p.add_argument("--k", type=int, default=3, help="number of clusters")
    p.add_argument("--iterations", type=int, default=10000, help="GA generations")
    p.add_argument("--seed", type=_seed, default=0, help="RNG seed")
    p.add_argument("--seeds", type=_seed_range, default=None, help="seed sweep 'a..b' (per-seed files)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for --seeds")
    p.add_argument("--bins", type=int, default=8, help="equal-width bins per column")
    p.add_argument("--alpha", type=_alpha, default="shannon", help="Renyi order or 'shannon'")
    p.add_argument("--labels-col", type=int, default=None, help="0-based label column (enables error rate)")
    p.add_argument("--header", action="store_true", help="input CSV has a header row")
    p.add_argument("--min-size", type=int, default=2, help="smallest allowed cluster")
    p.add_argument("--population", type=int, default=32, help="GA population")
    p.add_argument("--tournament", type=int, default=3, help="tournament size")
    p.add_argument("--moves", type=int, default=1, help="mutation moves per child")
    p.add_argument("--guided-mutation", action="store_true", help="move high-surprise rows to low-surprise clusters")
    p.add_argument("--out", default="cluster", help="output prefix")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("generate", help="write a synthetic labeled dataset", formatter_class=fmt)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", help="JSON synthetic spec")
    src.add_argument("--default300", action="store_true", help="3 Gaussians x 100 rows in R^3")
    p.add_argument("--noise-dims", type=int, default=0, help="uniform [-1, 1] noise columns (--default300)")
    p.add_argument("--seed", type=_seed, default=1, help="RNG seed (--default300)")
    p.add_argument("--header", action="store_true", help="write a header row")
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="train a table learner and write its trace", formatter_class=fmt)
    p.add_argument("--inputs", type=int, required=True, help="number of inputs M")
    p.add_argument("--outputs", type=int, required=True, help="number of outputs N")
    p.add_argument("--targets", default="identity", help="'identity' or comma-separated indices")
    p.add_argument("--rho", type=float, default=0.5, help="base learning rate")
    p.add_argument("--iters", type=int, default=2000, help="maximum iterations")
    p.add_argument("--tol", type=float, default=STOP_LOSS, help="stop once loss falls below this")
    p.add_argument("--alphas", type=_floats, default=(0.5, 2.0), help="Renyi orders to trace")
    p.add_argument("--seed", type=_seed, default=0, help="RNG seed")
    p.add_argument("--out", default="learn_trace.csv", help="trace CSV")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("explore", help="run the entropy-seeking explorer", formatter_class=fmt)
    p.add_argument("--surface", choices=["1", "2"], default="1", help="terrain surface")
    p.add_argument("--steps", type=int, default=100_000, help="total steps")
    p.add_argument("--warmup", type=int, default=None, help="random-walk steps first (default min(1000, steps))")
    p.add_argument("--bins", type=int, default=10, help="histogram bins on z in [0, 1]")
    p.add_argument("--alpha", type=_alpha, default=2.0, help="Renyi order of the feedback score, or 'shannon'")
    p.add_argument("--epsilon", type=_pair, default=None, help="step sizes ex,ey (default 1%% of bound spans)")
    p.add_argument("--bounds", type=_quad, default=None, help="x0,x1,y0,y1 (default [-2,2]^2 for 1, [-10,10]^2 for 2)")
    p.add_argument("--start", type=_pair, default=None, help="start x,y (default bounds center)")
    p.add_argument("--policy", choices=["entropy", "random"], default="entropy", help="move policy after warmup")
    p.add_argument("--seed", type=_seed, default=0, help="RNG seed")
    p.add_argument("--seeds", type=_seed_range, default=None, help="seed sweep 'a..b' (per-seed files)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for --seeds")
    p.add_argument("--out", default="explore", help="output prefix")
    p.set_defaults(func=cmd_explore)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"entropic {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, DataError, ValueError, OSError) as exc:
        print(f"entropic {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

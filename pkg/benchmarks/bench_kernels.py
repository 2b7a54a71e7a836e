"""Compare the compiled kernels with the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--seed 0]

Each workload runs on every importable backend; the report lists the best
wall time per backend and the speed-up of the compiled one.
"""
from __future__ import annotations

import argparse
import random
import string
import time

import numpy as np

from histbank import kernels
from histbank.iaa import TedCosts, Tree, _Indexed


def random_word(rng: random.Random, lo: int = 3, hi: int = 14) -> str:
    return "".join(rng.choice(string.ascii_lowercase[:8]) for _ in range(rng.randint(lo, hi)))


def random_tree(rng: random.Random, size: int) -> Tree:
    if size == 1:
        return Tree(rng.choice("abcd"))
    rest, kids = size - 1, []
    while rest:
        k = rng.randint(1, rest)
        kids.append(random_tree(rng, k))
        rest -= k
    return Tree(rng.choice("abcd"), tuple(kids))


def tree_args(t1: Tree, t2: Tree):
    a, b = _Indexed(t1), _Indexed(t2)
    costs = TedCosts()
    upd = np.array([[costs.relabel(x, y) for y in b.labels] for x in a.labels], dtype=float)
    return (a.l, a.keyroots, b.l, b.keyroots, np.ones(len(a.labels)), np.ones(len(b.labels)), upd)


def workloads(rng: random.Random):
    pairs = [(random_word(rng), random_word(rng)) for _ in range(3000)]
    lexicon = [random_word(rng) for _ in range(5000)]
    queries = [random_word(rng) for _ in range(20)]
    trees = [tree_args(random_tree(rng, 40), random_tree(rng, 40)) for _ in range(10)]
    return {
        "osa_distance x3000": lambda k: [k.osa_distance(a, b) for a, b in pairs],
        "osa_bounded(2) x3000": lambda k: [k.osa_bounded(a, b, 2) for a, b in pairs],
        "osa_batch 20x5000": lambda k: [k.osa_batch(q, lexicon, 2) for q in queries],
        "zs_treedist 40-node x10": lambda k: [k.zs_treedist(*args) for args in trees],
    }


def best_time(fn, module, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn(module)
        times.append(time.perf_counter() - start)
    return min(times)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(sorted(backends))} (active: {kernels.BACKEND})")
    print(f"{'workload':28s}" + "".join(f"{name:>12s}" for name in sorted(backends)) + "     speed-up")
    for label, fn in workloads(random.Random(args.seed)).items():
        results = {name: best_time(fn, mod, args.repeat) for name, mod in sorted(backends.items())}
        row = f"{label:28s}" + "".join(f"{t:11.4f}s" for t in results.values())
        if "cython" in results:
            row += f"  {results['python'] / results['cython']:9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

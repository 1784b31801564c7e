"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times median detrending, average ranking and the pairwise similarity join
on synthetic inputs, after one warm-up call per backend (JIT compile).
"""
from __future__ import annotations

import argparse
import os
import time

import numpy as np

from rpyskit import _kernels
from rpyskit.disambig import MatchConfig, _match_key, _pack, cluster_refs
from rpyskit.synthetic import noisy_reference_fixture
from rpyskit.wos import parse_cited_ref


def _time(fn, repeat):
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--block", type=int, default=1000, help="distinct references in the join")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    spectra = [rng.integers(0, 10_000, size=int(rng.integers(20, 200))).astype(float)
               for _ in range(2000)]
    rows = [rng.normal(size=200) for _ in range(2000)]
    strings, _ = noisy_reference_fixture(n_canonical=args.block // 4, variants=3, seed=1)
    refs = [parse_cited_ref(s, str(i)) for i, s in enumerate(strings)]
    keys = sorted({_match_key(r) for r in refs})
    block = _pack(keys)
    w = MatchConfig().weights

    cases = {
        "median5 x2000 spectra": lambda: [_kernels.median5(s) for s in spectra],
        "average_ranks x2000 rows": lambda: [_kernels.average_ranks(r) for r in rows],
        f"similarity join {len(keys)} refs": lambda: _kernels.similarity_edges(block, w, True, 0.75),
        f"cluster_refs {len(refs)} refs": lambda: cluster_refs(refs, threads=1),
    }
    results = {}
    for be in ("numba", "numpy"):
        os.environ[_kernels.BACKEND_ENV] = be
        results[be] = {name: _time(fn, args.repeat) for name, fn in cases.items()}
    os.environ.pop(_kernels.BACKEND_ENV, None)

    print(f"{'case':<32} {'numba s':>10} {'numpy s':>10} {'speedup':>8}")
    for name in cases:
        a, b = results["numba"][name], results["numpy"][name]
        print(f"{name:<32} {a:>10.4f} {b:>10.4f} {b / a:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

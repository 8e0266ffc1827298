"""Compare the compiled and pure-Python closure kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--json PATH]
"""
from __future__ import annotations

import argparse
import json
import platform
import time

import numpy as np

from liereach import _backend
from liereach.closure import close_vectors
from liereach.models import two_qubit_pauli_set, xxz_2x2
from liereach.partitions import sample_partition


def _best(fn, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng: np.random.Generator):
    """Workloads as (name, callable taking a backend name)."""
    u4 = rng.normal(size=4**4) * (rng.random(4**4) < 0.2)
    v4 = rng.normal(size=4**4) * (rng.random(4**4) < 0.2)

    spec = xxz_2x2()
    terms = np.array([t.to_vector() for t in spec.operators()])
    singles = terms[np.linalg.norm(terms, axis=1) > 0]
    parts = [sample_partition(len(spec), 4, rng) for _ in range(20)]
    part_gens = [np.array([terms[list(b)].sum(axis=0) for b in p.blocks]) for p in parts]

    pauli2 = np.eye(16)[[p.index for p in two_qubit_pauli_set()]]
    masks = rng.integers(1, 1 << 16, 200)
    subsets = [pauli2[[i for i in range(16) if m >> i & 1]] for m in masks]

    def kern(name):
        return _backend.get_kernels(name)

    return [
        ("commutator_coeffs, 4 qubits", lambda b: kern(b).commutator_coeffs(u4, v4, 4)),
        ("XXZ singleton closure (rank 61)", lambda b: close_vectors(singles, 4, backend=b)),
        ("20 XXZ partitions, m = 4", lambda b: [close_vectors(g, 4, backend=b, keep_basis=False)
                                                for g in part_gens]),
        ("200 two-qubit subsets", lambda b: [close_vectors(g, 2, backend=b, keep_basis=False)
                                             for g in subsets]),
    ]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", default=None, help="also write results here")
    args = ap.parse_args(argv)
    if not _backend.compiled_available():
        print("compiled kernels are not built; only the Python timings are shown")
    backends = ["python"] + (["compiled"] if _backend.compiled_available() else [])
    rows = []
    print(f"{'workload':36s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name, fn in cases(np.random.default_rng(args.seed)):
        times = {b: _best(lambda: fn(b), args.repeat) for b in backends}
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        rows.append({"workload": name, **{f"{b}_s": t for b, t in times.items()}, "speedup": speed})
        print(f"{name:36s}" + "".join(f"{1e3 * times[b]:10.2f}ms" for b in backends) + f"{speed:9.1f}x")
    if args.json:
        meta = {"python": platform.python_version(), "machine": platform.machine(),
                "numpy": np.__version__, "repeat": args.repeat}
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"meta": meta, "results": rows}, fh, indent=1)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

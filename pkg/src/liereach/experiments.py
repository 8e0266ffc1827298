"""Experiment drivers behind the command-line interface.

Every driver is a plain function returning rows (lists of dicts) and a
summary dict, so tests can call them without touching the filesystem.
Randomness is derived from one root seed with
:func:`liereach._parallel.derive_seed` keyed by the task coordinates, so
results are independent of the worker count.
"""
from __future__ import annotations

import csv
import json
import math
import platform
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__, _backend
from ._parallel import derive_seed, parallel_map
from .closure import ClosureTrace, close_vectors, identity_residual, INDEPENDENCE_TOL
from .models import HamiltonianSpec, calibration_scan, exact_ground_energy, two_qubit_pauli_set, xxz_2x2
from .optimizer import OptimizerSettings
from .partitions import Partition, count_partitions, enumerate_partitions, sample_partition
from .proxy import backtest, fit_proxy
from .vqe import build_lap, optimize, summarize_sweep, vha_sweep

REFERENCE_GROUND_ENERGY = -1.9794
EXPORT_ITERATIONS = 9


# --------------------------------------------------------------------- output

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_csv(path: Path, rows: Sequence[dict], columns: Sequence[str] | None = None) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        columns = list(columns or (rows[0].keys() if rows else []))
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([fmt(r[c]) for c in columns])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(obj, indent=1, default=_json_default), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def manifest(command: str, config: dict, **extra) -> dict:
    return {
        "command": command,
        "version": __version__,
        "kernel_backend": _backend.BACKEND,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "config": config,
        **extra,
    }


# ------------------------------------------------------------------- models

def resolve_model(config: dict) -> HamiltonianSpec:
    """Hamiltonian from ``model_json`` if given, else the XXZ lattice from config keys."""
    if config.get("model_json"):
        path = Path(config["model_json"])
        try:
            return HamiltonianSpec.from_json(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise OSError(f"cannot read model {path}: {exc.strerror or exc}") from exc
    return xxz_2x2(float(config.get("J", 0.1)), float(config.get("delta", -2.0)),
                   float(config.get("h", 0.0)), str(config.get("variant", "constant")),
                   float(config.get("offset", 1.0)))


# ------------------------------------------------------------ two-qubit scan

def _scan_chunk(masks: Sequence[int]) -> list[tuple[int, int, int]]:
    eye = np.eye(16)
    out = []
    for mask in masks:
        idx = [i for i in range(16) if mask >> i & 1]
        tr = close_vectors(eye[idx], 2, keep_basis=True)
        has_id = identity_residual(tr.basis_matrix) <= INDEPENDENCE_TOL
        out.append((mask, tr.final_rank, tr.final_rank - int(has_id)))
    return out


def scaling2q(jobs: int = 1) -> tuple[list[dict], list[dict]]:
    """Close every non-empty subset of the 16 two-qubit strings.

    Subset ``id`` is a 16-bit mask; bit ``i`` selects string ``i`` of
    :func:`~liereach.models.two_qubit_pauli_set`.
    """
    labels = [s.label for s in two_qubit_pauli_set()]
    masks = list(range(1, 1 << 16))
    chunks = [masks[i:i + 2048] for i in range(0, len(masks), 2048)]
    rows = []
    for part in parallel_map(_scan_chunk, chunks, jobs, chunksize=1):
        for mask, rank, traceless in part:
            rows.append({
                "m": bin(mask).count("1"), "subset_id": mask,
                "strings": " ".join(labels[i] for i in range(16) if mask >> i & 1),
                "final_rank": rank, "traceless_rank": traceless,
                "fully_controllable": traceless == 15,
            })
    summary = []
    for m in range(1, 17):
        sel = [r for r in rows if r["m"] == m]
        tl = np.array([r["traceless_rank"] for r in sel])
        hist = {int(k): int(v) for k, v in zip(*np.unique(tl, return_counts=True))}
        summary.append({"m": m, "n_subsets": len(sel), "min_traceless_rank": int(tl.min()),
                        "max_traceless_rank": int(tl.max()),
                        "n_fully_controllable": int(np.sum(tl == 15)),
                        "histogram": json.dumps(hist, separators=(",", ":"))})
    return rows, summary


# ------------------------------------------------------- sampled closures

@dataclass
class ClosureSample:
    m: int
    sample_id: int
    seed: int
    partition: Partition
    trace: ClosureTrace
    reached_max: bool = False

    def to_dict(self) -> dict:
        return {"m": self.m, "sample_id": self.sample_id, "seed": self.seed,
                "partition": self.partition.to_dict(),
                "rank_per_iteration": list(self.trace.rank_per_iteration),
                "reached_cap": self.trace.reached_cap, "reached_max": self.reached_max}

    @classmethod
    def from_dict(cls, d: dict, n_qubits: int) -> "ClosureSample":
        tr = ClosureTrace(n_qubits, tuple(d["rank_per_iteration"]), bool(d["reached_cap"]))
        return cls(int(d["m"]), int(d["sample_id"]), int(d["seed"]),
                   Partition.from_dict(d["partition"]), tr, bool(d["reached_max"]))


def _close_partition_vectors(term_vecs: np.ndarray, n_qubits: int, p: Partition) -> ClosureTrace:
    gens = np.array([term_vecs[list(b)].sum(axis=0) for b in p.blocks])
    return close_vectors(gens, n_qubits, keep_basis=False)


def _sample_task(args) -> list[tuple]:
    term_vecs, n_qubits, n_terms, root, items = args
    cache: dict[Partition, tuple] = {}
    out = []
    for m, sid in items:
        seed = derive_seed(root, "partition", m, sid)
        p = sample_partition(n_terms, m, seed)
        if p not in cache:
            tr = _close_partition_vectors(term_vecs, n_qubits, p)
            cache[p] = (tr.rank_per_iteration, tr.reached_cap)
        ranks, cap = cache[p]
        out.append((m, sid, seed, p.to_dict(), ranks, cap))
    return out


def sample_closures(spec: HamiltonianSpec, m_values: Iterable[int], n_samples: int,
                    seed: int = 0, jobs: int = 1) -> tuple[list[ClosureSample], int]:
    """Sample ``n_samples`` partitions per ``m`` and close each one.

    Returns the samples and the maximum rank, taken as the rank of the
    all-singletons closure.  A sample's ``reached_max`` compares its final
    rank with that maximum.
    """
    n = spec.n_qubits
    term_vecs = np.array([t.to_vector() for t in spec.operators()])
    max_rank = _close_partition_vectors(term_vecs, n, Partition.singletons(len(spec))).final_rank
    items = [(int(m), i) for m in m_values for i in range(n_samples)]
    per_task = max(1, math.ceil(len(items) / max(1, 8 * jobs)))
    tasks = [(term_vecs, n, len(spec), seed, items[i:i + per_task])
             for i in range(0, len(items), per_task)]
    samples = []
    for chunk in parallel_map(_sample_task, tasks, jobs, chunksize=1):
        for m, sid, s, pd, ranks, cap in chunk:
            tr = ClosureTrace(n, tuple(ranks), cap)
            samples.append(ClosureSample(m, sid, s, Partition.from_dict(pd), tr,
                                         tr.final_rank == max_rank))
    samples.sort(key=lambda x: (x.m, x.sample_id))
    return samples, max_rank


def rank_distribution(samples: Sequence[ClosureSample], max_rank: int) -> tuple[list[dict], list[dict]]:
    """``P(l_r | m)`` histogram rows and per-``m`` probability of the maximum rank."""
    by_m: dict[int, list[int]] = {}
    for s in samples:
        by_m.setdefault(s.m, []).append(s.trace.final_rank)
    hist, pmax = [], []
    for m, ranks in sorted(by_m.items()):
        r = np.array(ranks)
        for lr, c in zip(*np.unique(r, return_counts=True)):
            hist.append({"m": m, "l_r": int(lr), "count": int(c), "probability": c / r.size})
        pmax.append({"m": m, "n_samples": r.size, "max_rank": max_rank,
                     "p_max": float(np.mean(r == max_rank)), "mean_rank": float(r.mean())})
    return hist, pmax


def rank_evolution(samples: Sequence[ClosureSample], cap: int = EXPORT_ITERATIONS) -> tuple[list[dict], list[dict]]:
    """Per-trace rows up to pass ``cap`` (flat after convergence) and per-pass means."""
    rows = []
    for s in samples:
        for it in range(cap + 1):
            rows.append({"m": s.m, "partition_id": s.sample_id, "iteration": it,
                         "rank": s.trace.rank_at(it), "reached_max": s.reached_max})
    means = []
    by_m: dict[int, list[ClosureSample]] = {}
    for s in samples:
        by_m.setdefault(s.m, []).append(s)
    for m, group in sorted(by_m.items()):
        for it in range(cap + 1):
            r = np.array([s.trace.rank_at(it) for s in group], dtype=float)
            hit = np.array([s.reached_max for s in group])
            means.append({
                "m": m, "iteration": it, "mean_rank": float(r.mean()),
                "mean_rank_reached": float(r[hit].mean()) if hit.any() else float("nan"),
                "mean_rank_not_reached": float(r[~hit].mean()) if (~hit).any() else float("nan"),
            })
    return rows, means


def inflection_iterations(means: Sequence[dict]) -> dict[int, int]:
    """Pass with the largest mean-rank increase, per ``m``."""
    out = {}
    by_m: dict[int, list[tuple[int, float]]] = {}
    for r in means:
        by_m.setdefault(r["m"], []).append((r["iteration"], r["mean_rank"]))
    for m, pts in by_m.items():
        pts.sort()
        inc = np.diff([v for _, v in pts])
        out[m] = int(np.argmax(inc)) + 1 if inc.size and inc.max() > 0 else 0
    return out


# ----------------------------------------------------------------- VQE sweep

def distinct_partitions(n: int, m: int, count: int, root: int) -> list[Partition]:
    """Up to ``count`` distinct uniformly sampled partitions (all if fewer exist)."""
    total = count_partitions(n, m)
    if total <= count:
        return list(enumerate_partitions(n, m))
    seen: list[Partition] = []
    draw = 0
    while len(seen) < count:
        p = sample_partition(n, m, derive_seed(root, "vqe-partition", m, draw))
        draw += 1
        if p not in seen:
            seen.append(p)
    return seen


def vqe_sweep(spec: HamiltonianSpec, m_values: Sequence[int], partitions_per_m: int,
              layers: Sequence[int], settings: OptimizerSettings, seed: int = 0,
              restarts: int = 10, lap_restarts: int = 20, jobs: int = 1) -> dict:
    """LAP baseline, then VHA energies over sampled partitions and layer counts."""
    lap = build_lap(spec)
    lap_run = optimize(spec, lap, settings, derive_seed(seed, "lap"), lap_restarts)
    parts = [p for m in m_values for p in distinct_partitions(len(spec), int(m), partitions_per_m, seed)]
    rows = vha_sweep(spec, parts, layers, settings, seed, restarts, lap_run.best_energy, jobs)
    e0 = exact_ground_energy(spec)
    return {"lap": lap_run, "lap_generators": [g.to_list() for g in lap.generators],
            "exact_ground_energy": e0, "rows": rows, "summary": summarize_sweep(rows),
            "partitions": [p.to_dict() for p in parts]}


# -------------------------------------------------------------------- proxy

def split_samples(samples: Sequence[ClosureSample]) -> tuple[list, list]:
    """Even sample ids for fitting, odd ids held out."""
    train = [(s.m, s.trace, s.reached_max) for s in samples if s.sample_id % 2 == 0]
    test = [(s.m, s.trace, s.reached_max) for s in samples if s.sample_id % 2 == 1]
    return train, test


def proxy_experiment(samples: Sequence[ClosureSample], k: int, m_range: tuple[int, int],
                     strict: bool = False) -> dict:
    train, test = split_samples(samples)
    model = fit_proxy(train, k, m_range=m_range, strict=strict)
    err, calib = backtest(model, test)
    curves = []
    for m, c in sorted(model.curves.items()):
        xs = sorted({tr.rank_at(k) for mm, tr, _ in train + test if mm == m})
        for x in xs:
            curves.append({"m": m, "rank": x, "f": c.f(x), "L": c(x)})
    return {"model": model, "calibration": calib, "calibration_error": err, "curves": curves,
            "degenerate_m": model.degenerate, "n_train": len(train), "n_test": len(test)}


def calibration_report(spec: HamiltonianSpec) -> dict:
    scan = calibration_scan(REFERENCE_GROUND_ENERGY)
    return {"reference_energy": REFERENCE_GROUND_ENERGY, "matched": scan["matched"],
            "closest": scan["best"], "model_exact_ground_energy": exact_ground_energy(spec),
            "grid": scan["grid"]}

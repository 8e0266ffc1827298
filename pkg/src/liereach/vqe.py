"""Variational energy minimization for VHA and LAP ansatze."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import derive_seed, parallel_map
from .closure import close_algebra
from .models import HamiltonianSpec
from .optimizer import OptimizerSettings, bfgs
from .partitions import Partition, generators_from_partition
from .pauli import PauliOperator, SizeMismatchError, to_dense
from .statevector import AnsatzSpec, GeneratorGate, StateVector

__all__ = ["AnsatzSpec", "VqeRun", "NumericalError", "EnergyObjective", "optimize",
           "build_lap", "vha_ansatz", "vha_sweep", "summarize_sweep",
           "DEFAULT_RESTARTS", "INIT_SCALE"]

DEFAULT_RESTARTS = {"VHA": 10, "LAP": 20}
INIT_SCALE = 0.1


class NumericalError(FloatingPointError):
    """Objective became non-finite during optimization."""


class EnergyObjective:
    """``E(theta) = <psi(theta)|H|psi(theta)>`` with central-difference gradients.

    The gradient is the plain central difference ``(E(theta + h e_k) -
    E(theta - h e_k)) / 2h`` for every ``k``.  Each shifted energy is
    evaluated as ``<phi|O_k|phi>`` where ``O_k`` is ``H`` pulled back through
    the gates after ``k`` and ``phi`` is the state with only gate ``k``
    shifted, so one sweep costs about as much as two forward passes.
    """

    def __init__(self, hamiltonian: np.ndarray, gates: Sequence[GeneratorGate],
                 initial: np.ndarray, fd_step: float = 1e-6):
        self.h = np.asarray(hamiltonian, dtype=complex)
        self.gates = list(gates)
        self.psi0 = np.asarray(initial, dtype=complex)
        self.fd_step = fd_step
        self.n_evals = 0

    def state(self, theta: np.ndarray) -> np.ndarray:
        psi = self.psi0
        for g, t in zip(self.gates, theta):
            psi = g.apply(psi, t)
        return psi

    def _check(self, e: float, theta: np.ndarray) -> float:
        if not np.isfinite(e):
            raise NumericalError(f"non-finite energy {e} at |theta|_inf={np.max(np.abs(theta)):.3g}")
        return e

    def energy(self, theta: np.ndarray) -> float:
        self.n_evals += 1
        psi = self.state(theta)
        return self._check(float(np.vdot(psi, self.h @ psi).real), theta)

    def energy_and_grad(self, theta: np.ndarray) -> tuple[float, np.ndarray, int]:
        theta = np.asarray(theta, dtype=float)
        k_total = len(self.gates)
        states = [self.psi0]
        for g, t in zip(self.gates, theta):
            states.append(g.apply(states[-1], t))
        psi = states[-1]
        e = self._check(float(np.vdot(psi, self.h @ psi).real), theta)
        grad = np.empty(k_total)
        hstep = self.fd_step
        op = self.h
        for k in range(k_total - 1, -1, -1):
            g = self.gates[k]
            v, w = g.eigvecs, g.eigvals
            c = v.conj().T @ states[k]
            m = v.conj().T @ op @ v
            ap = np.exp(1j * (theta[k] + hstep) * w) * c
            am = np.exp(1j * (theta[k] - hstep) * w) * c
            ep = np.vdot(ap, m @ ap).real
            em = np.vdot(am, m @ am).real
            grad[k] = (ep - em) / (2.0 * hstep)
            d = np.exp(1j * theta[k] * w)
            op = v @ ((d.conj()[:, None] * m * d[None, :]) @ v.conj().T)
        used = 1 + 2 * k_total
        self.n_evals += used
        return e, grad, used

    def fd_gradient(self, theta: np.ndarray) -> np.ndarray:
        """Central differences by re-running the whole circuit (reference path)."""
        theta = np.asarray(theta, dtype=float)
        out = np.empty(theta.size)
        for k in range(theta.size):
            tp, tm = theta.copy(), theta.copy()
            tp[k] += self.fd_step
            tm[k] -= self.fd_step
            out[k] = (self.energy(tp) - self.energy(tm)) / (2.0 * self.fd_step)
        return out


@dataclass
class VqeRun:
    ansatz: AnsatzSpec
    seed: int
    restarts: int
    settings: OptimizerSettings
    best_energy: float
    best_params: np.ndarray
    energy_history: list[float]
    restart_energies: list[float] = field(default_factory=list)
    restart_evaluations: list[int] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return int(sum(self.restart_evaluations))

    def to_dict(self) -> dict:
        return {
            "kind": self.ansatz.kind,
            "layers": self.ansatz.layers,
            "n_params": self.ansatz.n_params,
            "seed": self.seed,
            "restarts": self.restarts,
            "settings": self.settings.to_dict(),
            "best_energy": self.best_energy,
            "best_params": [float(t) for t in self.best_params],
            "restart_energies": self.restart_energies,
            "restart_evaluations": self.restart_evaluations,
        }


def optimize(spec: HamiltonianSpec | PauliOperator, ansatz: AnsatzSpec,
             settings: OptimizerSettings | None = None, seed: int = 0,
             restarts: int | None = None, initial: StateVector | None = None,
             init_scale: float = INIT_SCALE) -> VqeRun:
    """Best of ``restarts`` quasi-Newton runs from ``U(-init_scale, init_scale)`` starts.

    Parameters
    ----------
    spec : HamiltonianSpec or PauliOperator
        Hamiltonian whose expectation value is minimized.
    ansatz : AnsatzSpec
    settings : OptimizerSettings, optional
    seed : int
        Seeds the start points; equal seeds give equal results.
    restarts : int, optional
        Defaults to 20 for LAP and 10 for VHA.
    initial : StateVector, optional
        Reference state, ``|0...0>`` by default.
    """
    settings = settings or OptimizerSettings()
    op = spec.total() if isinstance(spec, HamiltonianSpec) else spec
    if op.n_qubits != ansatz.n_qubits:
        raise SizeMismatchError(f"Hamiltonian has {op.n_qubits} qubits, ansatz {ansatz.n_qubits}")
    restarts = DEFAULT_RESTARTS[ansatz.kind] if restarts is None else int(restarts)
    if restarts < 1:
        raise ValueError("restarts must be positive")
    initial = initial or StateVector.zeros(ansatz.n_qubits)
    obj = EnergyObjective(to_dense(op), ansatz.gates(), initial.amplitudes, settings.fd_step)
    rng = np.random.default_rng(seed)
    best = None
    energies, evals = [], []
    for _ in range(restarts):
        x0 = rng.uniform(-init_scale, init_scale, size=ansatz.n_params)
        res = bfgs(obj.energy, obj.energy_and_grad, x0, settings)
        energies.append(float(res.fun))
        evals.append(int(res.evaluations))
        if best is None or res.fun < best.fun:
            best = res
    return VqeRun(ansatz, seed, restarts, settings, float(best.fun), best.x,
                  [float(e) for e in best.history], energies, evals)


def build_lap(spec: HamiltonianSpec, backend: str | None = None) -> AnsatzSpec:
    """One-layer ansatz over the full closure basis of the singleton terms."""
    gens = [t for t in spec.operators() if not t.is_zero()]
    trace = close_algebra(gens, backend=backend)
    if trace.truncated:
        raise RuntimeError("closure was truncated; cannot build the LAP ansatz")
    return AnsatzSpec(tuple(trace.basis), 1, "LAP")


def vha_ansatz(spec: HamiltonianSpec, partition: Partition, layers: int) -> AnsatzSpec:
    return AnsatzSpec(tuple(generators_from_partition(spec, partition)), layers, "VHA")


def _vha_cell(args) -> list[dict]:
    spec_json, part_json, pid, p, settings, seed, restarts, lap_energy = args
    spec = HamiltonianSpec.from_json(spec_json)
    part = Partition.from_json(part_json)
    run = optimize(spec, vha_ansatz(spec, part, p), settings, seed, restarts)
    return [
        {"m": part.m, "partition_id": pid, "partition_json": part_json, "p": p, "restart": r,
         "energy": e, "error_vs_lap": e - lap_energy, "evaluations": n, "seed": seed}
        for r, (e, n) in enumerate(zip(run.restart_energies, run.restart_evaluations))
    ]


def vha_sweep(spec: HamiltonianSpec, partitions: Sequence[Partition], layer_range: Sequence[int],
              settings: OptimizerSettings | None = None, seed: int = 0,
              restarts: int | None = None, lap_energy: float | None = None,
              jobs: int = 1) -> list[dict]:
    """Optimize every (partition, layers) cell and compare with the LAP energy.

    Returns one row per restart with keys ``m, partition_id, partition_json,
    p, restart, energy, error_vs_lap, evaluations, seed``.  Cell seeds are
    derived from ``seed`` and the (partition index, layers) pair, so results
    do not depend on ``jobs``.
    """
    settings = settings or OptimizerSettings()
    if lap_energy is None:
        lap_energy = optimize(spec, build_lap(spec), settings, derive_seed(seed, "lap")).best_energy
    restarts = DEFAULT_RESTARTS["VHA"] if restarts is None else restarts
    spec_json = spec.to_json()
    tasks = [(spec_json, part.to_json(), i, int(p), settings, derive_seed(seed, i, int(p)),
              restarts, lap_energy)
             for i, part in enumerate(partitions) for p in layer_range]
    rows = [row for cell in parallel_map(_vha_cell, tasks, jobs) for row in cell]
    rows.sort(key=lambda r: (r["m"], r["partition_id"], r["p"], r["restart"]))
    return rows


def summarize_sweep(rows: Sequence[dict]) -> list[dict]:
    """Per-(m, p) mean and std of the best-restart error, over partitions."""
    best: dict[tuple[int, int, int], float] = {}
    for r in rows:
        key = (r["m"], r["partition_id"], r["p"])
        best[key] = min(best.get(key, np.inf), r["error_vs_lap"])
    groups: dict[tuple[int, int], list[float]] = {}
    for (m, _, p), err in best.items():
        groups.setdefault((m, p), []).append(err)
    out = []
    for (m, p), errs in sorted(groups.items()):
        a = np.array(errs)
        out.append({"m": m, "p": p, "n_partitions": a.size, "mean_error": float(a.mean()),
                    "std_error": float(a.std()), "min_error": float(a.min())})
    return out


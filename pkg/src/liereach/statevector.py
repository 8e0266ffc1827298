"""Dense statevector simulation of products of generator exponentials."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import MAX_DENSE_QUBITS, CapacityError, PauliOperator, SizeMismatchError, to_dense

NORM_TOL = 1e-10
IMAG_TOL = 1e-10
ANSATZ_KINDS = ("VHA", "LAP")


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_DENSE_QUBITS:
            raise CapacityError(f"statevectors are limited to {MAX_DENSE_QUBITS} qubits")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise SizeMismatchError(f"expected {1 << self.n_qubits} amplitudes, got {amps.shape}")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("state is not normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zeros(cls, n_qubits: int) -> "StateVector":
        """The computational basis state |0...0>."""
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis_state(cls, bits: str) -> "StateVector":
        """Basis state from a bit string, qubit 0 first (``"0110"``)."""
        n = len(bits)
        amps = np.zeros(1 << n, dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(n, amps)

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator | int | None = None) -> "StateVector":
        rng = np.random.default_rng(rng)
        v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
        return cls(n_qubits, v / np.linalg.norm(v))

    def to_list(self) -> list[list[float]]:
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]

    def to_json(self) -> str:
        return json.dumps({"n_qubits": self.n_qubits, "amplitudes": self.to_list()})

    @classmethod
    def from_json(cls, text: str) -> "StateVector":
        d = json.loads(text)
        return cls(d["n_qubits"], np.array([complex(re, im) for re, im in d["amplitudes"]]))


@dataclass(frozen=True)
class GeneratorGate:
    """``exp(i theta H)`` for a fixed Hermitian ``H``, via a cached eigendecomposition."""

    generator: PauliOperator
    eigvals: np.ndarray = field(init=False, repr=False)
    eigvecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w, v = np.linalg.eigh(to_dense(self.generator))
        object.__setattr__(self, "eigvals", w)
        object.__setattr__(self, "eigvecs", v)

    @property
    def n_qubits(self) -> int:
        return self.generator.n_qubits

    def unitary(self, theta: float) -> np.ndarray:
        v = self.eigvecs
        return (v * np.exp(1j * theta * self.eigvals)) @ v.conj().T

    def apply(self, amps: np.ndarray, theta: float) -> np.ndarray:
        """Raw-array version of :func:`apply_exp`."""
        v = self.eigvecs
        return v @ (np.exp(1j * theta * self.eigvals) * (v.conj().T @ amps))


def apply_exp(state: StateVector, gate: GeneratorGate, theta: float) -> StateVector:
    """Return ``exp(i theta H)|state>`` for the gate's generator ``H``."""
    if gate.n_qubits != state.n_qubits:
        raise SizeMismatchError(f"gate acts on {gate.n_qubits} qubits, state has {state.n_qubits}")
    out = gate.apply(state.amplitudes, theta)
    return StateVector(state.n_qubits, out)


def _hamiltonian_matrix(spec) -> np.ndarray:
    op = spec.total() if hasattr(spec, "total") else spec
    return to_dense(op)


def expectation(state: StateVector, spec) -> float:
    """``<psi|H|psi>`` for a HamiltonianSpec or PauliOperator ``H``."""
    h = _hamiltonian_matrix(spec)
    if h.shape[0] != state.amplitudes.size:
        raise SizeMismatchError("Hamiltonian and state sizes differ")
    psi = state.amplitudes
    val = np.vdot(psi, h @ psi)
    if abs(val.imag) > IMAG_TOL:
        raise ArithmeticError(f"expectation has imaginary part {val.imag:.3g}; Hamiltonian not Hermitian?")
    return float(val.real)


@dataclass(frozen=True)
class AnsatzSpec:
    """Layered product of generator exponentials.

    Layer ``d`` applies ``exp(i theta[d, j] H_j)`` for ``j`` in generator
    order; parameters are laid out layer-major, ``theta[d * G + j]``.
    """

    generators: tuple[PauliOperator, ...]
    layers: int = 1
    kind: str = "VHA"

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("an ansatz needs at least one generator")
        if self.layers < 1:
            raise ValueError("layers must be positive")
        if self.kind not in ANSATZ_KINDS:
            raise ValueError(f"kind must be one of {ANSATZ_KINDS}")
        if self.kind == "LAP" and self.layers != 1:
            raise ValueError("a LAP ansatz has exactly one layer")
        if len({g.n_qubits for g in gens}) != 1:
            raise SizeMismatchError("generators act on different qubit counts")
        object.__setattr__(self, "generators", gens)

    @property
    def n_qubits(self) -> int:
        return self.generators[0].n_qubits

    @property
    def n_params(self) -> int:
        return self.layers * len(self.generators)

    def gates(self) -> list[GeneratorGate]:
        """One gate per parameter, in application order (shared per generator)."""
        base = [GeneratorGate(g) for g in self.generators]
        return base * self.layers

    def to_dict(self) -> dict:
        return {"kind": self.kind, "layers": self.layers,
                "generators": [g.to_list() for g in self.generators]}


def run_ansatz(spec: AnsatzSpec, params: Sequence[float], initial: StateVector | None = None,
               gates: Sequence[GeneratorGate] | None = None) -> StateVector:
    """Apply the ansatz circuit to ``initial`` (default ``|0...0>``)."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size != spec.n_params:
        raise SizeMismatchError(f"ansatz takes {spec.n_params} parameters, got {params.size}")
    if initial is None:
        initial = StateVector.zeros(spec.n_qubits)
    if initial.n_qubits != spec.n_qubits:
        raise SizeMismatchError("initial state and ansatz sizes differ")
    gates = spec.gates() if gates is None else gates
    psi = initial.amplitudes
    for g, t in zip(gates, params):
        psi = g.apply(psi, t)
    return StateVector(spec.n_qubits, psi)

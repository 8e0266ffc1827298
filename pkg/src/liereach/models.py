"""Concrete Hamiltonians: the two-qubit Pauli set and the 2x2 XXZ lattice."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import MAX_DENSE_QUBITS, CapacityError, PauliOperator, PauliString, to_dense

# row-major 2x2 lattice, open boundary
XXZ_EDGES = ((0, 1), (2, 3), (0, 2), (1, 3))
XXZ_VARIANTS = ("constant", "field")


@dataclass(frozen=True)
class HamiltonianSpec:
    """Ordered, labelled list of Hermitian terms.

    A term is a :class:`PauliOperator` and may hold several strings (the
    aggregated field term does).  Each term is one atom for partitioning.
    """

    n_qubits: int
    terms: tuple[PauliOperator, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        labels = tuple(self.labels) if self.labels else tuple(f"t{i}" for i in range(len(terms)))
        if len(labels) != len(terms):
            raise ValueError("one label per term is required")
        if len(set(labels)) != len(labels):
            raise ValueError("term labels must be unique")
        for t in terms:
            if t.n_qubits != self.n_qubits:
                raise ValueError("term qubit count does not match the Hamiltonian")
        keys = [frozenset(t.terms) for t in terms if not t.is_zero()]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate terms")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.terms)

    def operators(self) -> list[PauliOperator]:
        return list(self.terms)

    def total(self) -> PauliOperator:
        acc = PauliOperator.zero(self.n_qubits)
        for t in self.terms:
            acc = acc + t
        return acc

    def dense(self) -> np.ndarray:
        return to_dense(self.total())

    def to_dict(self) -> dict:
        rows = []
        for t, lab in zip(self.terms, self.labels):
            items = t.to_sorted_items() or [(PauliString.identity(self.n_qubits), 0.0)]
            for s, c in items:
                rows.append({"string": s.label, "coeff": c, "label": lab})
        return {"n_qubits": self.n_qubits, "terms": rows}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "HamiltonianSpec":
        """Rows sharing a label are summed into one term (first-seen order)."""
        n = int(data["n_qubits"])
        grouped: dict[str, list] = {}
        for i, row in enumerate(data["terms"]):
            grouped.setdefault(row.get("label", f"t{i}"), []).append(row)
        terms = [PauliOperator.from_list(rows, n) for rows in grouped.values()]
        return cls(n, tuple(terms), tuple(grouped))

    @classmethod
    def from_json(cls, text: str) -> "HamiltonianSpec":
        return cls.from_dict(json.loads(text))


def two_qubit_pauli_set() -> list[PauliString]:
    """The 16 two-qubit strings, ``II`` first, in lexicographic (I, X, Y, Z) order."""
    return [PauliString.from_label(a + b) for a, b in itertools.product("IXYZ", repeat=2)]


def _site_label(n: int, sites: Sequence[int], p: str) -> str:
    chars = ["I"] * n
    for s in sites:
        chars[s] = p
    return "".join(chars)


def xxz_2x2(J: float = 0.1, delta: float = -2.0, h: float = 0.0,
            variant: str = "constant", offset: float = 1.0) -> HamiltonianSpec:
    """2x2 open XXZ lattice as 13 partitionable terms.

    Each of the four edges carries ``-J XX``, ``-J YY`` and ``-delta ZZ``.
    The thirteenth term depends on ``variant``:

    ``"field"``
        ``-h * sum_k Z_k`` kept as a single term.
    ``"constant"``
        ``offset * I``.  The field is then added as a separate fourteenth
        term only when ``h`` is nonzero.

    The constant variant is the default because it is the 13-term reading
    whose singleton closure has rank 61; the field variant closes to 126.
    """
    if variant not in XXZ_VARIANTS:
        raise ValueError(f"variant must be one of {XXZ_VARIANTS}")
    n = 4
    terms, labels = [], []
    for a, b in XXZ_EDGES:
        for p, c in (("X", -J), ("Y", -J), ("Z", -delta)):
            terms.append(PauliOperator(n, {PauliString.from_label(_site_label(n, (a, b), p)): c}))
            labels.append(f"{p}{p}({a},{b})")
    field = PauliOperator(n, {PauliString.from_label(_site_label(n, (k,), "Z")): -h for k in range(n)})
    if variant == "field":
        terms.append(field)
        labels.append("Z(field)")
    else:
        terms.append(PauliOperator(n, {PauliString.identity(n): offset}))
        labels.append("I(const)")
        if h != 0.0:
            terms.append(field)
            labels.append("Z(field)")
    return HamiltonianSpec(n, tuple(terms), tuple(labels))


def exact_ground_energy(spec: HamiltonianSpec | PauliOperator, return_state: bool = False):
    """Smallest eigenvalue of the dense Hamiltonian (and its eigenvector if asked)."""
    op = spec.total() if isinstance(spec, HamiltonianSpec) else spec
    if op.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"exact diagonalization is limited to {MAX_DENSE_QUBITS} qubits")
    w, v = np.linalg.eigh(to_dense(op))
    if return_state:
        return float(w[0]), v[:, 0]
    return float(w[0])


def calibration_scan(target: float, ratio: float = -20.0,
                     J_values: Sequence[float] = (1.0, 0.5, 0.1),
                     h_values: Sequence[float] = (0.0, 0.1, 0.5, 1.0),
                     tol: float = 5e-4) -> dict:
    """Search a (J, h) grid with ``delta = ratio * J`` for a ground energy near ``target``.

    The field enters as ``-h * sum Z`` and no constant offset is added.  Both
    signs of ``J`` are tried.  Returns every grid point with its energy, the
    closest point, and whether it lies within ``tol``.
    """
    rows = []
    for J in J_values:
        for sign in (1.0, -1.0):
            for h in h_values:
                Js = sign * J
                e0 = exact_ground_energy(xxz_2x2(Js, ratio * Js, h, variant="field"))
                rows.append({"J": Js, "delta": ratio * Js, "h": h, "e0": e0,
                             "error": e0 - target})
    best = min(rows, key=lambda r: abs(r["error"]))
    return {"target": target, "tol": tol, "grid": rows, "best": best,
            "matched": abs(best["error"]) <= tol}

"""Pauli strings and real linear combinations of them.

Strings are stored in symplectic form: ``x_bits`` has bit ``j`` set when qubit
``j`` carries X or Y, ``z_bits`` when it carries Z or Y.  The text form puts
qubit 0 on the left, so ``"XZ"`` is X on qubit 0 and Z on qubit 1.

Operators hold real coefficients only.  Every algebra element is kept as the
Hermitian operator ``H`` standing for ``iH``; the commutator therefore returns
``-i(ab - ba)``, which is again Hermitian with real Pauli coefficients.

Besides the bitmask form, each phase-free string has an integer *code index*
``sum_j c_j 4**(n-1-j)`` with per-qubit codes I=0, X=1, Y=2, Z=3.  Index order
equals lexicographic label order, and the product of two strings has index
``a ^ b`` (up to phase).  The closure kernels work on dense coefficient vectors
laid out by this index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

ZERO_TOL = 1e-12
MAX_QUBITS = 64
MAX_DENSE_QUBITS = 6

_LETTERS = "IXYZ"
# (x, z) -> code
_CODE = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}
_XZ = {0: (0, 0), 1: (1, 0), 2: (1, 1), 3: (0, 1)}


class SizeMismatchError(ValueError):
    """Operands act on different numbers of qubits."""


class CapacityError(ValueError):
    """Requested dense representation exceeds the supported size."""


def _check_same(a_n: int, b_n: int) -> None:
    if a_n != b_n:
        raise SizeMismatchError(f"qubit counts differ: {a_n} vs {b_n}")


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, slots=True)
class PauliString:
    """One n-qubit Pauli word times ``i**phase_exp``."""

    n_qubits: int
    x_bits: int = 0
    z_bits: int = 0
    phase_exp: int = 0

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise ValueError("bitmask has bits above n_qubits - 1")
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse ``"XZIY"``, optionally prefixed by ``+``, ``-``, ``i``, ``-i`` or ``+i``."""
        phase = 0
        body = label.strip()
        for prefix, p in (("+i", 1), ("-i", 3), ("i", 1), ("-", 2), ("+", 0)):
            if body.startswith(prefix):
                phase, body = p, body[len(prefix):]
                break
        if not body:
            raise ValueError(f"empty Pauli label {label!r}")
        x = z = 0
        for j, ch in enumerate(body.upper()):
            if ch not in _LETTERS:
                raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}")
            xb, zb = _XZ[_LETTERS.index(ch)]
            x |= xb << j
            z |= zb << j
        return cls(len(body), x, z, phase)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def from_index(cls, n_qubits: int, index: int) -> "PauliString":
        if not 0 <= index < 4**n_qubits:
            raise ValueError(f"index {index} out of range for {n_qubits} qubits")
        x = z = 0
        for j in range(n_qubits):
            xb, zb = _XZ[(index >> (2 * (n_qubits - 1 - j))) & 3]
            x |= xb << j
            z |= zb << j
        return cls(n_qubits, x, z)

    @property
    def label(self) -> str:
        return "".join(
            _LETTERS[_CODE[((self.x_bits >> j) & 1, (self.z_bits >> j) & 1)]]
            for j in range(self.n_qubits)
        )

    @property
    def index(self) -> int:
        idx = 0
        for j in range(self.n_qubits):
            code = _CODE[((self.x_bits >> j) & 1, (self.z_bits >> j) & 1)]
            idx = (idx << 2) | code
        return idx

    @property
    def weight(self) -> int:
        return _popcount(self.x_bits | self.z_bits)

    def canonical(self) -> "PauliString":
        """The same word with phase_exp = 0."""
        if self.phase_exp == 0:
            return self
        return PauliString(self.n_qubits, self.x_bits, self.z_bits)

    def commutes_with(self, other: "PauliString") -> bool:
        _check_same(self.n_qubits, other.n_qubits)
        sym = _popcount(self.x_bits & other.z_bits) + _popcount(self.z_bits & other.x_bits)
        return sym % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __str__(self) -> str:
        return ("", "i", "-", "-i")[self.phase_exp] + self.label

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


def _product_phase(x1: int, z1: int, x2: int, z2: int, n: int) -> int:
    # exponent of i picked up by sigma_1 sigma_2 = i^g sigma_3, summed over qubits
    g = 0
    for j in range(n):
        a, b = (x1 >> j) & 1, (z1 >> j) & 1
        c, d = (x2 >> j) & 1, (z2 >> j) & 1
        if a and b:
            g += d - c
        elif a:
            g += d * (2 * c - 1)
        elif b:
            g += c * (1 - 2 * d)
    return g


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Group product ``a * b`` with the accumulated phase."""
    _check_same(a.n_qubits, b.n_qubits)
    g = _product_phase(a.x_bits, a.z_bits, b.x_bits, b.z_bits, a.n_qubits)
    return PauliString(
        a.n_qubits,
        a.x_bits ^ b.x_bits,
        a.z_bits ^ b.z_bits,
        a.phase_exp + b.phase_exp + g,
    )


def _as_string(key, n_qubits: int | None) -> PauliString:
    if isinstance(key, PauliString):
        s = key
    elif isinstance(key, str):
        s = PauliString.from_label(key)
    else:
        raise TypeError(f"cannot interpret {key!r} as a Pauli string")
    if n_qubits is not None:
        _check_same(n_qubits, s.n_qubits)
    return s


class PauliOperator:
    """Real linear combination of phase-free Pauli strings.

    Parameters
    ----------
    n_qubits : int
        Register size shared by every term.
    terms : mapping or iterable of pairs, optional
        Pauli strings (or labels) and their coefficients.  Phases on the
        strings are folded into the coefficient; an odd phase would make the
        coefficient imaginary and is rejected.

    Coefficients with magnitude at or below ``ZERO_TOL`` are dropped.  The
    object is immutable once built.
    """

    __slots__ = ("_n", "_terms")

    def __init__(self, n_qubits: int, terms: Mapping | Iterable = ()):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[PauliString, float] = {}
        for key, coeff in items:
            s = _as_string(key, n_qubits)
            if s.phase_exp % 2:
                raise ValueError(f"term {s} has an imaginary phase; only real coefficients are supported")
            c = float(coeff) * (-1.0 if s.phase_exp == 2 else 1.0)
            s = s.canonical()
            acc[s] = acc.get(s, 0.0) + c
        self._n = n_qubits
        self._terms = {s: c for s, c in acc.items() if abs(c) > ZERO_TOL}

    @classmethod
    def from_label(cls, label: str, coeff: float = 1.0) -> "PauliOperator":
        s = PauliString.from_label(label)
        return cls(s.n_qubits, [(s, coeff)])

    @classmethod
    def from_vector(cls, n_qubits: int, vec: np.ndarray) -> "PauliOperator":
        """Build from a dense coefficient vector laid out by code index."""
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (4**n_qubits,):
            raise SizeMismatchError(f"vector length {vec.shape} does not match {n_qubits} qubits")
        nz = np.flatnonzero(np.abs(vec) > ZERO_TOL)
        return cls(n_qubits, [(PauliString.from_index(n_qubits, int(i)), vec[i]) for i in nz])

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliOperator":
        return cls(n_qubits)

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def terms(self) -> Mapping[PauliString, float]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def norm(self) -> float:
        return float(np.sqrt(sum(c * c for c in self._terms.values())))

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(4**self._n)
        for s, c in self._terms.items():
            vec[s.index] = c
        return vec

    def to_list(self) -> list[dict]:
        return [
            {"string": s.label, "coeff": c}
            for s, c in sorted(self._terms.items(), key=lambda kv: kv[0].index)
        ]

    @classmethod
    def from_list(cls, items: list[dict], n_qubits: int | None = None) -> "PauliOperator":
        if n_qubits is None:
            if not items:
                raise ValueError("cannot infer n_qubits from an empty term list")
            n_qubits = len(items[0]["string"])
        return cls(n_qubits, [(d["string"], d["coeff"]) for d in items])

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str, n_qubits: int | None = None) -> "PauliOperator":
        return cls.from_list(json.loads(text), n_qubits)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[PauliString, float]]:
        return iter(self._terms.items())

    def __add__(self, other: "PauliOperator") -> "PauliOperator":
        _check_same(self._n, other._n)
        return PauliOperator(self._n, list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> "PauliOperator":
        return PauliOperator(self._n, {s: -c for s, c in self._terms.items()})

    def __sub__(self, other: "PauliOperator") -> "PauliOperator":
        return self + (-other)

    def __mul__(self, scalar: float) -> "PauliOperator":
        return PauliOperator(self._n, {s: scalar * c for s, c in self._terms.items()})

    __rmul__ = __mul__

    def allclose(self, other: "PauliOperator", atol: float = 1e-12) -> bool:
        if self._n != other._n:
            return False
        diff = self - other
        return all(abs(c) <= atol for c in diff._terms.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        return hash((self._n, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return f"PauliOperator({self._n}, 0)"
        body = " + ".join(f"{c:g}*{s.label}" for s, c in self.to_sorted_items())
        return f"PauliOperator({body})"

    def to_sorted_items(self) -> list[tuple[PauliString, float]]:
        return sorted(self._terms.items(), key=lambda kv: kv[0].index)


def commutator(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Hermitian commutator ``-i(ab - ba)``.

    Only anticommuting string pairs contribute; each gives ``+-2`` times
    the product word.  Commuting inputs give the empty operator.
    """
    _check_same(a.n_qubits, b.n_qubits)
    acc: dict[PauliString, float] = {}
    for p, alpha in a:
        for q, beta in b:
            if p.commutes_with(q):
                continue
            r = multiply(p, q)
            # pq = i^k r with k odd; -i * 2 * i^k = +2 for k == 1, -2 for k == 3
            sign = 2.0 if r.phase_exp == 1 else -2.0
            key = r.canonical()
            acc[key] = acc.get(key, 0.0) + sign * alpha * beta
    return PauliOperator(a.n_qubits, acc)


def hs_inner(a: PauliOperator, b: PauliOperator) -> float:
    """Normalized Hilbert-Schmidt product ``Tr(a^dagger b) / 2**n``."""
    _check_same(a.n_qubits, b.n_qubits)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    return float(sum(c * large.terms.get(s, 0.0) for s, c in small))


def string_matrix(s: PauliString) -> np.ndarray:
    """Dense matrix of one Pauli string, phase included."""
    if s.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense matrices are limited to {MAX_DENSE_QUBITS} qubits")
    n = s.n_qubits
    dim = 1 << n
    # basis index b carries qubit j at bit n-1-j
    xm = zm = 0
    for j in range(n):
        xm |= ((s.x_bits >> j) & 1) << (n - 1 - j)
        zm |= ((s.z_bits >> j) & 1) << (n - 1 - j)
    n_y = _popcount(s.x_bits & s.z_bits)
    cols = np.arange(dim)
    signs = np.array([(-1) ** _popcount(b & zm) for b in range(dim)], dtype=complex)
    out = np.zeros((dim, dim), dtype=complex)
    out[cols ^ xm, cols] = (1j ** ((n_y + s.phase_exp) % 4)) * signs
    return out


def to_dense(a: PauliOperator) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of the operator."""
    if a.n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense matrices are limited to {MAX_DENSE_QUBITS} qubits")
    dim = 1 << a.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for s, c in a:
        out += c * string_matrix(s)
    return out


def from_dense(matrix: np.ndarray, n_qubits: int) -> PauliOperator:
    """Project a Hermitian matrix onto the Pauli basis via traces."""
    if n_qubits > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense matrices are limited to {MAX_DENSE_QUBITS} qubits")
    dim = 1 << n_qubits
    if matrix.shape != (dim, dim):
        raise SizeMismatchError(f"matrix shape {matrix.shape} does not match {n_qubits} qubits")
    terms = []
    for idx in range(4**n_qubits):
        s = PauliString.from_index(n_qubits, idx)
        c = np.trace(string_matrix(s).conj().T @ matrix) / dim
        if abs(c.imag) > 1e-10:
            raise ValueError("matrix is not Hermitian")
        terms.append((s, c.real))
    return PauliOperator(n_qubits, terms)


def all_strings(n_qubits: int) -> list[PauliString]:
    """Every phase-free string on ``n_qubits`` in lexicographic order."""
    return [PauliString.from_index(n_qubits, i) for i in range(4**n_qubits)]

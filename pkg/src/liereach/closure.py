"""Dynamical Lie algebra of a set of Pauli-sum generators.

The closure runs in passes.  Pass 0 orthonormalizes the generators.  Pass
``k`` commutes every element added in pass ``k - 1`` with every element
present, keeps the candidates that are linearly independent of the current
span and records the rank.  Older pairs were handled in earlier passes, so
the final algebra is the same as commuting all pairs every time.

Independence is tested by Gram-Schmidt in the Pauli-coefficient space: a
candidate is projected out of the basis twice (classical Gram-Schmidt with
re-orthogonalization, done with BLAS over blocks of candidates) and kept
when the residual norm exceeds ``INDEPENDENCE_TOL``.  Generators are
normalized first.  Commutators are formed from the orthonormal basis and
keep their natural scale: a commutator that vanishes in exact arithmetic
comes out at roundoff size and must not be rescaled into a spurious
direction.  Commuting nearly dependent raw elements instead would leave
weak directions resolved only to about the tolerance itself.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from .pauli import (
    MAX_DENSE_QUBITS,
    ZERO_TOL,
    CapacityError,
    PauliOperator,
    SizeMismatchError,
    to_dense,
)

INDEPENDENCE_TOL = 1e-9
ORACLE_TOL = 1e-9
MAX_CLOSURE_QUBITS = 7
_CHUNK = 256


class InconclusiveError(RuntimeError):
    """The closure stopped on the iteration limit before converging."""


@dataclass(frozen=True)
class ClosureTrace:
    n_qubits: int
    rank_per_iteration: tuple[int, ...]
    reached_cap: bool
    truncated: bool = False
    basis_matrix: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def final_rank(self) -> int:
        return self.rank_per_iteration[-1]

    @property
    def iterations(self) -> int:
        return len(self.rank_per_iteration) - 1

    @property
    def basis(self) -> list[PauliOperator]:
        if self.basis_matrix is None:
            return []
        return [PauliOperator.from_vector(self.n_qubits, row) for row in self.basis_matrix]

    def rank_at(self, k: int) -> int:
        """Rank after pass ``k``; converged traces stay flat past their end."""
        if k < 0:
            raise ValueError("iteration index must be non-negative")
        if k < len(self.rank_per_iteration):
            return self.rank_per_iteration[k]
        if self.truncated:
            raise InconclusiveError(f"trace was truncated after {self.iterations} passes")
        return self.final_rank

    def to_dict(self, include_basis: bool = False) -> dict:
        out = {
            "n_qubits": self.n_qubits,
            "rank_per_iteration": list(self.rank_per_iteration),
            "final_rank": self.final_rank,
            "reached_cap": self.reached_cap,
            "truncated": self.truncated,
        }
        if include_basis:
            out["basis"] = [op.to_list() for op in self.basis]
        return out

    def to_json(self, include_basis: bool = False) -> str:
        return json.dumps(self.to_dict(include_basis))

    @classmethod
    def from_dict(cls, data: dict) -> "ClosureTrace":
        n = data["n_qubits"]
        basis = None
        if data.get("basis") is not None:
            basis = np.array([PauliOperator.from_list(b, n).to_vector() for b in data["basis"]])
            basis = basis.reshape(-1, 4**n)
        return cls(n, tuple(data["rank_per_iteration"]), bool(data["reached_cap"]),
                   bool(data.get("truncated", False)), basis)


@dataclass(frozen=True)
class ControllabilityReport:
    lie_rank: int
    traceless_rank: int
    fully_controllable: bool


class _Basis:
    """Growing orthonormal basis of the accepted directions."""

    def __init__(self, dim: int, kernels, tol: float = INDEPENDENCE_TOL, zero_tol: float = ZERO_TOL):
        self.dim = dim
        self.kern = kernels
        self.tol = tol
        self.zero_tol = zero_tol
        self.size = 0
        cap = min(dim, 64)
        self.q = np.zeros((cap, dim))

    def _reserve(self, extra: int) -> None:
        need = min(self.dim, self.size + extra)
        if need > self.q.shape[0]:
            cap = min(self.dim, max(need, 2 * self.q.shape[0]))
            pad = np.zeros((cap - self.q.shape[0], self.dim))
            self.q = np.vstack([self.q, pad])

    def absorb(self, block: np.ndarray, normalize: bool = False) -> None:
        """Add the rows of ``block`` in order, skipping dependent ones.

        With ``normalize`` each row is scaled to unit norm first (used for
        generators, whose scale carries no meaning).
        """
        block = np.where(np.abs(block) <= self.zero_tol, 0.0, block)
        norms = np.linalg.norm(block, axis=1)
        keep = norms > self.zero_tol
        if not keep.any():
            return
        block = block[keep]
        if normalize:
            block = block / norms[keep, None]
        resid = block
        if self.size:
            q_old = self.q[:self.size]
            resid = resid - (resid @ q_old.T) @ q_old
            resid = resid - (resid @ q_old.T) @ q_old
        live = np.linalg.norm(resid, axis=1) > self.tol
        if not live.any():
            return
        resid = np.ascontiguousarray(resid[live])
        block = np.ascontiguousarray(block[live])
        self._reserve(resid.shape[0])
        self.size = self.kern.absorb_block(resid, block, self.q, self.size, self.tol)

    def basis(self) -> np.ndarray:
        return self.q[:self.size].copy()


def identity_residual(basis: np.ndarray) -> float:
    """Norm of the identity direction left after projecting onto ``basis`` rows."""
    e0 = np.zeros(basis.shape[1])
    e0[0] = 1.0
    if basis.shape[0] == 0:
        return 1.0
    r = e0 - (basis @ e0) @ basis
    r = r - (basis @ r) @ basis
    return float(np.linalg.norm(r))


def _at_cap(b: _Basis) -> bool:
    # A span whose traceless part is all of su(N) is closed only if it is
    # su(N) itself or all of u(N).  Otherwise, e.g. {X, Y, Z + I} on one
    # qubit, the next pass separates the identity.
    if b.size == b.dim:
        return True
    return b.size == b.dim - 1 and float(np.linalg.norm(b.q[:b.size, 0])) <= b.tol


def _gather(rows: np.ndarray, ptr: np.ndarray, ind: np.ndarray, val: np.ndarray,
            dim: int) -> np.ndarray:
    """Dense block holding CSR rows ``rows`` in the given order."""
    starts = ptr[rows]
    lens = ptr[rows + 1] - starts
    offsets = np.cumsum(lens) - lens
    pos = np.repeat(starts - offsets, lens) + np.arange(int(lens.sum()))
    out = np.zeros((rows.size, dim))
    out[np.repeat(np.arange(rows.size), lens), ind[pos]] = val[pos]
    return out


def close_vectors(gens: np.ndarray, n_qubits: int, max_iterations: int | None = None,
                  backend: str | None = None, keep_basis: bool = True) -> ClosureTrace:
    """Closure of generators given as rows of Pauli-coefficient vectors.

    This is the array-level entry point used by the experiment drivers;
    :func:`close_algebra` wraps it for :class:`PauliOperator` input.
    """
    if not 1 <= n_qubits <= MAX_CLOSURE_QUBITS:
        raise CapacityError(f"closure supports 1..{MAX_CLOSURE_QUBITS} qubits, got {n_qubits}")
    dim = 4**n_qubits
    gens = np.asarray(gens, dtype=float).reshape(-1, dim)
    if gens.shape[0] == 0:
        raise ValueError("at least one generator is required")
    kern = _backend.get_kernels(backend)
    b = _Basis(dim, kern)
    b.absorb(gens, normalize=True)
    ranks = [b.size]

    def done(cap: bool, truncated: bool = False) -> ClosureTrace:
        return ClosureTrace(n_qubits, tuple(ranks), cap, truncated,
                            b.basis() if keep_basis else None)

    if _at_cap(b):
        return done(True)
    start = 0
    passes = 0
    while True:
        stop = b.size
        order, ptr, ind, val = kern.commutator_candidates(b.q[:stop], start, stop, n_qubits, ZERO_TOL)
        for lo in range(0, order.size, _CHUNK):
            b.absorb(_gather(order[lo:lo + _CHUNK], ptr, ind, val, dim))
        ranks.append(b.size)
        passes += 1
        if b.size == stop:
            return done(False)
        if _at_cap(b):
            return done(True)
        if max_iterations is not None and passes >= max_iterations:
            return done(False, truncated=True)
        start = stop


def _check_generators(generators: Sequence[PauliOperator]) -> int:
    if len(generators) == 0:
        raise ValueError("at least one generator is required")
    n = generators[0].n_qubits
    for g in generators[1:]:
        if g.n_qubits != n:
            raise SizeMismatchError(f"generators mix {n} and {g.n_qubits} qubits")
    return n


def close_algebra(generators: Sequence[PauliOperator], max_iterations: int | None = None,
                  backend: str | None = None) -> ClosureTrace:
    """Basis and per-pass rank of the Lie algebra generated by ``generators``.

    Parameters
    ----------
    generators : sequence of PauliOperator
        Hermitian generators ``H_k``; the algebra is spanned by the ``iH_k``
        and their nested commutators.  Duplicates and zero operators are
        allowed and ignored.
    max_iterations : int, optional
        Stop after this many commutator passes.  The trace is then flagged
        ``truncated`` unless it converged on the last pass.
    backend : {"compiled", "python"}, optional
        Kernel implementation; defaults to the one selected at import.

    Returns
    -------
    ClosureTrace
        ``rank_per_iteration[0]`` is the rank of the generator span and entry
        ``k`` the rank after pass ``k``.  Converged traces end with a repeated
        value; traces that hit the ``4**n - 1`` traceless cap end with
        ``reached_cap`` set.
    """
    n = _check_generators(generators)
    gens = np.array([g.to_vector() for g in generators])
    return close_vectors(gens, n, max_iterations, backend)


def controllability(trace: ClosureTrace) -> ControllabilityReport:
    if trace.truncated:
        raise InconclusiveError("closure was truncated; controllability is undetermined")
    if trace.basis_matrix is None:
        raise ValueError("trace carries no basis; rerun the closure with keep_basis=True")
    rank = trace.final_rank
    has_identity = rank > 0 and identity_residual(trace.basis_matrix) <= INDEPENDENCE_TOL
    traceless = rank - int(has_identity)
    return ControllabilityReport(rank, traceless, traceless == 4**trace.n_qubits - 1)


def _realify(ms: Sequence[np.ndarray]) -> np.ndarray:
    # Hermitian part only, so roundoff cannot open anti-Hermitian directions.
    # Scaled so every Pauli string has unit norm, as in coefficient space.
    scale = 1.0 / np.sqrt(ms[0].shape[0])
    ms = [0.5 * (m + m.conj().T) for m in ms]
    return scale * np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in ms])


def _extend(q: np.ndarray, rows: np.ndarray, tol: float) -> np.ndarray:
    if q.shape[0]:
        rows = rows - (rows @ q.T) @ q
        rows = rows - (rows @ q.T) @ q
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    new = vh[s > tol]
    if new.shape[0] == 0:
        return q
    # Singular vectors of weak directions pick up roundoff of order eps/s:
    # return them to the Hermitian subspace and restore orthogonality.
    d = int(round(np.sqrt(new.shape[1] // 2)))
    m = (new[:, : d * d] + 1j * new[:, d * d:]).reshape(-1, d, d)
    m = 0.5 * (m + m.conj().transpose(0, 2, 1))
    new = np.concatenate([m.real.reshape(-1, d * d), m.imag.reshape(-1, d * d)], axis=1)
    if q.shape[0]:
        new = new - (new @ q.T) @ q
        new = new - (new @ q.T) @ q
    return np.vstack([q, np.linalg.qr(new.T)[0].T])


def dense_closure_oracle(generators: Sequence[PauliOperator], tol: float = ORACLE_TOL) -> int:
    """Lie rank from dense matrices and singular values.

    Independent of the Pauli-coefficient machinery.  The algebra is held as
    an orthonormal basis of flattened ``2**n x 2**n`` Hermitian matrices.
    Each pass commutes the newest basis elements with all others, projects
    out the current span and keeps residual directions whose singular value
    exceeds ``tol``.  Commutators are not renormalized, so small roundoff
    residues stay small.

    Directions whose residual singular value is only a few orders above
    ``tol`` are resolved to roughly ``eps / s``; with generic real
    coefficients that error can compound into spurious directions.  The
    oracle is reliable on well-conditioned input such as small-integer or
    dyadic coefficients.
    """
    n = _check_generators(generators)
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense oracle is limited to {MAX_DENSE_QUBITS} qubits")
    dim = 1 << n
    g = _realify([to_dense(op) for op in generators])
    norms = np.linalg.norm(g, axis=1)
    g = g[norms > ZERO_TOL] / norms[norms > ZERO_TOL, None]  # generator scale is irrelevant
    if g.shape[0] == 0:
        return 0
    q = _extend(np.zeros((0, g.shape[1])), g, tol)
    done = 0
    while done < q.shape[0]:
        elems = [np.sqrt(dim) * (v[: dim * dim] + 1j * v[dim * dim:]).reshape(dim, dim) for v in q]
        comms = [-1j * (elems[i] @ elems[j] - elems[j] @ elems[i])
                 for i in range(done, len(elems)) for j in range(i)]
        done = q.shape[0]
        if comms:
            q = _extend(q, _realify(comms), tol)
    return int(q.shape[0])

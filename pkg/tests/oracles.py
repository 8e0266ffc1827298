"""Reference implementations that share no code with the package.

Dense Pauli matrices come from Kronecker products of the 2x2 matrices,
Lie ranks from singular values of stacked dense matrices, Stirling numbers
from the inclusion-exclusion formula and partitions from brute-force label
assignment.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb, factorial

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for ch in label:
        out = np.kron(out, PAULI[ch])
    return out


def op_matrix(terms: dict[str, float]) -> np.ndarray:
    n = len(next(iter(terms)))
    out = np.zeros((2**n, 2**n), dtype=complex)
    for lab, c in terms.items():
        out += c * pauli_matrix(lab)
    return out


def decompose(mat: np.ndarray, n: int) -> dict[str, float]:
    out = {}
    for lab in map("".join, itertools.product("IXYZ", repeat=n)):
        c = np.trace(pauli_matrix(lab).conj().T @ mat) / 2**n
        if abs(c) > 1e-12:
            out[lab] = c
    return out


def lie_rank(mats: list[np.ndarray], tol: float = 1e-9) -> int:
    """Dimension of the real Lie algebra generated by ``i * mats``.

    Elements are kept as an orthonormal basis of flattened Hermitian
    matrices.  Commutators of basis pairs are not renormalized: the current
    span is projected out and new directions are the singular vectors of the
    residual with singular value above ``tol``.
    """
    d = mats[0].shape[0]

    def flat(ms):
        # unit-norm Pauli strings, Hermitian part only
        ms = [0.5 * (m + m.conj().T) / np.sqrt(d) for m in ms]
        return np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in ms])

    def unflat(v):
        return np.sqrt(d) * (v[: d * d] + 1j * v[d * d:]).reshape(d, d)

    def extend(q, rows):
        if q.shape[0]:
            rows = rows - (rows @ q.T) @ q
            rows = rows - (rows @ q.T) @ q
        _, s, vh = np.linalg.svd(rows, full_matrices=False)
        return np.vstack([q, vh[s > tol]])

    g = flat(mats)
    norms = np.linalg.norm(g, axis=1)
    g = g[norms > 1e-12] / norms[norms > 1e-12, None]
    q = extend(np.zeros((0, 2 * d * d)), g)
    done = 0
    while done < q.shape[0]:
        elems = [unflat(v) for v in q]
        comms = [1j * (elems[i] @ elems[j] - elems[j] @ elems[i])
                 for i in range(done, len(elems)) for j in range(i)]
        done = q.shape[0]
        if comms:
            q = extend(q, flat(comms))
    return q.shape[0]


def stirling2(n: int, k: int) -> int:
    return sum((-1) ** j * comb(k, j) * (k - j) ** n for j in range(k + 1)) // factorial(k)


def all_partitions(n: int, m: int) -> set[tuple[tuple[int, ...], ...]]:
    """Every m-block partition of range(n) by brute-force label assignment."""
    out = set()
    for labels in itertools.product(range(m), repeat=n):
        if len(set(labels)) != m:
            continue
        blocks = {}
        for i, lab in enumerate(labels):
            blocks.setdefault(lab, []).append(i)
        out.add(tuple(sorted(tuple(b) for b in blocks.values())))
    return out


PRIME = 16777213  # 2**24 - 3; products of two residues stay inside int64


def _string_products(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index of ``P_a P_b`` and the integer coefficient of ``-i[P_a, P_b]``.

    Single-qubit products are read off the 2x2 matrices.
    """
    one = {}
    for a, b in itertools.product(range(4), repeat=2):
        m = PAULI["IXYZ"[a]] @ PAULI["IXYZ"[b]]
        for c in range(4):
            w = np.trace(PAULI["IXYZ"[c]].conj().T @ m) / 2
            if abs(w) > 0.5:
                one[a, b] = (c, complex(w))
    d = 4**n
    digits = [[(a // 4 ** (n - 1 - j)) % 4 for j in range(n)] for a in range(d)]
    idx = np.zeros((d, d), dtype=np.int64)
    coef = np.zeros((d, d), dtype=np.int64)
    for a in range(d):
        for b in range(d):
            w, c = 1, 0
            for x, y in zip(digits[a], digits[b]):
                cc, ww = one[x, y]
                w, c = w * ww, 4 * c + cc
            idx[a, b] = c
            coef[a, b] = round((-1j * (w - np.conj(w))).real)
    return idx, coef


def modular_lie_rank(gens: list[dict[str, float]]) -> int:
    """Exact Lie rank for rational Pauli coefficients, computed modulo a prime.

    The structure constants of ``-i[., .]`` are integers and finite floats
    are dyadic rationals, so the closure can be run in GF(p) with no
    roundoff.  The result equals the rational rank unless
    ``p`` divides one of the pivots, which is vanishingly unlikely.
    """
    n = len(next(iter(gens[0])))
    idx, coef = _string_products(n)
    d = 4**n
    flat_idx = idx.ravel()

    def vec(terms):
        v = np.zeros(d, dtype=np.int64)
        for lab, c in terms.items():
            f = Fraction(c)  # floats are exact dyadic rationals
            v[int("".join(str("IXYZ".index(ch)) for ch in lab), 4)] = (
                f.numerator % PRIME * pow(f.denominator, PRIME - 2, PRIME) % PRIME)
        return v % PRIME

    def comm(u, v):
        prod = (np.outer(u, v) % PRIME) * coef % PRIME
        w = np.zeros(d, dtype=np.int64)
        np.add.at(w, flat_idx, prod.ravel())
        return w % PRIME

    echelon: dict[int, np.ndarray] = {}

    def insert(w):
        w = w.copy()
        for piv, row in echelon.items():
            if w[piv]:
                w = (w - w[piv] * row) % PRIME
        nz = np.flatnonzero(w)
        if nz.size == 0:
            return False
        piv = int(nz[0])
        w = w * pow(int(w[piv]), PRIME - 2, PRIME) % PRIME
        for k, row in echelon.items():
            if row[piv]:
                echelon[k] = (row - row[piv] * w) % PRIME
        echelon[piv] = w
        return True

    elems = [v for v in map(vec, gens) if insert(v)]
    fresh = range(len(elems))
    while len(fresh):
        stop = len(elems)
        for i in fresh:
            for j in range(i):
                w = comm(elems[i], elems[j])
                if insert(w):
                    elems.append(w)
        fresh = range(stop, len(elems))
    return len(echelon)

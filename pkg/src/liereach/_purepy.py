"""NumPy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is missing or when
``LIEREACH_PURE_PYTHON=1`` is set.  Results match the extension to the last
bit for the candidate generator (same summation order per output entry is not
guaranteed, so agreement is to roundoff; ranks agree exactly).
"""
from __future__ import annotations

import numpy as np


def _single_qubit_k(ca: int, cb: int) -> int:
    if ca == 0 or cb == 0 or ca == cb:
        return 0
    return 1 if cb == ca % 3 + 1 else 3


def _byte_table() -> np.ndarray:
    # four qubits per byte; entry is the summed i-exponent mod 4
    t = np.zeros((256, 256), dtype=np.uint8)
    for a in range(256):
        for b in range(256):
            k = 0
            for q in range(4):
                k += _single_qubit_k((a >> (2 * q)) & 3, (b >> (2 * q)) & 3)
            t[a, b] = k & 3
    return t


PHASE_TABLE = _byte_table()


def _signs(a: np.ndarray, b: np.ndarray, n_qubits: int) -> np.ndarray:
    k = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for shift in range(0, 2 * n_qubits, 8):
        k += PHASE_TABLE[(a >> shift) & 255, (b >> shift) & 255]
    k &= 3
    return np.where(k == 1, 2.0, np.where(k == 3, -2.0, 0.0))


def commutator_coeffs(u: np.ndarray, v: np.ndarray, n_qubits: int, zero_tol: float = 1e-12) -> np.ndarray:
    """Coefficient vector of ``-i[u, v]`` for coefficient vectors ``u``, ``v``."""
    dim = 4**n_qubits
    ia = np.flatnonzero(u)
    ib = np.flatnonzero(v)
    out = np.zeros(dim)
    if ia.size == 0 or ib.size == 0:
        return out
    a = ia[:, None]
    b = ib[None, :]
    vals = _signs(a, b, n_qubits) * u[ia][:, None] * v[ib][None, :]
    out += np.bincount((a ^ b).ravel(), weights=vals.ravel(), minlength=dim)
    out[np.abs(out) <= zero_tol] = 0.0
    return out


def commutator_candidates(basis: np.ndarray, start: int, stop: int, n_qubits: int,
                          zero_tol: float = 1e-12):
    """Commutators of rows ``start..stop-1`` of ``basis`` with every earlier row.

    Returns ``(order, ptr, ind, val)``: candidate ``c`` has entries
    ``ind[ptr[c]:ptr[c+1]]`` / ``val[...]`` and ``order`` lists candidates
    sorted by first nonzero index, ties broken by generation order
    (row ``i`` ascending, then partner ``j`` ascending).  Vanishing
    commutators are skipped.
    """
    dim = 4**n_qubits
    keys, ptr, ind, val = [], [0], [], []
    rows, cols = np.nonzero(basis[:stop])
    coeffs = basis[rows, cols]
    for i in range(start, stop):
        ia = np.flatnonzero(basis[i])
        sel = rows < i
        jr, jc, jv = rows[sel], cols[sel], coeffs[sel]
        if ia.size == 0 or jr.size == 0:
            continue
        a = ia[:, None]
        prod = _signs(a, jc[None, :], n_qubits) * basis[i, ia][:, None] * jv[None, :]
        target = jr[None, :] * dim + (a ^ jc[None, :])
        block = np.bincount(target.ravel(), weights=prod.ravel(), minlength=i * dim).reshape(i, dim)
        block[np.abs(block) <= zero_tol] = 0.0
        for j in range(i):
            nz = np.flatnonzero(block[j])
            if nz.size:
                keys.append(nz[0])
                ind.append(nz)
                val.append(block[j, nz])
                ptr.append(ptr[-1] + nz.size)
    order = np.argsort(np.asarray(keys, dtype=np.int64), kind="stable")
    ind_arr = np.concatenate(ind).astype(np.int32) if ind else np.zeros(0, dtype=np.int32)
    val_arr = np.concatenate(val) if val else np.zeros(0)
    return order, np.asarray(ptr, dtype=np.int64), ind_arr, val_arr


def absorb_block(resid: np.ndarray, block: np.ndarray, q: np.ndarray, size: int,
                 tol: float) -> int:
    """Sequentially accept rows of ``resid`` that stay independent.

    ``resid`` holds the candidates already projected out of ``q[:size]``;
    ``block`` holds the same candidates before projection.  A row is
    screened against the rows accepted earlier in this call.  If it
    survives, its residual is recomputed from ``block`` against the whole
    basis (two passes) and that residual decides acceptance, since the
    in-block updates may have cancelled the row down to roundoff.  Accepted
    residuals are normalized into ``q`` and removed from the remaining
    rows.  Rows beyond the capacity of ``q`` are ignored.  Returns the new
    size; ``resid`` is overwritten.
    """
    base = size
    n_rows = resid.shape[0]
    for b in range(n_rows):
        if size == q.shape[0]:
            break
        r = resid[b]
        if size > base:
            qn = q[base:size]
            r = r - (qn @ r) @ qn
        if np.linalg.norm(r) <= tol:
            continue
        full = q[:size]
        r = block[b] - (full @ block[b]) @ full
        r = r - (full @ r) @ full
        rn = np.linalg.norm(r)
        if rn <= tol:
            continue
        qrow = r / rn
        q[size] = qrow
        size += 1
        if b + 1 < n_rows:
            rest = resid[b + 1:]
            rest -= np.outer(rest @ qrow, qrow)
    return size

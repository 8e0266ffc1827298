# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Same contract as ``liereach._purepy``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.string cimport memset

from ._purepy import PHASE_TABLE

cnp.import_array()

cdef const unsigned char[:, ::1] _TABLE = PHASE_TABLE


cdef inline void _accumulate(const double* u, const int* ui, Py_ssize_t nu,
                             const double* v, const int* vi, Py_ssize_t nv,
                             int n_qubits, double* out) noexcept nogil:
    cdef Py_ssize_t a, b
    cdef int ia, ib, shift, k
    cdef double ua
    for a in range(nu):
        ia = ui[a]
        ua = u[ia]
        for b in range(nv):
            ib = vi[b]
            k = 0
            shift = 0
            while shift < 2 * n_qubits:
                k += _TABLE[(ia >> shift) & 255, (ib >> shift) & 255]
                shift += 8
            k &= 3
            if k == 1:
                out[ia ^ ib] += 2.0 * ua * v[ib]
            elif k == 3:
                out[ia ^ ib] -= 2.0 * ua * v[ib]


def commutator_coeffs(u, v, int n_qubits, double zero_tol=1e-12):
    """Coefficient vector of ``-i[u, v]`` for coefficient vectors ``u``, ``v``."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << (2 * n_qubits), i
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef int[::1] ui = np.flatnonzero(uu).astype(np.int32)
    cdef int[::1] vi = np.flatnonzero(vv).astype(np.int32)
    out_arr = np.zeros(dim)
    cdef double[::1] out = out_arr
    if ui.shape[0] and vi.shape[0]:
        _accumulate(&uu[0], &ui[0], ui.shape[0], &vv[0], &vi[0], vi.shape[0], n_qubits, &out[0])
    for i in range(dim):
        if fabs(out[i]) <= zero_tol:
            out[i] = 0.0
    return out_arr


def commutator_candidates(basis, Py_ssize_t start, Py_ssize_t stop, int n_qubits,
                          double zero_tol=1e-12):
    """Commutators of rows ``start..stop-1`` of ``basis`` with every earlier row.

    Returns ``(order, ptr, ind, val)`` in CSR form; see
    ``liereach._purepy.commutator_candidates``.
    """
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << (2 * n_qubits)
    cdef double[:, ::1] r = np.ascontiguousarray(basis[:stop], dtype=np.float64)
    cdef Py_ssize_t i, j, t, first, n_cand = 0, n_val = 0, max_cand = 0
    cdef Py_ssize_t cnt
    idx_arr = np.zeros((stop, dim), dtype=np.int32)
    nnz_arr = np.zeros(stop, dtype=np.int32)
    cdef int[:, ::1] idx = idx_arr
    cdef int[::1] nnz = nnz_arr
    for i in range(stop):
        cnt = 0
        for t in range(dim):
            if r[i, t] != 0.0:
                idx[i, cnt] = <int>t
                cnt += 1
        nnz[i] = <int>cnt
    for i in range(start, stop):
        max_cand += i
    keys_arr = np.empty(max_cand, dtype=np.int64)
    ptr_arr = np.zeros(max_cand + 1, dtype=np.int64)
    cdef long[::1] keys = keys_arr
    cdef long[::1] ptr = ptr_arr
    ind_arr = np.empty(max(64, 4 * max_cand), dtype=np.int32)
    val_arr = np.empty(max(64, 4 * max_cand))
    cdef int[::1] ind = ind_arr
    cdef double[::1] val = val_arr
    cdef double[::1] w = np.zeros(dim)
    for i in range(start, stop):
        for j in range(i):
            memset(&w[0], 0, dim * sizeof(double))
            _accumulate(&r[i, 0], &idx[i, 0], nnz[i], &r[j, 0], &idx[j, 0], nnz[j],
                        n_qubits, &w[0])
            first = -1
            for t in range(dim):
                if fabs(w[t]) <= zero_tol:
                    continue
                if first < 0:
                    first = t
                if n_val == ind.shape[0]:
                    ind_arr = np.resize(ind_arr, 2 * n_val)
                    val_arr = np.resize(val_arr, 2 * n_val)
                    ind = ind_arr
                    val = val_arr
                ind[n_val] = <int>t
                val[n_val] = w[t]
                n_val += 1
            if first >= 0:
                keys[n_cand] = first
                n_cand += 1
                ptr[n_cand] = n_val
    order = np.argsort(keys_arr[:n_cand], kind="stable")
    return order, ptr_arr[:n_cand + 1].copy(), ind_arr[:n_val].copy(), val_arr[:n_val].copy()


cdef double _project_out(double* r, double[:, ::1] q, Py_ssize_t lo, Py_ssize_t hi,
                         Py_ssize_t dim, double* coef):
    """Classical Gram-Schmidt step ``r -= Q^T (Q r)`` over rows lo..hi-1; returns |r|."""
    cdef Py_ssize_t j, t
    cdef double dot, nrm = 0.0
    for j in range(lo, hi):
        dot = 0.0
        for t in range(dim):
            dot += q[j, t] * r[t]
        coef[j] = dot
    for j in range(lo, hi):
        dot = coef[j]
        for t in range(dim):
            r[t] -= dot * q[j, t]
    for t in range(dim):
        nrm += r[t] * r[t]
    return sqrt(nrm)


def absorb_block(double[:, ::1] resid, double[:, ::1] block, double[:, ::1] q,
                 Py_ssize_t size, double tol):
    """Sequential acceptance step; see ``liereach._purepy.absorb_block``."""
    cdef Py_ssize_t n_rows = resid.shape[0], dim = resid.shape[1], cap = q.shape[0]
    cdef Py_ssize_t base = size, b, c, t
    cdef double dot, rn
    cdef double[::1] r = np.empty(dim)
    cdef double[::1] coef = np.empty(max(1, cap))
    for b in range(n_rows):
        if size == cap:
            break
        for t in range(dim):
            r[t] = resid[b, t]
        # screen against rows accepted in this call
        rn = _project_out(&r[0], q, base, size, dim, &coef[0])
        if rn <= tol:
            continue
        # residual recomputed from the candidate against the whole basis
        for t in range(dim):
            r[t] = block[b, t]
        _project_out(&r[0], q, 0, size, dim, &coef[0])
        rn = _project_out(&r[0], q, 0, size, dim, &coef[0])
        if rn <= tol:
            continue
        for t in range(dim):
            q[size, t] = r[t] / rn
        for c in range(b + 1, n_rows):
            dot = 0.0
            for t in range(dim):
                dot += resid[c, t] * q[size, t]
            if dot != 0.0:
                for t in range(dim):
                    resid[c, t] -= dot * q[size, t]
        size += 1
    return size

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels.

Same contracts as the numpy backend (see ``_numpy.py``).  The matrix
products stay on numpy's BLAS (the fastest zgemm available in-process);
what this extension buys is the per-step bookkeeping: observable
extraction, trace renormalization, and the amplitude-damping map run as
fused single passes over the raw buffers instead of a chain of temporary
arrays.  All scalar factors in those passes are real, so the loops run on
double views of the complex data, which the C compiler vectorizes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt

cnp.import_array()

NAME = "compiled"

N_OBS = 7

cdef int _OBS = 7


cdef double _record_scale(double* s, int d, int r, int fock_dim,
                          double* out_row) noexcept nogil:
    """Populations, phonon moments, trace from |s|^2, then rescale to unit
    trace.  ``s`` views the C-ordered (d, r) complex buffer as interleaved
    doubles.  out_row: p_ee, p_eg, p_ge, p_gg, raw_trace, mean_phonon,
    top_fock.  Returns the pre-scaling trace."""
    cdef double pops[4]
    cdef double nph = 0.0, top = 0.0, tr, w, inv
    cdef int i, j, blk, n
    cdef long base, count
    pops[0] = pops[1] = pops[2] = pops[3] = 0.0
    for i in range(d):
        blk = i / fock_dim
        n = i - blk * fock_dim
        base = 2 * (<long> i) * r
        w = 0.0
        for j in range(2 * r):
            w += s[base + j] * s[base + j]
        pops[blk] += w
        nph += n * w
        if n == fock_dim - 1:
            top += w
    tr = pops[0] + pops[1] + pops[2] + pops[3]
    out_row[0] = pops[0] / tr
    out_row[1] = pops[1] / tr
    out_row[2] = pops[2] / tr
    out_row[3] = pops[3] / tr
    out_row[4] = tr
    out_row[5] = nph / tr
    out_row[6] = top / tr
    inv = 1.0 / sqrt(tr)
    count = 2 * (<long> d) * r
    for base in range(count):
        s[base] *= inv
    return tr


def propagate_states(prop, states, int fock_dim, cnp.ndarray out):
    cdef cnp.ndarray prop_c = np.ascontiguousarray(prop, dtype=np.complex128)
    cdef cnp.ndarray buf_a = np.array(states, dtype=np.complex128, order="C",
                                      copy=True)
    cdef cnp.ndarray buf_b = np.empty_like(buf_a)
    cdef int d = buf_a.shape[0]
    cdef int r = buf_a.shape[1]
    cdef int n_steps = out.shape[0] - 1
    if d % fock_dim or d // fock_dim != 4:
        raise ValueError(f"state dimension {d} is not 4 * fock_dim ({fock_dim})")
    if not out.flags.c_contiguous or out.shape[1] != _OBS:
        raise ValueError("output array must be C-ordered with 7 columns")

    cdef double* o = <double*> cnp.PyArray_DATA(out)
    cdef int k
    cdef object cur = buf_a, nxt = buf_b, tmp

    _record_scale(<double*> cnp.PyArray_DATA(buf_a), d, r, fock_dim, o)
    for k in range(1, n_steps + 1):
        np.matmul(prop_c, cur, out=nxt)
        _record_scale(<double*> cnp.PyArray_DATA(<cnp.ndarray> nxt), d, r,
                      fock_dim, o + k * _OBS)
        tmp = cur; cur = nxt; nxt = tmp

    states[...] = cur


cdef void _damp_half(double* rho, int d, int fock_dim,
                     double gamma_tau) noexcept nogil:
    """Exact acceptor amplitude-damping map for time tau, in place.

    ``rho`` views the C-ordered (d, d) complex buffer as interleaved
    doubles.  Acceptor-excited dimer levels are 0 (ee) and 2 (ge); the
    jump maps level b to b+1 at fixed phonon number.  Ground blocks are
    fed from the excited blocks before those are scaled.
    """
    cdef double f = exp(-gamma_tau)
    cdef double g = 1.0 - f
    cdef double sf = exp(-0.5 * gamma_tau)
    cdef int n = fock_dim
    cdef int bi, bj, i, j
    cdef long src, dst
    cdef bint xi, xj
    for bi in range(4):
        xi = (bi == 0 or bi == 2)
        for bj in range(4):
            xj = (bj == 0 or bj == 2)
            if xi and xj:
                for i in range(n):
                    src = 2 * ((<long> (bi * n + i)) * d + bj * n)
                    dst = 2 * ((<long> ((bi + 1) * n + i)) * d + (bj + 1) * n)
                    for j in range(2 * n):
                        rho[dst + j] += g * rho[src + j]
                        rho[src + j] *= f
            elif xi != xj:
                for i in range(n):
                    src = 2 * ((<long> (bi * n + i)) * d + bj * n)
                    for j in range(2 * n):
                        rho[src + j] *= sf


cdef double _record_diag_scale(double* rho, int d, int fock_dim,
                               double* out_row) noexcept nogil:
    """Diagonal observables of a C-ordered (d, d) complex buffer viewed as
    interleaved doubles, then rescale the whole matrix to unit trace."""
    cdef double pops[4]
    cdef double nph = 0.0, top = 0.0, tr, w, inv
    cdef int i, blk, n
    cdef long idx, count
    pops[0] = pops[1] = pops[2] = pops[3] = 0.0
    for i in range(d):
        w = rho[2 * ((<long> i) * d + i)]
        blk = i / fock_dim
        n = i - blk * fock_dim
        pops[blk] += w
        nph += n * w
        if n == fock_dim - 1:
            top += w
    tr = pops[0] + pops[1] + pops[2] + pops[3]
    out_row[0] = pops[0] / tr
    out_row[1] = pops[1] / tr
    out_row[2] = pops[2] / tr
    out_row[3] = pops[3] / tr
    out_row[4] = tr
    out_row[5] = nph / tr
    out_row[6] = top / tr
    inv = 1.0 / tr
    count = 2 * (<long> d) * d
    for idx in range(count):
        rho[idx] *= inv
    return tr


def lindblad_strang(prop, rho, int fock_dim, double gamma_dt,
                    cnp.ndarray out):
    cdef cnp.ndarray prop_c = np.ascontiguousarray(prop, dtype=np.complex128)
    cdef cnp.ndarray prop_h = np.ascontiguousarray(prop_c.conj().T)
    cdef cnp.ndarray work_r = np.array(rho, dtype=np.complex128, order="C",
                                       copy=True)
    cdef cnp.ndarray work_t = np.empty_like(work_r)
    cdef int d = work_r.shape[0]
    cdef int n_steps = out.shape[0] - 1
    if d % fock_dim or d // fock_dim != 4:
        raise ValueError(f"state dimension {d} is not 4 * fock_dim ({fock_dim})")
    if not out.flags.c_contiguous or out.shape[1] != _OBS:
        raise ValueError("output array must be C-ordered with 7 columns")

    cdef double* r0 = <double*> cnp.PyArray_DATA(work_r)
    cdef double* o = <double*> cnp.PyArray_DATA(out)
    cdef int k

    _record_diag_scale(r0, d, fock_dim, o)
    for k in range(1, n_steps + 1):
        if gamma_dt > 0.0:
            with nogil:
                _damp_half(r0, d, fock_dim, 0.5 * gamma_dt)
        np.matmul(prop_c, work_r, out=work_t)
        np.matmul(work_t, prop_h, out=work_r)
        if gamma_dt > 0.0:
            with nogil:
                _damp_half(r0, d, fock_dim, 0.5 * gamma_dt)
        _record_diag_scale(r0, d, fock_dim, o + k * _OBS)

    rho[...] = work_r

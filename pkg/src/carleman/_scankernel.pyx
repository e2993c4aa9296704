# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled block scan of a widening chain (quad precision accumulators)."""
from cpython.mem cimport PyMem_Malloc, PyMem_Free

cdef extern from "scan_kernel.h":
    int CARLEMAN_MAX_DEPTH
    int carleman_scan(int kind, double param_hi, double param_lo, int depth,
                      long long k0, long long stride, long long nblocks,
                      const double *mu0, double *out) nogil

MAX_DEPTH = CARLEMAN_MAX_DEPTH


def scan_blocks(int kind, double param_hi, double param_lo, int depth,
                long long k0, long long stride, long long nblocks, mu0):
    """Return ``nblocks`` rows of per-level ``(hi, lo)`` increments.

    Row layout per level: dlog_m, dmu, dsum_log_mu, each a (hi, lo) pair.
    """
    cdef int ncol = 6 * (depth + 1)
    cdef double *mu_buf = <double *>PyMem_Malloc(sizeof(double) * (2 * depth + 1))
    cdef double *out = <double *>PyMem_Malloc(sizeof(double) * ncol * (nblocks if nblocks > 0 else 1))
    cdef int rc, i
    cdef long long b
    if mu_buf == NULL or out == NULL:
        PyMem_Free(mu_buf)
        PyMem_Free(out)
        raise MemoryError()
    try:
        for i in range(2 * depth):
            mu_buf[i] = mu0[i]
        with nogil:
            rc = carleman_scan(kind, param_hi, param_lo, depth, k0, stride,
                               nblocks, mu_buf, out)
        if rc == -2:
            raise ValueError("non-positive ratio")
        if rc != 0:
            raise ValueError("bad scan arguments")
        return [tuple(out[b * ncol + i] for i in range(ncol)) for b in range(nblocks)]
    finally:
        PyMem_Free(mu_buf)
        PyMem_Free(out)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops for the pursuit engine and the LIF readout.

Semantics and table layout match ``_fallback.py`` exactly; summation order
is sequential.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()

cdef enum:
    C_DONE = 0
    C_STOP_ENERGY = 1
    C_STOP_NONPOSITIVE = 2
    C_CLIPPED = 3

DONE = C_DONE
STOP_ENERGY = C_STOP_ENERGY
STOP_NONPOSITIVE = C_STOP_NONPOSITIVE
CLIPPED = C_CLIPPED


cdef inline void _column_blocks(double[:, ::1] H, double[:, ::1] colmax, long long[:, ::1] colarg,
                                Py_ssize_t m, Py_ssize_t b0, Py_ssize_t b1, Py_ssize_t block,
                                bint absolute) noexcept nogil:
    cdef Py_ssize_t T = H.shape[1], b, t, t1
    cdef double best, v
    cdef long long arg
    for b in range(b0, b1):
        best = -INFINITY
        arg = b * block
        t1 = (b + 1) * block
        if t1 > T:
            t1 = T
        for t in range(b * block, t1):
            v = H[m, t]
            if absolute:
                v = fabs(v)
            if v > best:
                best = v
                arg = t
        colmax[m, b] = best
        colarg[m, b] = arg


cdef inline void _reduce_blocks(double[:, ::1] colmax, long long[:, ::1] colarg,
                                double[::1] block_max, long long[::1] block_arg,
                                Py_ssize_t b0, Py_ssize_t b1) noexcept nogil:
    cdef Py_ssize_t M = colmax.shape[0], b, m
    cdef double best, v
    cdef long long key, kbest
    for b in range(b0, b1):
        best = colmax[0, b]
        kbest = colarg[0, b] * M
        for m in range(1, M):
            v = colmax[m, b]
            key = colarg[m, b] * M + m
            if v > best or (v == best and key < kbest):
                best = v
                kbest = key
        block_max[b] = best
        block_arg[b] = kbest


def refresh_blocks(double[:, ::1] H, double[:, ::1] colmax, long long[:, ::1] colarg,
                   double[::1] block_max, long long[::1] block_arg,
                   Py_ssize_t block, Py_ssize_t lo, Py_ssize_t hi, bint absolute):
    cdef Py_ssize_t m, b0, b1
    if hi <= lo:
        return
    b0 = lo // block
    b1 = (hi - 1) // block + 1
    with nogil:
        for m in range(H.shape[0]):
            _column_blocks(H, colmax, colarg, m, b0, b1, block, absolute)
        _reduce_blocks(colmax, colarg, block_max, block_arg, b0, b1)


def run_pursuit(double[::1] R, double[:, ::1] H, double[:, ::1] colmax, long long[:, ::1] colarg,
                double[::1] block_max, long long[::1] block_arg,
                Py_ssize_t block, const double[::1] kern_flat, const long long[::1] kern_off,
                const long long[::1] lengths, const double[::1] gram, const long long[:, ::1] gram_off,
                Py_ssize_t n_max, double stop_energy, double energy, bint absolute,
                long long[::1] out_m, long long[::1] out_tau, double[::1] out_s, double[::1] out_e,
                Py_ssize_t count):
    cdef Py_ssize_t M = H.shape[0], T = H.shape[1]
    cdef Py_ssize_t n_blocks = block_max.shape[0]
    cdef Py_ssize_t Lmax = 0, b, bbest, tau, m, m2, L, L2, Lc, u, lo, hi, t
    cdef long long idx, g0
    cdef double best, s, old, new, dE
    cdef const double* g
    cdef double* h
    cdef int status = C_DONE
    for m in range(M):
        if lengths[m] > Lmax:
            Lmax = lengths[m]
    with nogil:
        while count < n_max:
            if energy < stop_energy:
                status = C_STOP_ENERGY
                break
            bbest = 0
            best = block_max[0]
            for b in range(1, n_blocks):
                if block_max[b] > best:
                    best = block_max[b]
                    bbest = b
            if not best > 0:
                status = C_STOP_NONPOSITIVE
                break
            idx = block_arg[bbest]
            tau = idx // M
            m = idx % M
            L = lengths[m]
            Lc = L
            if T - tau < Lc:
                Lc = T - tau
            s = 0.0
            for u in range(Lc):
                s += R[tau + u] * kern_flat[kern_off[m] + u]
            dE = 0.0
            for u in range(Lc):
                old = R[tau + u]
                new = old - s * kern_flat[kern_off[m] + u]
                dE += new * new - old * old
                R[tau + u] = new
            energy += dE
            for m2 in range(M):
                L2 = lengths[m2]
                lo = tau - L2 + 1
                if lo < 0:
                    lo = 0
                hi = tau + L
                if hi > T:
                    hi = T
                g0 = gram_off[m, m2] + (lo - tau) + (L2 - 1)
                g = &gram[g0]
                h = &H[m2, lo]
                for t in range(hi - lo):
                    h[t] -= s * g[t]
                _column_blocks(H, colmax, colarg, m2, lo // block, (hi - 1) // block + 1, block, absolute)
            lo = tau - Lmax + 1
            if lo < 0:
                lo = 0
            hi = tau + L
            if hi > T:
                hi = T
            _reduce_blocks(colmax, colarg, block_max, block_arg, lo // block, (hi - 1) // block + 1)
            out_m[count] = m
            out_tau[count] = tau
            out_s[count] = s
            out_e[count] = energy
            count += 1
            if tau + L > T:
                status = C_CLIPPED
                break
    return count, energy, status


def lif_run(const double[:, ::1] drive, double threshold, double decay):
    cdef Py_ssize_t n_t = drive.shape[0], n = drive.shape[1], t, j
    raster_np = np.zeros((n_t, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] raster = raster_np
    r_np = np.zeros(n)
    cdef double[::1] r = r_np
    cdef double v
    with nogil:
        for t in range(n_t):
            for j in range(n):
                r[j] *= decay
                v = drive[t, j] - r[j]
                if v >= threshold:
                    raster[t, j] = 1
                    r[j] += v
    return raster_np

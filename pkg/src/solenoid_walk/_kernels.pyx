# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: cosine deficits over sample batches, and the
canonical-form walk on H_a in int64 with overflow detection."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin
from libc.stdint cimport int64_t, int8_t

cnp.import_array()

cdef extern from *:
    """
    static inline int sw_mul_ovf(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int sw_add_ovf(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    """
    int sw_mul_ovf(long long a, long long b, long long *r) nogil
    int sw_add_ovf(long long a, long long b, long long *r) nogil


def cos_deficit(const double[:, :] angles, const double[:] q):
    cdef Py_ssize_t N = angles.shape[0], J = angles.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc, s
    out = np.zeros(N)
    cdef double[:] o = out
    with nogil:
        for i in range(N):
            acc = 0.0
            for j in range(J):
                if q[j] != 0.0:
                    s = sin(0.5 * angles[i, j])
                    acc = acc + q[j] * (2.0 * s * s)
            o[i] = acc
    return out


cdef bint _fixed_level_units(const int64_t[:] j_idx, const int64_t[:] a_seq, Py_ssize_t T,
                             int64_t[:] units, long long *level) noexcept nogil:
    """Fill units[j] = a_{j+1}...a_L for the top level L; False if P_L * T may overflow."""
    cdef Py_ssize_t t
    cdef long long L = 0, j, prod = 1, tmp
    for t in range(T):
        if j_idx[t] > L:
            L = j_idx[t]
    for j in range(L):
        if sw_mul_ovf(prod, a_seq[j], &tmp):
            return False
        prod = tmp
    if sw_mul_ovf(prod, <long long>T, &tmp) or tmp >= (<long long>1) << 62:
        return False
    units[L] = 1
    j = L
    while j > 0:
        units[j - 1] = units[j] * a_seq[j - 1]
        j -= 1
    level[0] = L
    return True


def walk_canonical(const int64_t[:] j_idx, const int8_t[:] signs, const int64_t[:] a_seq, const int64_t[:] checkpoints):
    """Visits to zero of the walk with steps signs[t] * e_{j_idx[t]}.

    When a_1...a_L * T fits in int64 (L the largest index used) positions are
    accumulated at the fixed level L, where zero is still an exact test;
    otherwise every step is reduced to canonical form to keep numerators small.
    """
    cdef Py_ssize_t T = j_idx.shape[0], K = checkpoints.shape[0]
    units_arr = np.zeros(a_seq.shape[0] + 1, dtype=np.int64)
    cdef int64_t[:] units = units_arr
    cdef long long top = 0
    if _fixed_level_units(j_idx, a_seq, T, units, &top):
        return _walk_fixed(j_idx, signs, a_seq, checkpoints, units, top)
    return walk_reduced(j_idx, signs, a_seq, checkpoints)


cdef _walk_fixed(const int64_t[:] j_idx, const int8_t[:] signs, const int64_t[:] a_seq,
                 const int64_t[:] checkpoints, const int64_t[:] units, long long L):
    cdef Py_ssize_t T = j_idx.shape[0], K = checkpoints.shape[0]
    cdef Py_ssize_t t, k = 0
    cdef long long m = 0, visits = 0, last = 0
    out = np.zeros(K, dtype=np.int64)
    cdef int64_t[:] o = out
    with nogil:
        for t in range(T):
            m += signs[t] * units[j_idx[t]]
            if m == 0:
                visits += 1
                last = t + 1
            while k < K and checkpoints[k] == t + 1:
                o[k] = visits
                k += 1
        while k < K:
            o[k] = visits
            k += 1
        if m == 0:
            L = 0
        while L > 0 and m % a_seq[L - 1] == 0:
            m = m // a_seq[L - 1]
            L -= 1
    return out, last, m, L, False


def walk_reduced(const int64_t[:] j_idx, const int8_t[:] signs, const int64_t[:] a_seq,
                   const int64_t[:] checkpoints):
    cdef Py_ssize_t T = j_idx.shape[0], K = checkpoints.shape[0]
    cdef Py_ssize_t t, k = 0
    cdef long long m = 0, lift, tmp
    cdef long long L = 0, j, i
    cdef long long visits = 0, last = 0
    cdef bint overflow = False
    out = np.zeros(K, dtype=np.int64)
    cdef int64_t[:] o = out
    with nogil:
        for t in range(T):
            j = j_idx[t]
            if j <= L:
                # the step is signs[t] * (a_{j+1} ... a_L) at level L
                lift = signs[t]
                for i in range(j, L):
                    if sw_mul_ovf(lift, a_seq[i], &tmp):
                        overflow = True
                        break
                    lift = tmp
                if overflow or sw_add_ovf(m, lift, &tmp):
                    overflow = True
                    break
                m = tmp
            else:
                for i in range(L, j):
                    if sw_mul_ovf(m, a_seq[i], &tmp):
                        overflow = True
                        break
                    m = tmp
                if overflow or sw_add_ovf(m, signs[t], &tmp):
                    overflow = True
                    break
                m = tmp
                L = j
            if m == 0:
                L = 0
                visits += 1
                last = t + 1
            else:
                while L > 0 and m % a_seq[L - 1] == 0:
                    m = m // a_seq[L - 1]
                    L -= 1
            while k < K and checkpoints[k] == t + 1:
                o[k] = visits
                k += 1
    if overflow:
        return np.zeros(K, dtype=np.int64), 0, 0, 0, True
    while k < K:
        o[k] = visits
        k += 1
    return out, last, m, L, False

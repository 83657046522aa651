# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: lattice DFS for net enumeration and batched
McShane extension in scaled integer arithmetic.  Semantics are defined by
``_kernels_py``; both must agree exactly."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

ctypedef long long i64


cdef i64 _walk(i64 lo, i64 hi, const i64[:, ::1] cons, i64 cap,
               i64[:, ::1] out, bint emit) except -2 nogil:
    cdef Py_ssize_t n = cons.shape[0]
    cdef Py_ssize_t i, j, r
    cdef i64 count = 0
    cdef i64 a, b, v
    if n == 0:
        return 0
    cdef i64* val = <i64*> malloc(n * sizeof(i64))
    cdef i64* ub = <i64*> malloc(n * sizeof(i64))
    if val == NULL or ub == NULL:
        free(val)
        free(ub)
        return -2
    i = 0
    val[0] = lo
    ub[0] = hi
    while True:
        if val[i] > ub[i]:
            if i == 0:
                break
            i -= 1
            val[i] += 1
            continue
        if i == n - 1:
            if emit:
                for v in range(val[i], ub[i] + 1):
                    for j in range(n - 1):
                        out[count, j] = val[j]
                    out[count, n - 1] = v
                    count += 1
            else:
                count += ub[i] - val[i] + 1
                if count > cap:
                    free(val)
                    free(ub)
                    return cap + 1
            val[i] = ub[i] + 1
            continue
        i += 1
        a = lo
        b = hi
        for j in range(i):
            if val[j] - cons[i, j] > a:
                a = val[j] - cons[i, j]
            if val[j] + cons[i, j] < b:
                b = val[j] + cons[i, j]
        val[i] = a
        ub[i] = b
        if a > b:
            val[i] = b + 1
    free(val)
    free(ub)
    return count


def lattice_count(i64 lo, i64 hi, cons, i64 cap):
    cdef const i64[:, ::1] c = np.ascontiguousarray(cons, dtype=np.int64)
    cdef i64[:, ::1] dummy = np.zeros((1, 1), dtype=np.int64)
    cdef i64 res
    with nogil:
        res = _walk(lo, hi, c, cap, dummy, False)
    if res == -2:
        raise MemoryError()
    return int(res)


def lattice_fill(i64 lo, i64 hi, cons, i64 total):
    c_arr = np.ascontiguousarray(cons, dtype=np.int64)
    cdef const i64[:, ::1] c = c_arr
    out_arr = np.empty((total, c_arr.shape[0]), dtype=np.int64)
    cdef i64[:, ::1] out = out_arr
    cdef i64 res
    if total == 0:
        return out_arr
    with nogil:
        res = _walk(lo, hi, c, total, out, True)
    if res != total:
        raise RuntimeError("lattice enumeration count mismatch")
    return out_arr


def mcshane_batch(vals, lrho, i64 lo, i64 hi):
    """``out[m, g] = clamp(max_i(v - l) + min_i(v + l), lo, hi)`` (twice psi)."""
    v_arr = np.ascontiguousarray(vals, dtype=np.int64)
    l_arr = np.ascontiguousarray(lrho, dtype=np.int64)
    cdef const i64[:, ::1] v = v_arr
    cdef const i64[:, ::1] l = l_arr
    cdef Py_ssize_t M = v.shape[0], N = v.shape[1], G = l.shape[0]
    out_arr = np.empty((M, G), dtype=np.int64)
    cdef i64[:, ::1] out = out_arr
    cdef Py_ssize_t m, g, i
    cdef i64 mx, mn, t, s
    with nogil:
        for m in range(M):
            for g in range(G):
                mx = v[m, 0] - l[g, 0]
                mn = v[m, 0] + l[g, 0]
                for i in range(1, N):
                    t = v[m, i] - l[g, i]
                    if t > mx:
                        mx = t
                    t = v[m, i] + l[g, i]
                    if t < mn:
                        mn = t
                s = mx + mn
                if s < lo:
                    s = lo
                elif s > hi:
                    s = hi
                out[m, g] = s
    return out_arr


cdef extern from *:
    ctypedef long long i128 "__int128"


cdef i64 _minwalk(i64 lo, i64 hi, const i64[:, ::1] cons, const i64[:, ::1] l,
                  i64 unit, i64 clo, i64 chi, const i64[::1] qa, const i64[::1] qb,
                  i64[::1] blev, i64* bidx_out) except -2 nogil:
    cdef Py_ssize_t n = cons.shape[0], G = l.shape[0]
    cdef Py_ssize_t i, j, g
    cdef i64 count = 0, a, b, t, s, y, bidx = -1
    cdef i128 obj, best = 0
    cdef i64* val = <i64*> malloc(n * sizeof(i64))
    cdef i64* ub = <i64*> malloc(n * sizeof(i64))
    cdef i64* mx = <i64*> malloc(n * G * sizeof(i64))
    cdef i64* mn = <i64*> malloc(n * G * sizeof(i64))
    if val == NULL or ub == NULL or mx == NULL or mn == NULL:
        free(val); free(ub); free(mx); free(mn)
        return -2
    i = 0
    val[0] = lo
    ub[0] = hi
    while True:
        if val[i] > ub[i]:
            if i == 0:
                break
            i -= 1
            val[i] += 1
            continue
        for g in range(G):
            t = val[i] * unit - l[g, i]
            s = val[i] * unit + l[g, i]
            if i > 0:
                if mx[(i - 1) * G + g] > t:
                    t = mx[(i - 1) * G + g]
                if mn[(i - 1) * G + g] < s:
                    s = mn[(i - 1) * G + g]
            mx[i * G + g] = t
            mn[i * G + g] = s
        if i == n - 1:
            obj = 0
            for g in range(G):
                y = mx[i * G + g] + mn[i * G + g]
                if y < clo:
                    y = clo
                elif y > chi:
                    y = chi
                obj += (<i128> qa[g] * y + qb[g]) * y
            if bidx < 0 or obj < best:
                best = obj
                bidx = count
                for j in range(n):
                    blev[j] = val[j]
            count += 1
            val[i] += 1
            continue
        i += 1
        a = lo
        b = hi
        for j in range(i):
            if val[j] - cons[i, j] > a:
                a = val[j] - cons[i, j]
            if val[j] + cons[i, j] < b:
                b = val[j] + cons[i, j]
        val[i] = a
        ub[i] = b
        if a > b:
            val[i] = b + 1
    free(val); free(ub); free(mx); free(mn)
    bidx_out[0] = bidx
    return count


def lattice_min_quad(i64 lo, i64 hi, cons, lrho, i64 unit, i64 clo, i64 chi, qa, qb):
    """Stream the lattice, scoring ``sum_g (qa*y + qb)*y`` exactly, with ``y``
    the clamped doubled McShane value at sample ``g`` of ``level * unit``.
    The caller guarantees the score fits in 127 bits.  Returns
    ``(count, index, levels)`` of the first strict minimizer."""
    c_arr = np.ascontiguousarray(cons, dtype=np.int64)
    l_arr = np.ascontiguousarray(lrho, dtype=np.int64)
    a_arr = np.ascontiguousarray(qa, dtype=np.int64)
    b_arr = np.ascontiguousarray(qb, dtype=np.int64)
    blev_arr = np.zeros(c_arr.shape[0], dtype=np.int64)
    cdef const i64[:, ::1] c = c_arr
    cdef const i64[:, ::1] l = l_arr
    cdef const i64[::1] av = a_arr
    cdef const i64[::1] bv = b_arr
    cdef i64[::1] bl = blev_arr
    cdef i64 bidx = -1, res
    with nogil:
        res = _minwalk(lo, hi, c, l, unit, clo, chi, av, bv, bl, &bidx)
    if res == -2:
        raise MemoryError()
    return int(res), int(bidx), blev_arr

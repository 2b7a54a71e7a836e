# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: OSA string distance and Zhang-Shasha tree distance.

Same signatures and results as ``_pykernels``.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef Py_ssize_t _osa(Py_UCS4 *a, Py_ssize_t n, Py_UCS4 *b, Py_ssize_t m,
                     Py_ssize_t max_d, Py_ssize_t *buf) nogil:
    # buf holds three rows of m + 1 cells; max_d < 0 disables the cutoff
    cdef Py_ssize_t *prev2 = buf
    cdef Py_ssize_t *prev = buf + (m + 1)
    cdef Py_ssize_t *cur = buf + 2 * (m + 1)
    cdef Py_ssize_t *tmp
    cdef Py_ssize_t i, j, best, c, row_min, prev_min = 0
    cdef Py_UCS4 ca, cb
    for j in range(m + 1):
        prev[j] = j
    for i in range(1, n + 1):
        ca = a[i - 1]
        cur[0] = i
        row_min = i
        for j in range(1, m + 1):
            cb = b[j - 1]
            best = prev[j - 1] + (0 if ca == cb else 1)
            c = prev[j] + 1
            if c < best:
                best = c
            c = cur[j - 1] + 1
            if c < best:
                best = c
            if i > 1 and j > 1 and ca == b[j - 2] and a[i - 2] == cb:
                c = prev2[j - 2] + 1
                if c < best:
                    best = c
            cur[j] = best
            if best < row_min:
                row_min = best
        if max_d >= 0 and row_min > max_d and prev_min > max_d:
            return max_d + 1
        prev_min = row_min
        tmp = prev2
        prev2 = prev
        prev = cur
        cur = tmp
    if max_d >= 0 and prev[m] > max_d:
        return max_d + 1
    return prev[m]


cdef Py_UCS4 *_scalars(str s, Py_ssize_t *length) except NULL:
    cdef Py_ssize_t k, n = len(s)
    cdef Py_UCS4 *out = <Py_UCS4 *> malloc((n + 1) * sizeof(Py_UCS4))
    if out == NULL:
        raise MemoryError()
    for k in range(n):
        out[k] = s[k]
    length[0] = n
    return out


cdef Py_ssize_t _distance(str a, str b, Py_ssize_t max_d) except -1:
    cdef Py_ssize_t n, m, d
    cdef Py_UCS4 *ua
    cdef Py_UCS4 *ub
    cdef Py_ssize_t *buf
    if max_d >= 0 and abs(len(a) - len(b)) > max_d:
        return max_d + 1
    if len(a) == 0 or len(b) == 0:
        return max(len(a), len(b))
    ua = _scalars(a, &n)
    try:
        ub = _scalars(b, &m)
    except MemoryError:
        free(ua)
        raise
    buf = <Py_ssize_t *> malloc(3 * (m + 1) * sizeof(Py_ssize_t))
    if buf == NULL:
        free(ua)
        free(ub)
        raise MemoryError()
    d = _osa(ua, n, ub, m, max_d, buf)
    free(buf)
    free(ua)
    free(ub)
    return d


def osa_distance(str a, str b):
    return _distance(a, b, -1)


def osa_bounded(str a, str b, Py_ssize_t max_d):
    return _distance(a, b, max_d)


def osa_batch(str query, candidates, Py_ssize_t max_d):
    return [_distance(query, c, max_d) for c in candidates]


def zs_treedist(l1_in, kr1_in, l2_in, kr2_in, del1_in, ins2_in, upd_in):
    cdef cnp.intp_t[::1] l1 = np.ascontiguousarray(l1_in, dtype=np.intp)
    cdef cnp.intp_t[::1] l2 = np.ascontiguousarray(l2_in, dtype=np.intp)
    cdef cnp.intp_t[::1] kr1 = np.ascontiguousarray(kr1_in, dtype=np.intp)
    cdef cnp.intp_t[::1] kr2 = np.ascontiguousarray(kr2_in, dtype=np.intp)
    cdef double[::1] del1 = np.ascontiguousarray(del1_in, dtype=np.float64)
    cdef double[::1] ins2 = np.ascontiguousarray(ins2_in, dtype=np.float64)
    cdef double[:, ::1] upd = np.ascontiguousarray(upd_in, dtype=np.float64)
    cdef Py_ssize_t n1 = l1.shape[0], n2 = l2.shape[0]
    td_arr = np.zeros((n1, n2), dtype=np.float64)
    fd_arr = np.zeros((n1 + 1, n2 + 1), dtype=np.float64)
    cdef double[:, ::1] td = td_arr
    cdef double[:, ::1] fd = fd_arr
    cdef Py_ssize_t ki, kj, i, j, li, lj, rows, cols, x, y, a, b, la, lb
    cdef double best, c
    with nogil:
        for ki in range(kr1.shape[0]):
            i = kr1[ki]
            li = l1[i]
            for kj in range(kr2.shape[0]):
                j = kr2[kj]
                lj = l2[j]
                rows = i - li + 2
                cols = j - lj + 2
                fd[0, 0] = 0.0
                for x in range(1, rows):
                    fd[x, 0] = fd[x - 1, 0] + del1[li + x - 1]
                for y in range(1, cols):
                    fd[0, y] = fd[0, y - 1] + ins2[lj + y - 1]
                for x in range(1, rows):
                    a = li + x - 1
                    la = l1[a]
                    for y in range(1, cols):
                        b = lj + y - 1
                        lb = l2[b]
                        best = fd[x - 1, y] + del1[a]
                        c = fd[x, y - 1] + ins2[b]
                        if c < best:
                            best = c
                        if la == li and lb == lj:
                            c = fd[x - 1, y - 1] + upd[a, b]
                            if c < best:
                                best = c
                            fd[x, y] = best
                            td[a, b] = best
                        else:
                            c = fd[la - li, lb - lj] + td[a, b]
                            if c < best:
                                best = c
                            fd[x, y] = best
    return td_arr

"""Pure-Python versions of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function; selected by
:mod:`histbank.kernels` when the compiled module is unavailable.
"""
import numpy as np


def osa_distance(a, b):
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev2 = None
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        ca = a[i - 1]
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            cb = b[j - 1]
            cost = 0 if ca == cb else 1
            best = prev[j - 1] + cost
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if (i > 1 and j > 1 and ca == b[j - 2] and a[i - 2] == cb
                    and prev2[j - 2] + 1 < best):
                best = prev2[j - 2] + 1
            cur[j] = best
        prev2, prev = prev, cur
    return prev[m]


def osa_bounded(a, b, max_d):
    """Distance if it is at most ``max_d``, else ``max_d + 1``."""
    n, m = len(a), len(b)
    if abs(n - m) > max_d:
        return max_d + 1
    if n == 0 or m == 0:
        return max(n, m)
    prev2 = None
    prev = list(range(m + 1))
    prev_min = 0
    for i in range(1, n + 1):
        ca = a[i - 1]
        cur = [i] + [0] * m
        row_min = i
        for j in range(1, m + 1):
            cb = b[j - 1]
            best = prev[j - 1] + (0 if ca == cb else 1)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if (i > 1 and j > 1 and ca == b[j - 2] and a[i - 2] == cb
                    and prev2[j - 2] + 1 < best):
                best = prev2[j - 2] + 1
            cur[j] = best
            if best < row_min:
                row_min = best
        # a cell depends on the two previous rows only
        if row_min > max_d and prev_min > max_d:
            return max_d + 1
        prev2, prev, prev_min = prev, cur, row_min
    return prev[m] if prev[m] <= max_d else max_d + 1


def osa_batch(query, candidates, max_d):
    return [osa_bounded(query, c, max_d) for c in candidates]


def zs_treedist(l1, kr1, l2, kr2, del1, ins2, upd):
    """Zhang-Shasha subtree distance table.

    Nodes are numbered in postorder from 0; ``l1[i]`` is the leftmost leaf
    descendant of node ``i``; ``kr1`` lists the keyroots in ascending order.
    Returns ``td`` with ``td[i, j]`` the distance between subtrees ``i``, ``j``.
    """
    n1, n2 = len(l1), len(l2)
    l1 = [int(x) for x in l1]
    l2 = [int(x) for x in l2]
    del1 = [float(x) for x in del1]
    ins2 = [float(x) for x in ins2]
    upd = np.asarray(upd, dtype=float).tolist()
    td = [[0.0] * n2 for _ in range(n1)]
    for i in kr1:
        i = int(i)
        li = l1[i]
        for j in kr2:
            j = int(j)
            lj = l2[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0.0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + del1[li + x - 1]
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + ins2[lj + y - 1]
            for x in range(1, rows):
                a = li + x - 1
                la = l1[a]
                fdx, fdx1 = fd[x], fd[x - 1]
                da = del1[a]
                for y in range(1, cols):
                    b = lj + y - 1
                    lb = l2[b]
                    best = fdx1[y] + da
                    c = fdx[y - 1] + ins2[b]
                    if c < best:
                        best = c
                    if la == li and lb == lj:
                        c = fdx1[y - 1] + upd[a][b]
                        if c < best:
                            best = c
                        fdx[y] = best
                        td[a][b] = best
                    else:
                        c = fd[la - li][lb - lj] + td[a][b]
                        if c < best:
                            best = c
                        fdx[y] = best
    return np.array(td, dtype=float).reshape(n1, n2)

# cython: boundscheck=False, wraparound=False
"""Compiled integer row-reduction kernel.

Mirror of ``_pure.reduce_int_rows``; entries are Python ints (arbitrary
precision is required, exact arithmetic never rounds), the win over the pure
version is loop and indexing overhead.
"""

from math import gcd

BACKEND_NAME = "speedups"


cdef _row_content(list row, Py_ssize_t ncols):
    cdef Py_ssize_t j
    g = 0
    for j in range(ncols):
        a = row[j]
        if a:
            g = gcd(g, a)
            if g == 1:
                break
    return g


def reduce_int_rows(list rows, Py_ssize_t ncols):
    cdef Py_ssize_t nrows = len(rows)
    cdef Py_ssize_t r = 0
    cdef Py_ssize_t c, i, j, piv
    cdef list pivots = []
    cdef list prow, row
    for c in range(ncols):
        piv = -1
        for i in range(r, nrows):
            if (<list>rows[i])[c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        prow = <list>rows[r]
        g = _row_content(prow, ncols)
        if prow[c] < 0:
            g = -g
        if g != 1:
            for j in range(ncols):
                prow[j] = prow[j] // g
        a = prow[c]
        for i in range(nrows):
            if i == r:
                continue
            row = <list>rows[i]
            b = row[c]
            if not b:
                continue
            for j in range(ncols):
                row[j] = a * row[j] - b * prow[j]
            g = _row_content(row, ncols)
            if g > 1:
                for j in range(ncols):
                    row[j] = row[j] // g
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots

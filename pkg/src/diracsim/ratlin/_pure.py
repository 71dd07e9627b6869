"""Pure-Python integer row-reduction kernel.

Semantics are shared with the compiled twin ``_speedups.pyx``: full
Gauss-Jordan elimination over arbitrary-precision integers, every row kept
primitive (content 1, positive pivot).  Dividing each pivot row by its pivot
afterwards yields the unique reduced row-echelon form over the rationals,
which is what the callers in :mod:`diracsim.ratlin` do.
"""

from __future__ import annotations

from math import gcd

BACKEND_NAME = "pure"


def _row_content(row, ncols):
    g = 0
    for j in range(ncols):
        a = row[j]
        if a:
            g = gcd(g, a)
            if g == 1:
                break
    return g


def reduce_int_rows(rows, ncols):
    """Gauss-Jordan reduce integer ``rows`` in place.

    Returns the list of pivot column indices.  After the call the first
    ``len(pivots)`` rows are the primitive echelon rows (pivot entries
    positive, zeros above and below every pivot) and the remaining rows are
    identically zero.
    """
    nrows = len(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        piv = -1
        for i in range(r, nrows):
            if rows[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r]
        g = _row_content(prow, ncols)
        if prow[c] < 0:
            g = -g
        if g != 1:
            for j in range(ncols):
                prow[j] //= g
        a = prow[c]
        for i in range(nrows):
            if i == r:
                continue
            row = rows[i]
            b = row[c]
            if not b:
                continue
            for j in range(ncols):
                row[j] = a * row[j] - b * prow[j]
            g = _row_content(row, ncols)
            if g > 1:
                for j in range(ncols):
                    row[j] //= g
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled enumeration kernels (same API as _pykernels)."""

from libc.stdlib cimport malloc, free

ctypedef long long i64

cdef inline i64 _floordiv(i64 a, i64 b) nogil:
    # C division truncates toward zero
    cdef i64 q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef i64 _rec(i64* cons, int* start, int n, int width, i64* y, int j) nogil:
    cdef i64 lo = 0, hi = 0, s, a, c, total = 0, t
    cdef int have_lo = 0, have_hi = 0, r, i
    for r in range(start[j], start[j + 1]):
        s = cons[r * width]
        for i in range(j):
            s += cons[r * width + 1 + i] * y[i]
        a = cons[r * width + 1 + j]
        if a > 0:
            c = -_floordiv(s, a)
            if not have_lo or c > lo:
                lo = c
                have_lo = 1
        else:
            c = _floordiv(s, -a)
            if not have_hi or c < hi:
                hi = c
                have_hi = 1
    if hi < lo:
        return 0
    if j == n - 1:
        return hi - lo + 1
    t = lo
    while t <= hi:
        y[j] = t
        total += _rec(cons, start, n, width, y, j + 1)
        t += 1
    return total


_LIMIT = 1 << 24


def count_levels(levels, int n):
    cdef int width = n + 1
    cdef int rows = 0
    cdef int j, r, i
    for lev in levels:
        rows += len(lev)
        for v in lev:
            for a in v:
                if a >= _LIMIT or a <= -_LIMIT:
                    from . import _pykernels
                    return _pykernels.count_levels(levels, n)
    cdef i64* cons = <i64*> malloc(max(rows, 1) * width * sizeof(i64))
    cdef int* start = <int*> malloc((n + 1) * sizeof(int))
    cdef i64* y = <i64*> malloc(max(n, 1) * sizeof(i64))
    cdef i64 result
    try:
        r = 0
        for j in range(n):
            start[j] = r
            for v in levels[j]:
                for i in range(width):
                    cons[r * width + i] = v[i]
                r += 1
        start[n] = r
        with nogil:
            result = _rec(cons, start, n, width, y, 0)
    finally:
        free(cons)
        free(start)
        free(y)
    return result


def valuation_histogram(add, mul, int vx, int vy, int length, int c0, int prec):
    cdef int q = len(add)
    cdef int i, j, k, deg, c, val, ix, iy, base = vx + vy
    cdef int width = max(prec - base, 0)
    cdef long total = 1
    for i in range(length):
        total *= q
    cdef int* addt = <int*> malloc(q * q * sizeof(int))
    cdef int* mult = <int*> malloc(q * q * sizeof(int))
    cdef int* xd = <int*> malloc(max(length, 1) * sizeof(int))
    cdef int* yd = <int*> malloc(max(length, 1) * sizeof(int))
    cdef int* prod = <int*> malloc(max(width, 1) * sizeof(int))
    cdef long nx, ny, tmp
    counts = {}
    try:
        for i in range(q):
            for j in range(q):
                addt[i * q + j] = add[i][j]
                mult[i * q + j] = mul[i][j]
        for nx in range(total):
            tmp = nx
            ix = length
            for i in range(length):
                xd[i] = tmp % q
                tmp //= q
                if xd[i] and ix == length:
                    ix = i
            for ny in range(total):
                tmp = ny
                iy = length
                for i in range(length):
                    yd[i] = tmp % q
                    tmp //= q
                    if yd[i] and iy == length:
                        iy = i
                for k in range(width):
                    prod[k] = 0
                for i in range(length):
                    if xd[i] == 0:
                        continue
                    for j in range(length):
                        k = i + j
                        if k >= width or yd[j] == 0:
                            continue
                        prod[k] = addt[prod[k] * q + mult[xd[i] * q + yd[j]]]
                val = prec
                for deg in range(min(base, 0), prec):
                    k = deg - base
                    c = prod[k] if 0 <= k < width else 0
                    if deg == 0:
                        c = addt[c * q + c0]
                    if c != 0:
                        val = deg
                        break
                key = (vx + ix, vy + iy, val)
                counts[key] = counts.get(key, 0) + 1
    finally:
        free(addt)
        free(mult)
        free(xd)
        free(yd)
        free(prod)
    return counts

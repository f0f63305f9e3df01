"""Pure-Python versions of the enumeration kernels.

Both functions have identical signatures in the compiled module.
"""


def count_levels(levels, n):
    """Count integer points y in Z^n given level-sorted constraints.

    levels[j] holds tuples (b, a_0, .., a_{n-1}) meaning b + a.y >= 0, with
    a_j != 0 and a_i = 0 for i > j.  The last level is counted in closed form.
    """
    y = [0] * n

    def bounds(j):
        lo = None
        hi = None
        for v in levels[j]:
            s = v[0]
            for i in range(j):
                s += v[1 + i] * y[i]
            a = v[1 + j]
            if a > 0:
                c = -(s // a)
                if lo is None or c > lo:
                    lo = c
            else:
                c = s // (-a)
                if hi is None or c < hi:
                    hi = c
        return lo, hi

    def rec(j):
        lo, hi = bounds(j)
        if hi < lo:
            return 0
        if j == n - 1:
            return hi - lo + 1
        total = 0
        for t in range(lo, hi + 1):
            y[j] = t
            total += rec(j + 1)
        return total

    return rec(0)


def valuation_histogram(add, mul, vx, vy, length, c0, prec):
    """Joint distribution of (val x, val y, val(c0 + x*y)) over truncated
    series x = t^vx * sum_{i<length} x_i t^i (same for y) with digits in a
    finite field given by addition/multiplication tables.

    Valuations are absolute; anything >= the cap (vx+length, vy+length or
    prec) is reported as the cap.  Returns {(val x, val y, val sum): count}.
    """
    q = len(add)
    digits = list(_all_digit_vectors(q, length))
    out = {}
    for xd in digits:
        ix = next((i for i, d in enumerate(xd) if d), length)
        for yd in digits:
            iy = next((i for i, d in enumerate(yd) if d), length)
            # coefficients of x*y from absolute degree vx+vy
            base = vx + vy
            width = max(prec - base, 0)
            prod = [0] * width
            for i in range(length):
                if xd[i] == 0:
                    continue
                for j in range(length):
                    k = i + j
                    if k >= width or yd[j] == 0:
                        continue
                    prod[k] = add[prod[k]][mul[xd[i]][yd[j]]]
            val = prec
            for deg in range(min(base, 0), prec):
                k = deg - base
                c = prod[k] if 0 <= k < width else 0
                if deg == 0:
                    c = add[c][c0]
                if c != 0:
                    val = deg
                    break
            key = (vx + ix, vy + iy, val)
            out[key] = out.get(key, 0) + 1
    return out


def _all_digit_vectors(q, length):
    vec = [0] * length
    while True:
        yield tuple(vec)
        i = 0
        while i < length:
            vec[i] += 1
            if vec[i] < q:
                break
            vec[i] = 0
            i += 1
        if i == length:
            return

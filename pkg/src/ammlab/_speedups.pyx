# cython: language_level=3, boundscheck=False, cdivision=True
"""C kernels for the constant-product hot paths.

Callers guarantee operands below 2**56 and fee denominators of at most
10**4 so every intermediate product fits a signed 128-bit integer; the
Python dispatcher in ammlab._kernels enforces this and falls back to the
big-int path otherwise.
"""

cdef extern from *:
    ctypedef long long i128 "__int128_t"


cdef inline i128 _quote(i128 res_in, i128 res_out, i128 amount_in,
                        i128 fee_num, i128 fee_den) nogil:
    cdef i128 scaled = amount_in * fee_num
    return (scaled * res_out) / (res_in * fee_den + scaled)


cdef inline i128 _profit(i128 x1, i128 y1, i128 x2, i128 y2,
                         i128 fee_num, i128 fee_den, i128 dx) nogil:
    cdef i128 out1 = _quote(x1, y1, dx, fee_num, fee_den)
    cdef i128 out2 = _quote(y2, x2, out1, fee_num, fee_den)
    return out2 - dx


def quote_out(long long res_in, long long res_out, long long amount_in,
              long long fee_num, long long fee_den):
    return <long long>_quote(res_in, res_out, amount_in, fee_num, fee_den)


def arb_profit(long long x1, long long y1, long long x2, long long y2,
               long long fee_num, long long fee_den, long long dx):
    return <long long>_profit(x1, y1, x2, y2, fee_num, fee_den, dx)


def arb_best_on_grid(long long x1, long long y1, long long x2, long long y2,
                     long long fee_num, long long fee_den,
                     long long lo, long long hi, long long step):
    cdef i128 best_profit, p
    cdef long long best_dx = lo
    cdef long long dx = lo + step
    best_profit = _profit(x1, y1, x2, y2, fee_num, fee_den, lo)
    with nogil:
        while dx <= hi:
            p = _profit(x1, y1, x2, y2, fee_num, fee_den, dx)
            if p > best_profit:
                best_profit = p
                best_dx = dx
            dx += step
    return best_dx, <long long>best_profit


cdef inline i128 _route2(i128 xa, i128 ya, i128 xb, i128 yb,
                         i128 fee_num, i128 fee_den, i128 s, i128 total) nogil:
    cdef i128 out = 0
    cdef i128 r = total - s
    if s > 0:
        out += _quote(xa, ya, s, fee_num, fee_den)
    if r > 0:
        out += _quote(xb, yb, r, fee_num, fee_den)
    return out


def route2_out(long long xa, long long ya, long long xb, long long yb,
               long long fee_num, long long fee_den, long long s, long long total):
    return <long long>_route2(xa, ya, xb, yb, fee_num, fee_den, s, total)


def route2_best_on_grid(long long xa, long long ya, long long xb, long long yb,
                        long long fee_num, long long fee_den,
                        long long lo, long long hi, long long step, long long total):
    cdef i128 best_out, o
    cdef long long best_s = lo
    cdef long long s = lo + step
    best_out = _route2(xa, ya, xb, yb, fee_num, fee_den, lo, total)
    with nogil:
        while s <= hi:
            o = _route2(xa, ya, xb, yb, fee_num, fee_den, s, total)
            if o > best_out:
                best_out = o
                best_s = s
            s += step
    return best_s, <long long>best_out

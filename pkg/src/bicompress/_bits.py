"""Compiled bit-array primitives for the codec.

Bits live one per byte in a ``uint8`` array (MSB-first once packed).
Kind ids: 0 unary, 1 gamma, 2 delta, 3 zeta.  Readers return ``-1`` as the
new position when the buffer ends inside a code word.
"""
import numpy as np
from numba import njit

UNARY, GAMMA, DELTA, ZETA = 0, 1, 2, 3


@njit(cache=True, inline="always")
def ilog2(v):
    n = 0
    while v > 1:
        v >>= 1
        n += 1
    return n


@njit(cache=True)
def len_gamma_v(v):
    return 2 * ilog2(v) + 1


@njit(cache=True)
def len_code(x, kind, k):
    v = x + 1
    if kind == UNARY:
        return x + 1
    if kind == GAMMA:
        return 2 * ilog2(v) + 1
    if kind == DELTA:
        n = ilog2(v)
        return len_gamma_v(n + 1) + n
    h = ilog2(v) // k
    lo = np.int64(1) << (h * k)
    size = (np.int64(1) << ((h + 1) * k)) - lo
    s = ilog2(size - 1) + 1 if size > 1 else 0
    short = (np.int64(1) << s) - size
    if s > 0 and v - lo < short:
        return h + 1 + s - 1
    return h + 1 + s


@njit(cache=True, inline="always")
def put_bits(buf, pos, value, width):
    for i in range(width - 1, -1, -1):
        buf[pos] = (value >> i) & 1
        pos += 1
    return pos


@njit(cache=True)
def write_gamma_v(buf, pos, v):
    n = ilog2(v)
    for _ in range(n):
        buf[pos] = 0
        pos += 1
    buf[pos] = 1
    pos += 1
    return put_bits(buf, pos, v - (np.int64(1) << n), n)


@njit(cache=True)
def write_code(buf, pos, x, kind, k):
    v = x + 1
    if kind == UNARY:
        for _ in range(x):
            buf[pos] = 1
            pos += 1
        buf[pos] = 0
        return pos + 1
    if kind == GAMMA:
        return write_gamma_v(buf, pos, v)
    if kind == DELTA:
        n = ilog2(v)
        pos = write_gamma_v(buf, pos, n + 1)
        return put_bits(buf, pos, v - (np.int64(1) << n), n)
    h = ilog2(v) // k
    for _ in range(h):
        buf[pos] = 0
        pos += 1
    buf[pos] = 1
    pos += 1
    lo = np.int64(1) << (h * k)
    size = (np.int64(1) << ((h + 1) * k)) - lo
    s = ilog2(size - 1) + 1 if size > 1 else 0
    short = (np.int64(1) << s) - size
    z = v - lo
    if s > 0 and z < short:
        return put_bits(buf, pos, z, s - 1)
    return put_bits(buf, pos, z + short, s)


@njit(cache=True, inline="always")
def get_bits(buf, pos, n, width):
    # returns (value, newpos); newpos -1 on overrun
    if pos + width > n:
        return 0, -1
    val = np.int64(0)
    for i in range(width):
        val = (val << 1) | buf[pos + i]
    return val, pos + width


@njit(cache=True)
def read_gamma_v(buf, pos, n):
    z = 0
    while pos < n and buf[pos] == 0:
        z += 1
        pos += 1
    if pos >= n or z > 62:
        return 0, -1
    pos += 1
    low, pos = get_bits(buf, pos, n, z)
    if pos < 0:
        return 0, -1
    return (np.int64(1) << z) | low, pos


@njit(cache=True)
def read_code(buf, pos, n, kind, k):
    if pos < 0:
        return 0, -1
    if kind == UNARY:
        x = 0
        while pos < n and buf[pos] == 1:
            x += 1
            pos += 1
        if pos >= n:
            return 0, -1
        return x, pos + 1
    if kind == GAMMA:
        v, pos = read_gamma_v(buf, pos, n)
        return v - 1, pos
    if kind == DELTA:
        n1, pos = read_gamma_v(buf, pos, n)
        if pos < 0 or n1 > 63:
            return 0, -1
        width = n1 - 1
        low, pos = get_bits(buf, pos, n, width)
        if pos < 0:
            return 0, -1
        return ((np.int64(1) << width) | low) - 1, pos
    h = 0
    while pos < n and buf[pos] == 0:
        h += 1
        pos += 1
    if pos >= n or (h + 1) * k > 62:
        return 0, -1
    pos += 1
    lo = np.int64(1) << (h * k)
    size = (np.int64(1) << ((h + 1) * k)) - lo
    s = ilog2(size - 1) + 1 if size > 1 else 0
    short = (np.int64(1) << s) - size
    if s == 0:
        return lo - 1, pos
    z, p2 = get_bits(buf, pos, n, s - 1)
    if p2 >= 0 and z < short:
        return lo + z - 1, p2
    z, p2 = get_bits(buf, pos, n, s)
    if p2 < 0:
        return 0, -1
    return lo + z - short - 1, p2


@njit(cache=True)
def encode_values(values, kind, k):
    total = 0
    for x in values:
        total += len_code(x, kind, k)
    buf = np.zeros(total, dtype=np.uint8)
    pos = 0
    for x in values:
        pos = write_code(buf, pos, x, kind, k)
    return buf


@njit(cache=True)
def decode_values(buf, count, kind, k):
    out = np.empty(count, dtype=np.int64)
    pos = 0
    n = len(buf)
    for i in range(count):
        x, pos = read_code(buf, pos, n, kind, k)
        if pos < 0:
            return out[:i], -1
        out[i] = x
    return out, pos

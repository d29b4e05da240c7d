"""Universal integer codes over bit strings.

Every code takes ``x >= 0`` and internally encodes ``v = x + 1`` except
unary, which writes ``x`` ones followed by a zero.

    gamma(v)  : floor(log2 v) zeros, a one, then the low floor(log2 v) bits of v
    delta(v)  : gamma(floor(log2 v) + 1), then the low bits of v
    zeta_k(v) : h = floor(floor(log2 v) / k) zeros and a one, then the minimal
                binary code of v - 2**(h*k) inside [0, 2**((h+1)k) - 2**(h*k))

This module is the readable reference; the bit-array kernels used by the
codec live in ``bicompress._bits`` and are checked against it.
"""
from __future__ import annotations

from dataclasses import dataclass

CODE_KINDS = ("unary", "gamma", "delta", "zeta")


@dataclass(frozen=True)
class CodeParams:
    code: str = "zeta"
    k: int = 3
    window: int = 8
    max_chain: int = 3

    def __post_init__(self):
        if self.code not in CODE_KINDS:
            raise ValueError(f"unknown code kind {self.code!r}; expected one of {CODE_KINDS}")
        if not 1 <= self.k <= 255:
            raise ValueError("zeta shrink parameter k must be in [1, 255]")
        if not 0 <= self.window <= 0xFFFF:
            raise ValueError("window must be in [0, 65535]")
        if not 0 <= self.max_chain <= 255:
            raise ValueError("max_chain must be in [0, 255]")

    @property
    def kind_id(self) -> int:
        return CODE_KINDS.index(self.code)

    @property
    def references(self) -> bool:
        return self.window > 0 and self.max_chain > 0


def _binary(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width > 0 else ""


def _minimal_binary(z: int, size: int) -> str:
    # truncated binary code of z in [0, size)
    s = (size - 1).bit_length()
    short = (1 << s) - size
    if z < short:
        return _binary(z, s - 1)
    return _binary(z + short, s)


def unary(x: int) -> str:
    return "1" * x + "0"


def gamma_v(v: int) -> str:
    if v < 1:
        raise ValueError("gamma is defined for v >= 1")
    n = v.bit_length() - 1
    return "0" * n + "1" + _binary(v - (1 << n), n)


def delta_v(v: int) -> str:
    if v < 1:
        raise ValueError("delta is defined for v >= 1")
    n = v.bit_length() - 1
    return gamma_v(n + 1) + _binary(v - (1 << n), n)


def zeta_v(v: int, k: int) -> str:
    if v < 1:
        raise ValueError("zeta is defined for v >= 1")
    h = (v.bit_length() - 1) // k
    lo = 1 << (h * k)
    return "0" * h + "1" + _minimal_binary(v - lo, (1 << ((h + 1) * k)) - lo)


def put_code(x: int, params: CodeParams | str = "gamma", k: int = 3) -> str:
    """Encode ``x >= 0`` as a string of ``'0'``/``'1'``."""
    if x < 0:
        raise ValueError(f"cannot encode negative value {x}")
    kind, k = _kind(params, k)
    if kind == "unary":
        return unary(x)
    if kind == "gamma":
        return gamma_v(x + 1)
    if kind == "delta":
        return delta_v(x + 1)
    return zeta_v(x + 1, k)


def code_length(x: int, params: CodeParams | str = "gamma", k: int = 3) -> int:
    return len(put_code(x, params, k))


def read_code(bits: str, pos: int, params: CodeParams | str = "gamma", k: int = 3) -> tuple[int, int]:
    """Decode one value starting at ``pos``; return ``(x, next_pos)``."""
    kind, k = _kind(params, k)
    try:
        if kind == "unary":
            end = bits.index("0", pos)
            return end - pos, end + 1
        if kind == "gamma":
            v, pos = _read_gamma(bits, pos)
            return v - 1, pos
        if kind == "delta":
            n1, pos = _read_gamma(bits, pos)
            n = n1 - 1
            v = (1 << n) | _take(bits, pos, n)
            return v - 1, pos + n
        one = bits.index("1", pos)
        h = one - pos
        pos = one + 1
        lo = 1 << (h * k)
        size = (1 << ((h + 1) * k)) - lo
        s = (size - 1).bit_length()
        short = (1 << s) - size
        z = _take(bits, pos, s - 1) if s > 0 else 0
        if s > 0 and z < short:
            pos += s - 1
        else:
            z = _take(bits, pos, s) - short
            pos += s
        return lo + z - 1, pos
    except ValueError:
        raise EOFError("bit string ended inside a code word") from None


def get_code(bits: str, params: CodeParams | str = "gamma", k: int = 3) -> int:
    """Decode a bit string holding exactly one code word."""
    x, end = read_code(bits, 0, params, k)
    if end != len(bits):
        raise ValueError(f"{len(bits) - end} trailing bits after code word")
    return x


def _take(bits: str, pos: int, n: int) -> int:
    if n == 0:
        return 0
    if pos + n > len(bits):
        raise ValueError("truncated")
    return int(bits[pos:pos + n], 2)


def _read_gamma(bits: str, pos: int) -> tuple[int, int]:
    one = bits.index("1", pos)
    n = one - pos
    pos = one + 1
    return (1 << n) | _take(bits, pos, n), pos + n


def _kind(params, k):
    if isinstance(params, CodeParams):
        return params.code, params.k
    if params not in CODE_KINDS:
        raise ValueError(f"unknown code kind {params!r}")
    return params, k

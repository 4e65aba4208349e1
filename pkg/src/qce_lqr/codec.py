"""Bit-exact uplink coding.

Wire format (MSB first inside every codeword, no padding between messages):

* ``SafeFlag``   -- one bit, ``1`` once the safe trigger has fired.
* ``Init``       -- ``EG(E) || sEG(z_1) || ... || sEG(z_ds)``; reconstruction ``z_i * 2**-E``.
* ``Track``      -- ``EG(m) || q`` with ``q`` a fixed-width big-endian integer of
  ``index_bits`` bits selecting a codeword of the shared lattice codebook.
* ``CoordTrack`` -- per coordinate a sign bit (``1`` = negative) followed by
  ``EG(index + 1)``.

``EG`` is the Elias Gamma code of a positive integer and ``sEG`` maps an
integer through the zigzag ``0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ...`` and
then codes ``zigzag + 1`` with ``EG``. A stream is zero-padded to a whole
byte only when it is dumped to hex; padding never counts towards the budget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np


class CodecError(ValueError):
    pass


class ZeroOrNegative(CodecError):
    pass


class Infeasible(CodecError):
    """Lattice codebook too large for this (dimension, resolution) pair."""


class Overflow(CodecError):
    """Innovation outside the scaled unit ball handed to the vector quantizer."""


class BitStream:
    """Append-only bit sequence with a read cursor."""

    def __init__(self, bits=()):
        self.bits: list[int] = [int(b) & 1 for b in bits]
        self.pos = 0

    def __len__(self):
        return len(self.bits)

    def __eq__(self, other):
        return isinstance(other, BitStream) and self.bits == other.bits

    def __repr__(self):
        return f"BitStream('{self.to_str()}')"

    @property
    def length(self) -> int:
        return len(self.bits)

    def write_bit(self, b):
        self.bits.append(int(b) & 1)

    def write_uint(self, value: int, width: int):
        if value < 0 or (width < value.bit_length()):
            raise CodecError(f"{value} does not fit in {width} bits")
        for i in range(width - 1, -1, -1):
            self.bits.append((value >> i) & 1)

    def extend(self, other: "BitStream"):
        self.bits.extend(other.bits)

    def read_bit(self) -> int:
        if self.pos >= len(self.bits):
            raise CodecError("read past end of stream")
        b = self.bits[self.pos]
        self.pos += 1
        return b

    def read_uint(self, width: int) -> int:
        v = 0
        for _ in range(width):
            v = (v << 1) | self.read_bit()
        return v

    def remaining(self) -> int:
        return len(self.bits) - self.pos

    def only_padding_left(self) -> bool:
        rest = self.bits[self.pos:]
        return len(rest) < 8 and not any(rest)

    def to_str(self) -> str:
        return "".join(map(str, self.bits))

    @classmethod
    def from_str(cls, s: str) -> "BitStream":
        s = s.strip()
        if any(c not in "01" for c in s):
            raise CodecError("bit string may only contain 0 and 1")
        return cls(int(c) for c in s)

    def to_hex(self) -> str:
        """Zero-pad to a byte boundary and hex-encode."""
        pad = (-len(self.bits)) % 8
        bits = self.bits + [0] * pad
        out = bytearray()
        for i in range(0, len(bits), 8):
            byte = 0
            for b in bits[i:i + 8]:
                byte = (byte << 1) | b
            out.append(byte)
        return out.hex()

    @classmethod
    def from_hex(cls, h: str, nbits: int | None = None) -> "BitStream":
        data = bytes.fromhex(h.strip())
        bits = [(byte >> (7 - i)) & 1 for byte in data for i in range(8)]
        if nbits is not None:
            bits = bits[:nbits]
        return cls(bits)


# ---------------------------------------------------------------- Elias Gamma

def eg_length(n: int) -> int:
    return 2 * (int(n).bit_length() - 1) + 1


def eg_write(stream: BitStream, n: int):
    n = int(n)
    if n < 1:
        raise ZeroOrNegative(f"Elias Gamma needs a positive integer, got {n}")
    nb = n.bit_length()
    stream.bits.extend([0] * (nb - 1))
    stream.write_uint(n, nb)


def eg_read(stream: BitStream) -> int:
    zeros = 0
    while stream.read_bit() == 0:
        zeros += 1
    return (1 << zeros) | stream.read_uint(zeros)


def eg_encode(n: int) -> BitStream:
    s = BitStream()
    eg_write(s, n)
    return s


def eg_decode(stream: BitStream) -> int:
    return eg_read(stream)


def zigzag(z: int) -> int:
    z = int(z)
    return 2 * z if z >= 0 else -2 * z - 1


def unzigzag(u: int) -> int:
    return u // 2 if u % 2 == 0 else -(u + 1) // 2


def signed_eg_write(stream: BitStream, z: int):
    eg_write(stream, zigzag(z) + 1)


def signed_eg_read(stream: BitStream) -> int:
    return unzigzag(eg_read(stream) - 1)


def signed_eg_encode(z: int) -> BitStream:
    s = BitStream()
    signed_eg_write(s, z)
    return s


def signed_eg_decode(stream: BitStream) -> int:
    return signed_eg_read(stream)


def signed_eg_length(z: int) -> int:
    return eg_length(zigzag(z) + 1)


def eg_decode_all(stream: BitStream) -> list[int]:
    """Decode back-to-back EG codewords until only byte padding remains."""
    out = []
    while stream.remaining() and not stream.only_padding_left():
        out.append(eg_read(stream))
    return out


# ------------------------------------------------------------------- messages

@dataclass(frozen=True)
class SafeFlag:
    safe: bool

    def bit_cost(self) -> int:
        return 1


@dataclass(frozen=True)
class Init:
    E: int
    z: tuple

    def bit_cost(self) -> int:
        return eg_length(self.E) + sum(signed_eg_length(zi) for zi in self.z)

    def reconstruct(self) -> np.ndarray:
        step = math.ldexp(1.0, -self.E)
        return np.array([zi * step for zi in self.z], dtype=float)


@dataclass(frozen=True)
class Track:
    m: int
    q: int
    index_bits: int

    def bit_cost(self) -> int:
        return eg_length(self.m) + self.index_bits


@dataclass(frozen=True)
class CoordTrack:
    negative: tuple
    index: tuple

    def bit_cost(self) -> int:
        return sum(1 + eg_length(i + 1) for i in self.index)

    def reconstruct(self, tau_k: int) -> np.ndarray:
        return coord_reconstruct(self.negative, self.index, tau_k)


UplinkMessage = Union[SafeFlag, Init, Track, CoordTrack]


def write_message(stream: BitStream, msg: UplinkMessage) -> int:
    """Append ``msg`` to ``stream`` and return the number of bits written."""
    start = len(stream)
    if isinstance(msg, SafeFlag):
        stream.write_bit(1 if msg.safe else 0)
    elif isinstance(msg, Init):
        eg_write(stream, msg.E)
        for zi in msg.z:
            signed_eg_write(stream, zi)
    elif isinstance(msg, Track):
        eg_write(stream, msg.m)
        stream.write_uint(msg.q, msg.index_bits)
    elif isinstance(msg, CoordTrack):
        for neg, idx in zip(msg.negative, msg.index):
            stream.write_bit(1 if neg else 0)
            eg_write(stream, idx + 1)
    else:
        raise TypeError(f"unknown message type {type(msg).__name__}")
    return len(stream) - start


def encode_message(msg: UplinkMessage) -> BitStream:
    s = BitStream()
    write_message(s, msg)
    return s


def read_safe_flag(stream: BitStream) -> SafeFlag:
    return SafeFlag(bool(stream.read_bit()))


def read_init(stream: BitStream, d_s: int) -> Init:
    E = eg_read(stream)
    return Init(E, tuple(signed_eg_read(stream) for _ in range(d_s)))


def read_track(stream: BitStream, index_bits: int) -> Track:
    m = eg_read(stream)
    return Track(m, stream.read_uint(index_bits), index_bits)


def read_coord_track(stream: BitStream, d_s: int) -> CoordTrack:
    neg, idx = [], []
    for _ in range(d_s):
        neg.append(bool(stream.read_bit()))
        idx.append(eg_read(stream) - 1)
    return CoordTrack(tuple(neg), tuple(idx))


# ------------------------------------------------------ absolute initialization

def init_exponent(eps_target: float, d_s: int) -> int:
    """Dyadic exponent ``E = ceil(log2(sqrt(d_s) / (2 eps)))``, floored at 1 so EG can carry it."""
    if not eps_target > 0:
        raise ValueError("eps_target must be positive")
    delta_max = 2.0 * eps_target / math.sqrt(d_s)
    return max(1, math.ceil(math.log2(1.0 / delta_max)))


def absolute_init(theta, eps_target: float) -> tuple[Init, np.ndarray]:
    """Round ``theta`` onto a dyadic grid fine enough for l2 error <= ``eps_target``."""
    theta = np.asarray(theta, dtype=float).ravel()
    E = init_exponent(eps_target, theta.size)
    z = tuple(int(v) for v in np.rint(np.ldexp(theta, E)))  # rint rounds half to even
    msg = Init(E, z)
    return msg, msg.reconstruct()


# ------------------------------------------------------------ lattice codebook

MAX_CODEBOOK_LOG2 = 28


@dataclass(frozen=True)
class CodebookConfig:
    rho: float
    dim: int
    codewords: np.ndarray = field(repr=False)
    spacing: float

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def index_bits(self) -> int:
        return max(1, math.ceil(math.log2(self.size)))


def codebook_guard(d_s: int, rho: float) -> float:
    return d_s * math.log2(1 + math.ceil(2 * math.sqrt(d_s) / (2 * rho)))


def build_codebook(d_s: int, rho: float) -> CodebookConfig:
    """Covering codebook of the unit ball from the scaled integer lattice.

    Lattice spacing ``g = 2 rho / sqrt(d_s)`` gives cell half-diagonal ``rho``.
    Lattice points inside the ball are kept as is; points with norm in
    ``(1, 1 + rho]`` are pulled radially onto the sphere. Any ``v`` in the ball
    rounds to a lattice point within ``rho`` whose norm is at most ``1 + rho``,
    and the radial pull-back is a projection onto the ball, so it cannot move
    that point further from ``v``: the covering radius is at most ``rho``.
    """
    if not 0 < rho < 1 / math.sqrt(2):
        raise ValueError("rho must lie in (0, 1/sqrt(2))")
    if d_s < 1:
        raise ValueError("d_s must be >= 1")
    if codebook_guard(d_s, rho) > MAX_CODEBOOK_LOG2:
        raise Infeasible(f"lattice codebook for d_s={d_s}, rho={rho} exceeds 2^{MAX_CODEBOOK_LOG2}")
    g = 2.0 * rho / math.sqrt(d_s)
    reach = (1.0 + rho) * (1 + 1e-12)
    n = int(math.floor(reach / g))
    grid = np.array(list(itertools.product(range(-n, n + 1), repeat=d_s)), dtype=float) * g
    norms = np.linalg.norm(grid, axis=1)
    inside = grid[norms <= 1.0]
    outer = grid[(norms > 1.0) & (norms <= reach)]
    outer = outer / np.linalg.norm(outer, axis=1, keepdims=True)
    if outer.size:
        _, first = np.unique(np.round(outer, 12), axis=0, return_index=True)
        outer = outer[np.sort(first)]
    codewords = np.vstack([inside, outer]) if outer.size else inside
    return CodebookConfig(rho=rho, dim=d_s, codewords=codewords, spacing=g)


def quantize_innovation(delta, s: float, cb: CodebookConfig) -> tuple[int, np.ndarray]:
    """Nearest scaled codeword ``s * c_q`` to ``delta`` (lowest index on ties)."""
    delta = np.asarray(delta, dtype=float).ravel()
    if np.linalg.norm(delta) > s * (1 + 1e-12):
        raise Overflow(f"||delta||={np.linalg.norm(delta):.6g} exceeds scale {s:.6g}")
    d2 = np.sum((delta[None, :] - s * cb.codewords) ** 2, axis=1)
    q = int(np.argmin(d2))
    return q, s * cb.codewords[q]


def adaptive_multiplier(delta_norm: float, s_base: float) -> int:
    if not s_base > 0:
        raise ValueError("s_base must be positive")
    return max(1, math.ceil(delta_norm / s_base))


# --------------------------------------------------- coordinate-wise quantizer

def coord_reconstruct(negative, index, tau_k: int) -> np.ndarray:
    r = math.sqrt(tau_k)
    return np.array([(-1.0 if n else 1.0) * max(0.0, i - 0.5) / r for n, i in zip(negative, index)])


def coord_quantize(delta, tau_k: int) -> tuple[CoordTrack, np.ndarray]:
    """Uniform scalar quantizer with step ``1/sqrt(tau_k)``; cell-midpoint reconstruction."""
    if tau_k < 1:
        raise ValueError("tau_k must be >= 1")
    delta = np.asarray(delta, dtype=float).ravel()
    r = math.sqrt(tau_k)
    index = tuple(math.ceil(abs(v) * r) for v in delta)
    negative = tuple(bool(v < 0) for v in delta)
    msg = CoordTrack(negative, index)
    return msg, msg.reconstruct(tau_k)

"""Generation-based random linear network coding over GF(2^8).

The data set is split into 16 generations of 12 packets. A coded packet
carries a 13-byte header: one byte packing (generation size - 1) in the high
nibble and the generation id in the low nibble, then the 12 coefficients in
packet-index order.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .gf256 import INV, MUL, add_scaled_row, scale_row

NUM_GENERATIONS = 16
GEN_SIZE = 12
HEADER_LEN = 1 + GEN_SIZE


class InsufficientRankError(ValueError):
    """Raised when decoding a generation that is not yet full rank."""


@dataclass
class Generation:
    gen_id: int
    packets: np.ndarray  # (GEN_SIZE, L) uint8

    def __post_init__(self):
        self.packets = np.asarray(self.packets, dtype=np.uint8)
        if self.packets.ndim != 2 or self.packets.shape[0] != GEN_SIZE:
            raise ValueError(f"a generation holds {GEN_SIZE} equal-length rows")
        if not 0 <= self.gen_id < NUM_GENERATIONS:
            raise ValueError(f"gen_id {self.gen_id} out of range")

    @property
    def gen_size(self) -> int:
        return GEN_SIZE

    @property
    def payload_len(self) -> int:
        return self.packets.shape[1]


@dataclass(frozen=True)
class CodedPacket:
    gen_id: int
    coeffs: tuple[int, ...]
    payload: np.ndarray = field(compare=False)
    gen_size: int = GEN_SIZE

    def to_bytes(self) -> bytes:
        return write_header(self) + self.payload.tobytes()

    @classmethod
    def from_bytes(cls, buf: bytes) -> "CodedPacket":
        gen_id, gen_size, coeffs = read_header(buf)
        payload = np.frombuffer(buf[HEADER_LEN:], dtype=np.uint8).copy()
        return cls(gen_id, coeffs, payload, gen_size)


def split_generations(data: np.ndarray) -> list[Generation]:
    """Cut a (192, L) block of source packets into 16 generations."""
    data = np.asarray(data, dtype=np.uint8)
    if data.shape[0] != NUM_GENERATIONS * GEN_SIZE:
        raise ValueError(f"expected {NUM_GENERATIONS * GEN_SIZE} packets, got {data.shape[0]}")
    return [
        Generation(g, data[g * GEN_SIZE:(g + 1) * GEN_SIZE])
        for g in range(NUM_GENERATIONS)
    ]


def combine(gen: Generation, coeffs) -> np.ndarray:
    """Payload of the linear combination sum(coeffs[i] * packet[i])."""
    c = np.asarray(coeffs, dtype=np.uint8)
    if gen.payload_len == 0:
        return np.zeros(0, dtype=np.uint8)
    return np.bitwise_xor.reduce(MUL[c[:, None], gen.packets], axis=0)


def encode(gen: Generation, rng: random.Random, coeffs=None) -> CodedPacket:
    """Draw 12 uniform coefficients (all-zero allowed) and combine.

    ``coeffs`` forces the coefficient vector, bypassing the draw.
    """
    if coeffs is None:
        coeffs = tuple(rng.randbytes(GEN_SIZE))
    else:
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != GEN_SIZE:
            raise ValueError(f"need {GEN_SIZE} coefficients")
    return CodedPacket(gen.gen_id, coeffs, combine(gen, coeffs))


def write_header(p: CodedPacket) -> bytes:
    if not 0 <= p.gen_id < NUM_GENERATIONS:
        raise ValueError(f"gen_id {p.gen_id} does not fit in 4 bits")
    if not 1 <= p.gen_size <= 16:
        raise ValueError(f"gen_size {p.gen_size} does not fit in 4 bits")
    if len(p.coeffs) != GEN_SIZE:
        raise ValueError(f"coefficient vector must have {GEN_SIZE} bytes")
    return bytes([((p.gen_size - 1) << 4) | p.gen_id, *p.coeffs])


def read_header(buf: bytes) -> tuple[int, int, tuple[int, ...]]:
    if len(buf) < HEADER_LEN:
        raise ValueError(f"header needs {HEADER_LEN} bytes, got {len(buf)}")
    first = buf[0]
    return first & 0x0F, (first >> 4) + 1, tuple(buf[1:HEADER_LEN])


class _GenDecoder:
    # Rows are kept in reduced row echelon form, so once full rank the
    # payload rows sorted by pivot are the original packets.
    __slots__ = ("rows", "pivots", "payloads")

    def __init__(self):
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []
        self.payloads: list[np.ndarray] = []

    def reduce(self, coeffs) -> list[int]:
        v = list(coeffs)
        for row, piv in zip(self.rows, self.pivots):
            c = v[piv]
            if c:
                v = add_scaled_row(v, row, c)
        return v


class DecoderState:
    """Per-sink incremental decoder over all generations."""

    def __init__(self, num_generations: int = NUM_GENERATIONS):
        self._gens = [_GenDecoder() for _ in range(num_generations)]

    def _gen(self, gen_id: int) -> _GenDecoder:
        if not 0 <= gen_id < len(self._gens):
            raise ValueError(f"gen_id {gen_id} out of range")
        return self._gens[gen_id]

    def rank(self, gen_id: int) -> int:
        return len(self._gen(gen_id).rows)

    def total_rank(self) -> int:
        return sum(len(g.rows) for g in self._gens)

    def decodable(self, gen_id: int) -> bool:
        return self.rank(gen_id) == GEN_SIZE

    def complete(self) -> bool:
        return all(len(g.rows) == GEN_SIZE for g in self._gens)

    def coefficient_matrix(self, gen_id: int) -> list[list[int]]:
        return [list(r) for r in self._gen(gen_id).rows]

    def is_innovative(self, p: CodedPacket) -> bool:
        g = self._gen(p.gen_id)
        if len(g.rows) == GEN_SIZE:
            return False
        return any(g.reduce(p.coeffs))

    def insert(self, p: CodedPacket) -> bool:
        g = self._gen(p.gen_id)
        if len(g.rows) == GEN_SIZE:
            return False
        v = list(p.coeffs)
        pay = p.payload.copy()
        carry = pay.size > 0
        for row, piv, prow in zip(g.rows, g.pivots, g.payloads):
            c = v[piv]
            if c:
                v = add_scaled_row(v, row, c)
                if carry:
                    pay ^= MUL[c][prow]
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            return False
        inv = INV[v[piv]]
        if inv != 1:
            v = scale_row(v, inv)
            if carry:
                pay = MUL[inv][pay]
        for i, row in enumerate(g.rows):
            c = row[piv]
            if c:
                g.rows[i] = add_scaled_row(row, v, c)
                if carry:
                    g.payloads[i] = g.payloads[i] ^ MUL[c][pay]
        g.rows.append(v)
        g.pivots.append(piv)
        g.payloads.append(pay)
        return True

    def decode(self, gen_id: int) -> np.ndarray:
        """The generation's original packets as a (12, L) array."""
        g = self._gen(gen_id)
        if len(g.rows) < GEN_SIZE:
            raise InsufficientRankError(
                f"insufficient rank {len(g.rows)}/{GEN_SIZE} for generation {gen_id}"
            )
        order = sorted(range(GEN_SIZE), key=g.pivots.__getitem__)
        return np.stack([g.payloads[i] for i in order])


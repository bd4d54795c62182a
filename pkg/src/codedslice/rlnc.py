"""Block RLNC encoder/decoder over GF(2^8).

Source packets are grouped into generations; each coded packet is a random
linear combination of the generation's payloads. The 3-byte wire header is
[generation_id mod 256 : 1 byte][seq : 2 bytes big-endian]; the receiver
re-derives the coefficient vector from (global_seed, wire id, seq) with a
SplitMix64 stream, so coefficients never travel on the wire. All-zero
coefficient draws are rejected and redrawn from the same stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf256 import MUL_TABLE, gf_inv

HEADER_LEN = 3
MAX_SEQ = 1 << 16

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class GenerationStateError(RuntimeError):
    """Raised when encoding from a generation that is not sealed."""


class GenerationMismatchError(ValueError):
    """Raised when a packet is routed to the wrong decoder."""


class NotDecodableError(RuntimeError):
    def __init__(self, missing_dof: int):
        super().__init__(f"generation not decodable, missing {missing_dof} dof")
        self.missing_dof = missing_dof


def _mix64(x: int) -> int:
    x &= _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


class _SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _M64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _M64
        return _mix64(self._state)

    def next_bytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            out += self.next_u64().to_bytes(8, "big")
        return bytes(out[:n])


class Generation:
    """A block of k source packets coded together.

    Payloads may be appended until seal(); sealing zero-pads every payload
    to the length of the largest one, which is the coded-packet length.
    """

    def __init__(self, generation_id: int, payloads=None):
        if generation_id < 0:
            raise ValueError("generation_id must be non-negative")
        self.generation_id = generation_id
        self._raw: list[bytes] = []
        self._matrix: np.ndarray | None = None
        if payloads is not None:
            for p in payloads:
                self.add(p)
            self.seal()

    def add(self, payload: bytes) -> None:
        if self._matrix is not None:
            raise GenerationStateError("generation already sealed")
        self._raw.append(bytes(payload))

    def seal(self) -> "Generation":
        if self._matrix is not None:
            return self
        if not self._raw:
            raise GenerationStateError("cannot seal an empty generation")
        length = max(len(p) for p in self._raw)
        m = np.zeros((len(self._raw), length), dtype=np.uint8)
        for i, p in enumerate(self._raw):
            m[i, : len(p)] = np.frombuffer(p, dtype=np.uint8)
        self._matrix = m
        return self

    @property
    def sealed(self) -> bool:
        return self._matrix is not None

    @property
    def size_k(self) -> int:
        return len(self._raw)

    @property
    def payload_len(self) -> int:
        if self._matrix is None:
            raise GenerationStateError("generation not sealed")
        return self._matrix.shape[1]

    @property
    def wire_id(self) -> int:
        return self.generation_id & 0xFF

    def payload_matrix(self) -> np.ndarray:
        if self._matrix is None:
            raise GenerationStateError("generation not sealed")
        return self._matrix


@dataclass
class CodedPacket:
    """One coded packet; coefficients are implicit unless a test hook set them."""

    generation_id: int  # wire id, already reduced mod 256
    seq: int
    payload: bytes
    coefficients: np.ndarray | None = field(default=None, repr=False)

    def header(self) -> bytes:
        return bytes([self.generation_id & 0xFF]) + self.seq.to_bytes(2, "big")

    def to_bytes(self) -> bytes:
        return self.header() + self.payload

    @classmethod
    def parse(cls, data: bytes) -> "CodedPacket":
        if len(data) < HEADER_LEN:
            raise ValueError("short packet")
        return cls(generation_id=data[0],
                   seq=int.from_bytes(data[1:3], "big"),
                   payload=bytes(data[HEADER_LEN:]))


class RlncCodec:
    """Deterministic encoder context: one global seed per simulation run."""

    def __init__(self, global_seed: int = 0):
        self.global_seed = global_seed

    def coefficients(self, wire_id: int, seq: int, k: int) -> np.ndarray:
        seed = _mix64(_mix64(_mix64(self.global_seed) ^ (wire_id & 0xFF)) ^ seq)
        stream = _SplitMix64(seed)
        while True:
            vec = np.frombuffer(stream.next_bytes(k), dtype=np.uint8)
            if vec.any():
                return vec

    def encode(self, gen: Generation, seq: int) -> CodedPacket:
        if not gen.sealed:
            raise GenerationStateError("generation not sealed")
        if not 0 <= seq < MAX_SEQ:
            raise ValueError("seq out of range for 2-byte field")
        coeffs = self.coefficients(gen.wire_id, seq, gen.size_k)
        return CodedPacket(gen.wire_id, seq, self._combine(gen, coeffs))

    def encode_with_coefficients(self, gen: Generation, coefficients,
                                 seq: int = 0) -> CodedPacket:
        """Test hook: encode under an explicit coefficient vector."""
        coeffs = np.asarray(coefficients, dtype=np.uint8)
        if coeffs.shape != (gen.size_k,):
            raise ValueError("coefficient vector length must equal k")
        return CodedPacket(gen.wire_id, seq, self._combine(gen, coeffs),
                           coefficients=coeffs)

    @staticmethod
    def _combine(gen: Generation, coeffs: np.ndarray) -> bytes:
        rows = MUL_TABLE[coeffs[:, None], gen.payload_matrix()]
        return np.bitwise_xor.reduce(rows, axis=0).tobytes()


class DecoderState:
    """Incremental Gaussian elimination for one generation.

    The coefficient rows are kept in reduced row-echelon form at all times,
    so a new row can be reduced against every pivot in one vectorized step
    and innovation is just "anything nonzero left".
    """

    def __init__(self, codec: RlncCodec, generation_id: int, size_k: int,
                 payload_len: int):
        self.codec = codec
        self.generation_id = generation_id & 0xFF
        self.size_k = size_k
        self.payload_len = payload_len
        self._coef = np.zeros((size_k, size_k), dtype=np.uint8)
        self._pay = np.zeros((size_k, payload_len), dtype=np.uint8)
        self._pivots = np.zeros(size_k, dtype=np.int64)
        self.rank = 0

    @property
    def missing_dof(self) -> int:
        return self.size_k - self.rank

    def ingest(self, pkt: CodedPacket) -> tuple[bool, int]:
        """Returns (innovative, new_rank); non-innovative packets change nothing."""
        if pkt.generation_id != self.generation_id:
            raise GenerationMismatchError(
                f"packet for generation {pkt.generation_id} routed to "
                f"decoder {self.generation_id}")
        if pkt.coefficients is not None:
            row = np.array(pkt.coefficients, dtype=np.uint8, copy=True)
        else:
            row = self.codec.coefficients(pkt.generation_id, pkt.seq,
                                          self.size_k).copy()
        pay = np.frombuffer(pkt.payload, dtype=np.uint8).copy()
        if pay.shape != (self.payload_len,):
            raise ValueError("payload length mismatch")

        r = self.rank
        if r:
            factors = row[self._pivots[:r]]
            nz = np.nonzero(factors)[0]
            if nz.size:
                row ^= np.bitwise_xor.reduce(
                    MUL_TABLE[factors[nz, None], self._coef[nz]], axis=0)
                pay ^= np.bitwise_xor.reduce(
                    MUL_TABLE[factors[nz, None], self._pay[nz]], axis=0)
        lead_candidates = np.nonzero(row)[0]
        if lead_candidates.size == 0:
            return False, self.rank
        lead = int(lead_candidates[0])

        inv = gf_inv(int(row[lead]))
        row = MUL_TABLE[inv][row]
        pay = MUL_TABLE[inv][pay]
        if r:
            factors = self._coef[:r, lead].copy()
            nz = np.nonzero(factors)[0]
            if nz.size:
                self._coef[nz] ^= MUL_TABLE[factors[nz, None], row[None, :]]
                self._pay[nz] ^= MUL_TABLE[factors[nz, None], pay[None, :]]

        pos = int(np.searchsorted(self._pivots[:r], lead))
        self._coef[pos + 1:r + 1] = self._coef[pos:r]
        self._pay[pos + 1:r + 1] = self._pay[pos:r]
        self._pivots[pos + 1:r + 1] = self._pivots[pos:r]
        self._coef[pos] = row
        self._pay[pos] = pay
        self._pivots[pos] = lead
        self.rank += 1
        return True, self.rank

    def extract(self) -> list[bytes]:
        """Original payloads, in order. Only valid at full rank."""
        if self.rank < self.size_k:
            raise NotDecodableError(self.missing_dof)
        # full rank in RREF over k columns means the coefficient rows are
        # the identity, so payload row i is source packet i
        return [self._pay[i].tobytes() for i in range(self.size_k)]

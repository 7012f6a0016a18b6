"""Feature tensor files, data chunking/merging, and 18-bit symbol packing.

FTNS layout (little endian)::

    b"FTNS" | u32 rank | u32 dims[rank] | float32 data[prod(dims)]

Chunk manifest layout (little endian)::

    u64 total_bytes | u32 chunk_bytes | u32 chunk_count | u32 pad_bytes

Symbol packing reads the byte string as a big-endian bitstream and slices
it into fixed-width symbols, zero-padding the last one.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

FTNS_MAGIC = b"FTNS"
MANIFEST_FORMAT = "<QIII"
MANIFEST_SIZE = struct.calcsize(MANIFEST_FORMAT)
SYMBOL_BITS = 18


class FramingError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureTensor:
    dims: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d <= 0 for d in dims):
            raise FramingError(f"dims must be a nonempty sequence of positive extents, got {dims}")
        data = np.ascontiguousarray(self.data, dtype=np.float32).reshape(dims)
        if not np.all(np.isfinite(data)):
            raise FramingError("feature tensor contains non-finite elements")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "data", data)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def __eq__(self, other):
        # bit-exact comparison
        if not isinstance(other, FeatureTensor):
            return NotImplemented
        return self.dims == other.dims and self.data.tobytes() == other.data.tobytes()


def serialize_features(t: FeatureTensor) -> bytes:
    header = FTNS_MAGIC + struct.pack(f"<I{len(t.dims)}I", len(t.dims), *t.dims)
    return header + t.data.astype("<f4").tobytes()


def deserialize_features(b: bytes) -> FeatureTensor:
    b = bytes(b)
    if len(b) < 8 or b[:4] != FTNS_MAGIC:
        raise FramingError("bad FTNS magic")
    (rank,) = struct.unpack_from("<I", b, 4)
    if rank == 0:
        raise FramingError("FTNS rank is zero")
    body = 8 + 4 * rank
    if len(b) < body:
        raise FramingError("truncated FTNS header")
    dims = struct.unpack_from(f"<{rank}I", b, 8)
    if any(d == 0 for d in dims):
        raise FramingError("FTNS has a zero extent")
    count = math.prod(dims)
    if len(b) != body + 4 * count:
        raise FramingError(
            f"FTNS body holds {len(b) - body} bytes, dims {dims} need {4 * count}"
        )
    data = np.frombuffer(b, dtype="<f4", count=count, offset=body)
    return FeatureTensor(dims, data.astype(np.float32))


@dataclass(frozen=True)
class ChunkManifest:
    total_bytes: int
    chunk_bytes: int
    chunk_count: int
    pad_bytes: int

    def to_bytes(self) -> bytes:
        return struct.pack(
            MANIFEST_FORMAT, self.total_bytes, self.chunk_bytes, self.chunk_count, self.pad_bytes
        )

    @classmethod
    def from_bytes(cls, b: bytes) -> "ChunkManifest":
        if len(b) < MANIFEST_SIZE:
            raise FramingError("truncated chunk manifest")
        return cls(*struct.unpack_from(MANIFEST_FORMAT, b, 0))


def chunk_payload(b: bytes, chunk_bytes: int) -> tuple[list[bytes], ChunkManifest]:
    if chunk_bytes <= 0:
        raise FramingError("chunk_bytes must be positive")
    if not b:
        raise FramingError("cannot chunk an empty payload")
    count = -(-len(b) // chunk_bytes)
    pad = count * chunk_bytes - len(b)
    padded = bytes(b) + bytes(pad)
    chunks = [padded[i * chunk_bytes : (i + 1) * chunk_bytes] for i in range(count)]
    return chunks, ChunkManifest(len(b), chunk_bytes, count, pad)


def merge_chunks(chunks, m: ChunkManifest) -> bytes:
    if m.chunk_bytes <= 0 or not 0 <= m.pad_bytes < m.chunk_bytes:
        raise FramingError(f"inconsistent manifest pad {m.pad_bytes} for chunk {m.chunk_bytes}")
    if len(chunks) != m.chunk_count:
        raise FramingError(f"expected {m.chunk_count} chunks, got {len(chunks)}")
    if any(len(c) != m.chunk_bytes for c in chunks):
        raise FramingError("chunk size does not match manifest")
    if m.chunk_count * m.chunk_bytes - m.pad_bytes != m.total_bytes:
        raise FramingError("manifest totals are inconsistent")
    return b"".join(chunks)[: m.total_bytes]


def chunk_message(b: bytes, chunk_bytes: int) -> bytes:
    """Chunked plaintext as sealed on the wire: manifest followed by the chunks."""
    chunks, manifest = chunk_payload(b, chunk_bytes)
    return manifest.to_bytes() + b"".join(chunks)


def merge_message(b: bytes) -> bytes:
    """Inverse of :func:`chunk_message`."""
    manifest = ChunkManifest.from_bytes(b)
    body = b[MANIFEST_SIZE:]
    cb = manifest.chunk_bytes
    if cb <= 0 or len(body) != cb * manifest.chunk_count:
        raise FramingError("chunked message length does not match its manifest")
    chunks = [body[i * cb : (i + 1) * cb] for i in range(manifest.chunk_count)]
    return merge_chunks(chunks, manifest)


@dataclass(frozen=True, eq=False)
class SymbolBlock:
    symbols: np.ndarray
    byte_len: int

    def __len__(self):
        return len(self.symbols)


def symbol_count(byte_len: int, bits: int = SYMBOL_BITS) -> int:
    return -(-8 * byte_len // bits)


def pack_symbols(b: bytes, bits: int = SYMBOL_BITS) -> SymbolBlock:
    raw = np.unpackbits(np.frombuffer(bytes(b), dtype=np.uint8))
    count = symbol_count(len(b), bits)
    stream = np.zeros(count * bits, dtype=np.int64)
    stream[: raw.size] = raw
    weights = 1 << np.arange(bits - 1, -1, -1, dtype=np.int64)
    return SymbolBlock(stream.reshape(count, bits) @ weights, len(b))


def symbols_to_bits(symbols, bits: int = SYMBOL_BITS) -> np.ndarray:
    """Big-endian bit expansion of each symbol, flattened to uint8."""
    s = np.asarray(symbols, dtype=np.int64)
    shifts = np.arange(bits - 1, -1, -1, dtype=np.int64)
    return ((s[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def bits_to_symbols(bitstream, bits: int = SYMBOL_BITS) -> np.ndarray:
    b = np.asarray(bitstream, dtype=np.int64)
    if b.size % bits:
        raise FramingError(f"bit count {b.size} is not a multiple of {bits}")
    weights = 1 << np.arange(bits - 1, -1, -1, dtype=np.int64)
    return b.reshape(-1, bits) @ weights


def unpack_symbols(s: SymbolBlock, bits: int = SYMBOL_BITS) -> bytes:
    symbols = np.asarray(s.symbols, dtype=np.int64)
    if symbols.size != symbol_count(s.byte_len, bits):
        raise FramingError(
            f"{symbols.size} symbols cannot hold exactly {s.byte_len} bytes"
        )
    if symbols.size and (symbols.min() < 0 or symbols.max() >= 1 << bits):
        raise FramingError(f"symbol outside the {bits}-bit alphabet")
    stream = symbols_to_bits(symbols, bits)[: 8 * s.byte_len]
    return np.packbits(stream).tobytes()

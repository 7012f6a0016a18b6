"""Systematic Reed-Solomon codec over GF(2^m).

Decoding is Berlekamp-Massey, Chien search and Forney.  Shortened codes
(n < 2^m - 1) are supported directly.  The default profile is the 1280-root
code over GF(2^18), shortened to RS(12800, 11520).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import lru_cache

import numpy as np

from . import _kernels
from .galois import DEFAULT_PRIM_POLY_18, GfField, GfPoly, new_field

DEFAULT_M = 18
DEFAULT_NROOTS = 1280
DEFAULT_K = 11520
DEFAULT_FCR = 1


class DecodeStatus(enum.Enum):
    SUCCESS = "success"
    FAILURE_DETECTED = "failure-detected"


@dataclass(frozen=True)
class DecodeOutcome:
    message: np.ndarray
    errors_corrected: int
    status: DecodeStatus

    @property
    def ok(self) -> bool:
        return self.status is DecodeStatus.SUCCESS


@dataclass(frozen=True, eq=False)
class RsCode:
    field: GfField
    nroots: int
    k: int
    fcr: int = DEFAULT_FCR
    generator: GfPoly = dc_field(init=False, repr=False)
    _gen_log: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        if self.nroots < 2:
            raise ValueError("nroots must be at least 2")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.n > self.field.order:
            raise ValueError(
                f"codeword length {self.n} exceeds 2^m - 1 = {self.field.order}"
            )
        gen = generator_poly(self)
        object.__setattr__(self, "generator", gen)
        # gen_log[j]: log of coefficient of x^(nroots-1-j)
        coeffs = np.asarray(gen.coeffs[:-1], dtype=np.int64)[::-1]
        gen_log = self.field.log_table[coeffs].copy()
        object.__setattr__(self, "_gen_log", gen_log)

    @property
    def n(self) -> int:
        return self.k + self.nroots

    @property
    def t(self) -> int:
        return self.nroots // 2

    @property
    def payload_bits(self) -> int:
        return self.k * self.field.m

    def encode(self, message) -> np.ndarray:
        return rs_encode(self, message)

    def decode(self, received) -> DecodeOutcome:
        return rs_decode(self, received)

    def syndromes(self, word) -> np.ndarray:
        word = np.ascontiguousarray(word, dtype=np.int64)
        f = self.field
        return _kernels.syndromes(word, self.fcr, self.nroots, f.exp2, f.log_table, f.order)


def build_generator(f: GfField, nroots: int, fcr: int = DEFAULT_FCR) -> GfPoly:
    """Monic prod_{j} (x - alpha^(fcr+j)) for j in 0..nroots-1."""
    g = np.zeros(nroots + 1, dtype=np.int64)
    g[0] = 1
    for j in range(nroots):
        root = f.alpha_pow(fcr + j)
        # g <- g * (x + root), lowest degree first
        shifted = np.concatenate(([0], g[:-1]))
        g = shifted ^ f.mul_vec(g, root)
    return GfPoly(g)


def generator_poly(code: RsCode) -> GfPoly:
    return build_generator(code.field, code.nroots, code.fcr)


def rs_encode(code: RsCode, message) -> np.ndarray:
    """Systematic codeword: the k message symbols followed by nroots parity."""
    msg = np.ascontiguousarray(message, dtype=np.int64)
    if msg.ndim != 1 or msg.shape[0] != code.k:
        raise ValueError(f"message must have {code.k} symbols, got shape {msg.shape}")
    if msg.size and (msg.min() < 0 or msg.max() >= code.field.size):
        raise ValueError("message symbol outside the field")
    f = code.field
    parity = _kernels.encode_parity(msg, code._gen_log, f.exp2, f.log_table)
    return np.concatenate([msg, parity])


def rs_decode(code: RsCode, received) -> DecodeOutcome:
    r = np.array(received, dtype=np.int64)
    if r.ndim != 1 or r.shape[0] != code.n:
        raise ValueError(f"received word must have {code.n} symbols, got shape {r.shape}")
    f = code.field
    nerr = _kernels.decode_inplace(r, code.fcr, code.nroots, f.exp2, f.log_table, f.order)
    if nerr < 0:
        return DecodeOutcome(r[: code.k], 0, DecodeStatus.FAILURE_DETECTED)
    return DecodeOutcome(r[: code.k], int(nerr), DecodeStatus.SUCCESS)


@lru_cache(maxsize=None)
def link_profile(k: int = DEFAULT_K, nroots: int = DEFAULT_NROOTS) -> RsCode:
    """The 1280-root GF(2^18) code, x^18 + x^7 + 1, fcr = 1; cached."""
    return RsCode(new_field(DEFAULT_M, DEFAULT_PRIM_POLY_18), nroots=nroots, k=k, fcr=DEFAULT_FCR)

"""Arithmetic in GF(2^m) for 3 <= m <= 18, backed by exp/log tables.

Elements are integers in polynomial basis (bit i is the coefficient of x^i).
Small fields use the same code path as GF(2^18), so exhaustive checks over
GF(2^3) and GF(2^4) carry over to the large field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

MIN_DEGREE = 3
MAX_DEGREE = 18

# x^18 + x^7 + 1
DEFAULT_PRIM_POLY_18 = 0x40081

# Known primitive polynomials, used when a caller only gives m.
DEFAULT_PRIM_POLYS = {
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
    17: 0x20009,
    18: DEFAULT_PRIM_POLY_18,
}

LOG_ZERO = -1


class FieldError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GfField:
    """GF(2^m) with tables ``exp_table[i] = alpha^i`` and ``log_table[a]``.

    ``log_table[0]`` holds :data:`LOG_ZERO`.  ``exp2`` is the exp table
    repeated over ``2 * order`` entries so that a sum of two logs can be
    looked up without a modulo.
    """

    m: int
    prim_poly: int
    exp_table: np.ndarray = field(repr=False)
    log_table: np.ndarray = field(repr=False)
    exp2: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return 1 << self.m

    @property
    def order(self) -> int:
        """Multiplicative group order, 2^m - 1."""
        return (1 << self.m) - 1

    def __eq__(self, other):
        if not isinstance(other, GfField):
            return NotImplemented
        return self.m == other.m and self.prim_poly == other.prim_poly

    def __hash__(self):
        return hash((self.m, self.prim_poly))

    def alpha_pow(self, e: int) -> int:
        return int(self.exp_table[e % self.order])

    def mul(self, a: int, b: int) -> int:
        return gf_mul(self, a, b)

    def inv(self, a: int) -> int:
        return gf_inv(self, a)

    def div(self, a: int, b: int) -> int:
        return gf_mul(self, a, gf_inv(self, b))

    def mul_vec(self, a, b) -> np.ndarray:
        """Elementwise product of arrays (or an array and a scalar)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        la = self.log_table[a]
        lb = self.log_table[b]
        out = self.exp2[np.where((la < 0) | (lb < 0), 0, la + lb)]
        return np.where((la < 0) | (lb < 0), 0, out)


@lru_cache(maxsize=32)
def new_field(m: int, prim_poly: int | None = None) -> GfField:
    """Build GF(2^m) over ``prim_poly``; raises FieldError if it is not primitive.

    Fields are immutable, so results are cached.
    """
    if not MIN_DEGREE <= m <= MAX_DEGREE:
        raise FieldError(f"extension degree must be in {MIN_DEGREE}..{MAX_DEGREE}, got {m}")
    if prim_poly is None:
        prim_poly = DEFAULT_PRIM_POLYS[m]
    if prim_poly.bit_length() != m + 1:
        raise FieldError(f"polynomial {prim_poly:#x} does not have degree {m}")

    size = 1 << m
    order = size - 1
    exp_table = np.zeros(size, dtype=np.int64)
    log_table = np.full(size, LOG_ZERO, dtype=np.int64)
    x = 1
    for i in range(order):
        if log_table[x] != LOG_ZERO:
            raise FieldError(
                f"polynomial {prim_poly:#x} is not primitive: alpha has order {i}"
            )
        exp_table[i] = x
        log_table[x] = i
        x <<= 1
        if x & size:
            x ^= prim_poly
        if x == 0:
            raise FieldError(f"polynomial {prim_poly:#x} is divisible by x")
    if x != 1:
        raise FieldError(f"polynomial {prim_poly:#x} is not primitive")
    exp_table[order] = 1

    exp2 = np.concatenate([exp_table[:order], exp_table[:order], exp_table[:2]])
    for arr in (exp_table, log_table, exp2):
        arr.flags.writeable = False
    return GfField(m, prim_poly, exp_table, log_table, exp2)


def gf_mul(f: GfField, a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return int(f.exp2[f.log_table[a] + f.log_table[b]])


def gf_inv(f: GfField, a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("zero has no inverse in GF(2^m)")
    return int(f.exp_table[(f.order - f.log_table[a]) % f.order])


def gf_pow(f: GfField, a: int, e: int) -> int:
    if a == 0:
        return 1 if e == 0 else 0
    return int(f.exp_table[(int(f.log_table[a]) * e) % f.order])


@dataclass(frozen=True)
class GfPoly:
    """Polynomial over GF(2^m), coefficients lowest degree first.

    Trailing (high-degree) zeros are stripped, so the zero polynomial has
    an empty coefficient tuple.
    """

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Sequence[int] = ()):
        c = [int(v) for v in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]


def gf_poly_eval(f: GfField, p: GfPoly | Sequence[int], x: int) -> int:
    """Horner evaluation of ``p`` at ``x``."""
    coeffs = p.coeffs if isinstance(p, GfPoly) else p
    acc = 0
    for c in reversed(coeffs):
        acc = gf_mul(f, acc, x) ^ int(c)
    return acc


def gf_poly_mul(f: GfField, p: GfPoly, q: GfPoly) -> GfPoly:
    if not p.coeffs or not q.coeffs:
        return GfPoly()
    out = np.zeros(len(p) + len(q) - 1, dtype=np.int64)
    qa = np.asarray(q.coeffs, dtype=np.int64)
    for i, c in enumerate(p.coeffs):
        if c:
            out[i : i + len(qa)] ^= f.mul_vec(qa, c)
    return GfPoly(out)

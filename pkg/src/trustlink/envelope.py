"""Hybrid-encryption envelope: sender ciphertext generation and receiver recovery.

Sealing a chunked plaintext ``m`` under session key ``k`` and public key ``pk``:

1. ``c1 = encapsulate(pk, k)``  (X25519 ECIES: ephemeral key, HKDF, AES key wrap)
2. ``c2 = IV || AES-128-CBC(k, m)`` with PKCS#7 padding
3. ``h = SHA3-256(m)[:16]``

Opening recovers ``k'`` from ``c1``, decrypts ``m'`` and accepts only when the
digest of ``m'`` equals ``h``; anything else asks for retransmission.

Wire form::

    b"TSC1" | u32 len(c1) | c1 | u32 len(c2) | c2 | h[16]

Randomness (keys, IVs, ephemeral keys) comes from an explicit
``numpy.random.Generator`` so whole runs are reproducible from a seed.
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives import hashes, padding, serialization
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.keywrap import InvalidUnwrap, aes_key_unwrap, aes_key_wrap

MAGIC = b"TSC1"
KEY_BYTES = 16
BLOCK_BYTES = 16
DIGEST_BYTES = 16
POINT_BYTES = 32
WRAPPED_KEY_BYTES = KEY_BYTES + 8
C1_BYTES = POINT_BYTES + WRAPPED_KEY_BYTES
_HKDF_INFO = b"trustlink-kem-v1"


class EnvelopeError(ValueError):
    pass


@dataclass(frozen=True, repr=False)
class KeyPair:
    pk: bytes
    sk: bytes

    def __repr__(self):
        return f"KeyPair(pk={self.pk.hex()}, sk=<hidden>)"


@dataclass(frozen=True, repr=False)
class SessionKey:
    key: bytes

    def __post_init__(self):
        if len(self.key) != KEY_BYTES:
            raise EnvelopeError(f"session key must be {KEY_BYTES} bytes, got {len(self.key)}")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "SessionKey":
        return cls(rng.bytes(KEY_BYTES))

    def __repr__(self):
        return "SessionKey(<hidden>)"


@dataclass(frozen=True)
class SecureEnvelope:
    c1: bytes
    c2: bytes
    h: bytes

    def __post_init__(self):
        if len(self.h) != DIGEST_BYTES:
            raise EnvelopeError("digest field must be 16 bytes")
        body = len(self.c2) - BLOCK_BYTES
        if body <= 0 or body % BLOCK_BYTES:
            raise EnvelopeError("c2 must be an IV plus a positive number of AES blocks")

    def to_bytes(self) -> bytes:
        return b"".join(
            (MAGIC, struct.pack("<I", len(self.c1)), self.c1,
             struct.pack("<I", len(self.c2)), self.c2, self.h)
        )

    @classmethod
    def from_bytes(cls, b: bytes, allow_trailing: bool = False) -> "SecureEnvelope":
        """Parse the wire form; ``allow_trailing`` ignores codeword padding after ``h``."""
        b = bytes(b)
        if b[:4] != MAGIC:
            raise EnvelopeError("bad envelope magic")
        pos = 4
        fields = []
        for _ in range(2):
            if len(b) < pos + 4:
                raise EnvelopeError("truncated envelope")
            (n,) = struct.unpack_from("<I", b, pos)
            pos += 4
            if len(b) < pos + n:
                raise EnvelopeError("truncated envelope")
            fields.append(b[pos : pos + n])
            pos += n
        if len(b) < pos + DIGEST_BYTES:
            raise EnvelopeError("truncated envelope digest")
        h = b[pos : pos + DIGEST_BYTES]
        if not allow_trailing and len(b) != pos + DIGEST_BYTES:
            raise EnvelopeError("trailing bytes after envelope")
        return cls(fields[0], fields[1], h)

    def __len__(self):
        return 4 + 4 + len(self.c1) + 4 + len(self.c2) + DIGEST_BYTES


class OpenStatus(enum.Enum):
    SUCCESS = "success"
    RETRANSMIT = "retransmit-requested"


@dataclass(frozen=True)
class OpenOutcome:
    status: OpenStatus
    message: bytes | None = None

    @property
    def ok(self) -> bool:
        return self.status is OpenStatus.SUCCESS


RETRANSMIT = OpenOutcome(OpenStatus.RETRANSMIT)


def _private_from_seed(raw: bytes) -> X25519PrivateKey:
    return X25519PrivateKey.from_private_bytes(raw)


def _raw_public(key) -> bytes:
    return key.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)


def keygen(rng: np.random.Generator) -> KeyPair:
    sk = rng.bytes(POINT_BYTES)
    return KeyPair(_raw_public(_private_from_seed(sk)), sk)


def _kek(shared: bytes, eph_pub: bytes, pk: bytes) -> bytes:
    return HKDF(hashes.SHA256(), KEY_BYTES, salt=None, info=_HKDF_INFO + eph_pub + pk).derive(shared)


def encapsulate(pk: bytes, key: SessionKey, rng: np.random.Generator) -> bytes:
    """ECIES-style wrap of the session key under ``pk``: ephemeral point || wrapped key."""
    eph = _private_from_seed(rng.bytes(POINT_BYTES))
    eph_pub = _raw_public(eph)
    shared = eph.exchange(X25519PublicKey.from_public_bytes(pk))
    return eph_pub + aes_key_wrap(_kek(shared, eph_pub, pk), key.key)


def decapsulate(sk: bytes, c1: bytes) -> SessionKey:
    if len(c1) != C1_BYTES:
        raise EnvelopeError(f"c1 must be {C1_BYTES} bytes, got {len(c1)}")
    priv = _private_from_seed(sk)
    eph_pub, wrapped = c1[:POINT_BYTES], c1[POINT_BYTES:]
    try:
        shared = priv.exchange(X25519PublicKey.from_public_bytes(eph_pub))
        return SessionKey(aes_key_unwrap(_kek(shared, eph_pub, _raw_public(priv)), wrapped))
    except (InvalidUnwrap, ValueError) as exc:
        raise EnvelopeError("key decapsulation failed") from exc


def digest128(m: bytes) -> bytes:
    """SHA3-256 truncated to 128 bits."""
    return hashlib.sha3_256(m).digest()[:DIGEST_BYTES]


def aes_cbc_encrypt_blocks(key: bytes, iv: bytes, data: bytes) -> bytes:
    """Raw AES-CBC over whole blocks (no padding)."""
    enc = Cipher(algorithms.AES(key), modes.CBC(iv)).encryptor()
    return enc.update(data) + enc.finalize()


def aes_cbc_decrypt_blocks(key: bytes, iv: bytes, data: bytes) -> bytes:
    dec = Cipher(algorithms.AES(key), modes.CBC(iv)).decryptor()
    return dec.update(data) + dec.finalize()


def _pkcs7_pad(m: bytes) -> bytes:
    p = padding.PKCS7(8 * BLOCK_BYTES).padder()
    return p.update(m) + p.finalize()


def _pkcs7_unpad(m: bytes) -> bytes:
    u = padding.PKCS7(8 * BLOCK_BYTES).unpadder()
    return u.update(m) + u.finalize()


def sealed_length(m_len: int, preshared: bool = False) -> int:
    """Wire length of an envelope around an ``m_len``-byte plaintext."""
    c1 = 0 if preshared else C1_BYTES
    c2 = BLOCK_BYTES + (m_len // BLOCK_BYTES + 1) * BLOCK_BYTES
    return 12 + c1 + c2 + DIGEST_BYTES


def seal(
    m: bytes,
    usekey: SessionKey,
    pk: bytes | None,
    rng: np.random.Generator,
    preshared: bool = False,
) -> SecureEnvelope:
    """Seal an already-chunked plaintext.  With ``preshared`` the key is not encapsulated."""
    if not m:
        raise EnvelopeError("cannot seal an empty message")
    if preshared:
        c1 = b""
    else:
        if pk is None:
            raise EnvelopeError("a public key is required unless the session key is pre-shared")
        c1 = encapsulate(pk, usekey, rng)
    iv = rng.bytes(BLOCK_BYTES)
    c2 = iv + aes_cbc_encrypt_blocks(usekey.key, iv, _pkcs7_pad(m))
    h = digest128(m)
    return SecureEnvelope(c1, c2, h)


def open_envelope(
    c: SecureEnvelope | bytes,
    sk: bytes | None,
    preshared_key: SessionKey | None = None,
) -> OpenOutcome:
    """Recover the plaintext, or request retransmission on any inconsistency."""
    try:
        if not isinstance(c, SecureEnvelope):
            c = SecureEnvelope.from_bytes(c)
        if preshared_key is not None:
            if c.c1:
                return RETRANSMIT
            k = preshared_key
        else:
            if sk is None:
                raise EnvelopeError("private key required")
            k = decapsulate(sk, c.c1)
        iv, body = c.c2[:BLOCK_BYTES], c.c2[BLOCK_BYTES:]
        m = _pkcs7_unpad(aes_cbc_decrypt_blocks(k.key, iv, body))
    except (EnvelopeError, ValueError):
        return RETRANSMIT
    if digest128(m) != c.h:
        return RETRANSMIT
    return OpenOutcome(OpenStatus.SUCCESS, m)

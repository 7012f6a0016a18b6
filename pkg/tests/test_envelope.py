import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trustlink import envelope as env

# NIST SP 800-38A, F.2.1 / F.2.2 (CBC-AES128)
SP800_38A_KEY = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
SP800_38A_IV = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
SP800_38A_PT = bytes.fromhex(
    "6bc1bee22e409f96e93d7e117393172a"
    "ae2d8a571e03ac9c9eb76fac45af8e51"
    "30c81c46a35ce411e5fbc1191a0a52ef"
    "f69f2445df4f9b17ad2b417be66c3710"
)
SP800_38A_CT = bytes.fromhex(
    "7649abac8119b246cee98e9b12e9197d"
    "5086cb9b507219ee95db113a917678b2"
    "73bed6b8e3c1743b7116e69e22229516"
    "3ff1caa1681fac09120eca307586e1a7"
)
# FIPS 197, Appendix C.1 (one block, so CBC with a zero IV)
FIPS197_KEY = bytes.fromhex("000102030405060708090a0b0c0d0e0f")
FIPS197_PT = bytes.fromhex("00112233445566778899aabbccddeeff")
FIPS197_CT = bytes.fromhex("69c4e0d86a7b0430d8cdb78070b4c55a")
# FIPS 202 SHA3-256 examples
SHA3_256_EMPTY = bytes.fromhex("a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a")
SHA3_256_ABC = bytes.fromhex("3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532")


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(scope="module")
def keys():
    return env.keygen(np.random.default_rng(1))


def test_aes_cbc_vectors():
    assert env.aes_cbc_encrypt_blocks(SP800_38A_KEY, SP800_38A_IV, SP800_38A_PT) == SP800_38A_CT
    assert env.aes_cbc_decrypt_blocks(SP800_38A_KEY, SP800_38A_IV, SP800_38A_CT) == SP800_38A_PT
    assert env.aes_cbc_encrypt_blocks(FIPS197_KEY, bytes(16), FIPS197_PT) == FIPS197_CT
    assert env.aes_cbc_decrypt_blocks(FIPS197_KEY, bytes(16), FIPS197_CT) == FIPS197_PT


def test_digest_vectors():
    assert env.digest128(b"") == SHA3_256_EMPTY[:16]
    assert env.digest128(b"abc") == SHA3_256_ABC[:16]
    assert env.digest128(b"abc") == env.digest128(b"abc")


def test_digest_avalanche(rng):
    base = rng.bytes(256)
    seen = {env.digest128(base)}
    for bit in rng.choice(256 * 8, 1000, replace=False):
        flipped = bytearray(base)
        flipped[bit // 8] ^= 1 << (bit % 8)
        seen.add(env.digest128(bytes(flipped)))
    assert len(seen) == 1001


def test_keygen_deterministic():
    a = env.keygen(np.random.default_rng(1))
    b = env.keygen(np.random.default_rng(1))
    c = env.keygen(np.random.default_rng(2))
    assert a == b
    assert a.pk != c.pk
    assert len(a.pk) == 32 and len(a.sk) == 32


def test_encapsulation_roundtrip(keys, rng):
    for _ in range(100):
        k = env.SessionKey.random(rng)
        c1 = env.encapsulate(keys.pk, k, rng)
        assert len(c1) == env.C1_BYTES
        assert env.decapsulate(keys.sk, c1) == k


def test_session_key_length():
    with pytest.raises(env.EnvelopeError):
        env.SessionKey(b"\x00" * 2)


def test_seal_lengths_and_iv(keys, rng):
    k = env.SessionKey.random(rng)
    m = rng.bytes(32)
    a = env.seal(m, k, keys.pk, rng)
    b = env.seal(m, k, keys.pk, rng)
    assert len(a.c2) == 16 + 48
    assert a.c2 != b.c2 and a.h == b.h == env.digest128(m)
    assert len(a.to_bytes()) == env.sealed_length(len(m))
    with pytest.raises(env.EnvelopeError):
        env.seal(b"", k, keys.pk, rng)


def test_seal_deterministic_under_seed(keys):
    k = env.SessionKey(bytes(range(16)))
    a = env.seal(b"payload", k, keys.pk, np.random.default_rng(9))
    b = env.seal(b"payload", k, keys.pk, np.random.default_rng(9))
    assert a == b


def test_wire_format(keys, rng):
    e = env.seal(b"hello world", env.SessionKey.random(rng), keys.pk, rng)
    wire = e.to_bytes()
    assert wire[:4] == b"TSC1"
    (n1,) = struct.unpack_from("<I", wire, 4)
    assert n1 == len(e.c1) == 56
    (n2,) = struct.unpack_from("<I", wire, 8 + n1)
    assert wire[12 + n1 : 12 + n1 + n2] == e.c2
    assert wire[-16:] == e.h
    assert env.SecureEnvelope.from_bytes(wire) == e
    assert env.SecureEnvelope.from_bytes(wire + bytes(40), allow_trailing=True) == e
    with pytest.raises(env.EnvelopeError):
        env.SecureEnvelope.from_bytes(wire + b"\x00")
    with pytest.raises(env.EnvelopeError):
        env.SecureEnvelope.from_bytes(b"XSC1" + wire[4:])
    with pytest.raises(env.EnvelopeError):
        env.SecureEnvelope.from_bytes(wire[:-1])


@settings(max_examples=100, deadline=None)
@given(st.binary(min_size=1, max_size=300), st.integers(0, 2**32 - 1))
def test_open_seal_roundtrip(m, seed):
    rng = np.random.default_rng(seed)
    keys = env.keygen(rng)
    k = env.SessionKey.random(rng)
    out = env.open_envelope(env.seal(m, k, keys.pk, rng).to_bytes(), keys.sk)
    assert out.ok and out.message == m


def test_wrong_key_requests_retransmission(keys, rng):
    for _ in range(100):
        other = env.keygen(rng)
        m = rng.bytes(48)
        e = env.seal(m, env.SessionKey.random(rng), keys.pk, rng)
        assert env.open_envelope(e, other.sk).status is env.OpenStatus.RETRANSMIT


def test_single_bit_tamper_sweep(keys, rng):
    m = rng.bytes(200)
    wire = env.seal(m, env.SessionKey.random(rng), keys.pk, rng).to_bytes()
    accepted_wrong = retransmits = 0
    for _ in range(1000):
        bit = int(rng.integers(0, 8 * len(wire)))
        t = bytearray(wire)
        t[bit // 8] ^= 1 << (bit % 8)
        out = env.open_envelope(bytes(t), keys.sk)
        if out.ok and out.message != m:
            accepted_wrong += 1
        retransmits += not out.ok
    assert accepted_wrong == 0
    assert retransmits == 1000


def test_preshared_mode(rng):
    k = env.SessionKey.random(rng)
    e = env.seal(b"pre-arranged", k, None, rng, preshared=True)
    assert e.c1 == b""
    assert env.open_envelope(e, None, preshared_key=k).message == b"pre-arranged"
    assert not env.open_envelope(e, None, preshared_key=env.SessionKey.random(rng)).ok
    with pytest.raises(env.EnvelopeError):
        env.seal(b"x", k, None, rng)

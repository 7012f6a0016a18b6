import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trustlink import envelope as env
from trustlink import framing
from trustlink.pipeline import (
    LinkConfig, LinkReport, default_chunk_bytes, frame_rng, link_keys,
    recover_from_bits, run_link, transmit_message,
)
from trustlink.sweep import generate_features


@pytest.fixture(scope="module")
def keys():
    return link_keys(0)


@pytest.fixture(scope="module")
def tensor():
    return generate_features((10, 256), 3)


def test_default_chunk_fills_one_codeword():
    b = default_chunk_bytes()
    wire = env.sealed_length(b + framing.MANIFEST_SIZE)
    assert wire * 8 <= 11520 * 18 < (wire + 16) * 8


def test_rs_on_frame_length(keys, tensor):
    rng = np.random.default_rng(0)
    fr = transmit_message(tensor, env.SessionKey.random(rng), keys.pk, LinkConfig(), rng)
    assert fr.n_codewords == 1
    assert fr.bits.size == 12800 * 18
    assert fr.block.symbols.shape == (1, 12800 * 9)


def test_rs_off_frame_is_envelope(keys, tensor):
    rng = np.random.default_rng(0)
    fr = transmit_message(tensor, env.SessionKey.random(rng), keys.pk, LinkConfig(rs_enabled=False), rng)
    assert fr.bits.size == 8 * fr.envelope_bytes
    assert fr.envelope_bytes == env.sealed_length(len(fr.plaintext))


def test_multi_codeword_frame(keys):
    t = generate_features((10, 1024), 1)
    cfg = LinkConfig()
    rng = np.random.default_rng(1)
    fr = transmit_message(t, env.SessionKey.random(rng), keys.pk, cfg, rng)
    assert fr.n_codewords == 2
    rec = recover_from_bits(fr.bits, keys.sk, cfg, fr)
    assert rec.outcome.ok and rec.tensor == t


def test_transmit_deterministic(keys, tensor):
    a = transmit_message(tensor, env.SessionKey(bytes(16)), keys.pk, LinkConfig(), np.random.default_rng(5))
    b = transmit_message(tensor, env.SessionKey(bytes(16)), keys.pk, LinkConfig(), np.random.default_rng(5))
    assert np.array_equal(a.block.symbols, b.block.symbols)


def corrupt_symbols(bits, count, rng, m=18):
    sym = framing.bits_to_symbols(bits, m)
    pos = rng.choice(sym.size, count, replace=False)
    sym[pos] ^= rng.integers(1, 1 << m, count)
    return framing.symbols_to_bits(sym, m)


def test_recover_through_640_symbol_errors(keys, tensor):
    cfg = LinkConfig()
    rng = np.random.default_rng(640)
    fr = transmit_message(tensor, env.SessionKey.random(rng), keys.pk, cfg, rng)
    rec = recover_from_bits(corrupt_symbols(fr.bits, 640, rng), keys.sk, cfg, fr)
    assert rec.outcome.ok and rec.tensor == tensor
    assert rec.report.rs_failures == 0 and rec.report.post_rs_symbol_errors == 0


def test_641_symbol_errors_request_retransmission(keys, tensor):
    cfg = LinkConfig()
    rng = np.random.default_rng(641)
    fr = transmit_message(tensor, env.SessionKey.random(rng), keys.pk, cfg, rng)
    rec = recover_from_bits(corrupt_symbols(fr.bits, 641, rng), keys.sk, cfg, fr)
    assert not rec.outcome.ok
    assert rec.report.undetected_errors == 0


def test_rs_off_single_bit_error_retransmits(keys, tensor):
    cfg = LinkConfig(rs_enabled=False)
    rng = np.random.default_rng(2)
    fr = transmit_message(tensor, env.SessionKey.random(rng), keys.pk, cfg, rng)
    for bit in rng.choice(fr.bits.size, 20, replace=False):
        bits = fr.bits.copy()
        bits[bit] ^= 1
        rec = recover_from_bits(bits, keys.sk, cfg, fr)
        assert not rec.outcome.ok and rec.report.undetected_errors == 0


@pytest.mark.parametrize("channel", ["awgn", "rayleigh", "rician"])
def test_clean_channel_delivers(channel, tensor):
    cfg = LinkConfig(channel=channel, snr_db=40.0, rx_antennas=2 if channel != "awgn" else None)
    rep = run_link(tensor, cfg)
    assert rep.success and rep.feature_mse == 0.0 and rep.undetected_errors == 0


def test_corrupt_channel_without_arq(tensor):
    for rs in (True, False):
        rep = run_link(tensor, LinkConfig(snr_db=-40.0, max_retransmissions=0, rs_enabled=rs))
        assert not rep.success
        assert rep.undetected_errors == 0 and rep.attempts == 1
        assert math.isnan(rep.feature_mse)


def test_arq_is_bounded(tensor):
    rep = run_link(tensor, LinkConfig(snr_db=-10.0, max_retransmissions=2))
    assert rep.attempts == 3 and rep.retransmissions == 2 and not rep.success


def test_multiuser_uneven_lengths():
    audio = generate_features((10, 128), 1)
    video = generate_features((10, 1024), 2)
    rep = run_link([audio, video], LinkConfig(mode="multiuser", snr_db=30.0))
    assert rep.success and rep.attempts == 2
    assert rep.feature_mse == 0.0
    with pytest.raises(ValueError):
        run_link(audio, LinkConfig(mode="multiuser"))


def test_multiuser_rayleigh_integrity():
    rep = LinkReport()
    for i in range(4):
        rng = frame_rng(9, i)
        ts = [generate_features((10, 64), 2 * i), generate_features((10, 64), 2 * i + 1)]
        rep = rep + run_link(ts, LinkConfig(channel="rayleigh", mode="multiuser", snr_db=9.0), rng=rng)
    assert rep.undetected_errors == 0
    assert rep.attempts <= 4 * 2 * 4


def test_preshared_mode(tensor):
    cfg = LinkConfig(preshared_key=True)
    assert cfg.payload_chunk_bytes > default_chunk_bytes()
    rep = run_link(tensor, cfg)
    assert rep.success and rep.feature_mse == 0.0


def test_reproducible_reports(tensor):
    cfg = LinkConfig(channel="rayleigh", snr_db=9.0, rx_antennas=2, seed=11)
    assert run_link(tensor, cfg) == run_link(tensor, cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        LinkConfig(max_retransmissions=-1)
    with pytest.raises(ValueError):
        LinkConfig(mode="multiuser", rx_antennas=2)
    with pytest.raises(ValueError):
        LinkConfig(channel="awgn", rx_antennas=2)
    assert LinkConfig(channel="rayleigh", rx_antennas=2).rx == 2


def test_report_addition():
    a = LinkReport(frames_sent=1, frames_accepted=1, pre_rs_bit_errors=2, pre_rs_bits=10)
    b = LinkReport(frames_sent=1, pre_rs_bits=10)
    c = a + b
    assert c.frames_sent == 2 and c.frame_success_rate == 0.5 and c.pre_rs_ber == 0.1


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["awgn", "rayleigh", "rician"]), st.floats(-5, 12), st.booleans(),
       st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_integrity_and_arq_invariants(channel, snr, rs, retx, seed):
    t = generate_features((4, 32), seed % 1000)
    cfg = LinkConfig(channel=channel, snr_db=snr, rs_enabled=rs, max_retransmissions=retx,
                     seed=seed, rx_antennas=None if channel == "awgn" else 2)
    rep = run_link(t, cfg)
    assert rep.undetected_errors == 0
    assert rep.attempts <= 1 + retx
    if rep.success:
        assert rep.feature_mse == 0.0

"""End-to-end link: framing, envelope, RS, QPSK, channel, detection, and ARQ.

Transmit chain for one message::

    serialize -> chunk -> seal -> pack to 18-bit symbols -> RS encode
    per codeword -> symbols to bits -> QPSK

The receive chain runs it backwards and gates acceptance on the envelope
digest.  A failed RS decode or digest mismatch asks for retransmission of
the whole message over a freshly drawn channel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import envelope as env
from . import framing
from .phy import ChannelModel, ChannelRealization, ComplexSymbolBlock, DEFAULT_RICIAN_K
from .phy import demodulate, modulate, sample_channel, transmit_over_channel, zf_lmmse_detect
from .rscodec import DEFAULT_K, DEFAULT_NROOTS, RsCode, link_profile


class LinkMode(str, enum.Enum):
    SISO = "siso"
    MULTIUSER = "multiuser"


# Antennas per user in multiuser mode: the audio user has one, the video user two.
MULTIUSER_STREAMS = (1, 2)
MULTIUSER_RX = 4


@dataclass(frozen=True)
class LinkConfig:
    channel: ChannelModel = ChannelModel.AWGN
    snr_db: float = 30.0
    rician_k: float = DEFAULT_RICIAN_K
    mode: LinkMode = LinkMode.SISO
    rx_antennas: int | None = None
    tx_antennas: int = 1
    rs_enabled: bool = True
    rs_k: int = DEFAULT_K
    rs_nroots: int = DEFAULT_NROOTS
    modulation: str = "qpsk"
    max_retransmissions: int = 3
    seed: int = 0
    preshared_key: bool = False
    chunk_bytes: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "channel", ChannelModel(self.channel))
        object.__setattr__(self, "mode", LinkMode(self.mode))
        if self.max_retransmissions < 0:
            raise ValueError("max_retransmissions must be nonnegative")
        if self.rx < self.total_streams:
            raise ValueError(f"{self.rx} receive antennas cannot separate {self.total_streams} streams")
        if self.channel is ChannelModel.AWGN and self.mode is LinkMode.SISO and self.rx != self.tx_antennas:
            raise ValueError("point-to-point AWGN needs as many receive as transmit antennas")
        if self.chunk_bytes is not None and self.chunk_bytes <= 0:
            raise ValueError("chunk_bytes must be positive")

    @property
    def user_streams(self) -> tuple[int, ...]:
        if self.mode is LinkMode.MULTIUSER:
            return MULTIUSER_STREAMS
        return (self.tx_antennas,)

    @property
    def total_streams(self) -> int:
        return sum(self.user_streams)

    @property
    def rx(self) -> int:
        if self.rx_antennas is not None:
            return self.rx_antennas
        return MULTIUSER_RX if self.mode is LinkMode.MULTIUSER else self.tx_antennas

    @property
    def code(self) -> RsCode | None:
        return link_profile(self.rs_k, self.rs_nroots) if self.rs_enabled else None

    @property
    def payload_chunk_bytes(self) -> int:
        return self.chunk_bytes if self.chunk_bytes is not None else default_chunk_bytes(
            self.rs_k, preshared=self.preshared_key
        )


def default_chunk_bytes(rs_k: int = DEFAULT_K, preshared: bool = False, symbol_bits: int = framing.SYMBOL_BITS) -> int:
    """Largest chunk whose manifest-prefixed, sealed envelope fits one codeword payload."""
    payload = rs_k * symbol_bits // 8
    fixed = env.sealed_length(0, preshared) - env.BLOCK_BYTES
    blocks = (payload - fixed) // env.BLOCK_BYTES
    return blocks * env.BLOCK_BYTES - 1 - framing.MANIFEST_SIZE


@dataclass
class LinkReport:
    """Counters for one or more frames; ``+`` aggregates."""

    frames_sent: int = 0
    frames_accepted: int = 0
    attempts: int = 0
    retransmissions: int = 0
    pre_rs_bit_errors: int = 0
    pre_rs_bits: int = 0
    post_rs_symbol_errors: int = 0
    rs_failures: int = 0
    undetected_errors: int = 0
    feature_sq_error: float = 0.0
    feature_elements: int = 0

    def __add__(self, other: "LinkReport") -> "LinkReport":
        return LinkReport(*(a + b for a, b in zip(self._values(), other._values())))

    def _values(self):
        return [getattr(self, f) for f in self.__dataclass_fields__]

    @property
    def success(self) -> bool:
        return self.frames_sent > 0 and self.frames_accepted == self.frames_sent

    @property
    def pre_rs_ber(self) -> float:
        return self.pre_rs_bit_errors / self.pre_rs_bits if self.pre_rs_bits else 0.0

    @property
    def frame_success_rate(self) -> float:
        return self.frames_accepted / self.frames_sent if self.frames_sent else 0.0

    @property
    def feature_mse(self) -> float:
        """Mean squared error over accepted payloads; NaN when none was accepted."""
        if not self.feature_elements:
            return math.nan
        return self.feature_sq_error / self.feature_elements


@dataclass(frozen=True, eq=False)
class TxFrame:
    """One user's transmitted message.

    ``block`` and the layout fields are what the receiver learns from
    signalling; ``bits``, ``plaintext`` and ``message_symbols`` are kept as
    references for error counting only.
    """

    block: ComplexSymbolBlock
    bits: np.ndarray
    plaintext: bytes
    envelope_bytes: int
    n_codewords: int
    message_symbols: np.ndarray | None = field(default=None, repr=False)


def transmit_message(
    t: framing.FeatureTensor,
    usekey: env.SessionKey,
    pk: bytes | None,
    cfg: LinkConfig,
    rng: np.random.Generator,
    streams: int | None = None,
) -> TxFrame:
    streams = cfg.user_streams[0] if streams is None else streams
    plaintext = framing.chunk_message(framing.serialize_features(t), cfg.payload_chunk_bytes)
    wire = env.seal(plaintext, usekey, pk, rng, preshared=cfg.preshared_key).to_bytes()
    code = cfg.code
    if code is None:
        bits = np.unpackbits(np.frombuffer(wire, dtype=np.uint8))
        return TxFrame(modulate(bits, streams, cfg.modulation), bits, plaintext, len(wire), 0)

    symbols = framing.pack_symbols(wire).symbols
    ncw = -(-symbols.size // code.k)
    msg = np.zeros(ncw * code.k, dtype=np.int64)
    msg[: symbols.size] = symbols
    msg = msg.reshape(ncw, code.k)
    coded = np.concatenate([code.encode(row) for row in msg])
    bits = framing.symbols_to_bits(coded, code.field.m)
    return TxFrame(modulate(bits, streams, cfg.modulation), bits, plaintext, len(wire), ncw, msg)


@dataclass(frozen=True)
class Reception:
    outcome: env.OpenOutcome
    report: LinkReport
    tensor: framing.FeatureTensor | None = None


def recover_from_bits(
    bits: np.ndarray,
    sk: bytes | None,
    cfg: LinkConfig,
    frame: TxFrame | None = None,
    preshared_key: env.SessionKey | None = None,
) -> Reception:
    """Hard bits to plaintext: RS decode, envelope parse, open, merge."""
    rep = LinkReport(attempts=1)
    code = cfg.code
    if frame is not None:
        ref = frame.bits
        rep.pre_rs_bit_errors = int(np.count_nonzero(bits[: ref.size] != ref))
        rep.pre_rs_bits = int(ref.size)

    if code is None:
        wire = np.packbits(bits[: bits.size - bits.size % 8]).tobytes()
        if frame is not None:
            rep.post_rs_symbol_errors = _symbol_errors(bits, frame.bits)
    else:
        m = code.field.m
        ncw = bits.size // (code.n * m)
        words = framing.bits_to_symbols(bits[: ncw * code.n * m], m).reshape(ncw, code.n)
        decoded = []
        for w in words:
            out = code.decode(w)
            if not out.ok:
                rep.rs_failures += 1
            decoded.append(out.message)
        msg = np.concatenate(decoded) if decoded else np.zeros(0, dtype=np.int64)
        if frame is not None and frame.message_symbols is not None:
            ref = frame.message_symbols.ravel()
            rep.post_rs_symbol_errors = int(np.count_nonzero(msg[: ref.size] != ref))
        if rep.rs_failures:
            return Reception(env.RETRANSMIT, rep)
        # trailing bits of a partial byte are codeword padding
        wire = np.packbits(framing.symbols_to_bits(msg, m)).tobytes()

    try:
        envelope = env.SecureEnvelope.from_bytes(wire, allow_trailing=True)
    except env.EnvelopeError:
        return Reception(env.RETRANSMIT, rep)
    outcome = env.open_envelope(envelope, sk, preshared_key)
    if not outcome.ok:
        return Reception(outcome, rep)

    tensor = None
    try:
        tensor = framing.deserialize_features(framing.merge_message(outcome.message))
    except framing.FramingError:
        pass
    if frame is not None and (outcome.message != frame.plaintext or tensor is None):
        rep.undetected_errors += 1
    return Reception(outcome, rep, tensor)


def _symbol_errors(bits, ref, width: int = framing.SYMBOL_BITS) -> int:
    n = ref.size
    diff = np.zeros(-(-n // width) * width, dtype=bool)
    diff[:n] = bits[:n] != ref
    return int(np.count_nonzero(diff.reshape(-1, width).any(axis=1)))


def receive_message(
    Y: np.ndarray,
    ch: ChannelRealization,
    sk: bytes | None,
    cfg: LinkConfig,
    frame: TxFrame,
    streams: Sequence[int] | None = None,
    preshared_key: env.SessionKey | None = None,
) -> Reception:
    """Detect the rows ``streams`` of the jointly transmitted block and recover one message."""
    detected = zf_lmmse_detect(ch, Y)
    rows = detected.estimates if streams is None else detected.estimates[list(streams)]
    rows = rows[:, : frame.block.length]
    bits = demodulate(rows, frame.block.n_bits, cfg.modulation)
    return recover_from_bits(bits, sk, cfg, frame, preshared_key)


def frame_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for (master seed, key...), stable across parallel runs."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def link_keys(seed: int) -> env.KeyPair:
    return env.keygen(frame_rng(seed, 0x6B6579))


def run_link(
    t: framing.FeatureTensor | Sequence[framing.FeatureTensor],
    cfg: LinkConfig,
    rng: np.random.Generator | None = None,
    keys: env.KeyPair | None = None,
) -> LinkReport:
    """Deliver one frame (one message per user) with whole-message ARQ.

    Each attempt redraws the channel and noise; users whose message was
    already accepted stay silent on later attempts.
    """
    tensors = [t] if isinstance(t, framing.FeatureTensor) else list(t)
    if len(tensors) != len(cfg.user_streams):
        raise ValueError(f"{cfg.mode.value} mode carries {len(cfg.user_streams)} messages, got {len(tensors)}")
    rng = frame_rng(cfg.seed, 0) if rng is None else rng
    keys = link_keys(cfg.seed) if keys is None else keys

    usekeys = [env.SessionKey.random(rng) for _ in tensors]
    frames = [
        transmit_message(x, k, keys.pk, cfg, rng, streams=s)
        for x, k, s in zip(tensors, usekeys, cfg.user_streams)
    ]
    report = LinkReport(frames_sent=1)
    pending = list(range(len(tensors)))
    for attempt in range(1 + cfg.max_retransmissions):
        if not pending:
            break
        if attempt:
            report.retransmissions += 1
        width = sum(cfg.user_streams[u] for u in pending)
        T = max(frames[u].block.length for u in pending)
        X = np.empty((width, T), dtype=complex)
        rows = {}
        r0 = 0
        for u in pending:
            blk = frames[u].block
            s = blk.streams
            X[r0 : r0 + s, : blk.length] = blk.symbols
            if blk.length < T:
                # equal-power filler after a shorter user's frame
                filler = rng.integers(0, 2, size=2 * s * (T - blk.length), dtype=np.uint8)
                X[r0 : r0 + s, blk.length :] = modulate(filler, s).symbols
            rows[u] = range(r0, r0 + s)
            r0 += s
        ch = sample_channel(cfg.channel, cfg.rx, width, cfg.snr_db, rng, cfg.rician_k)
        Y = transmit_over_channel(ch, X, rng)
        still = []
        for u in pending:
            rec = receive_message(
                Y, ch, keys.sk, cfg, frames[u], rows[u],
                preshared_key=usekeys[u] if cfg.preshared_key else None,
            )
            report = report + replace(rec.report, feature_sq_error=0.0, feature_elements=0)
            if rec.outcome.ok:
                if rec.tensor is not None:
                    diff = rec.tensor.data.astype(np.float64) - tensors[u].data.astype(np.float64)
                    report.feature_sq_error += float(np.sum(diff * diff))
                    report.feature_elements += tensors[u].size
            else:
                still.append(u)
        pending = still
    if not pending:
        report.frames_accepted = 1
    return report

"""QPSK modulation, block-fading MIMO channels and ZF-LMMSE detection.

Signals are arrays of shape ``(streams, T)``: one row per transmit stream,
one column per symbol time.  The received block is ``Y = H X + N`` with
``H`` of shape ``(M, Nt)`` held constant over the block, and detection is

    X_hat = (H^H H + (noise_var / signal_var) I)^-1 H^H Y
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

SQRT_HALF = np.sqrt(0.5)
DEFAULT_RICIAN_K = 3.0


class ChannelModel(str, enum.Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"
    RICIAN = "rician"


class DetectionError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True, eq=False)
class ComplexSymbolBlock:
    """Modulated streams plus the count of real data bits they carry."""

    symbols: np.ndarray
    n_bits: int

    @property
    def streams(self) -> int:
        return self.symbols.shape[0]

    @property
    def length(self) -> int:
        return self.symbols.shape[1]


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    model: ChannelModel
    H: np.ndarray
    noise_var: float
    signal_var: float = 1.0
    rician_k: float | None = None

    @property
    def rx(self) -> int:
        return self.H.shape[0]

    @property
    def tx(self) -> int:
        return self.H.shape[1]

    def subset(self, columns) -> "ChannelRealization":
        """Channel seen by a subset of transmit streams."""
        return ChannelRealization(self.model, self.H[:, columns], self.noise_var, self.signal_var, self.rician_k)


@dataclass(frozen=True, eq=False)
class DetectedBlock:
    estimates: np.ndarray
    bits: np.ndarray


# --- modulation -------------------------------------------------------------

def qpsk_map(bits) -> np.ndarray:
    """Gray QPSK on a flat bit array of even length: 00 -> (1+1j)/sqrt(2)."""
    b = np.asarray(bits, dtype=np.int8).reshape(-1, 2)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) * SQRT_HALF


def qpsk_demap(symbols) -> np.ndarray:
    """Hard decision per axis; a value exactly on a boundary decides 0."""
    s = np.asarray(symbols).ravel()
    out = np.empty((s.size, 2), dtype=np.uint8)
    out[:, 0] = s.real < 0
    out[:, 1] = s.imag < 0
    return out.ravel()


def modulate(bits, streams: int = 1, scheme: str = "qpsk") -> ComplexSymbolBlock:
    """Map bits to QPSK and spread symbols round-robin over ``streams``.

    Tail bits are zero-padded to fill the last symbol time; ``n_bits``
    records the true count.
    """
    if scheme != "qpsk":
        raise ValueError(f"unsupported modulation {scheme!r}")
    bits = np.asarray(bits, dtype=np.uint8).ravel()
    per_time = 2 * streams
    total = -(-bits.size // per_time) * per_time
    padded = np.zeros(total, dtype=np.uint8)
    padded[: bits.size] = bits
    syms = qpsk_map(padded).reshape(-1, streams).T
    return ComplexSymbolBlock(np.ascontiguousarray(syms), int(bits.size))


def demodulate(block, n_bits: int | None = None, scheme: str = "qpsk") -> np.ndarray:
    """Inverse of :func:`modulate`; accepts a block or a raw ``(streams, T)`` array."""
    if scheme != "qpsk":
        raise ValueError(f"unsupported modulation {scheme!r}")
    if isinstance(block, ComplexSymbolBlock):
        n_bits = block.n_bits if n_bits is None else n_bits
        block = block.symbols
    syms = np.atleast_2d(np.asarray(block))
    bits = qpsk_demap(syms.T.ravel())
    return bits if n_bits is None else bits[:n_bits]


def qpsk_ber_awgn(snr_db) -> np.ndarray:
    """Gray QPSK bit error rate at per-symbol SNR Es/N0 (dB): Q(sqrt(Es/N0))."""
    gamma = 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    return 0.5 * erfc(np.sqrt(gamma / 2.0))


# --- channel ----------------------------------------------------------------

def _cn(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(var / 2.0)


def sample_channel(
    model,
    rx: int,
    tx: int,
    snr_db: float,
    rng: np.random.Generator,
    rician_k: float = DEFAULT_RICIAN_K,
    signal_var: float = 1.0,
) -> ChannelRealization:
    """Draw one block-fading realization; ``noise_var = signal_var * 10^(-snr/10)``."""
    model = ChannelModel(model)
    if tx < 1 or rx < tx:
        raise ValueError(f"need rx >= tx >= 1, got rx={rx}, tx={tx}")
    if model is ChannelModel.AWGN:
        H = np.eye(rx, tx, dtype=complex)
        k = None
    elif model is ChannelModel.RAYLEIGH:
        H = _cn(rng, (rx, tx))
        k = None
    else:
        if rician_k < 0:
            raise ValueError("Rician K-factor must be nonnegative")
        los = np.ones((rx, tx), dtype=complex)
        H = np.sqrt(rician_k / (rician_k + 1)) * los + np.sqrt(1 / (rician_k + 1)) * _cn(rng, (rx, tx))
        k = float(rician_k)
    noise_var = signal_var * 10.0 ** (-snr_db / 10.0)
    return ChannelRealization(model, H, float(noise_var), float(signal_var), k)


def transmit_over_channel(ch: ChannelRealization, X, rng: np.random.Generator) -> np.ndarray:
    X = X.symbols if isinstance(X, ComplexSymbolBlock) else np.asarray(X)
    X = np.atleast_2d(X)
    if X.shape[0] != ch.tx:
        raise ValueError(f"channel expects {ch.tx} streams, got {X.shape[0]}")
    Y = ch.H @ X
    if ch.noise_var > 0:
        Y = Y + _cn(rng, Y.shape, ch.noise_var)
    return Y


# --- detection --------------------------------------------------------------

def detection_matrix(ch: ChannelRealization) -> np.ndarray:
    """W = (H^H H + (noise_var/signal_var) I)^-1 H^H."""
    H = ch.H
    Hh = H.conj().T
    A = Hh @ H + (ch.noise_var / ch.signal_var) * np.eye(H.shape[1])
    if ch.noise_var == 0 and np.linalg.matrix_rank(A) < H.shape[1]:
        raise DetectionError("noiseless detection with a rank-deficient channel")
    try:
        return np.linalg.solve(A, Hh)
    except np.linalg.LinAlgError as exc:
        raise DetectionError(str(exc)) from exc


def zf_lmmse_detect(ch: ChannelRealization, Y, n_bits: int | None = None) -> DetectedBlock:
    W = detection_matrix(ch)
    X_hat = W @ np.atleast_2d(Y)
    return DetectedBlock(X_hat, demodulate(X_hat, n_bits))


def simulate_uncoded_ber(
    model,
    snr_db: float,
    rng: np.random.Generator,
    rx: int = 1,
    tx: int = 1,
    blocks: int = 200,
    block_len: int = 500,
    rician_k: float = DEFAULT_RICIAN_K,
) -> tuple[int, int]:
    """Bit errors and bit count for QPSK + ZF-LMMSE over ``blocks`` fading blocks.

    Each block draws its own channel; the noise scales with the SNR only, so
    calling this with identically seeded generators at several SNRs reuses
    the same channel and noise shapes across the curve.
    """
    bits = rng.integers(0, 2, size=(blocks, tx, 2 * block_len), dtype=np.uint8)
    X = ((1 - 2 * bits[..., 0::2].astype(float)) + 1j * (1 - 2 * bits[..., 1::2].astype(float))) * SQRT_HALF
    chans = [sample_channel(model, rx, tx, snr_db, rng, rician_k) for _ in range(blocks)]
    H = np.stack([c.H for c in chans])
    noise_var = chans[0].noise_var
    N = _cn(rng, (blocks, rx, block_len), noise_var)
    Y = H @ X + N
    Hh = np.conj(np.swapaxes(H, 1, 2))
    A = Hh @ H + noise_var * np.eye(tx)
    X_hat = np.linalg.solve(A, Hh @ Y)
    est = np.empty_like(bits)
    est[..., 0::2] = X_hat.real < 0
    est[..., 1::2] = X_hat.imag < 0
    return int(np.count_nonzero(est != bits)), int(bits.size)

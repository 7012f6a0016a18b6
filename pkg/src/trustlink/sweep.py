"""SNR x channel x RS-mode sweeps and their CSV output.

Each (channel, snr) pair gets an index; frame ``i`` of that pair draws its
features, keys and channel from ``(seed, pair index, i)``, so the rs-on and
rs-off rows of a pair see the same payloads and the result does not depend
on how many workers ran the sweep.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .framing import FeatureTensor, FramingError
from .phy import DEFAULT_RICIAN_K, ChannelModel
from .pipeline import LinkConfig, LinkMode, LinkReport, frame_rng, link_keys, run_link

CSV_HEADER = (
    "channel", "snr_db", "rs_enabled", "frames", "pre_rs_ber", "frame_success_rate",
    "avg_retransmissions", "undetected_errors", "feature_mse", "wall_seconds",
)

DEFAULT_SNRS = tuple(float(s) for s in range(0, 31, 3))
DEFAULT_CHANNELS = (ChannelModel.AWGN, ChannelModel.RAYLEIGH, ChannelModel.RICIAN)
# T = 10 one-second segments of 256-dim features for both modalities
DEFAULT_AUDIO_DIMS = (10, 256)
DEFAULT_VIDEO_DIMS = (10, 256)
THREADS_ENV = "TRUSTLINK_THREADS"


def generate_features(dims, seed: int) -> FeatureTensor:
    """Seeded standard-normal float32 tensor standing in for encoder output."""
    dims = tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise FramingError(f"invalid feature dims {dims}")
    data = np.random.default_rng(seed).standard_normal(dims, dtype=np.float32)
    return FeatureTensor(dims, data)


def parse_snr_range(text: str) -> tuple[float, ...]:
    """``"a:b:c"`` inclusive of ``b``; a bare number or comma list also works."""
    if ":" not in text:
        return tuple(float(v) for v in text.split(","))
    parts = [float(v) for v in text.split(":")]
    if len(parts) == 2:
        parts.append(1.0)
    start, stop, step = parts
    if step <= 0:
        raise ValueError("SNR step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty SNR range {text!r}")
    return tuple(round(start + i * step, 9) for i in range(count))


@dataclass(frozen=True)
class SweepSpec:
    channels: tuple[ChannelModel, ...] = DEFAULT_CHANNELS
    snrs: tuple[float, ...] = DEFAULT_SNRS
    frames: int = 10
    rs_modes: tuple[bool, ...] = (True, False)
    mode: LinkMode = LinkMode.SISO
    rx_antennas: int | None = None
    rician_k: float = DEFAULT_RICIAN_K
    max_retransmissions: int = 3
    seed: int = 0
    audio_dims: tuple[int, ...] = DEFAULT_AUDIO_DIMS
    video_dims: tuple[int, ...] = DEFAULT_VIDEO_DIMS
    timing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(ChannelModel(c) for c in self.channels))
        object.__setattr__(self, "mode", LinkMode(self.mode))
        if not self.channels or not self.snrs or not self.rs_modes:
            raise ValueError("sweep needs at least one channel, SNR and RS mode")
        if self.frames < 1:
            raise ValueError("frames must be positive")

    def points(self):
        """Sorted ``(channel, snr, rs_enabled, pair_index)`` tuples."""
        pairs = sorted({(c.value, float(s)) for c in self.channels for s in self.snrs})
        out = []
        for idx, (c, s) in enumerate(pairs):
            for rs in sorted(set(self.rs_modes)):
                out.append((ChannelModel(c), s, rs, idx))
        return out

    def link_config(self, channel, snr, rs) -> LinkConfig:
        return LinkConfig(
            channel=channel, snr_db=snr, rician_k=self.rician_k, mode=self.mode,
            rx_antennas=self.rx_antennas, rs_enabled=rs,
            max_retransmissions=self.max_retransmissions, seed=self.seed,
        )


@dataclass(frozen=True)
class SweepRow:
    channel: str
    snr_db: float
    rs_enabled: bool
    frames: int
    pre_rs_ber: float
    frame_success_rate: float
    avg_retransmissions: float
    undetected_errors: int
    feature_mse: float
    wall_seconds: float | None = None

    @classmethod
    def from_report(cls, channel, snr, rs, rep: LinkReport, wall=None) -> "SweepRow":
        return cls(
            channel=ChannelModel(channel).value, snr_db=float(snr), rs_enabled=bool(rs),
            frames=rep.frames_sent, pre_rs_ber=rep.pre_rs_ber,
            frame_success_rate=rep.frame_success_rate,
            avg_retransmissions=rep.retransmissions / rep.frames_sent if rep.frames_sent else 0.0,
            undetected_errors=rep.undetected_errors, feature_mse=rep.feature_mse,
            wall_seconds=wall,
        )


def frame_tensors(mode: LinkMode, rng: np.random.Generator, audio_dims, video_dims):
    seeds = rng.integers(0, 2**63, size=2)
    if LinkMode(mode) is LinkMode.MULTIUSER:
        return (generate_features(audio_dims, int(seeds[0])), generate_features(video_dims, int(seeds[1])))
    return generate_features(audio_dims, int(seeds[0]))


def run_point(cfg: LinkConfig, frames: int, pair_index: int = 0,
              audio_dims=DEFAULT_AUDIO_DIMS, video_dims=DEFAULT_VIDEO_DIMS) -> LinkReport:
    keys = link_keys(cfg.seed)
    total = LinkReport()
    for i in range(frames):
        rng = frame_rng(cfg.seed, pair_index, i)
        t = frame_tensors(cfg.mode, rng, audio_dims, video_dims)
        total = total + run_link(t, cfg, rng=rng, keys=keys)
    return total


def worker_count(requested: int | None = None) -> int:
    if requested is None:
        env_val = os.environ.get(THREADS_ENV)
        requested = int(env_val) if env_val else (os.cpu_count() or 1)
    return max(1, requested)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[SweepRow]:
    """One row per (channel, snr, rs mode), ordered by that key."""

    def one(point):
        channel, snr, rs, idx = point
        t0 = time.perf_counter()
        try:
            rep = run_point(spec.link_config(channel, snr, rs), spec.frames, idx,
                            spec.audio_dims, spec.video_dims)
        except Exception:  # noqa: BLE001 - a failed point is recorded, not fatal
            return SweepRow(channel.value, snr, rs, 0, math.nan, math.nan, math.nan, 0, math.nan)
        wall = time.perf_counter() - t0 if spec.timing else None
        return SweepRow.from_report(channel, snr, rs, rep, wall)

    points = spec.points()
    with ThreadPoolExecutor(max_workers=worker_count(workers)) as pool:
        return list(pool.map(one, points))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    key = lambda r: (r.channel, r.snr_db, r.rs_enabled)  # noqa: E731
    for r in sorted(rows, key=key):
        w.writerow([_fmt(getattr(r, f.name)) for f in fields(SweepRow)])
    return buf.getvalue()


def write_csv(rows, path) -> None:
    text = rows_to_csv(rows)
    if path in (None, "-"):
        print(text, end="")
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)

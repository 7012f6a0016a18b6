"""Command-line front end: ``trustlink {keygen,seal,open,genfeat,simulate}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import envelope as env
from . import framing
from .phy import DEFAULT_RICIAN_K, ChannelModel
from .pipeline import LinkMode, default_chunk_bytes
from .sweep import DEFAULT_AUDIO_DIMS, DEFAULT_CHANNELS, SweepSpec, generate_features, parse_snr_range
from .sweep import run_sweep, write_csv

log = logging.getLogger("trustlink")

EXIT_RETRANSMIT = 3


def _dims(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace("x", ",").split(",") if v)


def _channels(text: str) -> tuple[ChannelModel, ...]:
    if text == "all":
        return DEFAULT_CHANNELS
    return tuple(ChannelModel(c.strip()) for c in text.split(","))


def _read_hex(path) -> bytes:
    return bytes.fromhex(Path(path).read_text().strip())


def cmd_keygen(args) -> int:
    kp = env.keygen(np.random.default_rng(args.seed))
    Path(f"{args.out}.pk").write_text(kp.pk.hex() + "\n")
    Path(f"{args.out}.sk").write_text(kp.sk.hex() + "\n")
    log.info("wrote %s.pk and %s.sk", args.out, args.out)
    return 0


def cmd_seal(args) -> int:
    rng = np.random.default_rng(args.seed)
    preshared = args.preshared_key is not None
    usekey = env.SessionKey(bytes.fromhex(args.preshared_key)) if preshared else env.SessionKey.random(rng)
    pk = None if preshared else _read_hex(args.pk)
    chunk = args.chunk_bytes or default_chunk_bytes(preshared=preshared)
    plaintext = framing.chunk_message(Path(args.input).read_bytes(), chunk)
    sealed = env.seal(plaintext, usekey, pk, rng, preshared=preshared)
    Path(args.out).write_bytes(sealed.to_bytes())
    return 0


def cmd_open(args) -> int:
    preshared = env.SessionKey(bytes.fromhex(args.preshared_key)) if args.preshared_key else None
    sk = None if preshared else _read_hex(args.sk)
    outcome = env.open_envelope(Path(args.input).read_bytes(), sk, preshared)
    if not outcome.ok:
        print("retransmit-requested", file=sys.stderr)
        return EXIT_RETRANSMIT
    try:
        payload = framing.merge_message(outcome.message)
    except framing.FramingError as exc:
        print(f"retransmit-requested: {exc}", file=sys.stderr)
        return EXIT_RETRANSMIT
    Path(args.out).write_bytes(payload)
    return 0


def cmd_genfeat(args) -> int:
    t = generate_features(args.dims, args.seed)
    Path(args.out).write_bytes(framing.serialize_features(t))
    return 0


def cmd_simulate(args) -> int:
    rs_modes = {"on": (True,), "off": (False,), "both": (True, False)}[args.rs]
    spec = SweepSpec(
        channels=args.channel, snrs=args.snr_db, frames=args.frames, rs_modes=rs_modes,
        mode=args.mode, rx_antennas=args.rx_antennas, rician_k=args.rician_k,
        max_retransmissions=args.max_retransmissions, seed=args.seed,
        audio_dims=args.dims, video_dims=args.video_dims or args.dims, timing=args.timing,
    )
    rows = run_sweep(spec, workers=args.workers)
    write_csv(rows, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trustlink", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("keygen", help="generate a receiver key pair")
    k.add_argument("--seed", type=int, default=None)
    k.add_argument("--out", default="trustlink", help="prefix for .pk/.sk hex files")
    k.set_defaults(func=cmd_keygen)

    s = sub.add_parser("seal", help="chunk and seal a file into a TSC1 envelope")
    s.add_argument("--pk", help="public key hex file")
    s.add_argument("--preshared-key", help="32 hex digits; skip key encapsulation")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--chunk-bytes", type=int, default=None)
    s.set_defaults(func=cmd_seal)

    o = sub.add_parser("open", help="open a TSC1 envelope and merge its chunks")
    o.add_argument("--sk", help="private key hex file")
    o.add_argument("--preshared-key")
    o.add_argument("--in", dest="input", required=True)
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_open)

    g = sub.add_parser("genfeat", help="write a seeded synthetic FTNS feature tensor")
    g.add_argument("--dims", type=_dims, default=DEFAULT_AUDIO_DIMS, help="e.g. 10,256")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_genfeat)

    m = sub.add_parser("simulate", help="run an SNR x channel x RS sweep and write CSV")
    m.add_argument("--channel", type=_channels, default=DEFAULT_CHANNELS,
                   help="awgn, rayleigh, rician, comma list, or 'all'")
    m.add_argument("--snr-db", type=parse_snr_range, default=parse_snr_range("0:30:3"),
                   help="start:stop:step in dB (inclusive)")
    m.add_argument("--frames", type=int, default=10)
    m.add_argument("--rs", choices=("on", "off", "both"), default="both")
    m.add_argument("--rx-antennas", type=int, default=None)
    m.add_argument("--mode", choices=[x.value for x in LinkMode], default="siso")
    m.add_argument("--rician-k", type=float, default=DEFAULT_RICIAN_K)
    m.add_argument("--max-retransmissions", type=int, default=3)
    m.add_argument("--dims", type=_dims, default=DEFAULT_AUDIO_DIMS)
    m.add_argument("--video-dims", type=_dims, default=None)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--workers", type=int, default=None, help="overrides TRUSTLINK_THREADS")
    m.add_argument("--timing", action="store_true", help="fill wall_seconds (breaks byte-identical output)")
    m.add_argument("--out", default="-")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "seal" and not (args.pk or args.preshared_key):
        print("seal needs --pk or --preshared-key", file=sys.stderr)
        return 2
    if args.command == "open" and not (args.sk or args.preshared_key):
        print("open needs --sk or --preshared-key", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

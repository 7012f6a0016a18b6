"""Uncoded QPSK bit error rate vs SNR under ZF-LMMSE detection.

Prints one column per channel model plus the AWGN closed form; every SNR
point reuses the same seeds so the curves share channel and noise draws.

    python3 scripts/ber_curves.py --rx 2 --tx 1 --seeds 10
"""

import argparse

import numpy as np

from trustlink.phy import qpsk_ber_awgn, simulate_uncoded_ber
from trustlink.sweep import parse_snr_range

MODELS = ("awgn", "rayleigh", "rician")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--snr-db", type=parse_snr_range, default=parse_snr_range("0:30:3"))
    p.add_argument("--rx", type=int, default=1)
    p.add_argument("--tx", type=int, default=1)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--blocks", type=int, default=2000)
    p.add_argument("--block-len", type=int, default=100)
    p.add_argument("--rician-k", type=float, default=3.0)
    args = p.parse_args()

    print("snr_db " + " ".join(f"{m:>10}" for m in MODELS) + "   awgn_theory")
    for snr in args.snr_db:
        cells = []
        for model in MODELS:
            rx = args.tx if model == "awgn" else args.rx
            ber = [
                np.divide(*simulate_uncoded_ber(model, snr, np.random.default_rng(s), rx, args.tx,
                                                args.blocks, args.block_len, args.rician_k))
                for s in range(args.seeds)
            ]
            cells.append(float(np.median(ber)))
        print(f"{snr:6g} " + " ".join(f"{c:10.3e}" for c in cells) + f"   {float(qpsk_ber_awgn(snr)):.3e}")


if __name__ == "__main__":
    main()

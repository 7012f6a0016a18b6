"""Frame success rate with and without the outer RS code over the default grid.

Writes the sweep CSV and prints a channel x SNR table of success rates for
rs-on / rs-off side by side.

    python3 scripts/rs_ablation_sweep.py --frames 10 --out results/ablation.csv
"""

import argparse
from pathlib import Path

from trustlink.sweep import SweepSpec, parse_snr_range, run_sweep, write_csv


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--snr-db", type=parse_snr_range, default=parse_snr_range("0:30:3"))
    p.add_argument("--channel", default="awgn,rayleigh,rician")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default="results/ablation.csv")
    args = p.parse_args()

    spec = SweepSpec(channels=tuple(args.channel.split(",")), snrs=args.snr_db,
                     frames=args.frames, seed=args.seed)
    rows = run_sweep(spec, workers=args.workers)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_csv(rows, args.out)

    table = {(r.channel, r.snr_db, r.rs_enabled): r.frame_success_rate for r in rows}
    snrs = sorted({r.snr_db for r in rows})
    print("channel   " + " ".join(f"{s:>9g}" for s in snrs))
    for ch in sorted({r.channel for r in rows}):
        cells = [f"{table[(ch, s, True)]:.2f}/{table[(ch, s, False)]:.2f}" for s in snrs]
        print(f"{ch:<9} " + " ".join(f"{c:>9}" for c in cells))
    print("cells: success rate rs-on/rs-off;", "undetected errors:", sum(r.undetected_errors for r in rows))


if __name__ == "__main__":
    main()

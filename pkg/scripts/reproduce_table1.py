"""NDCG@10 of the four variants on ML100K over a range of UPL values."""

import argparse
import logging
from pathlib import Path

from regrank.evaluation import run_experiment
from regrank.io import DatasetDescriptor, ingest
from regrank.projection import VARIANTS

DATA = Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", type=Path, default=DATA)
    ap.add_argument("--upl", default="10,20,30,40,50")
    ap.add_argument("--samples", type=int, default=5)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--candidate-mode", default="test", choices=("test", "catalog"))
    ap.add_argument("--gain", default="standard", choices=("standard", "literal"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    ratings = ingest(DatasetDescriptor("movielens-100k", args.data))
    upls = [int(x) for x in args.upl.split(",")]
    reports = run_experiment(
        ratings, VARIANTS, upls, args.samples, args.seed,
        candidate_mode=args.candidate_mode, gain=args.gain,
    )
    table = {(r.variant, r.upl): r for r in reports}
    print("variant\t" + "\t".join(f"UPL={u}" for u in upls))
    for v in VARIANTS:
        cells = [f"{table[v, u].mean:.3f}±{table[v, u].std:.3f}" for u in upls]
        print(v + "\t" + "\t".join(cells))


if __name__ == "__main__":
    main()

"""Per-user recommendation time of each variant on one ML100K UPL split."""

import argparse
from pathlib import Path

from regrank.evaluation import runtime_ordering
from regrank.io import DatasetDescriptor, ingest

DATA = Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", type=Path, default=DATA)
    ap.add_argument("--upl", type=int, nargs="+", default=[10, 20, 30, 40, 50])
    ap.add_argument("--users", type=int, default=50)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    ratings = ingest(DatasetDescriptor("movielens-100k", args.data))
    print("upl\tvariant\tedges\tms_per_user")
    for upl in args.upl:
        rep = runtime_ordering(ratings, upl, args.seed, n_users=args.users)
        for v in rep.ordering:
            print(f"{upl}\t{v}\t{rep.edges[v]}\t{1000 * rep.seconds_per_user[v]:.3f}")


if __name__ == "__main__":
    main()

"""Fetch MovieLens-100K into data/ml-100k/u.data.

The GroupLens host is not always reachable, so the ratings are taken from the
copy bundled in the RecBole 1.2.1 wheel on PyPI (same 100,000 rows; its header
line is dropped and the columns are already user, item, rating, timestamp).
"""

import argparse
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data", type=Path)
    args = ap.parse_args()
    if args.out.exists():
        print(f"{args.out} already present")
        return 0
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "recbole==1.2.1", "--no-deps", "-d", tmp, "-q"], check=True
        )
        (wheel,) = Path(tmp).glob("recbole-*.whl")
        with zipfile.ZipFile(wheel) as zf:
            lines = zf.read(MEMBER).decode().splitlines()
    rows = [ln for ln in lines[1:] if ln.strip()]
    if len(rows) != 100_000:
        raise SystemExit(f"expected 100000 ratings, found {len(rows)}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(rows) + "\n")
    print(f"wrote {len(rows)} ratings to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

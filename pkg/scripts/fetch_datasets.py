#!/usr/bin/env python3
"""Download the benchmark datasets into ./data (needs network access).

Produces the file names the bench commands and the acceptance suite look
for. The cancer dataset is not downloaded here: it ships with scikit-learn
and is materialized automatically when missing.

USPS is distributed as HDF5/libsvm bundles from several mirrors; this script
builds usps.csv from the libsvm-format files (usps + usps.t, bzip2) when
available.
"""

import bz2
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"
LIBSVM = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/multiclass"

PLAIN = {
    "heart.dat": f"{UCI}/statlog/heart/heart.dat",
    "ionosphere.data": f"{UCI}/ionosphere/ionosphere.data",
    "winequality-red.csv": f"{UCI}/wine-quality/winequality-red.csv",
    "winequality-white.csv": f"{UCI}/wine-quality/winequality-white.csv",
    "glass.data": f"{UCI}/glass/glass.data",
    "dermatology.data": f"{UCI}/dermatology/dermatology.data",
}

BANKNOTE = f"{UCI}/00267/data_banknote_authentication.txt"
VEHICLE_PARTS = [f"{UCI}/statlog/vehicle/xa{c}.dat" for c in "abcdefghi"]


def fetch(url: str) -> bytes:
    print(f"  {url}")
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read()


def write_usps_csv(dest: Path) -> None:
    rows = []
    for name in ("usps.bz2", "usps.t.bz2"):
        raw = bz2.decompress(fetch(f"{LIBSVM}/{name}"))
        for line in raw.decode().splitlines():
            parts = line.split()
            if not parts:
                continue
            label = int(float(parts[0]))
            feats = [0.0] * 256
            for tok in parts[1:]:
                idx, val = tok.split(":")
                feats[int(idx) - 1] = float(val)
            rows.append((feats, label))
    with open(dest, "w") as fh:
        for feats, label in rows:
            fh.write(",".join(f"{v:g}" for v in feats) + f",{label}\n")
    print(f"  wrote {dest} ({len(rows)} rows)")


def main() -> int:
    data = Path(__file__).resolve().parent.parent / "data"
    data.mkdir(exist_ok=True)
    for name, url in PLAIN.items():
        dest = data / name
        if dest.exists():
            print(f"skip {name} (exists)")
            continue
        dest.write_bytes(fetch(url))
    dest = data / "data_banknote_authentication.txt"
    if not dest.exists():
        dest.write_bytes(fetch(BANKNOTE))
    dest = data / "vehicle.dat"
    if not dest.exists():
        parts = [fetch(u) for u in VEHICLE_PARTS]
        dest.write_bytes(b"".join(parts))
    dest = data / "usps.csv"
    if not dest.exists():
        try:
            write_usps_csv(dest)
        except Exception as err:  # optional, large
            print(f"usps skipped: {err}", file=sys.stderr)
    print("done")
    return 0


if __name__ == "__main__":
    sys.exit(main())

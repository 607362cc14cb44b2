#!/usr/bin/env python3
"""Fetch and convert the breastw benchmark dataset (requires network).

Downloads the original Wisconsin breast-cancer data from the UCI archive,
drops the 16 rows with missing values, maps class 4 (malignant) to the
anomaly label, and writes data/breastw.csv in the layout load_csv expects.
The result is validated against the shape manifest (683 x 9, 239 anomalies).

The data itself is never committed to this repository.
"""

import csv
import io
import sys
import urllib.request
import zipfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from actiforest.data import load_csv, validate_against_manifest  # noqa: E402

URL = "https://archive.ics.uci.edu/static/public/15/breast+cancer+wisconsin+original.zip"
MEMBER = "breast-cancer-wisconsin.data"


def main() -> int:
    out = Path(__file__).resolve().parents[1] / "data" / "breastw.csv"
    out.parent.mkdir(parents=True, exist_ok=True)

    print(f"downloading {URL} ...")
    with urllib.request.urlopen(URL, timeout=60) as resp:
        blob = resp.read()
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        raw = zf.read(MEMBER).decode("ascii")

    kept = 0
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(9)] + ["label"])
        for line in raw.splitlines():
            if not line.strip():
                continue
            cells = line.split(",")
            if "?" in cells:
                continue  # 16 rows carry missing values
            features = cells[1:10]  # drop the sample id
            label = "1" if cells[10] == "4" else "0"
            writer.writerow(features + [label])
            kept += 1

    dataset = load_csv(out, label_column="label", name="breastw")
    validate_against_manifest(dataset, "breastw")
    print(f"wrote {out} ({kept} rows, contamination {dataset.contamination:.3f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Convert the UCI Glass Identification file into the layout the experiment
harness expects.

Input: the raw ``glass.data`` from the UCI repository (one row per sample:
id, RI, Na, Mg, Al, Si, K, Ca, Ba, Fe, class with classes 1-7 and class 4
unused). Output CSV columns: the nine features, ``label`` (1 for the
non-window classes 5-7, 0 for window classes 1-4), and ``class`` (the
original class id; 7 = headlamps).

The single exact duplicate row pair in the raw file is reduced to one
occurrence, giving 213 samples.

Usage:
    python scripts/prepare_glass.py glass.data data/glass.csv
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

FEATURES = ["RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe"]
OUTLIER_CLASSES = {5, 6, 7}


def convert(source: Path, target: Path) -> None:
    rows = []
    seen: set[tuple] = set()
    duplicates = 0
    with open(source, encoding="utf-8") as fh:
        for raw in csv.reader(fh):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) == len(FEATURES) + 2:  # id, features..., class
                values = raw[1:-1]
            elif len(raw) == len(FEATURES) + 1:  # features..., class
                values = raw[:-1]
            else:
                raise SystemExit(f"unexpected column count {len(raw)} in {source}")
            glass_class = int(float(raw[-1]))
            key = tuple(values + [str(glass_class)])
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)
            label = 1 if glass_class in OUTLIER_CLASSES else 0
            rows.append(values + [str(label), str(glass_class)])

    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FEATURES + ["label", "class"])
        writer.writerows(rows)

    n_outliers = sum(int(r[-2]) for r in rows)
    n_class7 = sum(1 for r in rows if r[-1] == "7")
    print(
        f"wrote {target}: {len(rows)} rows ({duplicates} duplicates dropped), "
        f"{n_outliers} outliers, {n_class7} headlamps-class rows"
    )


if __name__ == "__main__":
    if len(sys.argv) != 3:
        raise SystemExit(__doc__)
    convert(Path(sys.argv[1]), Path(sys.argv[2]))

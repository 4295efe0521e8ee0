#!/usr/bin/env python3
"""Convert a raw UCI/KEEL comma-separated data file to the dataset CSV schema.

The output has a header row with feature columns f1..fd followed by an
integer `label` column. Class tokens are mapped to 0, 1, 2, ... in sorted
order so the mapping is stable across runs.

    tools/uci_to_csv.py sonar.all-data data/sonar.csv
    tools/uci_to_csv.py --label-column first wine.data data/wine.csv
"""

import argparse
import csv
import sys


def read_rows(path):
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("@") or line.startswith("%"):
                continue
            rows.append([cell.strip() for cell in line.split(",")])
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source")
    parser.add_argument("dest")
    parser.add_argument("--label-column", choices=("first", "last"), default="last")
    args = parser.parse_args(argv)

    rows = read_rows(args.source)
    if not rows:
        sys.exit(f"{args.source}: no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            sys.exit(f"{args.source}: row {i} has {len(row)} cells, expected {width}")

    label_idx = 0 if args.label_column == "first" else width - 1
    classes = sorted({row[label_idx] for row in rows}, key=_class_key)
    code = {c: i for i, c in enumerate(classes)}

    with open(args.dest, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow([f"f{j}" for j in range(1, width)] + ["label"])
        for row in rows:
            feats = [c for j, c in enumerate(row) if j != label_idx]
            out.writerow([float(c).__repr__() for c in feats] + [code[row[label_idx]]])

    print(f"{args.dest}: {len(rows)} rows, {width - 1} features, classes {code}")


def _class_key(token):
    try:
        return (0, float(token), token)
    except ValueError:
        return (1, 0.0, token)


if __name__ == "__main__":
    main()

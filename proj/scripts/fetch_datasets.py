#!/usr/bin/env python3
"""Writes the benchmark CSVs used by the acceptance suite into data/.

Iris comes from scikit-learn (no network). WingNut and Seeds are downloaded
from pinned URLs unless a local copy is given with --wingnut / --seeds.
WingNut ships without labels; its two wings are split by the sign of x.
"""
import argparse
import csv
import io
import pathlib
import sys
import urllib.request

WINGNUT_URL = ("https://raw.githubusercontent.com/annoviko/pyclustering/0.10.1.2/"
               "pyclustering/samples/samples/fcps/WingNut.data")
SEEDS_URL = "https://archive.ics.uci.edu/ml/machine-learning-databases/00236/seeds_dataset.txt"


def read_source(local, url):
    if local:
        return pathlib.Path(local).read_text()
    with urllib.request.urlopen(url, timeout=30) as r:
        return r.read().decode()


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def iris(out):
    from sklearn.datasets import load_iris
    d = load_iris()
    rows = [[*map(repr, map(float, x)), d.target_names[y]] for x, y in zip(d.data, d.target)]
    write_csv(out / "iris.csv", ["sepal_length", "sepal_width", "petal_length", "petal_width", "species"], rows)


def wingnut(out, local):
    rows = []
    for line in io.StringIO(read_source(local, WINGNUT_URL)):
        parts = line.split()
        if len(parts) != 2:
            continue
        x, y = parts
        rows.append([x, y, 1 if float(x) < 0 else 2])
    write_csv(out / "wingnut.csv", ["x", "y", "label"], rows)


def seeds(out, local):
    rows = []
    for line in io.StringIO(read_source(local, SEEDS_URL)):
        parts = line.split()
        if len(parts) == 8:
            rows.append(parts)
    names = ["area", "perimeter", "compactness", "kernel_length", "kernel_width", "asymmetry", "groove_length",
             "variety"]
    write_csv(out / "seeds.csv", names, rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--wingnut", help="local WingNut.data")
    ap.add_argument("--seeds", help="local seeds_dataset.txt")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = False
    for name, fn in [("iris", lambda: iris(out)), ("wingnut", lambda: wingnut(out, args.wingnut)),
                     ("seeds", lambda: seeds(out, args.seeds))]:
        try:
            fn()
        except Exception as e:  # keep going; each dataset is optional
            print(f"skipped {name}: {e}", file=sys.stderr)
            failed = True
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

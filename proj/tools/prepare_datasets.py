#!/usr/bin/env python3
"""Write the benchmark datasets used by the test suite as plain CSV files.

Iris, Wine and Breast Cancer come from the copies bundled with scikit-learn.
Ionosphere is taken from a local ``ionosphere.tab`` (the UCI table as shipped
in Orange's test data) passed with --ionosphere.

Every output has a header row and the class label as the last column.
"""
import argparse
import csv
import pathlib

import sklearn.datasets


def write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def sklearn_set(loader, out):
    bunch = loader()
    names = [str(n).replace(" ", "_") for n in bunch.feature_names]
    rows = []
    for x, y in zip(bunch.data, bunch.target):
        rows.append([repr(float(v)) for v in x] + [bunch.target_names[y]])
    write(out, names + ["class"], rows)


def ionosphere(tab, out):
    lines = pathlib.Path(tab).read_text().splitlines()
    header = lines[0].split("\t")
    rows = []
    # Orange tab format: names, types, flags, then data.
    for line in lines[3:]:
        if not line.strip():
            continue
        cells = line.split("\t")
        rows.append(cells)
    write(out, header[:-1] + ["class"], rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--ionosphere", help="path to ionosphere.tab")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sklearn_set(sklearn.datasets.load_iris, out / "iris.csv")
    sklearn_set(sklearn.datasets.load_wine, out / "wine.csv")
    sklearn_set(sklearn.datasets.load_breast_cancer, out / "breast_cancer.csv")
    if args.ionosphere:
        ionosphere(args.ionosphere, out / "ionosphere.csv")


if __name__ == "__main__":
    main()

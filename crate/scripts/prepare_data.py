#!/usr/bin/env python3
"""Materialize the benchmark CSVs under data/.

Sources (all obtained through the package index, no direct downloads):
  breast_cancer  UCI WDBC, bundled with scikit-learn
  german         UCI Statlog German credit, german.data-numeric (imbalanced-databases wheel)
  australian     UCI Statlog Australian credit, KEEL copy (keel-ds wheel)
  spambase       UCI Spambase, KEEL copy (keel-ds wheel)
  landsat        UCI Statlog Landsat sat.trn (imbalanced-databases wheel)
  optdigits      UCI optdigits, KEEL copy (train+test combined)
  penbased       UCI pen-based digits, KEEL copy (train+test combined)
  waveform       Breiman's waveform generator (21 attributes, 3 classes), seed 20190601

Every output has a header row, numeric feature columns, and the label in the
last column. Usage: python3 scripts/prepare_data.py [out_dir]
"""
import csv
import os
import subprocess
import sys
import tempfile
import zipfile

import numpy as np


def download(pkg, dest):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", dest, pkg],
        check=True,
    )
    for name in os.listdir(dest):
        if name.lower().startswith(pkg.replace("-", "_")) and name.endswith(".whl"):
            return zipfile.ZipFile(os.path.join(dest, name))
    raise FileNotFoundError(pkg)


def write(out_dir, name, rows, labels):
    d = len(rows[0])
    path = os.path.join(out_dir, f"{name}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(d)] + ["label"])
        for r, y in zip(rows, labels):
            w.writerow([fmt(v) for v in r] + [y])
    print(f"{name}: {len(rows)} x {d} -> {path}")


def fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def parse_delimited(text, sep=None):
    rows, labels = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        parts = [p.strip() for p in (line.split(sep) if sep else line.split())]
        rows.append([float(p) for p in parts[:-1]])
        labels.append(parts[-1])
    return rows, labels


def breast_cancer(out_dir):
    import sklearn

    path = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data", "breast_cancer.csv")
    with open(path) as fh:
        lines = fh.read().splitlines()[1:]
    rows, labels = parse_delimited("\n".join(lines), ",")
    labels = ["malignant" if y == "0" else "benign" for y in labels]
    write(out_dir, "breast_cancer", rows, labels)


def waveform(out_dir, n=5000, seed=20190601):
    rng = np.random.default_rng(seed)
    i = np.arange(1, 22)
    h1 = np.maximum(6 - np.abs(i - 11), 0)
    h2 = np.maximum(6 - np.abs(i - 15), 0)
    h3 = np.maximum(6 - np.abs(i - 7), 0)
    pairs = [(h1, h2), (h1, h3), (h2, h3)]
    rows, labels = [], []
    for _ in range(n):
        c = int(rng.integers(3))
        u = rng.uniform()
        a, b = pairs[c]
        x = u * a + (1 - u) * b + rng.standard_normal(21)
        rows.append([round(v, 2) for v in x])
        labels.append(str(c))
    write(out_dir, "waveform", rows, labels)


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data")
    os.makedirs(out_dir, exist_ok=True)
    breast_cancer(out_dir)
    waveform(out_dir)
    with tempfile.TemporaryDirectory() as tmp:
        keel = download("keel-ds", tmp)
        imb = download("imbalanced-databases", tmp)
        raw = "keel_ds/data/balanced/raw/{}.dat"
        for name, keel_name in [
            ("australian", "australian"),
            ("spambase", "spambase"),
            ("optdigits", "optdigits"),
            ("penbased", "penbased"),
        ]:
            rows, labels = parse_delimited(keel.read(raw.format(keel_name)).decode(), ",")
            write(out_dir, name, rows, labels)
        text = imb.read("imbalanced_databases/data/german/german.data-numeric.txt").decode()
        rows, labels = parse_delimited(text)
        labels = ["good" if y == "1" else "bad" for y in labels]
        write(out_dir, "german", rows, labels)
        text = imb.read("imbalanced_databases/data/satimage/sat.trn.txt").decode()
        rows, labels = parse_delimited(text)
        write(out_dir, "landsat", rows, labels)


if __name__ == "__main__":
    main()

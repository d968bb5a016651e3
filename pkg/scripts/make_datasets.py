"""Rebuild data/*.csv from offline copies of the UCI datasets.

breast-cancer-wisconsin.csv comes from the R MASS ``biopsy`` table (699 rows,
NA -> ``?``, benign -> 2, malignant -> 4), i.e. the UCI file layout.
sonar.csv comes from the KEEL copy of UCI sonar (values rounded to 3 decimals).

Needs the optional packages ``rdatasets`` and ``keel-ds``; neither is a
dependency of the library itself.
"""
import glob
import os
import sys
import zipfile

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "data")


def breast():
    import rdatasets

    df = rdatasets.data("MASS", "biopsy")
    lines = []
    for row in df.itertuples(index=False):
        cells = [str(row.ID)]
        for v in (row.V1, row.V2, row.V3, row.V4, row.V5, row.V6, row.V7, row.V8, row.V9):
            cells.append("?" if v != v else str(int(v)))
        cells.append("2" if row._11 == "benign" else "4")
        lines.append(",".join(cells))
    with open(os.path.join(OUT, "breast-cancer-wisconsin.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def sonar(wheel):
    raw = zipfile.ZipFile(wheel).read("keel_ds/data/balanced/raw/sonar.dat").decode()
    lines = []
    for line in raw.splitlines():
        if not line.strip() or line.startswith("@"):
            continue
        cells = [c.strip() for c in line.split(",")]
        lines.append(",".join([repr(float(c)) for c in cells[:-1]] + [cells[-1]]))
    with open(os.path.join(OUT, "sonar.csv"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    breast()
    sonar(sys.argv[1] if len(sys.argv) > 1 else glob.glob("keel_ds-*.whl")[0])

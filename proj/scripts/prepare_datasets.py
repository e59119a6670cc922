#!/usr/bin/env python3
"""Convert the KEEL benchmark files shipped in the `keel-ds` wheel into the
headered CSV files under data/.

    pip download keel-ds --no-deps -d /tmp/keel
    python3 scripts/prepare_datasets.py /tmp/keel/keel_ds-*.whl data/
"""
import csv
import sys
import zipfile
from pathlib import Path

COLUMNS = {
    "iris": ["SepalLength", "SepalWidth", "PetalLength", "PetalWidth", "class"],
    "pima": ["Pregnancies", "Glucose", "BloodPressure", "SkinThickness", "Insulin",
             "BMI", "DiabetesPedigree", "Age", "class"],
    "wine": ["Alcohol", "MalicAcid", "Ash", "AlcalinityOfAsh", "Magnesium", "TotalPhenols",
             "Flavanoids", "NonflavanoidPhenols", "Proanthocyanins", "ColorIntensity", "Hue",
             "OD280_OD315", "Proline", "class"],
    "wisconsin": ["ClumpThickness", "CellSize", "CellShape", "MarginalAdhesion",
                  "EpithelialSize", "BareNuclei", "BlandChromatin", "NormalNucleoli",
                  "Mitoses", "class"],
    "monk-2": ["a1", "a2", "a3", "a4", "a5", "a6", "class"],
}


def main() -> None:
    wheel, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(wheel) as z:
        for name, header in COLUMNS.items():
            text = z.read(f"keel_ds/data/balanced/raw/{name}.dat").decode()
            rows = [[c.strip() for c in line.split(",")]
                    for line in text.splitlines() if line.strip() and not line.startswith("@")]
            assert all(len(r) == len(header) for r in rows), name
            with open(out / f"{name}.csv", "w", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(header)
                w.writerows(rows)
            print(f"{name}: {len(rows)} rows")


if __name__ == "__main__":
    main()

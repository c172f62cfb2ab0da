#!/usr/bin/env python3
# Copyright 2026 The fairpatch Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds data/adult/adult.csv from the UCI Adult files.

The raw adult.data / adult.test files are taken from a local directory
(--raw-dir) or, by default, from the `responsibly` wheel, which ships them.
Both files are merged (48,842 rows), whitespace is stripped, the trailing
"." on test labels is removed and a header row is added.
"""

import argparse
import csv
import pathlib
import subprocess
import sys
import tempfile
import zipfile

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]


def raw_from_wheel(workdir: pathlib.Path) -> dict:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
         "-d", str(workdir), "responsibly==0.1.2"],
        check=True)
    wheel = next(workdir.glob("responsibly-*.whl"))
    with zipfile.ZipFile(wheel) as zf:
        return {name: zf.read(f"responsibly/dataset/adult/adult.{name}").decode()
                for name in ("data", "test")}


def rows_of(text: str):
    for line in text.splitlines():
        if not line.strip() or line.startswith("|"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != len(COLUMNS):
            continue
        fields[-1] = fields[-1].rstrip(".")
        yield fields


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--raw-dir", type=pathlib.Path,
                        help="directory holding adult.data and adult.test")
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path(__file__).resolve().parent.parent
                        / "data" / "adult" / "adult.csv")
    args = parser.parse_args()

    if args.raw_dir:
        raw = {name: (args.raw_dir / f"adult.{name}").read_text()
               for name in ("data", "test")}
    else:
        with tempfile.TemporaryDirectory() as tmp:
            raw = raw_from_wheel(pathlib.Path(tmp))

    args.out.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for name in ("data", "test"):
            for row in rows_of(raw[name]):
                writer.writerow(row)
                count += 1
    print(f"wrote {count} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

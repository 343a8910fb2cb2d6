#!/usr/bin/env python3
"""Encode the categorical german credit file (german.data) as all-numeric CSV.

Ordered categorical attributes keep their level index as an integer code;
unordered ones are expanded into 0/1 indicator columns; binary ones become a
single 0/1 column. The class column (1 = good, 2 = bad) is copied unchanged.

    python3 make_german_numeric.py german.data german-numeric.csv
"""
import csv
import sys

NUMERIC = "numeric"
ORDINAL = "ordinal"
ONE_HOT = "one_hot"
BINARY = "binary"

# (name, kind, levels in order) following the attribute list of german.doc.
ATTRIBUTES = [
    ("checking_status", ORDINAL, ["A11", "A12", "A13", "A14"]),
    ("duration", NUMERIC, None),
    ("credit_history", ORDINAL, ["A30", "A31", "A32", "A33", "A34"]),
    ("purpose", ONE_HOT, ["A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410"]),
    ("credit_amount", NUMERIC, None),
    ("savings", ORDINAL, ["A61", "A62", "A63", "A64", "A65"]),
    ("employment", ORDINAL, ["A71", "A72", "A73", "A74", "A75"]),
    ("installment_rate", NUMERIC, None),
    ("personal_status", ONE_HOT, ["A91", "A92", "A93", "A94"]),
    ("other_debtors", ONE_HOT, ["A101", "A102", "A103"]),
    ("residence_since", NUMERIC, None),
    ("property", ORDINAL, ["A121", "A122", "A123", "A124"]),
    ("age", NUMERIC, None),
    ("other_installment_plans", ONE_HOT, ["A141", "A142", "A143"]),
    ("housing", ONE_HOT, ["A151", "A152", "A153"]),
    ("existing_credits", NUMERIC, None),
    ("job", ORDINAL, ["A171", "A172", "A173", "A174"]),
    ("num_dependents", NUMERIC, None),
    ("telephone", BINARY, ["A191", "A192"]),
    ("foreign_worker", BINARY, ["A201", "A202"]),
]


def header():
    names = []
    for name, kind, levels in ATTRIBUTES:
        if kind == ONE_HOT:
            names.extend(f"{name}_{level}" for level in levels)
        else:
            names.append(name)
    names.append("class")
    return names


def encode(fields):
    if len(fields) != len(ATTRIBUTES) + 1:
        raise ValueError(f"expected {len(ATTRIBUTES) + 1} fields, got {len(fields)}")
    row = []
    for value, (name, kind, levels) in zip(fields, ATTRIBUTES):
        if kind == NUMERIC:
            row.append(value)
        elif kind == ORDINAL:
            row.append(str(levels.index(value) + 1))
        elif kind == BINARY:
            row.append(str(levels.index(value)))
        else:
            if value not in levels:
                raise ValueError(f"{name}: unknown level {value}")
            row.extend("1" if value == level else "0" for level in levels)
    row.append(fields[-1])
    return row


def main(argv):
    if len(argv) != 3:
        sys.exit(__doc__)
    with open(argv[1]) as src, open(argv[2], "w", newline="") as dst:
        out = csv.writer(dst, lineterminator="\n")
        out.writerow(header())
        for line in src:
            if line.strip():
                out.writerow(encode(line.split()))


if __name__ == "__main__":
    main(sys.argv)

"""Table serialization: CSV with 17-significant-digit floats, or JSON."""

import csv
import json


def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_table(stream, header, rows, fmt="csv"):
    """Write rows to a text stream as CSV (exact header line, fixed row
    order) or as a JSON array of objects with the header names as keys."""
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    elif fmt == "json":
        json.dump([dict(zip(header, row)) for row in rows], stream, indent=2)
        stream.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")

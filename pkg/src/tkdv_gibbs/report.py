"""Writers for the delimited and JSON output files."""

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
OUTPUT_ENV = "TKDV_OUTPUT_DIR"


def default_output_dir():
    return Path(os.environ.get(OUTPUT_ENV, "tkdv_out"))


def fmt(v):
    """Round-trippable text for a CSV cell (17 significant digits for floats)."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(_jsonable(payload))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_table(path, header, rows, format="csv"):
    """Write rows as CSV, or as a JSON list of records."""
    if format == "json":
        return write_json(path, {"rows": [dict(zip(header, r)) for r in rows]})
    return write_csv(path, header, rows)


def histogram_rows(edges, counts):
    return [(edges[i], edges[i + 1], int(c)) for i, c in enumerate(counts)]


def power_rows(mean_power):
    return [(k + 1, v) for k, v in enumerate(mean_power)]


def spectra_rows(modes):
    for i, row in enumerate(modes):
        for k, z in enumerate(row):
            yield (i, k + 1, z.real, z.imag)

"""CSV and JSON helpers with round-trip float formatting and atomic writes."""

import json
import os
import tempfile

import numpy as np


def _fmt(v):
    return repr(float(v))


def _atomic_write(path, text):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in np.atleast_2d(rows)]
    _atomic_write(path, "\n".join(lines) + "\n")


def read_table(path):
    """Return (header, float array) for a CSV with one header line."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return header, data


def write_samples(path, x, y):
    d = x.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)]
    write_table(path, header, np.hstack([x, y]))


def read_samples(path):
    header, data = read_table(path)
    if len(header) % 2 or len(header) == 0:
        raise ValueError(f"{path}: expected columns x1..xd,y1..yd")
    d = len(header) // 2
    expected = [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)]
    if header != expected:
        raise ValueError(f"{path}: header {header} != {expected}")
    return data[:, :d], data[:, d:]


def write_points(path, pts):
    pts = np.atleast_2d(pts)
    write_table(path, [f"x{i + 1}" for i in range(pts.shape[1])], pts)


def read_points(path):
    return read_table(path)[1]


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    return json.dumps(obj, indent=1, sort_keys=True, default=_default, allow_nan=False) + "\n"


def write_json(path, obj):
    _atomic_write(path, dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)

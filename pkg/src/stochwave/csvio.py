"""CSV artifact format: '#' comment header, comma separators, 17-digit floats, LF."""

import numpy as np


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(path, columns, comments=()):
    """columns: list of (name, 1-D array) pairs of equal length."""
    names = [c[0] for c in columns]
    arrays = [np.atleast_1d(np.asarray(c[1])) for c in columns]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise ValueError("column length mismatch")
    with open(path, "w", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")


def read_csv(path):
    """Inverse of write_csv: returns (comments, {name: float array})."""
    comments = []
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows) if rows else np.zeros((0, len(header or [])))
    return comments, {name: data[:, j] for j, name in enumerate(header or [])}

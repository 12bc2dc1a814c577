"""CSV emission and parsing for trajectory and results tables.

Floats are written with 17 significant digits, which round-trips binary64
exactly.  Files start with ``#`` comment lines carrying run metadata (units,
observable direction, branch, grid parameters) so each artifact is
self-describing, followed by a standard header row.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import ConfigError

TRAJECTORY_HEADER = ["t_s", "n1", "n2", "n3", "norm", "rate_per_s", "g_rate_per_s", "epsilon"]
SG_TRAJECTORY_HEADER = ["L_m", "n1", "n2", "n3", "norm", "rate_per_s", "g_rate_per_s", "epsilon"]


def fmt(x) -> str:
    return "%.17g" % float(x)


def _meta_lines(meta: dict) -> list[str]:
    out = []
    for k, v in meta.items():
        if isinstance(v, (list, tuple, np.ndarray)):
            v = " ".join(fmt(x) for x in np.asarray(v).ravel())
        out.append(f"# {k} = {v}")
    return out


def write_trajectory_csv(path, traj, meta: dict | None = None, abscissa: str = "t_s") -> None:
    """Emit a trajectory with the standard 8-column schema.

    ``abscissa`` selects the first column name: "t_s" for time-parametrized
    runs, "L_m" for distance-parametrized Stern-Gerlach runs.  The epsilon
    column is blank when the trajectory carries no mixing coefficient.
    """
    if abscissa not in ("t_s", "L_m"):
        raise ConfigError(f"unknown abscissa {abscissa!r}")
    header = [abscissa] + TRAJECTORY_HEADER[1:]
    eps = traj.epsilon
    with open(path, "w", newline="") as fh:
        for line in _meta_lines(meta or {}):
            fh.write(line + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(traj.t)):
            row = [
                fmt(traj.t[i]),
                fmt(traj.n[i, 0]),
                fmt(traj.n[i, 1]),
                fmt(traj.n[i, 2]),
                fmt(traj.norm[i]),
                fmt(traj.rate[i]),
                fmt(traj.g_rate[i]),
                fmt(eps[i]) if eps is not None else "",
            ]
            w.writerow(row)


def write_table_csv(path, header: list[str], rows, meta: dict | None = None) -> None:
    """Generic results table with the same comment-header convention."""
    with open(path, "w", newline="") as fh:
        for line in _meta_lines(meta or {}):
            fh.write(line + "\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, str) else fmt(x) for x in row])


def read_csv(path):
    """Parse a CSV with optional ``#`` metadata lines.

    Returns (meta, header, columns).  Columns parse as float arrays with
    empty fields becoming NaN; a column with any non-numeric cell comes
    back as an array of strings.
    """
    meta: dict = {}
    with open(path) as fh:
        text = fh.read()
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            if "=" in line:
                k, _, v = line[1:].partition("=")
                meta[k.strip()] = v.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise ConfigError(f"{path}: no CSV content")
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    header = rows[0]
    data = rows[1:]
    if not data:
        raise ConfigError(f"{path}: CSV has a header but no rows")
    cols = {}
    for j, name in enumerate(header):
        raw = [row[j] if j < len(row) else "" for row in data]
        try:
            cols[name] = np.array(
                [float(cell) if cell.strip() else float("nan") for cell in raw]
            )
        except ValueError:
            cols[name] = np.array(raw)
    return meta, header, cols

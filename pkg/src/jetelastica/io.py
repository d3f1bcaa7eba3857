"""CSV trajectories, SVG planar projections and JSON reports."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .dynamics import GeodesicArc

FLOAT_FMT = "%.17g"


def csv_header(k: int) -> list[str]:
    return (
        ["s", "x"]
        + [f"u_{i}" for i in range(k, 0, -1)]
        + ["y"]
        + [f"P_{i}" for i in range(1, k + 3)]
        + ["theta", "kappa", "H"]
        + [f"C_{i}" for i in range(1, k + 1)]
    )


def arc_table(arc: GeodesicArc) -> np.ndarray:
    return np.column_stack(
        [arc.s, arc.q, arc.P, arc.theta, arc.kappa, arc.H, arc.casimir]
    )


def write_csv(arc: GeodesicArc, dest) -> None:
    """Write the sampled arc; ``dest`` is a path or a text stream."""
    rows = arc_table(arc)
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            _write_rows(fh, arc.k, rows)
    else:
        _write_rows(dest, arc.k, rows)


def _write_rows(fh, k: int, rows: np.ndarray) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(csv_header(k))
    for row in rows:
        w.writerow([FLOAT_FMT % v for v in row])


def csv_text(arc: GeodesicArc) -> str:
    buf = io.StringIO()
    write_csv(arc, buf)
    return buf.getvalue()


def read_csv(src) -> tuple[list[str], np.ndarray]:
    """Header and the numeric table of a trajectory CSV.

    ``src`` is a path, a text stream, or the CSV text itself (anything with a
    newline is taken as content).
    """
    if isinstance(src, Path) or (isinstance(src, str) and "\n" not in src):
        text = Path(src).read_text()
    else:
        text = src if isinstance(src, str) else src.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader if row])
    if data.size and data.shape[1] != len(header):
        raise ValueError("row width does not match header")
    return header, data


def svg_document(paths: list[tuple[np.ndarray, np.ndarray]]) -> str:
    """Static SVG with one path per polyline in the (x, u) plane, u pointing up."""
    xs = np.concatenate([np.asarray(x) for x, _ in paths])
    us = np.concatenate([np.asarray(u) for _, u in paths])
    xmin, xmax = float(xs.min()), float(xs.max())
    umin, umax = float(us.min()), float(us.max())
    extent = max(xmax - xmin, umax - umin, 1e-12)
    pad = 0.05 * extent
    vb = (xmin - pad, -umax - pad, (xmax - xmin) + 2 * pad, (umax - umin) + 2 * pad)
    stroke = 0.005 * extent
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{vb[0]:.6g} {vb[1]:.6g} {vb[2]:.6g} {vb[3]:.6g}">'
    ]
    for x, u in paths:
        pts = " L ".join(f"{a:.6g},{-b:.6g}" for a, b in zip(x, u))
        parts.append(f'<path d="M {pts}" fill="none" stroke="black" stroke-width="{stroke:.6g}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def json_float(v: float):
    if v is None:
        return None
    if math.isinf(v):
        return "inf"
    return float(v)


def classification_report(prof, window=None) -> dict:
    from .analysis import classify, decompose_band, period_shift

    band = decompose_band(prof, window)
    rows = []
    for iv in band:
        cls = classify(iv, prof.p)
        row = {
            "x0": iv.lo.x, "x1": iv.hi.x,
            "kind0": iv.lo.kind.value, "kind1": iv.hi.kind.value,
            "class": cls.value,
        }
        if cls.value == "StraightLine":
            row.update(L="inf", tau=None, action=None)
        else:
            pd = period_shift(prof, iv)
            row.update(L=json_float(pd.L), tau=json_float(pd.tau), action=json_float(pd.action))
            # slopes at the ends expose near-critical endpoints
            row["dF0"] = float(prof.p(iv.lo.x))
            row["dF1"] = float(prof.p(iv.hi.x))
        rows.append(row)
    return {"intervals": rows, "degenerate": band.degenerate, "truncated": band.truncated}

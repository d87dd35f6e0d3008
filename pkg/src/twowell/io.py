"""JSON, CSV and SVG writers shared by the library and the command line.

Output is deterministic: floats are written with ``repr`` precision, JSON
keys keep insertion order and no timestamps are recorded.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .field import DeformationField
from .wellsgeo import TwoWellParams, dist2_to_wells

SVG_SIZE = 800
WELL_COLOURS = ("#9ecae1", "#fdae6b")


def _plain(obj):
    """Convert numpy scalars and arrays into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, allow_nan=True) + "\n"


def write_text(text: str, path=None, stream=None) -> None:
    """Write to ``path`` when given, else to ``stream``."""
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    elif stream is not None:
        stream.write(text)


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def trace_csv(trace) -> str:
    return csv_text(("iter", "energy", "penalty_residual", "step_size"), trace)


def zmin_csv(rows) -> str:
    """Rows ``(alpha, gamma, t, matrix)`` of a Z_min sweep."""
    out = []
    for alpha, gamma, t, m in rows:
        out.append((float(alpha), float(gamma), float(t), *np.asarray(m, float).ravel()))
    return csv_text(("alpha", "gamma", "t", "m11", "m12", "m21", "m22"), out)


def slice_csv(rows, names=("u", "v")) -> str:
    return csv_text((*names, "value"), rows)


# --- SVG ------------------------------------------------------------------------


def field_svg(fld: DeformationField, params: TwoWellParams | None = None) -> str:
    """Deformed mesh lines over triangles filled by nearest well.

    The bounding box of the deformed square is scaled uniformly into an
    800 x 800 canvas, y pointing up.
    """
    params = params or TwoWellParams()
    u = fld.deformed
    lo, hi = u.min(axis=0), u.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.04 * span
    scale = SVG_SIZE / (span + 2 * pad)

    def xy(p):
        return (p[0] - lo[0] + pad) * scale, SVG_SIZE - (p[1] - lo[1] + pad) * scale

    nearest = np.argmin(dist2_to_wells(fld.gradients(), params), axis=-1)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        '<g stroke="none">',
    ]
    for tri, k in zip(fld.triangles, nearest):
        pts = " ".join("%.3f,%.3f" % xy(u[v]) for v in tri)
        out.append(f'<polygon points="{pts}" fill="{WELL_COLOURS[int(k)]}"/>')
    out.append("</g>")
    out.append('<g fill="none" stroke="#333333" stroke-width="0.5">')
    nx, ny = fld.nx, fld.ny
    grid = u.reshape(ny + 1, nx + 1, 2)
    for line in list(grid) + list(grid.transpose(1, 0, 2)):
        pts = " ".join("%.3f,%.3f" % xy(p) for p in line)
        out.append(f'<polyline points="{pts}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Table export (CSV, JSON) and a dependency-free log-log SVG chart."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from ..exceptions import DegenerateAxis


def _cell(v):
    if hasattr(v, "item"):
        v = v.item()
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "nan" if math.isnan(v) else "%.12g" % v
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if hasattr(v, "item"):
        return _json_value(v.item())
    return v


def table_to_csv(rows, columns):
    """CSV text: a header of ``columns`` then one line per row, floats to 12 significant digits."""
    if not rows:
        raise ValueError("cannot export an empty table")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def table_to_json(rows, columns):
    """JSON array of row objects in ``columns`` order; non-finite floats become ``null``."""
    if not rows:
        raise ValueError("cannot export an empty table")
    data = [{c: _json_value(r[c]) for c in columns} for r in rows]
    return json.dumps(data, indent=2) + "\n"


def export(rows, columns, path, fmt="csv"):
    """Write ``rows`` to ``path`` as CSV or JSON and return the path."""
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    text = table_to_csv(rows, columns) if fmt == "csv" else table_to_json(rows, columns)
    path = Path(path)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def render_svg(series, path=None, title="", xlabel="x", ylabel="y", width=640, height=420):
    """Line chart of named ``(x, y)`` sequences on log-log axes.

    Points with a non-positive coordinate cannot be placed and are dropped.

    Parameters
    ----------
    series : dict of str to sequence of (x, y)
    path : path-like, optional
        Where to write the SVG; the text is returned either way.

    Raises
    ------
    ValueError
        If there are no series or a series keeps fewer than two points.
    DegenerateAxis
        If all x values coincide.
    """
    if not series:
        raise ValueError("no series to plot")
    clean = {}
    for name, pts in series.items():
        pts = [(float(x), float(y)) for x, y in pts if x > 0 and y > 0]
        if len(pts) < 2:
            raise ValueError(f"series {name!r} needs at least two positive points")
        clean[name] = [(math.log10(x), math.log10(y)) for x, y in pts]
    xs = [p[0] for s in clean.values() for p in s]
    ys = [p[1] for s in clean.values() for p in s]
    if max(xs) == min(xs):
        raise DegenerateAxis("all x values are equal")
    if max(ys) == min(ys):
        ys_lo, ys_hi = ys[0] - 1, ys[0] + 1
    else:
        ys_lo, ys_hi = min(ys), max(ys)
    x_lo, x_hi = min(xs), max(xs)
    left, right, top, bottom = 70, 160, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return top + ph - (v - ys_lo) / (ys_hi - ys_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for lo, hi, axis in ((x_lo, x_hi, "x"), (ys_lo, ys_hi, "y")):
        for k in range(math.ceil(lo), math.floor(hi) + 1):
            if axis == "x":
                x = sx(k)
                out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
                out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">1e{k}</text>')
            else:
                y = sy(k)
                out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
                out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">1e{k}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">{escape(xlabel)} (log)</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">{escape(ylabel)} (log)</text>')
    if title:
        out.append(f'<text x="{left + pw / 2:.2f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for k, (name, pts) in enumerate(clean.items()):
        color = COLORS[k % len(COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = top + 16 + 18 * k
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text

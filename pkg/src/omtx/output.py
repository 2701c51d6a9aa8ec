"""Result persistence: round-trip-exact CSV and dependency-free SVG charts.

All writes are atomic (temp file in the target directory, then rename), and
byte-deterministic for identical inputs.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from .model import Spectrum
from .sweeps import CharacteristicCurve

SPECTRUM_COLUMNS = (
    "delta_s",
    "delta",
    "re_b_plus",
    "im_b_plus",
    "re_eps_t",
    "im_eps_t",
    "abs_eps_t_sq",
    "stable",
)
CURVE_COLUMNS = ("pump", "w0", "gain", "stable", "leading_eig_re")


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return repr(float(value))


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(data, path: str) -> None:
    """Write a Spectrum or CharacteristicCurve as CSV (LF, round-trip floats)."""
    if isinstance(data, Spectrum):
        rows = [",".join(SPECTRUM_COLUMNS)]
        for pt in data.points:
            rows.append(
                ",".join(
                    (
                        _fmt(pt.delta_s),
                        _fmt(pt.delta),
                        _fmt(pt.b_plus.real),
                        _fmt(pt.b_plus.imag),
                        _fmt(pt.eps_t.real),
                        _fmt(pt.eps_t.imag),
                        _fmt(pt.power_response),
                        _fmt(data.steady.stable and not pt.singular),
                    )
                )
            )
    elif isinstance(data, CharacteristicCurve):
        rows = [",".join(CURVE_COLUMNS)]
        for i in range(len(data.pump)):
            rows.append(
                ",".join(
                    (
                        _fmt(data.pump[i]),
                        _fmt(data.w0[i]),
                        _fmt(data.gain[i]),
                        _fmt(data.stable[i]),
                        _fmt(data.leading_eig_re[i]),
                    )
                )
            )
    else:
        raise TypeError(f"cannot serialize {type(data).__name__}")
    _atomic_write(path, "\n".join(rows) + "\n")


def write_rows_csv(columns, rows, path: str) -> None:
    """Generic CSV writer used for ad-hoc tables (e.g. stability sweeps)."""
    out = [",".join(columns)]
    for row in rows:
        out.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(out) + "\n")


_WIDTH, _HEIGHT = 720, 480
_MARGIN = 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _series_from(data):
    if isinstance(data, Spectrum):
        return [("spectrum", data.delta_s, data.power_response)], "delta_s", "|eps_T|^2"
    if isinstance(data, CharacteristicCurve):
        return [("gain", data.pump, data.gain)], "pump", "gain"
    if isinstance(data, (list, tuple)):
        series = []
        for i, item in enumerate(data):
            if not isinstance(item, Spectrum):
                raise TypeError("overlay plots take a sequence of Spectrum")
            series.append((f"spectrum_{i}", item.delta_s, item.power_response))
        return series, "delta_s", "|eps_T|^2"
    raise TypeError(f"cannot plot {type(data).__name__}")


def emit_plot(data, path: str, title: str = "") -> None:
    """Self-contained SVG line chart; byte-identical for identical input.

    A single-point series is drawn as a marker instead of a polyline.
    """
    series, xlabel, ylabel = _series_from(data)
    xs = np.concatenate([s[1] for s in series])
    ys = np.concatenate([s[2] for s in series])
    finite = np.isfinite(xs) & np.isfinite(ys)
    if not finite.any():
        raise ValueError("no finite data to plot")
    x_lo, x_hi = float(xs[finite].min()), float(xs[finite].max())
    y_lo, y_hi = float(ys[finite].min()), float(ys[finite].max())
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0

    def to_px(x, y):
        px = _MARGIN + (x - x_lo) / (x_hi - x_lo) * (_WIDTH - 2 * _MARGIN)
        py = _HEIGHT - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (_HEIGHT - 2 * _MARGIN)
        return px, py

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_WIDTH - 2 * _MARGIN}" '
        f'height="{_HEIGHT - 2 * _MARGIN}" fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH // 2}" y="30" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{title}</text>'
        )
    parts.append(
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_HEIGHT // 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 18 {_HEIGHT // 2})">{ylabel}</text>'
    )
    for tick, value in (("min", x_lo), ("max", x_hi)):
        px, _ = to_px(value, y_lo)
        parts.append(
            f'<text x="{px:.2f}" y="{_HEIGHT - _MARGIN + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{value:.6g}</text>'
        )
    for value in (y_lo, y_hi):
        _, py = to_px(x_lo, value)
        parts.append(
            f'<text x="{_MARGIN - 6}" y="{py:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{value:.6g}</text>'
        )

    for (name, sx, sy), color in zip(series, _COLORS * (1 + len(series) // len(_COLORS))):
        mask = np.isfinite(sx) & np.isfinite(sy)
        pts = [to_px(x, y) for x, y in zip(np.asarray(sx)[mask], np.asarray(sy)[mask])]
        if not pts:
            continue
        if len(pts) == 1:
            px, py = pts[0]
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="{color}"/>')
        else:
            coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            parts.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
    parts.append("</svg>")
    _atomic_write(path, "\n".join(parts) + "\n")

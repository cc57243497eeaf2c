"""CSV, SVG and manifest writers.

CSV files carry a header row and 17 significant digits so that identical
inputs produce identical bytes; timestamps live only in ``manifest.json``.
"""
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np


def fmt(x):
    if x is None:
        return ""
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def write_trajectory(path, traj):
    N = traj.coeffs.shape[1]
    header = ["step", "t"] + [f"c_{i}" for i in range(1, N + 1)]
    rows = ([str(k), t, *c] for k, (t, c) in enumerate(zip(traj.times, traj.coeffs)))
    return write_csv(path, header, rows)


def write_energy(path, report):
    rows = (
        [str(k), t, E, B, B - E]
        for k, (t, E, B) in enumerate(zip(report.times, report.energy, report.bound))
    )
    return write_csv(path, ["step", "t", "E", "B", "margin"], rows)


def write_convergence(path, tables):
    rows = []
    for table in tables:
        for r in table.rows:
            rows.append([r.param, r.value, r.error, "" if r.order is None else fmt(r.order)])
    return write_csv(path, ["param", "value", "error", "order"], rows)


def config_digest(model_dump):
    blob = json.dumps(model_dump, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def write_manifest(path, digest, version, started, outputs, command, exit_code):
    doc = {
        "command": command,
        "config_digest": digest,
        "version": version,
        "started": started,
        "finished": now(),
        "exit_code": exit_code,
        "outputs": sorted(Path(p).name for p in outputs),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return Path(path)


def now():
    return datetime.now(timezone.utc).isoformat()


def write_svg(path, times, energy, bound, width=640, height=400):
    """Minimal standalone line chart of E(t) (blue) and B(t) (red)."""
    pad = 50
    t = np.asarray(times, dtype=float)
    series = [np.asarray(energy, dtype=float), np.asarray(bound, dtype=float)]
    finite = np.concatenate([s[np.isfinite(s)] for s in series] + [np.zeros(1)])
    lo, hi = float(finite.min()), float(finite.max())
    hi = hi if hi > lo else lo + 1.0
    t0, t1 = (float(t[0]), float(t[-1])) if len(t) > 1 else (0.0, 1.0)
    t1 = t1 if t1 > t0 else t0 + 1.0

    def pts(y):
        keep = np.isfinite(y)
        xs = pad + (t[keep] - t0) / (t1 - t0) * (width - 2 * pad)
        ys = height - pad - (y[keep] - lo) / (hi - lo) * (height - 2 * pad)
        return " ".join(f"{x:.2f},{v:.2f}" for x, v in zip(xs, ys))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<polyline fill="none" stroke="blue" points="{pts(series[0])}"/>',
        f'<polyline fill="none" stroke="red" points="{pts(series[1])}"/>',
        f'<text x="{pad}" y="{pad - 10}" font-size="12">E(t) blue, B(t) red; '
        f"range [{lo:.4g}, {hi:.4g}]</text>",
        f'<text x="{width - pad}" y="{height - pad + 20}" font-size="12" '
        f'text-anchor="end">t = {t1:.4g}</text>',
        "</svg>",
    ]
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
    return Path(path)

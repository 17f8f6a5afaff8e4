"""Static SVG/CSV report files for a fit.

The plots are hand-rolled SVG (no plotting dependency, byte-stable
output): a predicted-vs-observed accuracy scatter, an accuracy-vs-
effective-tokens view with per-model-size prediction curves, and a CSV
grid of the scaling factor over the (diversity, syntheticity) plane.
"""

from __future__ import annotations

import math
import os
from typing import Sequence

from .errors import QTokensError
from .fitting import pearson
from .scaling_law import ScalingConstants, effective_tokens_raw, scaling_factor_q

WIDTH = 640
HEIGHT = 480
MARGIN = 60

PRED_VS_TRUE_SVG = "pred_vs_true.svg"
ACC_VS_DQ_SVG = "acc_vs_dq.svg"
Q_SURFACE_CSV = "q_surface.csv"


def _fmt(value: float) -> str:
    return f"{value:.2f}"


class _Axes:
    """Linear or log-x mapping from data space to pixel space."""

    def __init__(self, xlim, ylim, log_x=False):
        self.xlim = xlim
        self.ylim = ylim
        self.log_x = log_x

    def x(self, v: float) -> float:
        lo, hi = self.xlim
        if self.log_x:
            v, lo, hi = math.log10(v), math.log10(lo), math.log10(hi)
        frac = (v - lo) / (hi - lo)
        return MARGIN + frac * (WIDTH - 2 * MARGIN)

    def y(self, v: float) -> float:
        lo, hi = self.ylim
        frac = (v - lo) / (hi - lo)
        return HEIGHT - MARGIN - frac * (HEIGHT - 2 * MARGIN)


def _pad_limits(values: Sequence[float], frac: float = 0.08) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    span = (hi - lo) or abs(hi) or 1.0
    return lo - frac * span, hi + frac * span


def _svg_document(body: list[str], title: str, xlabel: str, ylabel: str) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {HEIGHT / 2:.1f})">{ylabel}</text>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
        f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>',
    ]
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _ticks(axes: _Axes, n: int = 5) -> list[str]:
    parts = []
    for i in range(n + 1):
        xf = axes.xlim[0] + (axes.xlim[1] - axes.xlim[0]) * i / n
        if axes.log_x:
            lg0, lg1 = math.log10(axes.xlim[0]), math.log10(axes.xlim[1])
            xf = 10 ** (lg0 + (lg1 - lg0) * i / n)
            label = f"{xf:.2g}"
        else:
            label = _fmt(xf)
        px = axes.x(xf)
        parts.append(
            f'<line x1="{px:.1f}" y1="{HEIGHT - MARGIN}" x2="{px:.1f}" '
            f'y2="{HEIGHT - MARGIN + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{label}</text>'
        )
        yf = axes.ylim[0] + (axes.ylim[1] - axes.ylim[0]) * i / n
        py = axes.y(yf)
        parts.append(
            f'<line x1="{MARGIN - 5}" y1="{py:.1f}" x2="{MARGIN}" y2="{py:.1f}" '
            f'stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN - 8}" y="{py + 3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(yf)}</text>'
        )
    return parts


def pred_vs_true_svg(observed: Sequence[float], predicted: Sequence[float]) -> str:
    """Scatter of predicted against observed accuracy with a y=x guide."""
    if len(observed) < 2:
        raise QTokensError("need >= 2 points to plot correlation")
    r = pearson(predicted, observed)
    lim = _pad_limits(list(observed) + list(predicted))
    axes = _Axes(lim, lim)
    body = _ticks(axes)
    body.append(
        f'<line x1="{axes.x(lim[0]):.1f}" y1="{axes.y(lim[0]):.1f}" '
        f'x2="{axes.x(lim[1]):.1f}" y2="{axes.y(lim[1]):.1f}" '
        f'stroke="gray" stroke-dasharray="4 3"/>'
    )
    for obs, pred in zip(observed, predicted):
        body.append(
            f'<circle cx="{axes.x(obs):.1f}" cy="{axes.y(pred):.1f}" r="3" '
            f'fill="steelblue" fill-opacity="0.6"/>'
        )
    body.append(
        f'<text x="{WIDTH - MARGIN - 8}" y="{MARGIN + 18}" text-anchor="end" '
        f'font-family="sans-serif" font-size="12">pearson r = {r:.4f}</text>'
    )
    return _svg_document(body, "Predicted vs observed accuracy", "observed", "predicted")


def acc_vs_dq_svg(points: Sequence[dict], constants: ScalingConstants) -> str:
    """Observed accuracy against effective tokens, with model curves."""
    if len(points) < 2:
        raise QTokensError("need >= 2 points to plot correlation")
    dqs = [
        effective_tokens_raw(p["d_tokens"], p["dr"], p["s"], constants) for p in points
    ]
    accs = [p["observed"] for p in points]
    xlim = (min(dqs) / 1.5, max(dqs) * 1.5)
    ylim = _pad_limits(accs)
    axes = _Axes(xlim, ylim, log_x=True)
    body = _ticks(axes)
    palette = ("#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#bbbbbb")
    sizes = sorted({p["n_millions"] for p in points})
    for k, size in enumerate(sizes):
        color = palette[k % len(palette)]
        steps = 64
        lg0, lg1 = math.log10(xlim[0]), math.log10(xlim[1])
        coords = []
        for i in range(steps + 1):
            dq = 10 ** (lg0 + (lg1 - lg0) * i / steps)
            score = constants.e + constants.a / size**constants.alpha + constants.b / dq**constants.beta
            score = min(max(score, 0.0), 1.0)
            if ylim[0] <= score <= ylim[1]:
                coords.append(f"{axes.x(dq):.1f},{axes.y(score):.1f}")
        if len(coords) >= 2:
            body.append(
                f'<polyline points="{" ".join(coords)}" fill="none" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
        body.append(
            f'<text x="{WIDTH - MARGIN - 8}" y="{MARGIN + 16 + 14 * k}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" fill="{color}">N = {size:g}M</text>'
        )
        for p, dq in zip(points, dqs):
            if p["n_millions"] == size:
                body.append(
                    f'<circle cx="{axes.x(dq):.1f}" cy="{axes.y(p["observed"]):.1f}" '
                    f'r="3" fill="{color}" fill-opacity="0.6"/>'
                )
    return _svg_document(body, "Accuracy vs effective tokens", "effective tokens", "accuracy")


def q_surface_csv(
    constants: ScalingConstants,
    dr_range: tuple[float, float],
    s_range: tuple[float, float],
    steps: int = 21,
) -> str:
    """Grid of the scaling factor over the (diversity, syntheticity) plane."""
    lines = ["diversity,syntheticity,q"]
    for i in range(steps):
        dr = dr_range[0] + (dr_range[1] - dr_range[0]) * i / (steps - 1)
        for j in range(steps):
            s = s_range[0] + (s_range[1] - s_range[0]) * j / (steps - 1)
            q = scaling_factor_q(dr, s, constants.c1, constants.c2)
            lines.append(f"{dr:.6f},{s:.6f},{q:.8e}")
    return "\n".join(lines) + "\n"


def write_report(report_dict: dict, out_dir: str) -> list[str]:
    """Emit the three report files for a fit-report dictionary.

    The dictionary must carry per-point records (the fit command writes
    them); without at least two points the scatter is undefined.
    """
    points = report_dict.get("points")
    if not points or len(points) < 2:
        raise QTokensError("need >= 2 points to plot correlation")
    constants = ScalingConstants.from_dict(report_dict["constants"])
    os.makedirs(out_dir, exist_ok=True)
    observed = [p["observed"] for p in points]
    predicted = [p["predicted"] for p in points]
    outputs = []

    path = os.path.join(out_dir, PRED_VS_TRUE_SVG)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(pred_vs_true_svg(observed, predicted))
    outputs.append(path)

    path = os.path.join(out_dir, ACC_VS_DQ_SVG)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(acc_vs_dq_svg(points, constants))
    outputs.append(path)

    drs = [p["dr"] for p in points]
    ss = [p["s"] for p in points]
    path = os.path.join(out_dir, Q_SURFACE_CSV)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(q_surface_csv(constants, (min(drs), max(drs)), (min(ss), max(ss))))
    outputs.append(path)
    return outputs

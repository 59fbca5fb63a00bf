"""Image comparison metrics: correlation, NPCR, UACI, MSE/PSNR and differential images."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from .qimage import GrayImage

__all__ = [
    "MetricError",
    "MetricReport",
    "correlation_coefficient",
    "npcr",
    "uaci",
    "mse_psnr",
    "psnr_from_mse",
    "differential_image",
    "compare",
    "reports_csv",
    "reports_table",
]

MAX_I = 255


class MetricError(ValueError):
    pass


def _pair(a: GrayImage, b: GrayImage) -> tuple[np.ndarray, np.ndarray]:
    if a.n != b.n:
        raise MetricError(f"image sizes differ: {a.side}x{a.side} vs {b.side}x{b.side}")
    return np.asarray(a.pixels, dtype=np.float64), np.asarray(b.pixels, dtype=np.float64)


def correlation_coefficient(a: GrayImage, b: GrayImage) -> float:
    """Pearson correlation of pixel intensities."""
    u, v = _pair(a, b)
    du, dv = u - u.mean(), v - v.mean()
    den = math.sqrt(float(du @ du) * float(dv @ dv))
    if den == 0.0:
        raise MetricError("correlation undefined for a constant image")
    return float(du @ dv) / den


def npcr(c1: GrayImage, c2: GrayImage, *, count_equal: bool = False) -> float:
    """Percentage of positions whose pixels differ.

    ``count_equal=True`` flips the indicator (counts equal positions), which is
    the other convention found in print; it gives ``100 - npcr``.
    """
    u, v = _pair(c1, c2)
    hits = (u == v) if count_equal else (u != v)
    return 100.0 * float(hits.sum()) / u.size


def uaci(c1: GrayImage, c2: GrayImage, max_i: int = MAX_I) -> float:
    u, v = _pair(c1, c2)
    return 100.0 * float(np.abs(u - v).mean()) / max_i


def psnr_from_mse(mse: float, max_i: int = MAX_I) -> float:
    """``20 log10(MAX_I / sqrt(MSE))``; ``inf`` for ``MSE == 0``."""
    if mse < 0:
        raise MetricError("MSE must be non-negative")
    if mse == 0:
        return math.inf
    return 20.0 * math.log10(max_i / math.sqrt(mse))


def mse_psnr(a: GrayImage, b: GrayImage, max_i: int = MAX_I) -> tuple[float, float, float]:
    """``(mse, mse_unsquared, psnr)``.

    ``mse_unsquared`` is the mean of signed differences without squaring,
    kept for comparison with formulas printed that way. PSNR always uses the
    squared MSE.
    """
    u, v = _pair(a, b)
    d = u - v
    mse = float((d * d).mean())
    return mse, float(d.mean()), psnr_from_mse(mse, max_i)


def differential_image(c1: GrayImage, c2: GrayImage) -> GrayImage:
    u, v = _pair(c1, c2)
    return GrayImage(c1.n, tuple(int(p) for p in np.abs(u - v)))


@dataclass(frozen=True)
class MetricReport:
    r: float | None
    npcr: float
    uaci: float
    mse: float
    mse_unsquared: float
    psnr: float
    max_i: int
    width: int
    height: int

    def as_row(self) -> dict[str, str]:
        def fmt(v):
            if v is None:
                return "nan"
            if isinstance(v, float):
                return "inf" if math.isinf(v) else f"{v:.6g}"
            return str(v)
        return {k: fmt(v) for k, v in asdict(self).items()}


def compare(a: GrayImage, b: GrayImage, max_i: int = MAX_I) -> MetricReport:
    try:
        r = correlation_coefficient(a, b)
    except MetricError:
        r = None
    mse, mse_u, psnr = mse_psnr(a, b, max_i)
    return MetricReport(
        r=r, npcr=npcr(a, b), uaci=uaci(a, b, max_i),
        mse=mse, mse_unsquared=mse_u, psnr=psnr,
        max_i=max_i, width=a.side, height=a.side,
    )


_FIELDS = ["r", "npcr", "uaci", "mse", "mse_unsquared", "psnr", "max_i", "width", "height"]


def reports_csv(reports, labels=None) -> str:
    buf = io.StringIO()
    fields = (["label"] if labels is not None else []) + _FIELDS
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for i, rep in enumerate(reports):
        row = rep.as_row()
        if labels is not None:
            row["label"] = labels[i]
        w.writerow(row)
    return buf.getvalue()


def reports_table(reports, labels=None) -> str:
    text = reports_csv(reports, labels)
    rows = [line.split(",") for line in text.strip().splitlines()]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for j, r in enumerate(rows):
        out.append("  ".join(c.rjust(widths[i]) for i, c in enumerate(r)))
        if j == 0:
            out.append("  ".join("-" * wd for wd in widths))
    return "\n".join(out) + "\n"

"""Flow accuracy metrics, plain and distortion-compensated.

Endpoint error is the euclidean norm of the flow difference. Angular error
follows the homogeneous-vector convention: both flows are extended with a
third component of 1 and the angle between the 3-D vectors is measured, so
zero-flow pixels still contribute meaningfully.

The distortion-compensated variants divide per-pixel errors by (1 - d)
where d is the density from :mod:`sphereflow.distortion`; with d in
[0.5, 1.0) this boosts high-distortion (polar) pixels. Reductions are
plain means over the valid mask, using numpy's pairwise summation, so
results are deterministic for a given input ordering.

Pixels whose ground-truth flow is non-finite are always excluded.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, ShapeError

__all__ = [
    "SPEED_BIN_NAMES",
    "BinStats",
    "MetricReport",
    "endpoint_error_map",
    "angular_error_map",
    "epe",
    "angular_error",
    "evaluate_flow",
]

# overlapping speed ranges keyed by ground-truth flow magnitude
SPEED_BIN_NAMES = ("all", "lt5", "lt10", "lt20", "ge20")
_SPEED_PREDICATES = {
    "all": lambda s: s >= 0.0,
    "lt5": lambda s: s < 5.0,
    "lt10": lambda s: s < 10.0,
    "lt20": lambda s: s < 20.0,
    "ge20": lambda s: s >= 20.0,
}


def _check_pair(pred: np.ndarray, gt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError(f"flow shapes differ: {pred.shape} vs {gt.shape}")
    if pred.ndim < 1 or pred.shape[-1] != 2:
        raise ShapeError(f"flow arrays must end in a (u, v) axis, got shape {pred.shape}")
    return pred, gt


def _valid_mask(gt: np.ndarray, mask) -> np.ndarray:
    valid = np.isfinite(gt).all(axis=-1)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != valid.shape:
            raise ShapeError(f"mask shape {mask.shape} does not match flow grid {valid.shape}")
        valid &= mask
    return valid


def endpoint_error_map(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Per-pixel endpoint error; NaN where ground truth is invalid."""
    pred, gt = _check_pair(pred, gt)
    du = pred[..., 0] - gt[..., 0]
    dv = pred[..., 1] - gt[..., 1]
    return np.sqrt(du * du + dv * dv)


def angular_error_map(pred: np.ndarray, gt: np.ndarray) -> np.ndarray:
    """Per-pixel angular error in radians between homogeneous flow vectors."""
    pred, gt = _check_pair(pred, gt)
    up, vp = pred[..., 0], pred[..., 1]
    ug, vg = gt[..., 0], gt[..., 1]
    # single square root of the product so identical flows give exactly
    # num == den and the error is exactly zero; non-finite ground truth
    # produces NaN here and is dropped by the validity mask downstream
    with np.errstate(invalid="ignore"):
        num = up * ug + vp * vg + 1.0
        den = np.sqrt((up * up + vp * vp + 1.0) * (ug * ug + vg * vg + 1.0))
        return np.arccos(np.clip(num / den, -1.0, 1.0))


def _masked_mean(values: np.ndarray, valid: np.ndarray) -> float:
    if not np.any(valid):
        raise EmptyInputError("no valid pixels to average over")
    return float(np.mean(values[valid]))


def epe(pred: np.ndarray, gt: np.ndarray, mask=None) -> float:
    """Mean endpoint error over valid pixels."""
    pred, gt = _check_pair(pred, gt)
    return _masked_mean(endpoint_error_map(pred, gt), _valid_mask(gt, mask))


def angular_error(pred: np.ndarray, gt: np.ndarray, mask=None) -> float:
    """Mean angular error (radians) over valid pixels."""
    pred, gt = _check_pair(pred, gt)
    return _masked_mean(angular_error_map(pred, gt), _valid_mask(gt, mask))


@dataclass(frozen=True)
class BinStats:
    pixels: int
    epe: float
    ae: float
    epe_weighted: float | None = None
    ae_weighted: float | None = None

    def to_dict(self) -> dict:
        out = {"pixels": self.pixels, "epe": self.epe, "ae": self.ae}
        if self.epe_weighted is not None:
            out["epe_weighted"] = self.epe_weighted
            out["ae_weighted"] = self.ae_weighted
        return out


@dataclass(frozen=True)
class MetricReport:
    """Aggregate metrics for one prediction/ground-truth pair."""

    pixels: int
    epe: float
    ae: float
    epe_weighted: float | None = None
    ae_weighted: float | None = None
    speed_bins: dict = field(default_factory=dict)
    density_bins: dict = field(default_factory=dict)
    density_edges: tuple = ()

    def to_dict(self) -> dict:
        out = {
            "pixels": self.pixels,
            "epe": self.epe,
            "ae": self.ae,
            "speed_bins": {k: v.to_dict() for k, v in self.speed_bins.items()},
        }
        if self.epe_weighted is not None:
            out["epe_weighted"] = self.epe_weighted
            out["ae_weighted"] = self.ae_weighted
        if self.density_bins:
            out["density_edges"] = list(self.density_edges)
            out["density_bins"] = {k: v.to_dict() for k, v in self.density_bins.items()}
        return out

    def csv_fieldnames(self) -> list[str]:
        names = ["pixels", "epe", "ae", "epe_weighted", "ae_weighted"]
        for bin_name in SPEED_BIN_NAMES:
            names += [f"epe[{bin_name}]", f"ae[{bin_name}]", f"pixels[{bin_name}]"]
        for bin_name in self.density_bins:
            names += [f"epe[{bin_name}]", f"ae[{bin_name}]", f"pixels[{bin_name}]"]
        return names

    def to_csv_row(self) -> dict:
        row = {
            "pixels": self.pixels,
            "epe": repr(self.epe),
            "ae": repr(self.ae),
            "epe_weighted": "" if self.epe_weighted is None else repr(self.epe_weighted),
            "ae_weighted": "" if self.ae_weighted is None else repr(self.ae_weighted),
        }
        for bins in (self.speed_bins, self.density_bins):
            for bin_name, stats in bins.items():
                row[f"epe[{bin_name}]"] = repr(stats.epe)
                row[f"ae[{bin_name}]"] = repr(stats.ae)
                row[f"pixels[{bin_name}]"] = stats.pixels
        for bin_name in SPEED_BIN_NAMES:
            row.setdefault(f"epe[{bin_name}]", "")
            row.setdefault(f"ae[{bin_name}]", "")
            row.setdefault(f"pixels[{bin_name}]", 0)
        return row

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=self.csv_fieldnames(), lineterminator="\n")
        writer.writeheader()
        writer.writerow(self.to_csv_row())
        return buf.getvalue()


def _bin_stats(epe_map, ae_map, weight, sel) -> BinStats:
    n = int(np.count_nonzero(sel))
    stats = BinStats(
        pixels=n,
        epe=float(np.mean(epe_map[sel])),
        ae=float(np.mean(ae_map[sel])),
    )
    if weight is not None:
        stats = BinStats(
            pixels=n,
            epe=stats.epe,
            ae=stats.ae,
            epe_weighted=float(np.mean((epe_map * weight)[sel])),
            ae_weighted=float(np.mean((ae_map * weight)[sel])),
        )
    return stats


def evaluate_flow(
    pred: np.ndarray,
    gt: np.ndarray,
    density: np.ndarray | None = None,
    mask=None,
    density_edges=(0.5, 0.6, 0.7, 0.8, 0.9, 1.0),
) -> MetricReport:
    """Full metric sweep: overall, per speed range, and per density band.

    Speed ranges overlap by design (a 3 px/frame pixel lands in every
    "lt" bin); empty ranges are left out of the report. Density banding
    needs a density map of the same grid shape.
    """
    pred, gt = _check_pair(pred, gt)
    valid = _valid_mask(gt, mask)
    if not np.any(valid):
        raise EmptyInputError("no valid pixels to evaluate")

    epe_map = endpoint_error_map(pred, gt)
    ae_map = angular_error_map(pred, gt)

    weight = None
    if density is not None:
        density = np.asarray(density, dtype=np.float64)
        if density.shape != valid.shape:
            raise ShapeError(
                f"density shape {density.shape} does not match flow grid {valid.shape}"
            )
        weight = 1.0 / (1.0 - density)

    overall = _bin_stats(epe_map, ae_map, weight, valid)

    speed = np.sqrt(gt[..., 0] ** 2 + gt[..., 1] ** 2)
    speed_bins = {}
    for name in SPEED_BIN_NAMES:
        sel = valid & _SPEED_PREDICATES[name](speed)
        if np.any(sel):
            speed_bins[name] = _bin_stats(epe_map, ae_map, weight, sel)

    density_binned = {}
    edges = tuple(float(e) for e in density_edges)
    if density is not None:
        idx = np.searchsorted(np.asarray(edges), density, side="right") - 1
        for i in range(len(edges) - 1):
            sel = valid & (idx == i)
            if np.any(sel):
                key = f"d:{edges[i]:.2f}-{edges[i + 1]:.2f}"
                density_binned[key] = _bin_stats(epe_map, ae_map, weight, sel)

    return MetricReport(
        pixels=overall.pixels,
        epe=overall.epe,
        ae=overall.ae,
        epe_weighted=overall.epe_weighted,
        ae_weighted=overall.ae_weighted,
        speed_bins=speed_bins,
        density_bins=density_binned,
        density_edges=edges if density is not None else (),
    )

"""Perceptual statistics of frame and flow corpora.

Covers the usual natural-video diagnostics: luminance histograms, radially
averaged power spectra with a log-log slope fit, heavy-tail checks on
spatial and temporal derivatives, and flow magnitude/direction/derivative
distributions.

Conventions fixed here so numbers are reproducible:
  * grayscale via luma weights (0.299, 0.587, 0.114), levels in [0, 255];
  * spectra from the largest centered power-of-two square crop (at most
    512), mean-subtracted and Hann-windowed per frame, power averaged
    across frames before the radial average;
  * slope fitted by least squares on log10 power vs log10 frequency over
    the band [f_max/64, f_max/4], recorded in the result;
  * kurtosis is the non-excess standardized fourth moment (Gaussian = 3);
  * horizontal derivatives wrap around the equirect seam, vertical ones
    stop at the poles, so histogram statistics are invariant under
    horizontal rolls of the whole corpus.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, ShapeError

__all__ = [
    "LUMA_WEIGHTS",
    "Histogram",
    "SpectrumResult",
    "DerivativeStats",
    "FlowStats",
    "StatsReport",
    "to_grayscale",
    "luminance_histogram",
    "power_spectrum_slope",
    "derivative_kurtosis",
    "flow_statistics",
    "compute_stats_report",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
_DIRECTION_BINS = 72
_DERIV_BINS = 255
_SPEED_LOG_BINS = 32
_SPEED_FLOOR = 1e-3
_DIRECTION_MIN_SPEED = 1e-6


@dataclass(frozen=True)
class Histogram:
    """Bin edges, raw integer counts, and the normalized mass per bin."""

    edges: np.ndarray
    counts: np.ndarray

    @property
    def mass(self) -> np.ndarray:
        total = int(self.counts.sum())
        if total == 0:
            return np.zeros(len(self.counts), dtype=np.float64)
        return self.counts / float(total)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merged(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge histograms with different edges")
        return Histogram(self.edges, self.counts + other.counts)

    def to_dict(self) -> dict:
        return {
            "edges": [float(e) for e in self.edges],
            "counts": [int(c) for c in self.counts],
            "mass": [float(m) for m in self.mass],
        }


@dataclass(frozen=True)
class SpectrumResult:
    crop_size: int
    n_frames: int
    freqs: np.ndarray
    power: np.ndarray
    slope: float
    intercept: float
    fit_band: tuple

    def to_dict(self) -> dict:
        return {
            "crop_size": self.crop_size,
            "n_frames": self.n_frames,
            "freqs": [float(f) for f in self.freqs],
            "power": [float(p) for p in self.power],
            "slope": self.slope,
            "intercept": self.intercept,
            "fit_band": [float(b) for b in self.fit_band],
        }


@dataclass(frozen=True)
class DerivativeStats:
    axis: str
    histogram: Histogram
    kurtosis: float
    degenerate: bool
    n_values: int

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "histogram": self.histogram.to_dict(),
            "kurtosis": None if self.degenerate else self.kurtosis,
            "degenerate": self.degenerate,
            "n_values": self.n_values,
        }


@dataclass(frozen=True)
class FlowStats:
    u_hist: Histogram
    speed_hist: Histogram
    direction_hist: Histogram
    direction_excluded: int
    deriv: DerivativeStats

    def to_dict(self) -> dict:
        return {
            "u_hist": self.u_hist.to_dict(),
            "speed_hist": self.speed_hist.to_dict(),
            "direction_hist": self.direction_hist.to_dict(),
            "direction_excluded": self.direction_excluded,
            "deriv": self.deriv.to_dict(),
        }


@dataclass(frozen=True)
class StatsReport:
    n_frames: int
    n_flows: int
    luminance: Histogram
    spectrum: SpectrumResult | None
    spatial_deriv: DerivativeStats
    temporal_deriv: DerivativeStats | None
    flow: FlowStats | None

    def to_dict(self) -> dict:
        return {
            "n_frames": self.n_frames,
            "n_flows": self.n_flows,
            "luminance": self.luminance.to_dict(),
            "spectrum": None if self.spectrum is None else self.spectrum.to_dict(),
            "spatial_deriv": self.spatial_deriv.to_dict(),
            "temporal_deriv": None if self.temporal_deriv is None else self.temporal_deriv.to_dict(),
            "flow": None if self.flow is None else self.flow.to_dict(),
        }


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """Luma conversion to float64 levels in [0, 255]; grayscale passes through."""
    frame = np.asarray(frame)
    if frame.ndim == 2:
        return frame.astype(np.float64)
    if frame.ndim == 3 and frame.shape[-1] in (3, 4):
        rgb = frame[..., :3].astype(np.float64)
        r, g, b = LUMA_WEIGHTS
        return rgb[..., 0] * r + rgb[..., 1] * g + rgb[..., 2] * b
    raise ShapeError(f"expected (H, W) or (H, W, 3) frame, got shape {frame.shape}")


def luminance_histogram(frames) -> Histogram:
    """256-level luminance histogram pooled over all frames."""
    counts = np.zeros(256, dtype=np.int64)
    n = 0
    for frame in frames:
        gray = to_grayscale(frame)
        levels = np.clip(np.rint(gray), 0, 255).astype(np.int64)
        counts += np.bincount(levels.ravel(), minlength=256)
        n += 1
    if n == 0:
        raise EmptyInputError("no frames")
    edges = np.arange(257, dtype=np.float64) - 0.5
    return Histogram(edges, counts)


def _crop_size(height: int, width: int, limit: int = 512) -> int:
    n = 1
    while n * 2 <= min(height, width, limit):
        n *= 2
    return n


def power_spectrum_slope(frames, crop_limit: int = 512) -> SpectrumResult:
    """Radially averaged power spectrum with a mid-band log-log slope fit."""
    accum = None
    n_frames = 0
    crop = None
    for frame in frames:
        gray = to_grayscale(frame)
        h, w = gray.shape
        if crop is None:
            crop = _crop_size(h, w, crop_limit)
            if crop < 16:
                raise ShapeError(f"frames too small for spectra: {h}x{w}")
            window = np.hanning(crop)
            window2d = np.outer(window, window)
        r0 = (h - crop) // 2
        c0 = (w - crop) // 2
        patch = gray[r0 : r0 + crop, c0 : c0 + crop]
        patch = (patch - patch.mean()) * window2d
        freq = np.fft.fft2(patch)
        power = (freq * np.conj(freq)).real
        accum = power if accum is None else accum + power
        n_frames += 1
    if n_frames == 0:
        raise EmptyInputError("no frames")
    mean_power = np.fft.fftshift(accum / n_frames)

    half = crop // 2
    idx = np.arange(crop) - half
    ky, kx = np.meshgrid(idx, idx, indexing="ij")
    radius = np.rint(np.sqrt(kx * kx + ky * ky)).astype(np.int64).ravel()
    sums = np.bincount(radius, weights=mean_power.ravel())
    hits = np.bincount(radius)
    keep = np.arange(1, half + 1)
    freqs = keep.astype(np.float64)
    radial = sums[keep] / hits[keep]

    f_lo, f_hi = half / 64.0, half / 4.0
    band = (freqs >= f_lo) & (freqs <= f_hi) & (radial > 0)
    if np.count_nonzero(band) < 2:
        raise ShapeError("fit band has fewer than two usable frequencies")
    slope, intercept = np.polyfit(np.log10(freqs[band]), np.log10(radial[band]), 1)
    return SpectrumResult(
        crop_size=crop,
        n_frames=n_frames,
        freqs=freqs,
        power=radial,
        slope=float(slope),
        intercept=float(intercept),
        fit_band=(f_lo, f_hi),
    )


def _wrap_dx(a: np.ndarray) -> np.ndarray:
    # forward difference with horizontal wraparound (equirect seam)
    return np.roll(a, -1, axis=1) - a


def _symmetric_histogram(values: np.ndarray, bins: int = _DERIV_BINS) -> Histogram:
    vmax = float(np.abs(values).max()) if values.size else 0.0
    if vmax == 0.0:
        edges = np.array([-0.5, 0.5])
        counts = np.array([values.size], dtype=np.int64)
        return Histogram(edges, counts)
    edges = np.linspace(-vmax, vmax, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    return Histogram(edges, counts.astype(np.int64))


def derivative_kurtosis(arrays, axis: str) -> DerivativeStats:
    """Forward-difference distribution along one axis, with its kurtosis.

    axis is one of spatial_x (wraps horizontally), spatial_y, temporal
    (differences between consecutive arrays; needs at least two).
    A zero-variance derivative field is flagged degenerate.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    if not arrays:
        raise EmptyInputError("no arrays")
    if axis == "spatial_x":
        diffs = [_wrap_dx(a) for a in arrays]
    elif axis == "spatial_y":
        diffs = [np.diff(a, axis=0) for a in arrays]
    elif axis == "temporal":
        if len(arrays) < 2:
            raise EmptyInputError("temporal derivative needs at least two arrays")
        diffs = [b - a for a, b in zip(arrays[:-1], arrays[1:])]
    else:
        raise ValueError(f"unknown axis {axis!r}")
    flat = np.concatenate([d.ravel() for d in diffs])

    hist = _symmetric_histogram(flat)
    mu = flat.mean()
    centered = flat - mu
    var = np.mean(centered * centered)
    if var == 0.0:
        return DerivativeStats(axis, hist, float("nan"), True, flat.size)
    kurt = float(np.mean(centered**4) / var**2)
    return DerivativeStats(axis, hist, kurt, False, flat.size)


def _speed_histogram(speed: np.ndarray) -> Histogram:
    smax = float(speed.max()) if speed.size else 0.0
    if smax < _SPEED_FLOOR:
        edges = np.array([0.0, _SPEED_FLOOR])
        counts = np.array([speed.size], dtype=np.int64)
        return Histogram(edges, counts)
    top = np.nextafter(smax, np.inf)
    edges = np.concatenate([[0.0], np.geomspace(_SPEED_FLOOR, top, _SPEED_LOG_BINS)])
    counts, _ = np.histogram(speed, bins=edges)
    return Histogram(edges, counts.astype(np.int64))


def flow_statistics(flows) -> FlowStats:
    """Pooled u, speed, direction, and spatial-derivative distributions."""
    flows = [np.asarray(f, dtype=np.float64) for f in flows]
    if not flows:
        raise EmptyInputError("no flow fields")
    for f in flows:
        if f.ndim != 3 or f.shape[-1] != 2:
            raise ShapeError(f"flow must have shape (H, W, 2), got {f.shape}")

    u_all = np.concatenate([f[..., 0].ravel() for f in flows])
    v_all = np.concatenate([f[..., 1].ravel() for f in flows])
    speed = np.sqrt(u_all * u_all + v_all * v_all)

    u_hist = _symmetric_histogram(u_all)
    speed_hist = _speed_histogram(speed)

    moving = speed >= _DIRECTION_MIN_SPEED
    theta = np.arctan2(v_all[moving], u_all[moving])
    theta[theta == -np.pi] = np.pi  # canonical range (-pi, pi]
    dir_edges = np.linspace(-np.pi, np.pi, _DIRECTION_BINS + 1)
    dir_counts, _ = np.histogram(theta, bins=dir_edges)
    direction_hist = Histogram(dir_edges, dir_counts.astype(np.int64))
    excluded = int(speed.size - np.count_nonzero(moving))

    channels = [f[..., c] for f in flows for c in (0, 1)]
    dx = [_wrap_dx(ch) for ch in channels]
    dy = [np.diff(ch, axis=0) for ch in channels]
    flat = np.concatenate([d.ravel() for d in dx + dy])
    deriv_hist = _symmetric_histogram(flat)
    mu = flat.mean()
    centered = flat - mu
    var = np.mean(centered * centered)
    if var == 0.0:
        deriv = DerivativeStats("spatial", deriv_hist, float("nan"), True, flat.size)
    else:
        deriv = DerivativeStats(
            "spatial", deriv_hist, float(np.mean(centered**4) / var**2), False, flat.size
        )

    return FlowStats(u_hist, speed_hist, direction_hist, excluded, deriv)


def compute_stats_report(frames, flows=None, crop_limit: int = 512) -> StatsReport:
    """Run every statistic that the corpus supports and bundle the results."""
    frames = list(frames)
    if not frames:
        raise EmptyInputError("no frames")
    grays = [to_grayscale(f) for f in frames]

    luminance = luminance_histogram(frames)
    try:
        spectrum = power_spectrum_slope(frames, crop_limit=crop_limit)
    except ShapeError:
        spectrum = None
    spatial = derivative_kurtosis(grays, "spatial_x")
    temporal = derivative_kurtosis(grays, "temporal") if len(grays) >= 2 else None

    flow_part = None
    if flows is not None:
        flows = list(flows)
        if flows:
            flow_part = flow_statistics(flows)

    return StatsReport(
        n_frames=len(frames),
        n_flows=0 if flows is None else len(flows),
        luminance=luminance,
        spectrum=spectrum,
        spatial_deriv=spatial,
        temporal_deriv=temporal,
        flow=flow_part,
    )

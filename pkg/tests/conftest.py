"""Shared fixtures: bundled sample dataset and synthetic test signals."""

import os

import numpy as np
import pytest

PACK_ROOT = os.path.join(os.path.dirname(__file__), "..", "sample_data", "mini360")


@pytest.fixture(scope="session")
def pack_root() -> str:
    assert os.path.isdir(PACK_ROOT), "bundled sample pack is missing"
    return os.path.abspath(PACK_ROOT)


def smooth_flow(height: int, width: int, seed: int, amp: float = 1.5) -> np.ndarray:
    """Band-limited random flow: a few low-order harmonics, seam-periodic in x.

    White noise is useless for resampling round-trip checks (bilinear
    interpolation cannot reconstruct it), so round-trip tolerances are
    stated for this band-limited family.
    """
    rng = np.random.default_rng(seed)
    cols, rows = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    u = np.zeros((height, width))
    v = np.zeros_like(u)
    for _ in range(3):
        kx, ky = rng.integers(1, 3, size=2)
        pu, pv = rng.uniform(0, 2 * np.pi, size=2)
        au, av = rng.uniform(0.3, amp, size=2)
        u += au * np.sin(2 * np.pi * kx * cols / width + pu) * np.cos(np.pi * ky * rows / height)
        v += av * np.cos(2 * np.pi * kx * cols / width + pv) * np.sin(np.pi * ky * rows / height)
    return np.stack([u, v], axis=-1)


def smooth_image(height: int, width: int, seed: int, cut: float = 25.0) -> np.ndarray:
    """Low-pass filtered noise scaled to [0, 255], float64."""
    rng = np.random.default_rng(seed)
    freq = np.fft.fft2(rng.normal(size=(height, width)))
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    lowpass = np.exp(-((fx * cut) ** 2 + (fy * cut) ** 2))
    img = np.fft.ifft2(freq * lowpass).real
    return (img - img.min()) / (img.max() - img.min()) * 255.0


def one_over_f_frames(n: int, size: int, seed: int) -> list:
    """Frames with an exact 1/f amplitude spectrum (1/f^2 power), random phase."""
    rng = np.random.default_rng(seed)
    ky = np.fft.fftfreq(size)[:, None]
    kx = np.fft.fftfreq(size)[None, :]
    radius = np.hypot(kx, ky)
    radius[0, 0] = np.inf  # drop DC
    frames = []
    for _ in range(n):
        phase = rng.uniform(0, 2 * np.pi, (size, size))
        img = np.fft.ifft2(np.exp(1j * phase) / radius).real
        frames.append((img - img.min()) / (img.max() - img.min()) * 255.0)
    return frames

"""Corpus statistics: histograms, spectra, derivative tails, flow summaries."""

import json

import numpy as np
import pytest

from sphereflow.errors import EmptyInputError, ShapeError
from sphereflow.stats import (
    Histogram,
    compute_stats_report,
    derivative_kurtosis,
    flow_statistics,
    luminance_histogram,
    power_spectrum_slope,
    to_grayscale,
)

from conftest import one_over_f_frames


def test_grayscale_weights():
    red = np.zeros((2, 2, 3), dtype=np.uint8)
    red[..., 0] = 255
    np.testing.assert_allclose(to_grayscale(red), 0.299 * 255)
    gray = np.full((2, 2), 7.0)
    np.testing.assert_array_equal(to_grayscale(gray), gray)
    rgba = np.zeros((2, 2, 4))
    np.testing.assert_array_equal(to_grayscale(rgba), 0.0)
    with pytest.raises(ShapeError):
        to_grayscale(np.zeros((2, 2, 2)))


def test_luminance_histogram_black_and_white():
    black = np.zeros((8, 8), dtype=np.uint8)
    white = np.full((8, 8), 255, dtype=np.uint8)
    hist = luminance_histogram([black, white])
    assert hist.counts[0] == 64
    assert hist.counts[255] == 64
    assert hist.counts[1:255].sum() == 0
    assert hist.total == 128
    assert abs(hist.mass.sum() - 1.0) < 1e-12
    assert len(hist.edges) == 257


def test_luminance_histogram_clips_out_of_range():
    frame = np.array([[-20.0, 300.0]])
    hist = luminance_histogram([frame])
    assert hist.counts[0] == 1
    assert hist.counts[255] == 1


def test_luminance_needs_frames():
    with pytest.raises(EmptyInputError):
        luminance_histogram([])


def test_histogram_merge():
    h1 = Histogram(np.array([0.0, 1.0, 2.0]), np.array([3, 4]))
    h2 = Histogram(np.array([0.0, 1.0, 2.0]), np.array([1, 1]))
    h3 = Histogram(np.array([0.0, 1.0, 2.0]), np.array([5, 0]))
    merged = h1.merged(h2).merged(h3)
    np.testing.assert_array_equal(merged.counts, [9, 5])
    np.testing.assert_array_equal(
        merged.counts, h1.merged(h2.merged(h3)).counts
    )
    with pytest.raises(ValueError):
        h1.merged(Histogram(np.array([0.0, 2.0, 4.0]), np.array([1, 1])))


def test_empty_histogram_mass_is_zero():
    h = Histogram(np.array([0.0, 1.0]), np.array([0]))
    np.testing.assert_array_equal(h.mass, [0.0])


def test_white_noise_spectrum_is_flat():
    frames = [np.random.default_rng(100 + i).uniform(0, 255, (128, 128)) for i in range(10)]
    res = power_spectrum_slope(frames)
    assert abs(res.slope) < 0.15
    assert res.crop_size == 128
    assert res.n_frames == 10


def test_one_over_f_squared_spectrum_slope():
    res = power_spectrum_slope(one_over_f_frames(5, 256, seed=5))
    assert res.slope == pytest.approx(-2.0, abs=0.15)


def test_spectrum_crop_is_largest_power_of_two():
    frames = [np.zeros((100, 300)) + np.random.default_rng(0).normal(size=(100, 300))]
    assert power_spectrum_slope(frames).crop_size == 64
    big = [np.random.default_rng(1).normal(size=(700, 1400))]
    assert power_spectrum_slope(big).crop_size == 512


def test_spectrum_rejects_tiny_frames():
    with pytest.raises(ShapeError):
        power_spectrum_slope([np.zeros((8, 8))])
    with pytest.raises(EmptyInputError):
        power_spectrum_slope([])


def test_intensity_scaling_leaves_slope_alone():
    frames = one_over_f_frames(2, 128, seed=9)
    a = power_spectrum_slope(frames).slope
    b = power_spectrum_slope([0.25 * f for f in frames]).slope
    assert a == pytest.approx(b, abs=1e-9)


def test_gaussian_derivative_kurtosis_is_three():
    field = np.random.default_rng(3).normal(size=(1000, 1000))
    res = derivative_kurtosis([field], "spatial_x")
    assert res.kurtosis == pytest.approx(3.0, abs=0.1)
    assert not res.degenerate


def test_sparse_spikes_are_heavy_tailed():
    field = np.zeros((200, 400))
    field[::17, ::23] = 5.0
    res = derivative_kurtosis([field], "spatial_x")
    assert res.kurtosis > 100


def test_constant_field_is_degenerate():
    res = derivative_kurtosis([np.full((8, 16), 3.0)], "spatial_y")
    assert res.degenerate
    assert np.isnan(res.kurtosis)
    assert res.histogram.counts.sum() == res.n_values


def test_temporal_derivative_needs_two_frames():
    with pytest.raises(EmptyInputError):
        derivative_kurtosis([np.zeros((4, 4))], "temporal")
    res = derivative_kurtosis([np.zeros((4, 4)), np.ones((4, 4))], "temporal")
    assert res.n_values == 16


def test_unknown_axis_rejected():
    with pytest.raises(ValueError):
        derivative_kurtosis([np.zeros((4, 4))], "diagonal")
    with pytest.raises(EmptyInputError):
        derivative_kurtosis([], "spatial_x")


def test_horizontal_derivatives_wrap_so_rolls_do_not_matter():
    frame = np.random.default_rng(4).uniform(0, 255, (32, 64))
    a = derivative_kurtosis([frame], "spatial_x")
    b = derivative_kurtosis([np.roll(frame, 17, axis=1)], "spatial_x")
    np.testing.assert_array_equal(a.histogram.counts, b.histogram.counts)
    np.testing.assert_array_equal(a.histogram.edges, b.histogram.edges)
    assert a.kurtosis == pytest.approx(b.kurtosis, rel=1e-12)


def test_vertical_derivative_shape():
    frame = np.arange(12, dtype=float).reshape(3, 4)
    res = derivative_kurtosis([frame], "spatial_y")
    assert res.n_values == 8  # (3-1) x 4, no cross-pole wrap


def test_flow_statistics_uniform_flow():
    f = np.zeros((2, 4, 2))
    f[..., 0] = 3.0
    f[..., 1] = 4.0
    fs = flow_statistics([f])
    # single direction: exactly one populated bin and it brackets atan2(4, 3)
    hot = np.flatnonzero(fs.direction_hist.counts)
    assert len(hot) == 1
    lo, hi = fs.direction_hist.edges[hot[0]], fs.direction_hist.edges[hot[0] + 1]
    assert lo <= np.arctan2(4.0, 3.0) < hi
    assert fs.direction_hist.counts[hot[0]] == 8
    assert fs.direction_excluded == 0
    # all speeds are 5, so everything lands in the top log bin
    assert fs.speed_hist.counts[-1] == 8
    assert fs.deriv.degenerate


def test_flow_statistics_zero_flow_is_excluded_from_direction():
    fs = flow_statistics([np.zeros((2, 4, 2))])
    assert fs.direction_excluded == 8
    assert fs.direction_hist.counts.sum() == 0
    assert len(fs.speed_hist.counts) == 1  # degenerate speed histogram


def test_direction_minus_pi_is_canonicalized():
    f = np.zeros((2, 4, 2))
    f[..., 0] = -1.0
    f[..., 1] = -0.0  # atan2(-0, -1) = -pi, must count as +pi
    fs = flow_statistics([f])
    assert fs.direction_hist.counts[-1] == 8


def test_mirrored_flows_mirror_the_histograms():
    rng = np.random.default_rng(6)
    flows = [rng.normal(size=(16, 32, 2)) * 3 for _ in range(3)]
    pos = flow_statistics(flows)
    neg = flow_statistics([-f for f in flows])
    np.testing.assert_array_equal(neg.u_hist.counts, pos.u_hist.counts[::-1])
    np.testing.assert_array_equal(neg.speed_hist.counts, pos.speed_hist.counts)
    np.testing.assert_array_equal(
        neg.direction_hist.counts, np.roll(pos.direction_hist.counts, 36)
    )


def test_flow_statistics_validation():
    with pytest.raises(EmptyInputError):
        flow_statistics([])
    with pytest.raises(ShapeError):
        flow_statistics([np.zeros((4, 4, 3))])


def test_full_report_assembly():
    rng = np.random.default_rng(8)
    frames = [rng.uniform(0, 255, (32, 64)) for _ in range(3)]
    flows = [rng.normal(size=(32, 64, 2)) for _ in range(2)]
    rep = compute_stats_report(frames, flows)
    assert rep.n_frames == 3
    assert rep.n_flows == 2
    assert rep.spectrum is not None
    assert rep.temporal_deriv is not None
    assert rep.flow is not None
    blob = json.dumps(rep.to_dict(), sort_keys=True)
    assert json.loads(blob)["n_frames"] == 3


def test_report_without_flows_or_spectrum():
    frames = [np.random.default_rng(9).uniform(0, 255, (8, 8))]
    rep = compute_stats_report(frames)
    assert rep.spectrum is None  # too small for a spectrum
    assert rep.temporal_deriv is None
    assert rep.flow is None
    with pytest.raises(EmptyInputError):
        compute_stats_report([])

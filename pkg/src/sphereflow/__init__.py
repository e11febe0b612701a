"""sphereflow: geometry, warping, metrics, and statistics for 360-degree optical flow.

The library works on equirectangular rasters (width = 2 * height) and
treats the unit sphere as the ground-truth domain: images and flow fields
rotate without information loss, flow accuracy can be weighted by local
projection distortion, and corpora can be audited with the usual
natural-video statistics.
"""

from .errors import EmptyInputError, FormatError, ShapeError
from .geometry import Rotation3
from .warp import WarpMap, build_warp_map, inverse_warp, warp_flow, warp_image
from .distortion import build_density_map
from .metrics import MetricReport, angular_error, epe, evaluate_flow
from .viz import encode_flow_rgb, encode_sphere_rgba, flow_to_sphere_motion
from .stats import compute_stats_report
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "EmptyInputError",
    "FormatError",
    "ShapeError",
    "Rotation3",
    "WarpMap",
    "build_warp_map",
    "inverse_warp",
    "warp_flow",
    "warp_image",
    "build_density_map",
    "MetricReport",
    "angular_error",
    "epe",
    "evaluate_flow",
    "encode_flow_rgb",
    "encode_sphere_rgba",
    "flow_to_sphere_motion",
    "compute_stats_report",
    "KERNEL_BACKEND",
]

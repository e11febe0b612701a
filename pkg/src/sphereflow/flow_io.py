"""File formats and dataset layout.

Flow fields use the community .flo convention: a 4-byte magic that is the
float32 202021.25 ("PIEH" little-endian), int32 width and height, then
row-major interleaved (u, v) float32 pairs. Depth maps use grayscale PFM
with the usual negative-scale-means-little-endian marker and bottom-up row
order. Both round-trip bit-exactly, NaNs included.

Dataset layout (one directory per video)::

    root/
      <video>/
        frames/   000000.png 000001.png ...
        flow_fw/  000000.flo ...          (frame i -> i+1, one fewer than frames)
        flow_bw/  000001.flo ...          (optional)
        depth/    000000.pfm ...          (optional)

Indexing walks videos and frames in lexicographic order and emits one
sample per frame that has a successor, so a corpus of F frames across V
videos yields F - V samples.
"""

from __future__ import annotations

import os
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import EmptyInputError, FormatError, ShapeError

__all__ = [
    "FLO_MAGIC",
    "read_flo",
    "write_flo",
    "read_depth_pfm",
    "write_depth_pfm",
    "depth_validity_mask",
    "read_image",
    "write_image",
    "scale_flow",
    "DatasetSample",
    "DatasetIndex",
    "index_dataset",
]

FLO_MAGIC = 202021.25
_MAX_DIM = 1 << 16
_MAX_PIXELS = 1 << 28
_IMAGE_EXTS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def read_flo(path) -> np.ndarray:
    """Load a .flo flow field as float32 (H, W, 2)."""
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) != 12:
            raise FormatError(f"{path}: truncated flo header")
        (magic,) = struct.unpack("<f", header[:4])
        if magic != FLO_MAGIC:
            raise FormatError(f"{path}: bad flo magic {magic!r}")
        width, height = struct.unpack("<ii", header[4:])
        if not (0 < width <= _MAX_DIM and 0 < height <= _MAX_DIM) or width * height > _MAX_PIXELS:
            raise FormatError(f"{path}: unreasonable flo dimensions {width}x{height}")
        expected = width * height * 2 * 4
        payload = fh.read(expected + 1)
    if len(payload) != expected:
        raise FormatError(
            f"{path}: flo payload is {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(height, width, 2).copy()


def write_flo(flow: np.ndarray, path) -> None:
    flow = np.asarray(flow)
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ShapeError(f"flow must have shape (H, W, 2), got {flow.shape}")
    height, width = flow.shape[:2]
    data = np.ascontiguousarray(flow, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<f", FLO_MAGIC))
        fh.write(struct.pack("<ii", width, height))
        fh.write(data.tobytes())


def _read_pfm_token(fh) -> bytes:
    # whitespace-delimited header token
    token = b""
    while True:
        ch = fh.read(1)
        if not ch:
            raise FormatError("truncated pfm header")
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def read_depth_pfm(path) -> np.ndarray:
    """Load a grayscale PFM as float32 (H, W); NaNs pass through untouched."""
    with open(path, "rb") as fh:
        kind = _read_pfm_token(fh)
        if kind == b"PF":
            raise FormatError(f"{path}: color PFM not supported for depth")
        if kind != b"Pf":
            raise FormatError(f"{path}: not a PFM file (got {kind!r})")
        try:
            width = int(_read_pfm_token(fh))
            height = int(_read_pfm_token(fh))
            scale = float(_read_pfm_token(fh))
        except ValueError as exc:
            raise FormatError(f"{path}: malformed pfm header") from exc
        if not (0 < width <= _MAX_DIM and 0 < height <= _MAX_DIM):
            raise FormatError(f"{path}: unreasonable pfm dimensions {width}x{height}")
        if scale == 0:
            raise FormatError(f"{path}: pfm scale must be nonzero")
        payload = fh.read(width * height * 4 + 1)
    if len(payload) != width * height * 4:
        raise FormatError(f"{path}: pfm payload truncated")
    dtype = "<f4" if scale < 0 else ">f4"
    rows = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return np.flipud(rows).astype(np.float32, copy=True)  # stored bottom-up


def write_depth_pfm(depth: np.ndarray, path) -> None:
    depth = np.asarray(depth)
    if depth.ndim != 2:
        raise ShapeError(f"depth must be 2-D, got shape {depth.shape}")
    height, width = depth.shape
    data = np.ascontiguousarray(np.flipud(depth), dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{width} {height}\n".encode("ascii"))
        fh.write(b"-1.0\n")
        fh.write(data.tobytes())


def depth_validity_mask(depth: np.ndarray) -> np.ndarray:
    """True where depth is finite (NaN pixels are carried but flagged)."""
    return np.isfinite(np.asarray(depth))


def read_image(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img)


def write_image(array: np.ndarray, path) -> None:
    array = np.asarray(array)
    if array.dtype == np.uint16:
        if array.ndim != 2:
            raise ShapeError("16-bit output only supported for grayscale")
        Image.fromarray(array).save(path)
        return
    if array.dtype != np.uint8:
        raise FormatError(f"image writer expects uint8 or uint16, got {array.dtype}")
    Image.fromarray(array).save(path)


def scale_flow(flow: np.ndarray, new_width: int, new_height: int) -> np.ndarray:
    """Resample a flow field to a new grid and rescale the vectors.

    u scales by the width ratio and v by the height ratio, since flow is
    stored in pixel units of its own resolution.
    """
    flow = np.asarray(flow, dtype=np.float64)
    if flow.ndim != 3 or flow.shape[-1] != 2:
        raise ShapeError(f"flow must have shape (H, W, 2), got {flow.shape}")
    if new_width <= 0 or new_height <= 0:
        raise ShapeError("target dimensions must be positive")
    from .kernels import sample_bilinear

    old_h, old_w = flow.shape[:2]
    cols, rows = np.meshgrid(
        np.arange(new_width, dtype=np.float64), np.arange(new_height, dtype=np.float64)
    )
    src_c = (cols + 0.5) * (old_w / new_width) - 0.5
    src_r = (rows + 0.5) * (old_h / new_height) - 0.5
    resampled = sample_bilinear(flow, src_c, src_r)
    resampled[..., 0] *= new_width / old_w
    resampled[..., 1] *= new_height / old_h
    return resampled.astype(flow.dtype, copy=False)


@dataclass(frozen=True)
class DatasetSample:
    video: str
    frame_t: str
    frame_t1: str
    flow_fw: str
    flow_bw: str | None = None
    depth: str | None = None


@dataclass(frozen=True)
class DatasetIndex:
    root: str
    split: str
    videos: tuple
    samples: tuple
    warnings: tuple = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.samples)


def _listdir_sorted(path: str, exts) -> list:
    try:
        names = os.listdir(path)
    except FileNotFoundError:
        return []
    return sorted(
        os.path.join(path, n) for n in names if n.lower().endswith(tuple(exts))
    )


def _probe_image_size(path: str) -> tuple:
    with Image.open(path) as img:
        return img.height, img.width


def _probe_flo_size(path: str) -> tuple:
    with open(path, "rb") as fh:
        header = fh.read(12)
    if len(header) != 12 or struct.unpack("<f", header[:4])[0] != FLO_MAGIC:
        raise FormatError(f"{path}: not a flo file")
    width, height = struct.unpack("<ii", header[4:])
    return height, width


def index_dataset(root, split: str | None = None, validate: bool = True) -> DatasetIndex:
    """Build a deterministic sample index over the canonical layout.

    An empty root yields an empty index with a warning rather than an
    error. With validate=True, file headers are probed so that frame and
    flow dimensions are checked without loading pixel data.
    """
    root = os.fspath(root)
    base = os.path.join(root, split) if split else root
    if not os.path.isdir(base):
        raise FileNotFoundError(f"dataset root {base} does not exist")

    videos = sorted(
        name for name in os.listdir(base) if os.path.isdir(os.path.join(base, name))
    )
    notes = []
    if not videos:
        notes.append(f"no video directories under {base}")
        warnings.warn(notes[-1], stacklevel=2)
        return DatasetIndex(root, split or "all", (), (), tuple(notes))

    samples = []
    for video in videos:
        vdir = os.path.join(base, video)
        frames_dir = os.path.join(vdir, "frames")
        flow_dir = os.path.join(vdir, "flow_fw")
        for required in (frames_dir, flow_dir):
            if not os.path.isdir(required):
                raise FileNotFoundError(f"{video}: missing required directory {required}")
        frames = _listdir_sorted(frames_dir, _IMAGE_EXTS)
        flows = _listdir_sorted(flow_dir, (".flo",))
        if len(frames) < 2:
            notes.append(f"{video}: fewer than two frames, skipped")
            continue
        if len(flows) != len(frames) - 1:
            raise FormatError(
                f"{video}: expected {len(frames) - 1} forward flows for "
                f"{len(frames)} frames, found {len(flows)}"
            )
        back = _listdir_sorted(os.path.join(vdir, "flow_bw"), (".flo",))
        depth = _listdir_sorted(os.path.join(vdir, "depth"), (".pfm",))

        if validate:
            size = _probe_image_size(frames[0])
            for f in frames[1:]:
                if _probe_image_size(f) != size:
                    raise ShapeError(f"{f}: frame size differs from {frames[0]}")
            for f in flows:
                if _probe_flo_size(f) != size:
                    raise ShapeError(f"{f}: flow size does not match frames")

        for i in range(len(frames) - 1):
            samples.append(
                DatasetSample(
                    video=video,
                    frame_t=frames[i],
                    frame_t1=frames[i + 1],
                    flow_fw=flows[i],
                    flow_bw=back[i] if i < len(back) else None,
                    depth=depth[i] if i < len(depth) else None,
                )
            )
    if not samples:
        notes.append("index is empty")
        warnings.warn(notes[-1], stacklevel=2)
    return DatasetIndex(root, split or "all", tuple(videos), tuple(samples), tuple(notes))


def load_sample_frames(sample: DatasetSample) -> tuple:
    return read_image(sample.frame_t), read_image(sample.frame_t1)


def require_samples(index: DatasetIndex) -> DatasetIndex:
    if len(index) == 0:
        raise EmptyInputError(f"dataset at {index.root} has no usable samples")
    return index

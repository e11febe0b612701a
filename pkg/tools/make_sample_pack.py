"""Generate the bundled mini-dataset (sample_data/mini360).

Four synthetic videos, eight 128x256 frames each. Every scene is a
"dead leaves" world painted on the unit sphere: spherical caps with a
power-law angular-size distribution occlude one another, which gives the
frames natural-image-like power spectra (log-log slope near -2.3) and
heavy-tailed spatial derivatives peaked at zero. Each video rotates the
whole world by a fixed per-step rotation, so ground-truth flow is the
exact rotational pixel motion with no resampling involved; every frame is
rasterized directly from the analytic world.

Per video: frames/, flow_fw/ (7 files), depth/ (8 PFM files). The first
video also carries flow_bw/. Deterministic for a fixed seed; the pack is
committed, so tests never re-run this script.
"""

from __future__ import annotations

import argparse
import os

import numpy as np

from sphereflow.flow_io import write_depth_pfm, write_flo, write_image
from sphereflow.geometry import Rotation3, angles_to_sphere, pixel_to_angles
from sphereflow.warp import rotate_pixels, wrap_horizontal

HEIGHT, WIDTH = 128, 256
FRAMES = 8

# per-video step rotations (pitch, roll, yaw), radians; one faster video
STEPS = (
    (0.020, -0.015, 0.045),
    (-0.030, 0.025, -0.020),
    (0.010, 0.040, 0.015),
    (0.060, -0.045, 0.110),
)

N_CAPS = 650
MIN_RADIUS = 0.04
MAX_RADIUS = 1.5
SIZE_EXPONENT = 2.1  # p(r) ~ r^-SIZE_EXPONENT


def _sample_radii(rng, n):
    # inverse-CDF sampling of the truncated power law
    a = 1.0 - SIZE_EXPONENT
    lo, hi = MIN_RADIUS**a, MAX_RADIUS**a
    return (lo + rng.random(n) * (hi - lo)) ** (1.0 / a)


def make_world(rng):
    """Random spherical-cap scene; later caps paint over earlier ones."""
    z = rng.uniform(-1.0, 1.0, N_CAPS)
    phi = rng.uniform(-np.pi, np.pi, N_CAPS)
    s = np.sqrt(1.0 - z * z)
    centers = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    cos_radii = np.cos(_sample_radii(rng, N_CAPS))
    base = rng.uniform(40, 215, size=(N_CAPS, 3))
    colors = np.clip(base + rng.normal(0, 18, size=(N_CAPS, 3)), 0, 255)
    depths = rng.uniform(1.5, 12.0, N_CAPS)
    return centers, cos_radii, colors, depths


def pixel_directions():
    cols, rows = np.meshgrid(
        np.arange(WIDTH, dtype=np.float64), np.arange(HEIGHT, dtype=np.float64)
    )
    theta, phi = pixel_to_angles(cols, rows, WIDTH, HEIGHT)
    x, y, z = angles_to_sphere(theta, phi)
    return np.stack([x, y, z], axis=-1).reshape(-1, 3)


def render(world, rotation_matrix, dirs):
    centers, cos_radii, colors, depths = world
    # world direction seen by each pixel: C^-1 d = d @ C
    d = dirs @ rotation_matrix
    img = np.empty((dirs.shape[0], 3), dtype=np.float64)
    img[:] = (88.0, 96.0, 110.0)  # background
    depth = np.full(dirs.shape[0], 40.0)
    dots = d @ centers.T  # (npix, ncaps)
    for k in range(centers.shape[0]):
        mask = dots[:, k] >= cos_radii[k]
        img[mask] = colors[k]
        depth[mask] = depths[k]
    img = img.reshape(HEIGHT, WIDTH, 3)
    depth = depth.reshape(HEIGHT, WIDTH)
    return np.rint(img).astype(np.uint8), depth.astype(np.float32)


def rotational_flow(rotation: Rotation3):
    cols, rows = np.meshgrid(
        np.arange(WIDTH, dtype=np.float64), np.arange(HEIGHT, dtype=np.float64)
    )
    new_c, new_r = rotate_pixels(rotation, cols, rows, WIDTH, HEIGHT)
    u = wrap_horizontal(new_c - cols, WIDTH)
    v = new_r - rows
    return np.stack([u, v], axis=-1).astype(np.float32)


def build_pack(root: str, seed: int = 20240917) -> None:
    rng = np.random.default_rng(seed)
    dirs = pixel_directions()
    for vid, step_angles in enumerate(STEPS):
        name = f"video_{vid:02d}"
        vdir = os.path.join(root, name)
        for sub in ("frames", "flow_fw", "depth"):
            os.makedirs(os.path.join(vdir, sub), exist_ok=True)
        with_backward = vid == 0
        if with_backward:
            os.makedirs(os.path.join(vdir, "flow_bw"), exist_ok=True)

        world = make_world(rng)
        step = Rotation3.from_euler(*step_angles)
        fw = rotational_flow(step)
        bw = rotational_flow(step.inverse())

        cumulative = Rotation3.identity()
        for t in range(FRAMES):
            frame, depth = render(world, cumulative.matrix, dirs)
            write_image(frame, os.path.join(vdir, "frames", f"{t:06d}.png"))
            write_depth_pfm(depth, os.path.join(vdir, "depth", f"{t:06d}.pfm"))
            if t < FRAMES - 1:
                write_flo(fw, os.path.join(vdir, "flow_fw", f"{t:06d}.flo"))
            if with_backward and t > 0:
                write_flo(bw, os.path.join(vdir, "flow_bw", f"{t:06d}.flo"))
            cumulative = step.compose(cumulative)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="sample_data/mini360")
    parser.add_argument("--seed", type=int, default=20240917)
    args = parser.parse_args()
    build_pack(args.out, args.seed)
    print(f"wrote sample pack to {args.out}")


if __name__ == "__main__":
    main()

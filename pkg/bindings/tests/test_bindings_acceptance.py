"""Release gate for the bindings package.

Run with `pytest bindings/tests/test_bindings_acceptance.py -v -s` to see the
pass/fail line. The gate demands bit-identical results against the wrapped
library on 100 random inputs per operation, strict rejection of
non-contiguous buffers, and no dependence of the core library on this
package.
"""

from pathlib import Path

import numpy as np
import pytest

bindings = pytest.importorskip("sphereflow_bindings")

import sphereflow
from sphereflow import Rotation3, build_warp_map, evaluate_flow, warp_flow, warp_image
from sphereflow.siamese.augment import sample_augmentations


def _gate(label: str, checks: dict) -> None:
    failed = [name for name, ok in checks.items() if not ok]
    status = "FAIL" if failed else "PASS"
    detail = f"  ({', '.join(failed)})" if failed else ""
    print(f"[{status}] {label}{detail}")
    assert not failed, f"{label}: failed checks {failed}"


def _bit_equal(got, want) -> bool:
    return got.dtype == want.dtype and got.shape == want.shape and got.tobytes() == want.tobytes()


def _warp_parity(n: int) -> bool:
    rng = np.random.default_rng(1000)
    for i in range(n):
        height = int(rng.integers(4, 24))
        kind = "flow" if i % 2 else "image"
        if kind == "flow":
            arr = (2.0 * rng.standard_normal((height, 2 * height, 2))).astype(np.float32)
        else:
            channels = (None, 1, 3)[i % 3]
            shape = (height, 2 * height) if channels is None else (height, 2 * height, channels)
            arr = rng.standard_normal(shape).astype(np.float32)
        pitch, roll, yaw = rng.uniform(-np.pi, np.pi, size=3)
        interp = "nearest" if i % 5 == 0 else "bilinear"
        inverse = i % 7 == 0
        got = bindings.warp(arr, pitch, roll, yaw, kind=kind, interp=interp, inverse=inverse)
        rot = Rotation3.from_euler(pitch, roll, yaw)
        if inverse:
            rot = rot.inverse()
        wmap = build_warp_map(rot, 2 * height, height)
        if kind == "image":
            want = warp_image(arr, wmap, interp=interp)
        else:
            want = warp_flow(arr, wmap, rot, interp=interp)
        if not _bit_equal(got, want):
            return False
    return True


def _metrics_parity(n: int) -> bool:
    rng = np.random.default_rng(2000)
    for i in range(n):
        height = int(rng.integers(4, 16))
        pred = (8.0 * rng.standard_normal((height, 2 * height, 2))).astype(np.float32)
        gt = (8.0 * rng.standard_normal((height, 2 * height, 2))).astype(np.float32)
        density = None
        if i % 2:
            density = rng.uniform(0.5, 0.95, size=(height, 2 * height)).astype(np.float32)
        if bindings.flow_metrics(pred, gt, density) != evaluate_flow(pred, gt, density=density).to_dict():
            return False
    return True


def _augmentation_parity(n: int) -> bool:
    for seed in range(n):
        strategy = "v2" if seed % 2 else "v1"
        count = 1 + seed % 5
        want = [
            (pair.rotation_left.angles(), pair.rotation_right.angles())
            for pair in sample_augmentations(strategy, seed, count)
        ]
        if bindings.sample_rotations(strategy, seed, count) != want:
            return False
    return True


def _rejects_non_contiguous() -> bool:
    strided = np.zeros((8, 32), dtype=np.float32)[:, ::2]
    for call in (
        lambda: bindings.warp(strided, yaw=0.4),
        lambda: bindings.flow_metrics(np.zeros((4, 8, 2), np.float32)[:, ::2], np.zeros((4, 4, 2), np.float32)),
    ):
        try:
            call()
        except bindings.ContractError:
            continue
        return False
    return True


def _library_does_not_import_bindings() -> bool:
    package_root = Path(sphereflow.__file__).parent
    return not any(
        "sphereflow_bindings" in path.read_text() for path in package_root.rglob("*.py")
    )


def test_bindings_parity_and_isolation():
    _gate(
        "bindings parity: bit-identical delegation, strict buffers, independent core",
        {
            "warp parity on 100 random inputs": _warp_parity(100),
            "metrics parity on 100 random inputs": _metrics_parity(100),
            "augmentation parity on 100 seeds": _augmentation_parity(100),
            "non-contiguous inputs rejected": _rejects_non_contiguous(),
            "library has no reference to the bindings": _library_does_not_import_bindings(),
        },
    )

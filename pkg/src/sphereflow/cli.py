"""Command-line surface.

Subcommands: warp, eval, stats, distortion-map, augment-pairs. Every
command is deterministic given its flags and inputs; reports embed the
toolkit version, the run configuration, and sha256 digests of the inputs
so results can be traced, and contain no timestamps so identical runs
produce identical bytes.

Exit codes: 0 success, 2 I/O errors, 3 shape or format errors, 4 empty
input. Outputs are written to a temporary file and renamed into place, so
a failing run never leaves a partial artifact.

Angles are radians by default; append ``deg`` to give degrees, e.g.
``--yaw 90deg``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .distortion import build_density_map, density_to_uint16, read_density_raw, write_density_raw
from .errors import EmptyInputError, FormatError, ShapeError
from .geometry import Rotation3
from .metrics import SPEED_BIN_NAMES, BinStats, MetricReport, evaluate_flow
from .siamese import STRATEGIES, sample_augmentations
from .stats import compute_stats_report
from .warp import build_warp_map, warp_flow, warp_image
from . import flow_io

__all__ = ["main", "parse_angle"]


def parse_angle(text: str) -> float:
    """Radians, or degrees when suffixed with 'deg'."""
    text = text.strip()
    if text.lower().endswith("deg"):
        return math.radians(float(text[:-3]))
    return float(text)


@contextmanager
def _atomic_output(path: str):
    """Yield a temp path that is renamed onto path only on success.

    The real extension is kept on the temp name so format-by-suffix
    writers behave the same as writing the target directly.
    """
    root, ext = os.path.splitext(path)
    tmp = f"{root}.tmp{os.getpid()}{ext}"
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json(obj, path: str) -> None:
    with _atomic_output(path) as tmp:
        with open(tmp, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _report_envelope(command: str, config: dict, inputs: dict) -> dict:
    return {
        "tool": "sphereflow",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {k: _sha256(v) for k, v in sorted(inputs.items())},
    }


def _rotation_from_args(args) -> Rotation3:
    rot = Rotation3.from_euler(args.pitch, args.roll, args.yaw)
    return rot.inverse() if args.inverse else rot


def cmd_warp(args) -> int:
    rot = _rotation_from_args(args)
    if args.kind == "image":
        data = flow_io.read_image(args.input)
        height, width = data.shape[:2]
        wmap = build_warp_map(rot, width, height)
        out = warp_image(data, wmap, interp=args.interp)
        with _atomic_output(args.output) as tmp:
            flow_io.write_image(out, tmp)
    else:
        flow = flow_io.read_flo(args.input)
        height, width = flow.shape[:2]
        wmap = build_warp_map(rot, width, height)
        out = warp_flow(flow, wmap, rot, interp=args.interp)
        with _atomic_output(args.output) as tmp:
            flow_io.write_flo(out, tmp)
    return 0


def _combine_reports(reports: list) -> MetricReport:
    """Pixel-weighted exact combination of per-file reports."""

    def merge(stats_list):
        total = sum(s.pixels for s in stats_list)
        epe = sum(s.epe * s.pixels for s in stats_list) / total
        ae = sum(s.ae * s.pixels for s in stats_list) / total
        if all(s.epe_weighted is not None for s in stats_list):
            epw = sum(s.epe_weighted * s.pixels for s in stats_list) / total
            aew = sum(s.ae_weighted * s.pixels for s in stats_list) / total
        else:
            epw = aew = None
        return BinStats(total, epe, ae, epw, aew)

    overall = merge(reports)
    speed = {}
    for name in SPEED_BIN_NAMES:
        present = [r.speed_bins[name] for r in reports if name in r.speed_bins]
        if present:
            speed[name] = merge(present)
    density = {}
    keys = sorted({k for r in reports for k in r.density_bins})
    for key in keys:
        present = [r.density_bins[key] for r in reports if key in r.density_bins]
        if present:
            density[key] = merge(present)
    edges = next((r.density_edges for r in reports if r.density_edges), ())
    return MetricReport(
        pixels=overall.pixels,
        epe=overall.epe,
        ae=overall.ae,
        epe_weighted=overall.epe_weighted,
        ae_weighted=overall.ae_weighted,
        speed_bins=speed,
        density_bins=density,
        density_edges=edges,
    )


def cmd_eval(args) -> int:
    pred_files = {f for f in os.listdir(args.pred_dir) if f.endswith(".flo")}
    gt_files = {f for f in os.listdir(args.gt_dir) if f.endswith(".flo")}
    matched = sorted(pred_files & gt_files)
    notes = [f"unmatched prediction: {f}" for f in sorted(pred_files - gt_files)]
    notes += [f"unmatched ground truth: {f}" for f in sorted(gt_files - pred_files)]
    if not matched:
        raise EmptyInputError("no prediction/ground-truth pairs share a filename")

    edges = tuple(float(e) for e in args.bins.split(","))
    fixed_density = None
    if args.density not in ("auto", "none"):
        fixed_density = read_density_raw(args.density)

    inputs = {}
    per_file = {}
    reports = []
    density_cache = {}
    for name in matched:
        pred_path = os.path.join(args.pred_dir, name)
        gt_path = os.path.join(args.gt_dir, name)
        pred = flow_io.read_flo(pred_path)
        gt = flow_io.read_flo(gt_path)
        if pred.shape != gt.shape:
            raise ShapeError(f"{name}: prediction {pred.shape} vs ground truth {gt.shape}")
        if args.density == "auto":
            key = gt.shape[:2]
            if key not in density_cache:
                density_cache[key] = build_density_map(key[1], key[0])
            density = density_cache[key]
        elif fixed_density is not None:
            if fixed_density.shape != gt.shape[:2]:
                raise ShapeError(f"{name}: density grid {fixed_density.shape} does not match flow")
            density = fixed_density
        else:
            density = None
        rep = evaluate_flow(pred, gt, density=density, density_edges=edges)
        per_file[name] = rep
        reports.append(rep)
        inputs[f"pred/{name}"] = pred_path
        inputs[f"gt/{name}"] = gt_path

    aggregate = _combine_reports(reports)
    payload = _report_envelope(
        "eval",
        {
            "pred_dir": args.pred_dir,
            "gt_dir": args.gt_dir,
            "density": args.density,
            "bins": list(edges),
        },
        inputs,
    )
    payload["files"] = {name: rep.to_dict() for name, rep in per_file.items()}
    payload["aggregate"] = aggregate.to_dict()
    payload["warnings"] = notes
    payload["n_warnings"] = len(notes)
    _write_json(payload, args.report)

    csv_path = os.path.splitext(args.report)[0] + ".csv"
    fieldnames = ["name"] + aggregate.csv_fieldnames()
    with _atomic_output(csv_path) as tmp:
        with open(tmp, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            for name, rep in per_file.items():
                row = {"name": name}
                row.update({k: v for k, v in rep.to_csv_row().items() if k in fieldnames})
                writer.writerow(row)
            agg_row = {"name": "aggregate"}
            agg_row.update(aggregate.to_csv_row())
            writer.writerow(agg_row)

    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    return 0


_FRAME_EXTS = (".png", ".jpg", ".jpeg", ".bmp")


def _render_plots(report, out_dir: str) -> None:
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("--plots requires matplotlib (install the 'plots' extra)") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)

    def save_hist(hist, title, fname, log=False):
        centers = 0.5 * (np.asarray(hist.edges[:-1]) + np.asarray(hist.edges[1:]))
        fig, ax = plt.subplots(figsize=(5, 3))
        ax.plot(centers, hist.mass)
        if log:
            ax.set_yscale("log")
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, fname))
        plt.close(fig)

    save_hist(report.luminance, "luminance", "luminance.png")
    save_hist(report.spatial_deriv.histogram, "spatial derivative", "spatial_deriv.png", log=True)
    if report.temporal_deriv is not None:
        save_hist(report.temporal_deriv.histogram, "temporal derivative", "temporal_deriv.png", log=True)
    if report.spectrum is not None:
        fig, ax = plt.subplots(figsize=(5, 3))
        ax.loglog(report.spectrum.freqs, report.spectrum.power)
        ax.set_title(f"power spectrum (slope {report.spectrum.slope:.2f})")
        fig.tight_layout()
        fig.savefig(os.path.join(out_dir, "spectrum.png"))
        plt.close(fig)
    if report.flow is not None:
        save_hist(report.flow.u_hist, "flow u", "flow_u.png", log=True)
        save_hist(report.flow.speed_hist, "flow speed", "flow_speed.png", log=True)
        save_hist(report.flow.direction_hist, "flow direction", "flow_direction.png")


def cmd_stats(args) -> int:
    frame_paths = sorted(
        os.path.join(args.frames_dir, f)
        for f in os.listdir(args.frames_dir)
        if f.lower().endswith(_FRAME_EXTS)
    )
    if not frame_paths:
        raise EmptyInputError(f"no frames under {args.frames_dir}")
    frames = [flow_io.read_image(p) for p in frame_paths]

    flows = None
    flow_paths = []
    if args.flows_dir:
        flow_paths = sorted(
            os.path.join(args.flows_dir, f)
            for f in os.listdir(args.flows_dir)
            if f.endswith(".flo")
        )
        flows = [flow_io.read_flo(p) for p in flow_paths]

    report = compute_stats_report(frames, flows)
    inputs = {os.path.basename(p): p for p in frame_paths + flow_paths}
    payload = _report_envelope(
        "stats",
        {"frames_dir": args.frames_dir, "flows_dir": args.flows_dir},
        inputs,
    )
    payload["report"] = report.to_dict()
    _write_json(payload, args.report)

    base = os.path.splitext(args.report)[0]
    named = {"luminance": report.luminance, "spatial_deriv": report.spatial_deriv.histogram}
    if report.temporal_deriv is not None:
        named["temporal_deriv"] = report.temporal_deriv.histogram
    if report.flow is not None:
        named["flow_u"] = report.flow.u_hist
        named["flow_speed"] = report.flow.speed_hist
        named["flow_direction"] = report.flow.direction_hist
        named["flow_deriv"] = report.flow.deriv.histogram
    for name, hist in named.items():
        with _atomic_output(f"{base}_{name}.csv") as tmp:
            with open(tmp, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["bin_lo", "bin_hi", "count", "mass"])
                for lo, hi, count, mass in zip(
                    hist.edges[:-1], hist.edges[1:], hist.counts, hist.mass
                ):
                    writer.writerow([repr(float(lo)), repr(float(hi)), int(count), repr(float(mass))])

    if args.plots:
        _render_plots(report, args.plots)
    return 0


def cmd_distortion_map(args) -> int:
    density = build_density_map(args.width, args.height)
    if args.out_img:
        with _atomic_output(args.out_img) as tmp:
            flow_io.write_image(density_to_uint16(density), tmp)
    if args.out_raw:
        with _atomic_output(args.out_raw) as tmp:
            write_density_raw(density, tmp)
    return 0


def cmd_augment_pairs(args) -> int:
    index = flow_io.require_samples(flow_io.index_dataset(args.dataset))
    pairs = sample_augmentations(args.strategy, args.seed, len(index))
    samples = []
    for i, (sample, pair) in enumerate(zip(index.samples, pairs)):
        angles = pair.angles()
        samples.append(
            {
                "id": i,
                "video": sample.video,
                "frame_t": os.path.basename(sample.frame_t),
                "frame_t1": os.path.basename(sample.frame_t1),
                "rotation_left": angles["left"],
                "rotation_right": angles["right"],
                "identity_side": pair.identity_side,
            }
        )
    payload = {
        "tool": "sphereflow",
        "version": __version__,
        "command": "augment-pairs",
        "config": {"dataset": args.dataset, "strategy": args.strategy, "seed": args.seed},
        "n_samples": len(samples),
        "samples": samples,
    }
    _write_json(payload, args.out_manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphereflow",
        description="Omnidirectional flow toolkit: warps, metrics, statistics, augmentation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("warp", help="rotate an equirect image or flow field")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--pitch", type=parse_angle, default=0.0)
    p.add_argument("--roll", type=parse_angle, default=0.0)
    p.add_argument("--yaw", type=parse_angle, default=0.0)
    p.add_argument("--kind", choices=("image", "flow"), default="image")
    p.add_argument("--interp", choices=("bilinear", "nearest"), default="bilinear")
    p.add_argument("--inverse", action="store_true", help="apply the inverse rotation")
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("eval", help="score predicted flows against ground truth")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--density", default="auto",
                   help="'auto' to build from flow dims, 'none', or a raw density file")
    p.add_argument("--bins", default="0.5,0.6,0.7,0.8,0.9,1.0",
                   help="density bin edges, comma separated")
    p.add_argument("--report", required=True, help="output JSON path (CSV lands beside it)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="corpus statistics report")
    p.add_argument("--frames-dir", required=True)
    p.add_argument("--flows-dir", default=None)
    p.add_argument("--report", required=True)
    p.add_argument("--plots", default=None, help="directory for rendered curves (needs matplotlib)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("distortion-map", help="emit the distortion density map")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--out-img", default=None, help="16-bit grayscale PNG")
    p.add_argument("--out-raw", default=None, help="float32 grid with 8-byte header")
    p.set_defaults(func=cmd_distortion_map)

    p = sub.add_parser("augment-pairs", help="deterministic rotation-pair manifest")
    p.add_argument("--dataset", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-manifest", required=True)
    p.set_defaults(func=cmd_augment_pairs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ShapeError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        # malformed flag values (bad bins, bad angles) read as format errors
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

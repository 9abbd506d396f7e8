"""Command-line surface: segment, eval, phantom, prep, sweep-rt.

Exit codes are a stable contract: 0 success, 1 runtime error (I/O, backend,
bad data), 2 seed slice segmented empty (mask and report still written),
64 usage error. Reports are JSON documents whose non-timing fields are
deterministic for fixed inputs and seeds; sweep output is CSV with header
``rt,dsc,sen,ppv,slices_covered``.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
import time
from pathlib import Path

import numpy as np

from . import dataprep, metrics, rvol
from .backends import (BackendError, SegmenterBackend, ThresholdBackend,
                       spawn_external)
from .multiview import ConsensusConfig, PipelineConfig, segment_nodule
from .phantom import generate_phantom, load_phantom_spec
from .volume import Mask3D, Roi2D
from .walk import AroiConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EMPTY = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit with code 64."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _roi_arg(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected X,Y,SIDE, got {text!r}")
    try:
        x, y, side = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers X,Y,SIDE, got {text!r}")
    if side < 1:
        raise argparse.ArgumentTypeError(f"SIDE must be >= 1, got {side}")
    return x, y, side


def _backend_arg(text: str) -> tuple[str, str]:
    if text == "threshold":
        return ("threshold", "")
    if text.startswith("proc:") and text[len("proc:"):].strip():
        return ("proc", text[len("proc:"):])
    raise argparse.ArgumentTypeError(
        f"backend must be 'threshold' or 'proc:COMMAND', got {text!r}")


def _rt_list_arg(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("rt list is empty")
    return values


def _make_backend(desc: tuple[str, str]) -> SegmenterBackend:
    kind, arg = desc
    if kind == "threshold":
        return ThresholdBackend()
    return spawn_external(shlex.split(arg))


def _scores_dict(pred, ref) -> dict:
    return metrics.overlap(pred, ref).as_dict()


def _run_pipeline(args, backend: SegmenterBackend):
    """Shared by segment and sweep-rt: run the pipeline, build the report."""
    vol = rvol.load_volume(args.volume)
    ref = None
    if getattr(args, "ref", None):
        ref = rvol.load_mask(args.ref)
        if ref.shape_zyx != vol.shape_zyx:
            raise ValueError(
                f"reference shape {ref.shape_zyx} != volume shape {vol.shape_zyx}")

    x, y, side = args.seed_roi
    seed = Roi2D(x1=x, x2=x + side, y1=y, y2=y + side, z=args.seed_slice)
    cfg = PipelineConfig(
        aroi=AroiConfig(rt=args.rt, prob_threshold=args.prob_threshold),
        fusion=ConsensusConfig(cr=args.cr))

    t0 = time.perf_counter()
    result = segment_nodule(vol, seed, backend, cfg)
    total_ms = (time.perf_counter() - t0) * 1000.0

    slice_rows = []
    for z, roi in result.stage1.rois.items():
        nodule_area = int(np.count_nonzero(
            result.stage1.mask.voxels[z, roi.y1:roi.y2, roi.x1:roi.x2]))
        slice_rows.append({"z": z, "x1": roi.x1, "x2": roi.x2,
                           "y1": roi.y1, "y2": roi.y2, "side": roi.side,
                           "roi_area": roi.area, "nodule_area": nodule_area})

    report = {
        "config": {
            "rt": args.rt, "cr": args.cr, "prob_threshold": args.prob_threshold,
            "max_steps": cfg.aroi.max_steps, "voi_pad": cfg.voi_pad,
            "hu_window": list(cfg.hu_window), "backend": backend.spec.name,
            "volume": str(args.volume),
            "seed_roi": {"x": x, "y": y, "side": side},
            "seed_slice": args.seed_slice,
            "ref": str(args.ref) if getattr(args, "ref", None) else None,
        },
        "empty": result.is_empty,
        "stage1": {"seed_z": result.stage1.seed_z,
                   "slices_covered": result.stage1.slices_covered,
                   "rois": slice_rows},
        "voi": None if result.voi is None else {
            "z1": result.voi.z1, "z2": result.voi.z2,
            "y1": result.voi.y1, "y2": result.voi.y2,
            "x1": result.voi.x1, "x2": result.voi.x2},
        "metrics": None,
        "timing_ms": {"total": round(total_ms, 3)},
    }

    if ref is not None:
        views = {}
        for vm in result.view_masks:
            full = Mask3D.zeros(vol.shape_zyx)
            v = result.voi
            full.voxels[v.z1:v.z2, v.y1:v.y2, v.x1:v.x2] = vm.mask.voxels
            views[vm.axis] = _scores_dict(full.voxels, ref.voxels)
        report["metrics"] = {
            "final": _scores_dict(result.mask.voxels, ref.voxels),
            "stage1": _scores_dict(result.stage1.mask.voxels, ref.voxels),
            "views": views,
        }
    return result, report, vol


def cmd_segment(args) -> int:
    backend = _make_backend(args.backend)
    try:
        result, report, vol = _run_pipeline(args, backend)
        rvol.save_mask(result.mask, args.out, spacing_mm_zyx=vol.spacing_mm_zyx)
        if args.report:
            with open(args.report, "w", encoding="utf-8") as fh:
                json.dump(report, fh, indent=2)
                fh.write("\n")
        final = (report["metrics"] or {}).get("final")
        tail = f" dsc={final['dsc']:.4f}" if final else ""
        print(f"slices={report['stage1']['slices_covered']} "
              f"empty={report['empty']}{tail} out={args.out}")
        return EXIT_EMPTY if result.is_empty else EXIT_OK
    finally:
        backend.close()


def cmd_eval(args) -> int:
    pred = rvol.load_mask(args.pred)
    ref = rvol.load_mask(args.ref)
    print(json.dumps(_scores_dict(pred.voxels, ref.voxels)))
    return EXIT_OK


def cmd_phantom(args) -> int:
    spec = load_phantom_spec(args.spec)
    vol, gt = generate_phantom(spec)
    rvol.save_volume(vol, args.out_vol)
    rvol.save_mask(gt, args.out_gt, spacing_mm_zyx=vol.spacing_mm_zyx)
    print(f"shape={vol.shape_zyx} gt_voxels={gt.count()} "
          f"vol={args.out_vol} gt={args.out_gt}")
    return EXIT_OK


def cmd_prep(args) -> int:
    vol = rvol.load_volume(args.volume)
    if args.gt:
        gt = rvol.load_mask(args.gt)
    else:
        readers = [rvol.load_mask(p) for p in args.annotators]
        gt = dataprep.consensus_ground_truth(readers, cr=0.5)
    rng = np.random.default_rng(args.seed)
    samples = dataprep.extract_training_set(
        vol, gt, args.rt, rng, empty_per_side=args.empty_per_side)
    dataprep.write_training_set(samples, args.out_dir, rt=args.rt, seed=args.seed)
    pos = sum(1 for s in samples if s.meta.has_nodule)
    print(f"wrote {len(samples)} samples ({pos} nodule, "
          f"{len(samples) - pos} empty) to {args.out_dir}")
    return EXIT_OK


def cmd_sweep_rt(args) -> int:
    backend = _make_backend(args.backend)
    try:
        print("rt,dsc,sen,ppv,slices_covered")
        for rt in args.rt_list:
            run_args = argparse.Namespace(
                volume=args.volume, ref=args.gt, seed_roi=args.seed_roi,
                seed_slice=args.seed_slice, rt=rt, cr=args.cr,
                prob_threshold=args.prob_threshold)
            _, report, _ = _run_pipeline(run_args, backend)
            m = report["metrics"]["final"]
            print(f"{rt:g},{m['dsc']:.6f},{m['sen']:.6f},{m['ppv']:.6f},"
                  f"{report['stage1']['slices_covered']}")
        return EXIT_OK
    finally:
        backend.close()


def build_parser() -> _Parser:
    parser = _Parser(prog="aroiseg",
                     description="Two-stage seeded 3-D nodule segmentation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("segment", help="run the two-stage pipeline on a volume")
    p.add_argument("--volume", required=True, help="input RVOL volume")
    p.add_argument("--seed-roi", required=True, type=_roi_arg, metavar="X,Y,SIDE")
    p.add_argument("--seed-slice", required=True, type=int, metavar="Z")
    p.add_argument("--rt", type=float, default=0.6)
    p.add_argument("--cr", type=float, default=0.5)
    p.add_argument("--prob-threshold", type=float, default=0.5)
    p.add_argument("--backend", type=_backend_arg, default=("threshold", ""),
                   help="'threshold' or 'proc:COMMAND'")
    p.add_argument("--ref", default=None, help="reference mask RVOL for scoring")
    p.add_argument("--out", required=True, help="output mask RVOL")
    p.add_argument("--report", default=None, help="write the JSON run report here")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("eval", help="score one mask against another")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("phantom", help="render a synthetic volume + ground truth")
    p.add_argument("--spec", required=True, help="phantom spec JSON")
    p.add_argument("--out-vol", required=True)
    p.add_argument("--out-gt", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("prep", help="extract a training set around ground truth")
    p.add_argument("--volume", required=True)
    p.add_argument("--gt", default=None, help="single reference mask RVOL")
    p.add_argument("--annotators", nargs="+", default=None,
                   help="reader masks fused by majority vote instead of --gt")
    p.add_argument("--rt", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--empty-per-side", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("sweep-rt", help="segment repeatedly across rt values")
    p.add_argument("--volume", required=True)
    p.add_argument("--gt", required=True, help="reference mask RVOL")
    p.add_argument("--seed-roi", required=True, type=_roi_arg, metavar="X,Y,SIDE")
    p.add_argument("--seed-slice", required=True, type=int, metavar="Z")
    p.add_argument("--rt-list", required=True, type=_rt_list_arg,
                   dest="rt_list", metavar="R1,R2,...")
    p.add_argument("--cr", type=float, default=0.5)
    p.add_argument("--prob-threshold", type=float, default=0.5)
    p.add_argument("--backend", type=_backend_arg, default=("threshold", ""))
    p.set_defaults(func=cmd_sweep_rt)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "prep" and bool(args.gt) == bool(args.annotators):
        parser.print_usage(sys.stderr)
        print("aroiseg prep: error: exactly one of --gt / --annotators is required",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            rvol.RvolError, BackendError) as exc:
        print(f"aroiseg: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    sys.exit(main())

"""Command-line entry point (``hoieval``).

Exit codes: 0 success, 2 invalid input (issues printed as JSON on stderr),
3 a frame failed numerically (frame id listed on stderr).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def _issues(payload):
    sys.stderr.write(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def _atomic_write(path, text):
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def cmd_score(args):
    from .errors import FrameError, ParseError
    from .scoring import ValidationFailed, score_files

    try:
        report = score_files(args.gt, args.pred, track=args.track, workers=args.threads,
                             seed=args.seed, agg=args.agg, paired=not args.independent_sampling)
    except ValidationFailed as exc:
        _issues({"error": "validation", **exc.report.to_dict()})
        return EXIT_INVALID
    except ParseError as exc:
        _issues({"error": "parse", "message": str(exc)})
        return EXIT_INVALID
    except FrameError as exc:
        _issues({"error": "numeric", "frame_id": exc.frame_id, "message": str(exc)})
        return EXIT_NUMERIC
    _atomic_write(args.out, report.dumps())
    return EXIT_OK


def cmd_validate(args):
    from .dataio import load_manifest, load_submission, validate_submission
    from .errors import ParseError

    try:
        report, _ = validate_submission(load_manifest(args.gt), load_submission(args.pred))
    except ParseError as exc:
        _issues({"error": "parse", "message": str(exc)})
        return EXIT_INVALID
    sys.stdout.write(json.dumps(report.to_dict(), sort_keys=True, indent=1) + "\n")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_synth(args):
    from .dataio import read_json
    from .synth import SynthSpec, generate

    spec = SynthSpec.from_dict(read_json(args.spec))
    generate(spec, args.out)
    return EXIT_OK


def cmd_curves(args):
    from .errors import NoCurveData
    from .report import ScoreReport, emit_curves

    try:
        paths = emit_curves(ScoreReport.load(args.report), args.out)
    except NoCurveData as exc:
        _issues({"error": "no_curve_data", "message": str(exc)})
        return EXIT_INVALID
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_leaderboard(args):
    from .errors import MixedTracks
    from .report import ScoreReport, leaderboard, leaderboard_table

    reports = [ScoreReport.load(p) for p in args.reports]
    descending = None if args.order is None else args.order == "desc"
    try:
        ranked = leaderboard(reports, key=args.key, descending=descending)
    except MixedTracks as exc:
        _issues({"error": "mixed_tracks", "message": str(exc)})
        return EXIT_INVALID
    _atomic_write(args.out, leaderboard_table(ranked, key=args.key))
    return EXIT_OK


def _parse_size(text):
    w, _, h = text.lower().partition("x")
    return int(w), int(h)


def cmd_render_nocs(args):
    import numpy as np

    from .dataio import load_mesh, read_json
    from .geometry import CameraIntrinsics, RigidPose
    from .nocs import normalize_to_nocs, render_nocs, write_png

    mesh, _, _ = normalize_to_nocs(load_mesh(args.mesh))
    pose_doc = read_json(args.pose)
    pose = RigidPose(np.asarray(pose_doc["R"], dtype=float).reshape(3, 3),
                     np.asarray(pose_doc["t"], dtype=float))
    k = read_json(args.intrinsics)
    K = CameraIntrinsics(k["fx"], k["fy"], k["cx"], k["cy"])
    nocs, mask = render_nocs(mesh, pose, K, _parse_size(args.size))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_png(out / "nocs.png", nocs)
    write_png(out / "mask.png", mask)
    return EXIT_OK


def cmd_augment(args):
    from .augment import augment
    from .dataio import read_json
    from .nocs import read_png, write_png

    pipeline = read_json(args.pipeline)
    if isinstance(pipeline, dict):
        pipeline = pipeline["ops"]
    write_png(args.out, augment(read_png(args.image), pipeline, args.seed))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="hoieval", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("score", help="score a submission against a manifest")
    s.add_argument("--track", choices=("object", "human", "joint"))
    s.add_argument("--gt", required=True, help="manifest.json")
    s.add_argument("--pred", required=True, help="submission.json")
    s.add_argument("--out", required=True, help="report path")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--agg", choices=("median", "mean"), default="median",
                   help="summary statistic for object error columns")
    s.add_argument("--independent-sampling", action="store_true",
                   help="joint track: separate sampling streams for prediction and ground truth")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("validate", help="check a submission without scoring")
    s.add_argument("--gt", required=True)
    s.add_argument("--pred", required=True)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("synth", help="generate a synthetic benchmark with an answer sheet")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("curves", help="write threshold curves of a report as CSV")
    s.add_argument("--report", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_curves)

    s = sub.add_parser("leaderboard", help="rank reports of one track")
    s.add_argument("--reports", nargs="+", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--key", help="aggregate to rank by (overrides the track default)")
    s.add_argument("--order", choices=("asc", "desc"),
                   help="sort order (default: the track's natural order)")
    s.set_defaults(func=cmd_leaderboard)

    s = sub.add_parser("render-nocs", help="render NOCS and mask images of a mesh")
    s.add_argument("--mesh", required=True)
    s.add_argument("--pose", required=True, help="JSON with R (9 numbers) and t (3)")
    s.add_argument("--intrinsics", required=True, help="JSON with fx, fy, cx, cy")
    s.add_argument("--size", required=True, help="WxH")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_render_nocs)

    s = sub.add_parser("augment", help="apply a seeded augmentation pipeline to an image")
    s.add_argument("--image", required=True)
    s.add_argument("--pipeline", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_augment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

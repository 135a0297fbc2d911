"""End-to-end scoring of a submission file against a manifest."""
from __future__ import annotations

import hashlib
from pathlib import Path

from . import __version__
from .dataio import build_frames, load_manifest, load_submission, validate_submission
from .errors import EvalError
from .human_metrics import score_human_track
from .joint_metrics import score_joint_track
from .object_metrics import score_object_track
from .report import build_report, config_hash


class ValidationFailed(EvalError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"{len(report.malformed)} malformed payload(s)")


def _file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def score_files(manifest_path, submission_path, track=None, workers=1, seed=0, agg="median",
                paired=True, sample_n=None):
    """Validate and score; returns a ScoreReport.

    Raises:
        ValidationFailed: the submission has malformed payloads.
        FrameError: a frame could not be scored (e.g. object behind the camera).
    """
    manifest = load_manifest(manifest_path)
    if track is not None and track != manifest.track:
        raise ValidationFailed(_track_mismatch(manifest.track, track))
    submission = load_submission(submission_path)
    validation, parsed = validate_submission(manifest, submission)
    if not validation.ok:
        raise ValidationFailed(validation)
    frames = build_frames(manifest, parsed)
    n = sample_n or manifest.chamfer_samples
    if manifest.track == "object":
        score = score_object_track(frames, manifest.registry, agg=agg, workers=workers)
    elif manifest.track == "human":
        score = score_human_track(frames, workers=workers)
    else:
        score = score_joint_track(frames, manifest.registry, sample_n=n, seed=seed,
                                  paired=paired, workers=workers)
    config = {"track": manifest.track, "agg": agg, "seed": int(seed), "paired_sampling": paired,
              "chamfer_samples": n, "manifest_sha256": _file_digest(manifest_path),
              "submission_sha256": _file_digest(submission_path)}
    provenance = {"tool_version": __version__, "seed": int(seed), "config_hash": config_hash(config)}
    return build_report(manifest.track, score, submission.name, provenance, agg)


def _track_mismatch(expected, given):
    from .dataio import ValidationReport

    return ValidationReport(malformed=[{"frame_id": None,
                                        "reason": f"--track {given} but manifest is {expected}"}])

"""Human reconstruction metrics over 3D joints and body-part orientations.

Joints come in meters and are reported in millimeters. Part orientations are
nine rotation matrices in the order of `PART_NAMES`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CountMismatch, EmptyInput, FrameError
from .geometry import geodesic_so3_batch, procrustes_similarity, transform_points

PART_NAMES = (
    "left_upper_arm", "right_upper_arm",
    "left_lower_arm", "right_lower_arm",
    "left_upper_leg", "right_upper_leg",
    "left_lower_leg", "right_lower_leg",
    "root",
)
PCK_THRESHOLD_MM = 50.0
AUC_THRESHOLDS_MM = np.arange(0, 201, dtype=np.float64)
M_TO_MM = 1000.0


@dataclass
class HumanFrame:
    frame_id: str
    gt_joints: np.ndarray
    pred_joints: Optional[np.ndarray]
    gt_parts: Optional[np.ndarray] = None
    pred_parts: Optional[np.ndarray] = None


@dataclass
class HumanFrameError:
    frame_id: str
    mpjpe: float
    mpjpe_pa: float
    pck: float
    auc: float
    mpjae: Optional[float]
    mpjae_pa: Optional[float]
    pck_curve: np.ndarray = field(repr=False)


def _pair(pred, gt):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 3)
    gt = np.asarray(gt, dtype=np.float64).reshape(-1, 3)
    if pred.shape != gt.shape:
        raise CountMismatch(f"{len(pred)} predicted joints vs {len(gt)} ground-truth joints")
    return pred, gt


def joint_errors_mm(pred, gt):
    pred, gt = _pair(pred, gt)
    return np.sqrt(((pred - gt) ** 2).sum(axis=1)) * M_TO_MM


def mpjpe(pred, gt) -> float:
    """Mean per-joint Euclidean error in mm."""
    return float(joint_errors_mm(pred, gt).mean())


def mpjpe_pa(pred, gt):
    """MPJPE after similarity (Procrustes) alignment of pred onto gt.

    Returns:
        (error in mm, the SimilarityTransform applied to pred)
    """
    pred, gt = _pair(pred, gt)
    align = procrustes_similarity(pred, gt)
    return mpjpe(transform_points(align, pred), gt), align


def pck_curve(pred, gt, thresholds_mm=AUC_THRESHOLDS_MM):
    """PCK in percent at each threshold; a joint counts when its error is strictly below."""
    counts = _pass_counts(joint_errors_mm(pred, gt), thresholds_mm)
    return 100.0 * counts[0] / counts[1]


def _pass_counts(err_mm, thresholds_mm):
    """(joints strictly below each threshold, joint count); integers, so ratios round once."""
    th = np.asarray(thresholds_mm, dtype=np.float64)
    return (err_mm[None, :] < th[:, None]).sum(axis=1), err_mm.shape[0]


def _auc_from_counts(counts, n_joints):
    return float(counts.sum() / (counts.shape[0] * n_joints))


def pck(pred, gt, threshold=PCK_THRESHOLD_MM) -> float:
    return float(pck_curve(pred, gt, [threshold])[0])


def auc(pred, gt, thresholds_mm=AUC_THRESHOLDS_MM) -> float:
    """Mean of PCK/100 over the threshold sweep (0..200 mm in 1 mm steps by default)."""
    return _auc_from_counts(*_pass_counts(joint_errors_mm(pred, gt), thresholds_mm))


def _parts(x):
    x = np.asarray(x, dtype=np.float64).reshape(-1, 3, 3)
    if len(x) != len(PART_NAMES):
        raise CountMismatch(f"expected {len(PART_NAMES)} part rotations, got {len(x)}")
    return x


def mpjae(pred_parts, gt_parts) -> float:
    """Mean geodesic angle over the nine part orientations, degrees."""
    angles = geodesic_so3_batch(_parts(gt_parts), _parts(pred_parts))
    return float(np.degrees(angles.mean()))


def mpjae_pa(pred_parts, gt_parts, global_R) -> float:
    """MPJAE after left-multiplying every predicted orientation by ``global_R``."""
    rotated = np.asarray(global_R)[None] @ _parts(pred_parts)
    return mpjae(rotated, gt_parts)


def human_frame_errors(frame: HumanFrame) -> HumanFrameError:
    try:
        e = mpjpe(frame.pred_joints, frame.gt_joints)
        e_pa, align = mpjpe_pa(frame.pred_joints, frame.gt_joints)
        curve = pck_curve(frame.pred_joints, frame.gt_joints)
        e_pck = pck(frame.pred_joints, frame.gt_joints)
        ang = ang_pa = None
        if frame.pred_parts is not None and frame.gt_parts is not None:
            ang = mpjae(frame.pred_parts, frame.gt_parts)
            ang_pa = mpjae_pa(frame.pred_parts, frame.gt_parts, align.rotation)
    except Exception as exc:
        raise FrameError(frame.frame_id, exc) from exc
    return HumanFrameError(frame.frame_id, e, e_pa, e_pck, auc(frame.pred_joints, frame.gt_joints),
                           ang, ang_pa, curve)


def _mean_or_none(vals):
    vals = [v for v in vals if v is not None]
    return float(np.mean(vals)) if vals else None


def summarize_human_errors(rows, missing=()):
    """Means over frames. Missing frames add zeros to PCK/AUC only."""
    n_missing = len(missing)
    if len(rows) + n_missing == 0:
        raise EmptyInput("no frames to score")
    zeros = [0.0] * n_missing
    curves = [r.pck_curve for r in rows] + [np.zeros(len(AUC_THRESHOLDS_MM))] * n_missing
    aggregates = {
        "MPJPE": _mean_or_none([r.mpjpe for r in rows]),
        "MPJPE-PA": _mean_or_none([r.mpjpe_pa for r in rows]),
        # fsum rounds the total once, so the means do not depend on frame order.
        "PCK": math.fsum([r.pck for r in rows] + zeros) / (len(rows) + n_missing),
        "AUC": math.fsum([r.auc for r in rows] + zeros) / (len(rows) + n_missing),
        "MPJAE": _mean_or_none([r.mpjae for r in rows]),
        "MPJAE-PA": _mean_or_none([r.mpjae_pa for r in rows]),
    }
    curve = {"PCK": {"unit": "mm", "thresholds": AUC_THRESHOLDS_MM.tolist(),
                     "values": np.mean(curves, axis=0).tolist()}}
    return aggregates, curve


@dataclass
class HumanTrackScore:
    rows: list
    missing: list
    aggregates: dict
    curves: dict


def score_human_track(frames, workers=1):
    from .parallel import ordered_map

    frames = sorted(frames, key=lambda f: f.frame_id)
    if not frames:
        raise EmptyInput("no frames to score")
    present = [f for f in frames if f.pred_joints is not None]
    missing = [f.frame_id for f in frames if f.pred_joints is None]
    rows = ordered_map(_score_human_frame, present, workers)
    aggregates, curves = summarize_human_errors(rows, missing)
    return HumanTrackScore(rows, missing, aggregates, curves)


def _score_human_frame(frame, _context):
    return human_frame_errors(frame)


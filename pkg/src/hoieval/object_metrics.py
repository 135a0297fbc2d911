"""Symmetry-aware 6DoF object pose errors and their average-recall scores.

Errors are evaluated over the model vertices:

* MSSD: min over symmetries S of max over vertices of |P_est x - P_gt S x|, meters.
* MSPD: the same maximum measured after perspective projection, pixels.
* RE:   min over symmetries of the geodesic angle between R_est and R_gt S, degrees.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, EmptyMesh, FrameError
from .geometry import (
    CameraIntrinsics,
    RigidPose,
    axis_angle_matrix,
    geodesic_so3_batch,
    project,
)

DEFAULT_CONTINUOUS_COUNT = 64
RE_REFERENCE_DEG = 40.0


@dataclass(frozen=True)
class SymmetrySet:
    """Global symmetry rotations of an object model.

    ``transforms`` is a ``(K, 3, 3)`` stack. ``continuous`` holds
    ``(axis, count)`` pairs still to be discretised by `expand_symmetries`.
    """
    object_id: str
    transforms: np.ndarray
    continuous: tuple = ()

    @classmethod
    def identity_only(cls, object_id=""):
        return cls(object_id, np.eye(3)[None])

    def __post_init__(self):
        t = np.asarray(self.transforms, dtype=np.float64).reshape(-1, 3, 3)
        if not any(np.allclose(r, np.eye(3), atol=1e-12) for r in t):
            t = np.concatenate([np.eye(3)[None], t])
        object.__setattr__(self, "transforms", t)

    def __len__(self):
        return len(self.transforms)


@dataclass(frozen=True)
class RecallSchedule:
    thresholds: np.ndarray
    unit: str

    def __post_init__(self):
        th = np.asarray(self.thresholds, dtype=np.float64).ravel()
        if th.size == 0 or np.any(th <= 0) or np.any(np.diff(th) <= 0):
            raise ValueError("thresholds must be non-empty, positive and strictly increasing")
        object.__setattr__(self, "thresholds", th)


# Fractions of the object diameter.
MSSD_SCHEDULE = RecallSchedule(np.arange(1, 11) * 0.05, "diameter")
MSPD_SCHEDULE = RecallSchedule(np.arange(1, 21) * 5.0, "px")
RE_SCHEDULE = RecallSchedule(np.arange(1, 11) * 0.05 * RE_REFERENCE_DEG, "deg")


@dataclass
class ObjectFrame:
    frame_id: str
    object_id: str
    gt_pose: RigidPose
    pred_pose: Optional[RigidPose]
    intrinsics: CameraIntrinsics


@dataclass
class ObjectFrameError:
    frame_id: str
    object_id: str
    mssd: float
    mspd: float
    re: float
    diameter: float


def expand_symmetries(sym: SymmetrySet) -> SymmetrySet:
    """Replace each continuous axis by ``count`` rotations at angles 2*pi*i/count.

    The rotations of successive axes are composed with every discrete
    transform, so the output size is ``len(discrete) * prod(counts)``.
    """
    if not sym.continuous:
        return sym
    out = sym.transforms
    for axis, count in sym.continuous:
        count = int(count)
        steps = np.stack([axis_angle_matrix(axis, 2.0 * np.pi * i / count) for i in range(count)])
        steps[0] = np.eye(3)
        out = (out[:, None] @ steps[None]).reshape(-1, 3, 3)
    return SymmetrySet(sym.object_id, out)


def _vertices(mesh):
    v = np.asarray(getattr(mesh, "vertices", mesh), dtype=np.float64).reshape(-1, 3)
    if len(v) == 0:
        raise EmptyMesh("model has no vertices")
    return v


def _sym_stack(sym):
    if sym is None:
        return np.eye(3)[None]
    if isinstance(sym, SymmetrySet):
        if sym.continuous:
            sym = expand_symmetries(sym)
        return sym.transforms
    return np.asarray(sym, dtype=np.float64).reshape(-1, 3, 3)


def _gt_points_under_symmetries(gt, pts, syms):
    # gt.R @ S @ x + gt.t for every S -> (K, N, 3)
    rs = gt.rotation[None] @ syms
    return np.einsum("kij,nj->kni", rs, pts) + gt.translation


def _posed(pose, pts):
    # Same arithmetic as the symmetry path, so pred == gt gives exactly zero.
    return _gt_points_under_symmetries(pose, pts, np.eye(3)[None])[0]


def mssd(pred: RigidPose, gt: RigidPose, mesh, sym=None) -> float:
    """Maximum symmetry-aware surface distance in the mesh's length unit."""
    pts = _vertices(mesh)
    syms = _sym_stack(sym)
    est = _posed(pred, pts)
    ref = _gt_points_under_symmetries(gt, pts, syms)
    dist = np.sqrt(((ref - est[None]) ** 2).sum(axis=-1))
    return float(dist.max(axis=1).min())


def mspd(pred: RigidPose, gt: RigidPose, mesh, sym, K: CameraIntrinsics) -> float:
    """Maximum symmetry-aware projection distance in pixels.

    Raises:
        BehindCamera: a transformed vertex has non-positive depth.
    """
    pts = _vertices(mesh)
    syms = _sym_stack(sym)
    est = project(K, _posed(pred, pts))
    ref = project(K, _gt_points_under_symmetries(gt, pts, syms))
    dist = np.sqrt(((ref - est[None]) ** 2).sum(axis=-1))
    return float(dist.max(axis=1).min())


def rotation_error(pred_R, gt_R, sym=None) -> float:
    """Symmetry-aware rotation error in degrees, in [0, 180]."""
    syms = _sym_stack(sym)
    angles = geodesic_so3_batch(np.asarray(pred_R)[None], np.asarray(gt_R)[None] @ syms)
    return float(np.degrees(angles.min()))


def _passed(errors, thresholds):
    errors = np.asarray(errors, dtype=np.float64)
    if errors.shape[0] == 0:
        raise EmptyInput("no errors to score")
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if errors.ndim == 1:
        return errors[:, None] <= thresholds[None, :]
    return errors <= thresholds


def recall_curve(errors, thresholds):
    """Fraction of ``errors`` at or below each threshold (inclusive).

    ``errors`` may be [N] or [N, T] when every sample carries its own
    threshold row (e.g. diameter-relative thresholds).
    """
    return _passed(errors, thresholds).mean(axis=0)


def _ar(passed):
    # hits / (N * T): an integer ratio rounded once, independent of summation order
    return float(passed.sum() / passed.size)


def average_recall(errors: Sequence[float], schedule) -> float:
    """Mean over the schedule's thresholds of the recall at each threshold."""
    thresholds = schedule.thresholds if isinstance(schedule, RecallSchedule) else schedule
    return _ar(_passed(errors, thresholds))


def object_frame_errors(frame: ObjectFrame, mesh, sym, diameter) -> ObjectFrameError:
    syms = _sym_stack(sym)
    try:
        e_mssd = mssd(frame.pred_pose, frame.gt_pose, mesh, syms)
        e_mspd = mspd(frame.pred_pose, frame.gt_pose, mesh, syms, frame.intrinsics)
        e_re = rotation_error(frame.pred_pose.rotation, frame.gt_pose.rotation, syms)
    except Exception as exc:
        raise FrameError(frame.frame_id, exc) from exc
    return ObjectFrameError(frame.frame_id, frame.object_id, e_mssd, e_mspd, e_re, diameter)


@dataclass
class ObjectTrackScore:
    rows: list
    missing: list
    aggregates: dict
    curves: dict = field(default_factory=dict)


def summarize_object_errors(rows: Sequence[ObjectFrameError], missing=(), agg="median"):
    """Aggregate per-frame errors into recalls, AR-all and summary error columns.

    Missing frames count with infinite error: they lower every recall but are
    left out of the summary error columns.
    """
    n_missing = len(missing)
    n = len(rows) + n_missing
    if n == 0:
        raise EmptyInput("no frames to score")
    inf = np.full(n_missing, np.inf)
    mssd_e = np.concatenate([[r.mssd for r in rows], inf])
    diam = np.concatenate([[r.diameter for r in rows], np.ones(n_missing)])
    mspd_e = np.concatenate([[r.mspd for r in rows], inf])
    re_e = np.concatenate([[r.re for r in rows], inf])

    mssd_hit = _passed(mssd_e[:, None], diam[:, None] * MSSD_SCHEDULE.thresholds[None, :])
    mspd_hit = _passed(mspd_e, MSPD_SCHEDULE.thresholds)
    re_hit = _passed(re_e, RE_SCHEDULE.thresholds)
    mssd_curve, mspd_curve, re_curve = (h.mean(axis=0) for h in (mssd_hit, mspd_hit, re_hit))
    ar = {"MSSD-AR": _ar(mssd_hit), "MSPD-AR": _ar(mspd_hit), "RE-AR": _ar(re_hit)}
    ar["AR-all"] = (ar["MSSD-AR"] + ar["MSPD-AR"] + ar["RE-AR"]) / 3.0

    reduce = {"median": np.median, "mean": np.mean}[agg]
    aggregates = {}
    for key, vals in (("MSSD", [r.mssd for r in rows]), ("MSPD", [r.mspd for r in rows]),
                      ("RE", [r.re for r in rows])):
        aggregates[key] = float(reduce(vals)) if vals else None
    aggregates.update(ar)
    curves = {
        "MSSD": {"unit": MSSD_SCHEDULE.unit, "thresholds": MSSD_SCHEDULE.thresholds.tolist(),
                 "values": mssd_curve.tolist()},
        "MSPD": {"unit": MSPD_SCHEDULE.unit, "thresholds": MSPD_SCHEDULE.thresholds.tolist(),
                 "values": mspd_curve.tolist()},
        "RE": {"unit": RE_SCHEDULE.unit, "thresholds": RE_SCHEDULE.thresholds.tolist(),
               "values": re_curve.tolist()},
    }
    return aggregates, curves


def score_object_track(frames, registry, agg="median", workers=1):
    """Score every frame against the registry and aggregate.

    Frames whose ``pred_pose`` is None are treated as missing.
    """
    from .parallel import ordered_map

    frames = sorted(frames, key=lambda f: f.frame_id)
    if not frames:
        raise EmptyInput("no frames to score")
    present = [f for f in frames if f.pred_pose is not None]
    missing = [f.frame_id for f in frames if f.pred_pose is None]
    rows = ordered_map(_score_object_frame, present, workers, context=registry)
    aggregates, curves = summarize_object_errors(rows, missing, agg)
    return ObjectTrackScore(rows, missing, aggregates, curves)


def _score_object_frame(frame, registry):
    entry = registry[frame.object_id]
    return object_frame_errors(frame, entry.mesh, entry.symmetries, entry.diameter)

"""Joint human-object reconstruction errors.

The predicted scene (body vertices plus posed object vertices) is aligned to
the ground-truth scene with a single similarity transform fitted on vertex
correspondences. Body and object errors are then Chamfer distances between
point sets sampled from the aligned prediction and the ground-truth surfaces.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CountMismatch, EmptyInput, FrameError
from .geometry import (
    RigidPose,
    SimilarityTransform,
    TriMesh,
    chamfer,
    procrustes_similarity,
    sample_surface,
    transform_points,
)

DEFAULT_SAMPLES = 6000
M_TO_MM = 1000.0


@dataclass
class JointFrame:
    """One evaluation frame of the joint track.

    The object is given either as a pose of the registry template or directly
    as vertices in template order. ``pred_smpl_vertices`` is None for a frame
    the submission did not cover.
    """
    frame_id: str
    object_id: str
    smpl_faces: np.ndarray
    gt_smpl_vertices: np.ndarray
    pred_smpl_vertices: Optional[np.ndarray]
    gt_object_pose: Optional[RigidPose] = None
    pred_object_pose: Optional[RigidPose] = None
    gt_object_vertices: Optional[np.ndarray] = None
    pred_object_vertices: Optional[np.ndarray] = None

    @property
    def missing(self):
        return self.pred_smpl_vertices is None


@dataclass
class JointFrameError:
    frame_id: str
    smpl_chamfer: float  # mm
    object_chamfer: float  # mm
    alignment: SimilarityTransform


def derive_seed(seed, frame_id, role):
    """Stable 64-bit seed for one (global seed, frame, mesh role) stream."""
    digest = hashlib.sha256(f"{int(seed)}/{frame_id}/{role}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def object_vertices(frame, template, side):
    """Object vertices of one side ('gt' or 'pred') in camera space."""
    direct = getattr(frame, f"{side}_object_vertices")
    if direct is not None:
        direct = np.asarray(direct, dtype=np.float64).reshape(-1, 3)
        if len(direct) != len(template.vertices):
            raise CountMismatch(
                f"{side} object has {len(direct)} vertices, template has {len(template.vertices)}")
        return direct
    pose = getattr(frame, f"{side}_object_pose")
    if pose is None:
        raise CountMismatch(f"{side} object has neither a pose nor vertices")
    return transform_points(pose, template.vertices)


def _smpl(frame):
    gt = np.asarray(frame.gt_smpl_vertices, dtype=np.float64).reshape(-1, 3)
    pred = np.asarray(frame.pred_smpl_vertices, dtype=np.float64).reshape(-1, 3)
    if gt.shape != pred.shape:
        raise CountMismatch(f"SMPL vertex counts differ: pred {len(pred)} vs gt {len(gt)}")
    return pred, gt


def combined_alignment(frame: JointFrame, template: TriMesh) -> SimilarityTransform:
    """Similarity mapping the predicted scene onto the ground-truth scene."""
    pred_h, gt_h = _smpl(frame)
    src = np.concatenate([pred_h, object_vertices(frame, template, "pred")])
    dst = np.concatenate([gt_h, object_vertices(frame, template, "gt")])
    return procrustes_similarity(src, dst)


def sample_scene(frame, template, sample_n, seed, paired=True):
    """Surface samples for the four meshes of a frame.

    Predicted meshes are sampled in their own frame (before alignment); the
    caller maps the samples through the alignment. With ``paired`` the
    predicted and ground-truth mesh of a role share one random stream.

    Returns:
        dict role -> points [sample_n, 3] for roles pred_smpl, gt_smpl,
        pred_object, gt_object.
    """
    pred_h, gt_h = _smpl(frame)
    faces = np.asarray(frame.smpl_faces, dtype=np.int64)
    meshes = {
        "pred_smpl": TriMesh(pred_h, faces),
        "gt_smpl": TriMesh(gt_h, faces),
        "pred_object": TriMesh(object_vertices(frame, template, "pred"), template.faces),
        "gt_object": TriMesh(object_vertices(frame, template, "gt"), template.faces),
    }
    out = {}
    for role, mesh in meshes.items():
        side, kind = role.split("_", 1)
        key = kind if paired else role
        out[role] = sample_surface(mesh, sample_n, derive_seed(seed, frame.frame_id, key))
    return out


def joint_errors(frame: JointFrame, template: TriMesh, sample_n=DEFAULT_SAMPLES, seed=0,
                 paired=True) -> JointFrameError:
    """Body and object Chamfer errors (mm) after one combined alignment."""
    try:
        align = combined_alignment(frame, template)
        pts = sample_scene(frame, template, sample_n, seed, paired)
        e_h = chamfer(transform_points(align, pts["pred_smpl"]), pts["gt_smpl"]) * M_TO_MM
        e_o = chamfer(transform_points(align, pts["pred_object"]), pts["gt_object"]) * M_TO_MM
    except Exception as exc:
        raise FrameError(frame.frame_id, exc) from exc
    return JointFrameError(frame.frame_id, e_h, e_o, align)


def summarize_joint_errors(rows, missing=()):
    if len(rows) + len(missing) == 0:
        raise EmptyInput("no frames to score")
    if not rows:
        return {"SMPL": None, "Object": None}
    return {
        "SMPL": float(np.mean([r.smpl_chamfer for r in rows])),
        "Object": float(np.mean([r.object_chamfer for r in rows])),
    }


@dataclass
class JointTrackScore:
    rows: list
    missing: list
    aggregates: dict
    curves: dict


def score_joint_track(frames, registry, sample_n=DEFAULT_SAMPLES, seed=0, paired=True, workers=1):
    from .parallel import ordered_map

    frames = sorted(frames, key=lambda f: f.frame_id)
    if not frames:
        raise EmptyInput("no frames to score")
    present = [f for f in frames if not f.missing]
    missing = [f.frame_id for f in frames if f.missing]
    context = (registry, sample_n, seed, paired)
    rows = ordered_map(_score_joint_frame, present, workers, context=context)
    return JointTrackScore(rows, missing, summarize_joint_errors(rows, missing), {})


def _score_joint_frame(frame, context):
    registry, sample_n, seed, paired = context
    return joint_errors(frame, registry[frame.object_id].mesh, sample_n, seed, paired)

"""Synthetic benchmarks with analytically known scores.

`generate` writes a complete benchmark directory::

    manifest.json     ground-truth manifest (see `dataio.load_manifest`)
    gt/<frame>.json   ground-truth payloads
    objects/          registry: primitive meshes + symmetry descriptors
    body.obj          body-proxy topology (joint track only)
    submission.json   a prediction perturbed per the spec
    answers.json      expected metric values from the `oracles` module

The answer sheet is computed from the values exactly as written to disk,
using the independent reference code in `oracles`; only surface sampling
(seeded streams) is shared with the scorer.

Perturbations that put an error exactly on a recall threshold (e.g. a fixed
rotation of 4 or 6 degrees against the 2..20 degree schedule) are knife-edge
cases: scorer and answer sheet agree to ~1e-14 on the error itself, but that
is enough to land on different sides of the threshold. Use values between
thresholds (3 degrees, 49 mm) when exact recall counts are the point.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracles
from .dataio import UNIT_SCALE, save_mesh, symmetry_to_doc, write_json
from .geometry import TriMesh, axis_angle_matrix, random_rotation, sample_surface
from .joint_metrics import derive_seed
from .object_metrics import RE_SCHEDULE, MSPD_SCHEDULE, MSSD_SCHEDULE, expand_symmetries
from .primitives import ellipsoid, primitive_catalog

INTRINSICS = {"fx": 600.0, "fy": 600.0, "cx": 320.0, "cy": 240.0}
N_JOINTS = 24


@dataclass
class SynthSpec:
    track: str
    frames: int = 100
    seed: int = 0
    objects: tuple = ("box", "cylinder", "icosphere")
    symmetric: bool = True
    units: str = "m"
    missing_frames: int = 0
    chamfer_samples: int = 6000
    # Perturbation model. Angles in degrees, lengths in meters unless noted.
    rotation_deg: object = 0.0  # number or [low, high]
    translation_sigma: float = 0.0
    joint_noise_sigma: float = 0.0
    joint_offset_mm: float = 0.0
    part_rotation_deg: float = 0.0
    vertex_noise_sigma: float = 0.0
    scene_similarity: bool = False
    # False skips the (slow, O(n^2) for the joint track) answer sheet, e.g. for timing runs.
    answer_sheet: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.track not in ("object", "human", "joint"):
            raise ValueError(f"unknown track {self.track!r}")
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        for name in ("translation_sigma", "joint_noise_sigma", "joint_offset_mm",
                     "vertex_noise_sigma", "part_rotation_deg"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 <= self.missing_frames <= self.frames:
            raise ValueError("missing_frames out of range")
        if self.units not in UNIT_SCALE:
            raise ValueError(f"units must be one of {sorted(UNIT_SCALE)}")

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc.pop("schema_version", None)
        pert = doc.pop("perturbation", {})
        known = set(cls.__dataclass_fields__)
        kwargs = {k: v for k, v in {**doc, **pert}.items() if k in known}
        if "objects" in kwargs:
            kwargs["objects"] = tuple(kwargs["objects"])
        return cls(**kwargs)


def _angle(rng, spec_value):
    if isinstance(spec_value, (list, tuple)):
        return float(rng.uniform(spec_value[0], spec_value[1]))
    return float(spec_value)


def _unit(rng):
    a = rng.normal(size=3)
    return a / np.linalg.norm(a)


def _rot_offset(rng, deg):
    if deg == 0:
        return np.eye(3)
    return axis_angle_matrix(_unit(rng), math.radians(deg))


def _random_similarity(rng):
    s = float(rng.uniform(0.8, 1.25))
    return s, random_rotation(rng), rng.normal(0.0, 0.5, size=3)


def _lists(a):
    return np.asarray(a, dtype=np.float64).tolist()


def _written(values, units):
    """Values as they will appear on disk, and as the loader will read them back."""
    out = np.asarray(values, dtype=np.float64) / UNIT_SCALE[units] if units != "m" else np.asarray(values)
    disk = _lists(out)
    back = np.asarray(disk, dtype=np.float64) * UNIT_SCALE[units]
    return disk, back


def generate(spec: SynthSpec, out_dir):
    """Write a benchmark for ``spec`` into ``out_dir`` and return the answer sheet.

    With ``spec.answer_sheet`` false no answers.json is written and None is returned.
    """
    out = Path(out_dir)
    (out / "gt").mkdir(parents=True, exist_ok=True)
    fids = [f"{i:06d}" for i in range(spec.frames)]
    missing = set(fids[len(fids) - spec.missing_frames:]) if spec.missing_frames else set()
    manifest = {"schema_version": 1, "track": spec.track, "units": spec.units,
                "intrinsics": dict(INTRINSICS), "frames": []}
    submission = {"schema_version": 1, "track": spec.track, "name": f"synth-{spec.track}-{spec.seed}",
                  "units": spec.units, "frames": {}}

    registry = None
    if spec.track in ("object", "joint"):
        registry = _write_registry(spec, out / "objects")
        manifest["registry"] = "objects"
    body = None
    if spec.track == "joint":
        body = ellipsoid()
        save_mesh(body, out / "body.obj")
        manifest["smpl_faces"] = "body.obj"
        manifest["chamfer_samples"] = spec.chamfer_samples

    make = {"object": _object_frame, "human": _human_frame, "joint": _joint_frame}[spec.track]
    answers = {}
    for i, fid in enumerate(fids):
        rng = np.random.default_rng([spec.seed, i])
        gt_doc, pred_doc, answer = make(spec, fid, rng, registry, body, fid in missing)
        write_json(out / "gt" / f"{fid}.json", gt_doc)
        manifest["frames"].append({"frame_id": fid, "gt": f"gt/{fid}.json"})
        if fid not in missing:
            submission["frames"][fid] = pred_doc
            answers[fid] = answer
        else:
            answers[fid] = answer  # carries only what aggregation needs

    write_json(out / "manifest.json", manifest)
    write_json(out / "submission.json", submission)
    if not spec.answer_sheet:
        return None
    sheet = {
        "schema_version": 1,
        "track": spec.track,
        "scoring_seed": spec.seed,
        "chamfer_samples": spec.chamfer_samples,
        "missing_frames": sorted(missing),
        "frames": {k: v for k, v in answers.items() if k not in missing},
        "aggregates": _answer_aggregates(spec.track, answers, missing),
    }
    write_json(out / "answers.json", sheet)
    return sheet


def _write_registry(spec, directory):
    directory.mkdir(parents=True, exist_ok=True)
    meshes, syms = primitive_catalog(spec.symmetric)
    registry = {}
    for oid in spec.objects:
        save_mesh(meshes[oid], directory / f"{oid}.obj")
        write_json(directory / f"{oid}.sym.json", symmetry_to_doc(syms[oid]))
        registry[oid] = (meshes[oid], expand_symmetries(syms[oid]).transforms)
    return registry


# --------------------------------------------------------------------------
# Object track

def _object_frame(spec, fid, rng, registry, body, is_missing):
    oid = spec.objects[int(rng.integers(len(spec.objects)))]
    mesh, syms = registry[oid]
    R = random_rotation(rng)
    t = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2), rng.uniform(1.5, 3.0)])
    pR = R @ _rot_offset(rng, _angle(rng, spec.rotation_deg))
    pt = t + rng.normal(0.0, spec.translation_sigma, size=3) if spec.translation_sigma else t.copy()

    t_disk, t_back = _written(t, spec.units)
    pt_disk, pt_back = _written(pt, spec.units)
    gt_doc = {"object_id": oid, "R": _lists(R.ravel()), "t": t_disk}
    pred_doc = {"R": _lists(pR.ravel()), "t": pt_disk}
    diameter = oracles.diameter_bruteforce(mesh.vertices)
    if is_missing:
        return gt_doc, pred_doc, {"object_id": oid, "diameter": diameter}
    K = tuple(INTRINSICS[k] for k in ("fx", "fy", "cx", "cy"))
    R, pR = np.asarray(gt_doc["R"]).reshape(3, 3), np.asarray(pred_doc["R"]).reshape(3, 3)
    answer = {
        "object_id": oid,
        "diameter": diameter,
        "MSSD": oracles.mssd_enumerate(pR, pt_back, R, t_back, mesh.vertices, syms),
        "MSPD": oracles.mspd_enumerate(pR, pt_back, R, t_back, mesh.vertices, syms, K),
        "RE": oracles.rotation_error_enumerate(pR, R, syms),
    }
    return gt_doc, pred_doc, answer


# --------------------------------------------------------------------------
# Human track

def _skeleton(rng):
    local = rng.uniform([-0.25, -0.9, -0.15], [0.25, 0.9, 0.15], size=(N_JOINTS, 3))
    R = random_rotation(rng)
    t = np.array([rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3), rng.uniform(2.5, 4.0)])
    return local @ R.T + t


def _human_frame(spec, fid, rng, registry, body, is_missing):
    joints = _skeleton(rng)
    parts = np.stack([random_rotation(rng) for _ in range(9)])
    pred = joints.copy()
    if spec.joint_offset_mm:
        dirs = np.stack([_unit(rng) for _ in range(N_JOINTS)])
        pred = pred + dirs * (spec.joint_offset_mm / 1000.0)
    if spec.joint_noise_sigma:
        pred = pred + rng.normal(0.0, spec.joint_noise_sigma, size=pred.shape)
    pred_parts = np.stack([P @ _rot_offset(rng, spec.part_rotation_deg) for P in parts])
    if spec.scene_similarity:
        s, Q, q = _random_similarity(rng)
        pred = s * pred @ Q.T + q
        pred_parts = Q[None] @ pred_parts

    j_disk, j_back = _written(joints, spec.units)
    p_disk, p_back = _written(pred, spec.units)
    gt_doc = {"joints": j_disk, "parts": [_lists(P.ravel()) for P in parts]}
    pred_doc = {"joints": p_disk, "parts": [_lists(P.ravel()) for P in pred_parts]}
    if is_missing:
        return gt_doc, pred_doc, {}
    gP = np.asarray(gt_doc["parts"]).reshape(9, 3, 3)
    pP = np.asarray(pred_doc["parts"]).reshape(9, 3, 3)
    e_pa, R_align = oracles.mpjpe_pa_horn(p_back, j_back)
    answer = {
        "MPJPE": oracles.mpjpe_direct(p_back, j_back),
        "MPJPE-PA": e_pa,
        "PCK": oracles.pck_count(p_back, j_back, 50.0),
        "AUC": oracles.auc_count(p_back, j_back),
        "MPJAE": oracles.mpjae_quat(pP, gP),
        "MPJAE-PA": oracles.mpjae_quat(pP, gP, R_align),
    }
    return gt_doc, pred_doc, answer


# --------------------------------------------------------------------------
# Joint track

def _joint_frame(spec, fid, rng, registry, body, is_missing):
    oid = spec.objects[int(rng.integers(len(spec.objects)))]
    template, _ = registry[oid]
    stretch = rng.uniform(0.9, 1.1, size=3)
    yaw = axis_angle_matrix((0.0, 1.0, 0.0), rng.uniform(-np.pi, np.pi))
    center = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2), rng.uniform(2.0, 3.0)])
    human = (body.vertices * stretch) @ yaw.T + center
    R = random_rotation(rng)
    t = center + np.array([rng.uniform(0.2, 0.4), rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2)])

    pred_h = human + rng.normal(0.0, spec.vertex_noise_sigma, size=human.shape) \
        if spec.vertex_noise_sigma else human.copy()
    pR = R @ _rot_offset(rng, _angle(rng, spec.rotation_deg))
    pt = t + rng.normal(0.0, spec.translation_sigma, size=3) if spec.translation_sigma else t.copy()

    h_disk, h_back = _written(human, spec.units)
    t_disk, t_back = _written(t, spec.units)
    gt_doc = {"object_id": oid, "smpl_vertices": h_disk, "R": _lists(R.ravel()), "t": t_disk}
    if spec.scene_similarity:
        s, Q, q = _random_similarity(rng)
        pred_h = s * pred_h @ Q.T + q
        pred_o = s * (template.vertices @ pR.T + pt) @ Q.T + q
        ph_disk, ph_back = _written(pred_h, spec.units)
        po_disk, po_back = _written(pred_o, spec.units)
        pred_doc = {"smpl_vertices": ph_disk, "object_vertices": po_disk}
    else:
        ph_disk, ph_back = _written(pred_h, spec.units)
        pt_disk, pt_back = _written(pt, spec.units)
        pred_doc = {"smpl_vertices": ph_disk, "R": _lists(pR.ravel()), "t": pt_disk}
        po_back = template.vertices @ np.asarray(pred_doc["R"]).reshape(3, 3).T + pt_back
    if is_missing or not spec.answer_sheet:
        return gt_doc, pred_doc, {}
    go_back = template.vertices @ np.asarray(gt_doc["R"]).reshape(3, 3).T + t_back

    s, Ra, ta = oracles.horn_similarity(np.vstack([ph_back, po_back]), np.vstack([h_back, go_back]))
    n = spec.chamfer_samples
    samples = {}
    for role, verts, faces in (("pred_smpl", ph_back, body.faces), ("gt_smpl", h_back, body.faces),
                               ("pred_object", po_back, template.faces),
                               ("gt_object", go_back, template.faces)):
        kind = role.split("_", 1)[1]
        samples[role] = sample_surface(TriMesh(verts, faces), n, derive_seed(spec.seed, fid, kind))
    align = lambda p: s * (p @ Ra.T) + ta  # noqa: E731
    answer = {
        "SMPL": 1000.0 * oracles.chamfer_bruteforce(align(samples["pred_smpl"]), samples["gt_smpl"]),
        "Object": 1000.0 * oracles.chamfer_bruteforce(align(samples["pred_object"]), samples["gt_object"]),
    }
    return gt_doc, pred_doc, answer


# --------------------------------------------------------------------------
# Aggregates, written out long-hand

def _answer_aggregates(track, answers, missing):
    present = [answers[k] for k in sorted(answers) if k not in missing]
    n_missing = len(missing)
    if track == "object":
        errs = {key: [a[key] for a in present] + [math.inf] * n_missing for key in ("MSSD", "MSPD", "RE")}
        diam = [a["diameter"] for a in present] + [answers[k]["diameter"] for k in sorted(missing)]
        mssd_th = [[f * d for f in MSSD_SCHEDULE.thresholds.tolist()] for d in diam]
        agg = {
            "MSSD-AR": oracles.recall_count(errs["MSSD"], mssd_th),
            "MSPD-AR": oracles.recall_count(errs["MSPD"], MSPD_SCHEDULE.thresholds.tolist()),
            "RE-AR": oracles.recall_count(errs["RE"], RE_SCHEDULE.thresholds.tolist()),
        }
        agg["AR-all"] = (agg["MSSD-AR"] + agg["MSPD-AR"] + agg["RE-AR"]) / 3.0
        for key in ("MSSD", "MSPD", "RE"):
            vals = [a[key] for a in present]
            agg[key] = statistics.median(vals) if vals else None
        return agg
    if track == "human":
        agg = {}
        for key in ("MPJPE", "MPJPE-PA", "MPJAE", "MPJAE-PA"):
            vals = [a[key] for a in present]
            agg[key] = sum(vals) / len(vals) if vals else None
        for key in ("PCK", "AUC"):
            agg[key] = statistics.fmean([a[key] for a in present] + [0.0] * n_missing)
        return agg
    agg = {}
    for key in ("SMPL", "Object"):
        vals = [a[key] for a in present]
        agg[key] = sum(vals) / len(vals) if vals else None
    return agg

"""File formats: meshes (OBJ / ASCII PLY), the object registry, manifests,
submissions and validation.

Everything except meshes is a UTF-8 JSON document carrying
``schema_version``. Rotations are row-major lists of 9 numbers, lengths are
meters unless the manifest declares ``"units": "mm"``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ParseError
from .geometry import CameraIntrinsics, RigidPose, TriMesh, is_rotation, mesh_diameter
from .human_metrics import PART_NAMES, HumanFrame
from .joint_metrics import JointFrame
from .object_metrics import DEFAULT_CONTINUOUS_COUNT, ObjectFrame, SymmetrySet, expand_symmetries

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TRACKS = ("object", "human", "joint")
UNIT_SCALE = {"m": 1.0, "mm": 1e-3}


# --------------------------------------------------------------------------
# JSON documents

def dumps(obj):
    """Stable JSON text: sorted keys, repr floats, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from exc
    except OSError as exc:
        raise ParseError(str(exc), path) from exc


# --------------------------------------------------------------------------
# Meshes

def _parse_obj(path, lines):
    verts, faces = [], []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "v":
            try:
                verts.append([float(x) for x in tok[1:4]])
            except ValueError:
                raise ParseError("bad vertex coordinate", path, lineno) from None
            if len(verts[-1]) != 3:
                raise ParseError("vertex needs 3 coordinates", path, lineno)
        elif tok[0] == "f":
            if len(tok) < 4:
                raise ParseError("face needs at least 3 vertices", path, lineno)
            idx = []
            for t in tok[1:]:
                try:
                    i = int(t.split("/")[0])
                except ValueError:
                    raise ParseError(f"bad face index {t!r}", path, lineno) from None
                i = i - 1 if i > 0 else len(verts) + i
                if i < 0 or i >= len(verts) or int(t.split("/")[0]) == 0:
                    raise ParseError(f"face index {t} out of range", path, lineno)
                idx.append(i)
            if len(set(idx)) != len(idx):
                raise ParseError("degenerate face with repeated vertex", path, lineno)
            faces.extend([idx[0], idx[k], idx[k + 1]] for k in range(1, len(idx) - 1))
    return verts, faces


def _parse_ply(path, lines):
    if not lines or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", path, 1)
    elements, current, fmt_ok = [], None, False
    body_start = None
    for lineno, raw in enumerate(lines[1:], 2):
        tok = raw.split()
        if not tok:
            continue
        if tok[0] == "format":
            if tok[1] != "ascii":
                raise ParseError("only ASCII PLY is supported", path, lineno)
            fmt_ok = True
        elif tok[0] == "element":
            current = {"name": tok[1], "count": int(tok[2]), "props": []}
            elements.append(current)
        elif tok[0] == "property":
            if current is None:
                raise ParseError("property before element", path, lineno)
            current["props"].append(tok[-1] if tok[1] != "list" else ("list", tok[-1]))
        elif tok[0] == "end_header":
            body_start = lineno
            break
    if not fmt_ok or body_start is None:
        raise ParseError("incomplete PLY header", path)
    verts, faces = [], []
    row = body_start  # 0-based index of the first body line
    for el in elements:
        for _ in range(el["count"]):
            while row < len(lines) and not lines[row].strip():
                row += 1
            if row >= len(lines):
                raise ParseError(f"unexpected end of file in element {el['name']}", path, row)
            lineno = row + 1
            tok = lines[row].split()
            row += 1
            if el["name"] == "vertex":
                props = el["props"]
                try:
                    vals = dict(zip(props, (float(x) for x in tok)))
                    verts.append([vals["x"], vals["y"], vals["z"]])
                except (KeyError, ValueError):
                    raise ParseError("bad vertex row", path, lineno) from None
            elif el["name"] == "face":
                try:
                    n = int(tok[0])
                    idx = [int(x) for x in tok[1:1 + n]]
                except (ValueError, IndexError):
                    raise ParseError("bad face row", path, lineno) from None
                if n < 3 or len(idx) != n:
                    raise ParseError("face needs at least 3 vertices", path, lineno)
                if min(idx) < 0 or max(idx) >= len(verts):
                    raise ParseError("face index out of range", path, lineno)
                if len(set(idx)) != n:
                    raise ParseError("degenerate face with repeated vertex", path, lineno)
                faces.extend([idx[0], idx[k], idx[k + 1]] for k in range(1, n - 1))
    return verts, faces


def load_mesh(path) -> TriMesh:
    """Read an OBJ or ASCII PLY file; polygons are fan-triangulated."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(str(exc), path) from exc
    parser = _parse_ply if path.suffix.lower() == ".ply" else _parse_obj
    verts, faces = parser(path, lines)
    mesh = TriMesh(np.array(verts, dtype=np.float64).reshape(-1, 3),
                   np.array(faces, dtype=np.int64).reshape(-1, 3))
    if not np.all(np.isfinite(mesh.vertices)):
        raise ParseError("non-finite vertex coordinate", path)
    return mesh


def save_mesh(mesh: TriMesh, path):
    """Write OBJ or ASCII PLY with round-trip exact coordinates."""
    path = Path(path)
    out = []
    if path.suffix.lower() == ".ply":
        out += ["ply", "format ascii 1.0", f"element vertex {len(mesh.vertices)}",
                "property double x", "property double y", "property double z",
                f"element face {len(mesh.faces)}", "property list uchar int vertex_indices",
                "end_header"]
        out += [" ".join(repr(float(c)) for c in v) for v in mesh.vertices]
        out += ["3 " + " ".join(str(int(i)) for i in f) for f in mesh.faces]
    else:
        out += ["v " + " ".join(repr(float(c)) for c in v) for v in mesh.vertices]
        out += ["f " + " ".join(str(int(i) + 1) for i in f) for f in mesh.faces]
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# Registry

@dataclass(frozen=True)
class RegistryEntry:
    object_id: str
    mesh: TriMesh
    symmetry_set: SymmetrySet
    diameter: float

    @property
    def symmetries(self):
        return self.symmetry_set.transforms


class Registry:
    """Immutable mapping object_id -> RegistryEntry."""

    def __init__(self, entries):
        self._entries = dict(sorted(entries.items()))

    def __getitem__(self, object_id):
        try:
            return self._entries[object_id]
        except KeyError:
            raise KeyError(f"unknown object_id {object_id!r}") from None

    def __contains__(self, object_id):
        return object_id in self._entries

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    @classmethod
    def from_meshes(cls, meshes, symmetry_sets=None):
        symmetry_sets = symmetry_sets or {}
        entries = {}
        for oid, mesh in meshes.items():
            sym = expand_symmetries(symmetry_sets.get(oid, SymmetrySet.identity_only(oid)))
            entries[oid] = RegistryEntry(oid, mesh, sym, mesh_diameter(mesh))
        return cls(entries)


def _rotation_from_list(values, where, path=None):
    R = np.asarray(values, dtype=np.float64)
    if R.size != 9:
        raise ParseError(f"{where}: rotation needs 9 numbers", path)
    R = R.reshape(3, 3)
    if not is_rotation(R):
        raise ParseError(f"{where}: not an orthonormal rotation with det +1", path)
    return R


def parse_symmetry(doc, path=None) -> SymmetrySet:
    """Build a SymmetrySet from a descriptor document (not yet expanded)."""
    try:
        oid = str(doc["object_id"])
        discrete = [_rotation_from_list(r, f"discrete[{i}]", path)
                    for i, r in enumerate(doc.get("discrete", []))]
        continuous = []
        for i, c in enumerate(doc.get("continuous", [])):
            axis = np.asarray(c["axis"], dtype=np.float64)
            norm = np.linalg.norm(axis)
            if axis.shape != (3,) or not np.isfinite(norm) or norm == 0:
                raise ParseError(f"continuous[{i}]: axis must be a non-zero 3-vector", path)
            count = int(c.get("count", DEFAULT_CONTINUOUS_COUNT))
            if count < 2:
                raise ParseError(f"continuous[{i}]: count must be >= 2", path)
            continuous.append((tuple(axis / norm), count))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad symmetry descriptor: {exc}", path) from exc
    transforms = np.stack(discrete) if discrete else np.eye(3)[None]
    return SymmetrySet(oid, transforms, tuple(continuous))


def symmetry_to_doc(sym: SymmetrySet):
    return {
        "schema_version": SCHEMA_VERSION,
        "object_id": sym.object_id,
        "discrete": [r.ravel().tolist() for r in sym.transforms],
        "continuous": [{"axis": list(a), "count": int(k)} for a, k in sym.continuous],
    }


def load_registry(directory) -> Registry:
    """Load ``<id>.obj``/``<id>.ply`` templates and ``<id>.sym.json`` descriptors."""
    directory = Path(directory)
    meshes, syms = {}, {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() in (".obj", ".ply"):
            meshes[path.stem] = load_mesh(path)
    for oid in meshes:
        sym_path = directory / f"{oid}.sym.json"
        if sym_path.exists():
            sym = parse_symmetry(read_json(sym_path), sym_path)
            if sym.object_id != oid:
                raise ParseError(f"descriptor object_id {sym.object_id!r} != {oid!r}", sym_path)
            syms[oid] = sym
        else:
            log.warning("no symmetry descriptor for %s; using identity only", oid)
    return Registry.from_meshes(meshes, syms)


# --------------------------------------------------------------------------
# Payloads

class PayloadError(ValueError):
    pass


def _finite_array(value, shape, what):
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise PayloadError(f"{what}: not numeric") from None
    if arr.size != int(np.prod(shape)) and shape[0] != -1:
        raise PayloadError(f"{what}: expected {int(np.prod(shape))} numbers, got {arr.size}")
    if shape[0] == -1 and (arr.ndim != 2 or arr.shape[1] != shape[1]):
        raise PayloadError(f"{what}: expected an N x {shape[1]} array")
    if not np.all(np.isfinite(arr)):
        raise PayloadError(f"{what}: non-finite value")
    return arr.reshape(shape)


def _pose(payload, scale, what):
    R = _finite_array(payload.get("R"), (3, 3), f"{what}.R")
    if not is_rotation(R):
        raise PayloadError(f"{what}.R: not a rotation")
    t = _finite_array(payload.get("t"), (3,), f"{what}.t") * scale
    return RigidPose(R, t)


def parse_payload(track, payload, scale=1.0, side="gt"):
    """Validate and convert one frame payload into arrays in meters.

    Raises:
        PayloadError: on any schema, shape or finiteness problem.
    """
    if not isinstance(payload, dict):
        raise PayloadError("payload must be an object")
    out = {}
    if side == "gt" and track in ("object", "joint"):
        if not isinstance(payload.get("object_id"), str):
            raise PayloadError("object_id missing")
        out["object_id"] = payload["object_id"]
    if track == "object":
        out["pose"] = _pose(payload, scale, "pose")
    elif track == "human":
        out["joints"] = _finite_array(payload.get("joints"), (-1, 3), "joints") * scale
        if len(out["joints"]) < 3:
            raise PayloadError("joints: need at least 3")
        if payload.get("parts") is not None:
            parts = _finite_array(payload["parts"], (len(PART_NAMES), 3, 3), "parts")
            for k, R in enumerate(parts):
                if not is_rotation(R):
                    raise PayloadError(f"parts[{k}]: not a rotation")
            out["parts"] = parts
    elif track == "joint":
        out["smpl_vertices"] = _finite_array(payload.get("smpl_vertices"), (-1, 3), "smpl_vertices") * scale
        if "object_vertices" in payload:
            out["object_vertices"] = _finite_array(payload["object_vertices"], (-1, 3),
                                                   "object_vertices") * scale
        else:
            out["pose"] = _pose(payload, scale, "pose")
    else:
        raise PayloadError(f"unknown track {track!r}")
    return out


def pose_to_payload(pose: RigidPose):
    return {"R": np.asarray(pose.rotation).ravel().tolist(), "t": np.asarray(pose.translation).tolist()}


# --------------------------------------------------------------------------
# Manifest and submission

def _intrinsics(doc, where, path):
    try:
        K = CameraIntrinsics(*(float(doc[k]) for k in ("fx", "fy", "cx", "cy")))
    except (KeyError, TypeError, ValueError):
        raise ParseError(f"{where}: intrinsics need fx, fy, cx, cy", path) from None
    if not (K.fx > 0 and K.fy > 0) or not all(map(math.isfinite, (K.fx, K.fy, K.cx, K.cy))):
        raise ParseError(f"{where}: focal lengths must be positive and finite", path)
    return K


@dataclass
class FrameRecord:
    frame_id: str
    gt: dict
    intrinsics: Optional[CameraIntrinsics]


@dataclass
class Manifest:
    path: Path
    track: str
    units: str
    frames: list  # FrameRecord, in file order
    intrinsics: Optional[CameraIntrinsics] = None
    registry: Optional[Registry] = None
    smpl_faces: Optional[np.ndarray] = None
    chamfer_samples: int = 6000
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def frame_ids(self):
        return [f.frame_id for f in self.frames]

    @property
    def scale(self):
        return UNIT_SCALE[self.units]


def load_manifest(path) -> Manifest:
    """Parse a manifest and every ground-truth file it references."""
    path = Path(path)
    doc = read_json(path)
    base = path.parent
    for key in ("schema_version", "track", "units", "frames"):
        if key not in doc:
            raise ParseError(f"manifest field {key!r} missing", path)
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {doc['schema_version']!r}", path)
    track, units = doc["track"], doc["units"]
    if track not in TRACKS:
        raise ParseError(f"unknown track {track!r}", path)
    if units not in UNIT_SCALE:
        raise ParseError(f"units must be one of {sorted(UNIT_SCALE)}", path)
    scale = UNIT_SCALE[units]
    K = _intrinsics(doc["intrinsics"], "intrinsics", path) if doc.get("intrinsics") else None

    registry = None
    if track in ("object", "joint"):
        if "registry" not in doc:
            raise ParseError("manifest field 'registry' missing", path)
        registry = load_registry(base / doc["registry"])
    smpl_faces = None
    if track == "joint":
        if "smpl_faces" not in doc:
            raise ParseError("manifest field 'smpl_faces' missing", path)
        smpl_faces = load_mesh(base / doc["smpl_faces"]).faces

    frames, seen = [], set()
    for i, entry in enumerate(doc["frames"]):
        fid = entry.get("frame_id")
        if not isinstance(fid, str) or not fid:
            raise ParseError(f"frames[{i}]: frame_id must be a non-empty string", path)
        if fid in seen:
            raise ParseError(f"duplicate frame_id {fid!r}", path)
        seen.add(fid)
        gt_path = base / entry["gt"]
        if not gt_path.exists():
            raise ParseError(f"frame {fid}: ground-truth file {entry['gt']} not found", path)
        try:
            gt = parse_payload(track, read_json(gt_path), scale, "gt")
        except PayloadError as exc:
            raise ParseError(f"frame {fid}: {exc}", gt_path) from None
        if registry is not None and gt["object_id"] not in registry:
            raise ParseError(f"frame {fid}: unknown object_id {gt['object_id']!r}", gt_path)
        fK = _intrinsics(entry["intrinsics"], f"frame {fid}", path) if entry.get("intrinsics") else K
        if track == "object" and fK is None:
            raise ParseError(f"frame {fid}: no intrinsics", path)
        frames.append(FrameRecord(fid, gt, fK))
    return Manifest(path, track, units, frames, K, registry, smpl_faces,
                    int(doc.get("chamfer_samples", 6000)), doc)


@dataclass
class Submission:
    track: str
    name: str
    frames: dict  # frame_id -> raw payload
    units: Optional[str] = None


def load_submission(path) -> Submission:
    path = Path(path)
    doc = read_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("frames"), dict):
        raise ParseError("submission needs a 'frames' object", path)
    units = doc.get("units")
    if units is not None and units not in UNIT_SCALE:
        raise ParseError(f"units must be one of {sorted(UNIT_SCALE)}", path)
    return Submission(doc.get("track", ""), doc.get("name") or path.stem, doc["frames"], units)


@dataclass
class ValidationReport:
    missing: list = field(default_factory=list)
    extra: list = field(default_factory=list)
    malformed: list = field(default_factory=list)  # [{"frame_id", "reason"}]

    @property
    def ok(self):
        return not self.malformed

    @property
    def issues(self):
        return bool(self.missing or self.extra or self.malformed)

    def to_dict(self):
        return {"missing": self.missing, "extra": self.extra, "malformed": self.malformed}


def _check_against_gt(manifest, gt, pred):
    track = manifest.track
    if track == "human":
        if pred["joints"].shape != gt["joints"].shape:
            raise PayloadError(f"joint count {len(pred['joints'])} != ground truth {len(gt['joints'])}")
        if ("parts" in pred) != ("parts" in gt):
            log.warning("part rotations present on one side only; angle metrics skipped")
    elif track == "joint":
        if pred["smpl_vertices"].shape != gt["smpl_vertices"].shape:
            raise PayloadError("SMPL vertex count differs from ground truth")
        n_tmpl = len(manifest.registry[gt["object_id"]].mesh.vertices)
        for side in (pred, gt):
            if "object_vertices" in side and len(side["object_vertices"]) != n_tmpl:
                raise PayloadError(f"object vertex count {len(side['object_vertices'])} != template {n_tmpl}")


def validate_submission(manifest: Manifest, submission: Submission):
    """Check a submission against a manifest.

    Returns:
        (ValidationReport, parsed payloads keyed by frame_id)
    """
    report = ValidationReport()
    parsed = {}
    if submission.track and submission.track != manifest.track:
        report.malformed.append({"frame_id": None,
                                 "reason": f"submission track {submission.track!r} != {manifest.track!r}"})
    scale = UNIT_SCALE[submission.units or manifest.units]
    gt_by_id = {f.frame_id: f.gt for f in manifest.frames}
    for fid in sorted(gt_by_id):
        if fid not in submission.frames:
            report.missing.append(fid)
            continue
        try:
            pred = parse_payload(manifest.track, submission.frames[fid], scale, "pred")
            _check_against_gt(manifest, gt_by_id[fid], pred)
        except PayloadError as exc:
            report.malformed.append({"frame_id": fid, "reason": str(exc)})
            continue
        parsed[fid] = pred
    report.extra = sorted(set(submission.frames) - set(gt_by_id))
    return report, parsed


def build_frames(manifest: Manifest, parsed: dict):
    """Combine ground truth and parsed predictions into per-track frame records.

    Frames absent from ``parsed`` get a None prediction (scored as missing).
    """
    frames = []
    for rec in manifest.frames:
        gt, pred = rec.gt, parsed.get(rec.frame_id)
        if manifest.track == "object":
            frames.append(ObjectFrame(rec.frame_id, gt["object_id"], gt["pose"],
                                      pred["pose"] if pred else None, rec.intrinsics))
        elif manifest.track == "human":
            frames.append(HumanFrame(rec.frame_id, gt["joints"], pred["joints"] if pred else None,
                                     gt.get("parts"), pred.get("parts") if pred else None))
        else:
            frames.append(JointFrame(
                rec.frame_id, gt["object_id"], manifest.smpl_faces,
                gt["smpl_vertices"], pred["smpl_vertices"] if pred else None,
                gt.get("pose"), pred.get("pose") if pred else None,
                gt.get("object_vertices"), pred.get("object_vertices") if pred else None))
    return frames

import json
import logging

import numpy as np
import pytest

from hoieval.dataio import (
    load_manifest,
    load_mesh,
    load_registry,
    load_submission,
    parse_payload,
    parse_symmetry,
    PayloadError,
    pose_to_payload,
    read_json,
    save_mesh,
    symmetry_to_doc,
    validate_submission,
    write_json,
)
from hoieval.errors import ParseError
from hoieval.geometry import RigidPose, mesh_diameter, random_rotation
from hoieval.object_metrics import SymmetrySet
from hoieval.primitives import box, cylinder, icosphere
from hoieval.synth import SynthSpec, generate


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# --- meshes -----------------------------------------------------------------

def test_minimal_obj(tmp_path):
    m = load_mesh(write(tmp_path / "t.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n"))
    assert m.vertices.shape == (3, 3) and m.faces.tolist() == [[0, 1, 2]]


def test_obj_quad_is_fan_triangulated(tmp_path):
    text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n"
    m = load_mesh(write(tmp_path / "q.obj", text))
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_negative_indices(tmp_path):
    m = load_mesh(write(tmp_path / "n.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n"))
    assert m.faces.tolist() == [[0, 1, 2]]


def test_obj_bad_index_names_line(tmp_path):
    with pytest.raises(ParseError) as info:
        load_mesh(write(tmp_path / "b.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 9\n"))
    assert info.value.line == 5
    assert ":5" in str(info.value) or "line 5" in str(info.value)


def test_ply_ascii(tmp_path):
    text = ("ply\nformat ascii 1.0\nelement vertex 4\nproperty float x\nproperty float y\n"
            "property float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n"
            "0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    m = load_mesh(write(tmp_path / "p.ply", text))
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


@pytest.mark.parametrize("mesh", [box(0.3, 0.2, 0.1), cylinder(0.06, 0.2), icosphere(0.1, 2)])
@pytest.mark.parametrize("suffix", [".obj", ".ply"])
def test_mesh_round_trip_exact(tmp_path, mesh, suffix):
    rng = np.random.default_rng(0)
    mesh = type(mesh)(mesh.vertices + rng.normal(0, 1e-3, mesh.vertices.shape), mesh.faces)
    path = tmp_path / f"m{suffix}"
    save_mesh(mesh, path)
    back = load_mesh(path)
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.faces, mesh.faces)


# --- symmetry descriptors & registry ----------------------------------------

def test_symmetry_descriptor_round_trip():
    Rz = np.rint(np.diag([-1.0, -1.0, 1.0]))
    sym = SymmetrySet("mug", np.stack([np.eye(3), Rz]), (((0.0, 0.0, 1.0), 8),))
    back = parse_symmetry(symmetry_to_doc(sym))
    np.testing.assert_array_equal(back.transforms, sym.transforms)
    assert back.continuous == sym.continuous


def test_symmetry_default_count():
    sym = parse_symmetry({"object_id": "c", "discrete": [], "continuous": [{"axis": [0, 0, 1]}]})
    assert sym.continuous[0][1] == 64


def test_registry_defaults_and_expansion(tmp_path, caplog):
    save_mesh(box(0.3, 0.2, 0.1), tmp_path / "plain.obj")
    save_mesh(box(0.3, 0.2, 0.1), tmp_path / "flip.obj")
    write_json(tmp_path / "flip.sym.json",
               {"object_id": "flip", "discrete": [[-1, 0, 0, 0, -1, 0, 0, 0, 1]]})
    with caplog.at_level(logging.WARNING):
        reg = load_registry(tmp_path)
    assert len(reg["plain"].symmetries) == 1
    assert any("plain" in r.message for r in caplog.records)
    assert len(reg["flip"].symmetries) == 2
    assert reg["flip"].diameter == mesh_diameter(reg["flip"].mesh)


def test_registry_rejects_non_rotation(tmp_path):
    save_mesh(box(), tmp_path / "bad.obj")
    write_json(tmp_path / "bad.sym.json", {"object_id": "bad", "discrete": [[1, 0, 0, 0, 1, 0, 0, 0, 2]]})
    with pytest.raises(ParseError):
        load_registry(tmp_path)


# --- payloads ---------------------------------------------------------------

def test_pose_payload_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(1)
    for i in range(20):
        pose = RigidPose(random_rotation(rng), rng.normal(size=3))
        write_json(tmp_path / "p.json", {"object_id": "x", **pose_to_payload(pose)})
        back = parse_payload("object", read_json(tmp_path / "p.json"))["pose"]
        np.testing.assert_array_equal(back.rotation, pose.rotation)
        np.testing.assert_array_equal(back.translation, pose.translation)


def test_payload_rejections():
    good = {"R": np.eye(3).ravel().tolist(), "t": [0, 0, 1]}
    parse_payload("object", good, side="pred")
    with pytest.raises(PayloadError):
        parse_payload("object", {**good, "t": [0, float("nan"), 1]}, side="pred")
    with pytest.raises(PayloadError):
        parse_payload("object", {**good, "R": [1, 0, 0, 0, 1, 0, 0, 0, 1.1]}, side="pred")
    with pytest.raises(PayloadError):
        parse_payload("human", {"joints": [[0, 0, 0], [1, 1, 1]]}, side="pred")


def test_mm_units_are_converted():
    out = parse_payload("human", {"joints": [[1000, 0, 0], [0, 0, 0], [0, 1, 0]]}, scale=1e-3, side="pred")
    np.testing.assert_allclose(out["joints"][0], [1.0, 0.0, 0.0])


# --- manifest / submission --------------------------------------------------

@pytest.fixture(scope="module")
def bench(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    generate(SynthSpec(track="object", frames=6, seed=4, rotation_deg=5.0), out)
    return out


def test_complete_submission_has_no_issues(bench):
    report, parsed = validate_submission(load_manifest(bench / "manifest.json"),
                                         load_submission(bench / "submission.json"))
    assert report.ok and not report.issues and len(parsed) == 6


def _edited(bench, tmp_path, edit):
    doc = json.loads((bench / "submission.json").read_text())
    edit(doc)
    path = tmp_path / "sub.json"
    path.write_text(json.dumps(doc))
    return validate_submission(load_manifest(bench / "manifest.json"), load_submission(path))[0]


def test_missing_frame_is_listed_but_allowed(bench, tmp_path):
    report = _edited(bench, tmp_path, lambda d: d["frames"].pop("000002"))
    assert report.missing == ["000002"] and report.ok


def test_nan_blocks_scoring(bench, tmp_path):
    def poison(d):
        d["frames"]["000001"]["t"][0] = float("nan")

    report = _edited(bench, tmp_path, poison)
    assert not report.ok and report.malformed[0]["frame_id"] == "000001"


def test_extra_frames_reported(bench, tmp_path):
    report = _edited(bench, tmp_path, lambda d: d["frames"].update({"zzz": d["frames"]["000000"]}))
    assert report.extra == ["zzz"] and report.ok


def test_validation_idempotent_and_order_independent(bench, tmp_path):
    manifest = load_manifest(bench / "manifest.json")
    sub = load_submission(bench / "submission.json")
    first = validate_submission(manifest, sub)[0].to_dict()
    assert validate_submission(manifest, sub)[0].to_dict() == first
    sub.frames = dict(reversed(list(sub.frames.items())))
    assert validate_submission(manifest, sub)[0].to_dict() == first


def test_manifest_errors(bench, tmp_path):
    doc = json.loads((bench / "manifest.json").read_text())
    for mutate in (lambda d: d.pop("units"),
                   lambda d: d["frames"].append(dict(d["frames"][0])),
                   lambda d: d["frames"][0].update(gt="gt/nope.json")):
        bad = json.loads(json.dumps(doc))
        mutate(bad)
        path = bench / "bad_manifest.json"
        path.write_text(json.dumps(bad))
        with pytest.raises(ParseError):
            load_manifest(path)

import math

import pytest

from hoieval.dataio import read_json
from hoieval.scoring import score_files
from hoieval.synth import SynthSpec, generate


def run(tmp_path, **kw):
    sheet = generate(SynthSpec(**kw), tmp_path)
    report = score_files(tmp_path / "manifest.json", tmp_path / "submission.json", seed=kw.get("seed", 0))
    return sheet, report


COUNT_KEYS = {"MSSD-AR", "MSPD-AR", "RE-AR", "AR-all", "PCK", "AUC"}


def assert_matches(sheet, report):
    rows = {r["frame_id"]: r for r in report.rows}
    assert sorted(rows) == sorted(sheet["frames"])
    assert report.missing == sheet["missing_frames"]
    for fid, want in sheet["frames"].items():
        for key, val in want.items():
            if key in ("object_id",):
                assert rows[fid][key] == val
            elif val is not None:
                assert rows[fid][key] == pytest.approx(val, abs=1e-6), (fid, key)
    for key, val in sheet["aggregates"].items():
        got = report.aggregates[key]
        if val is None:
            assert got is None
        elif key in COUNT_KEYS:
            assert got == pytest.approx(val, abs=1e-12), key
        else:
            assert got == pytest.approx(val, abs=1e-6), key


def test_zero_noise_object_is_perfect(tmp_path):
    sheet, report = run(tmp_path, track="object", frames=12, seed=1)
    assert sheet["aggregates"]["AR-all"] == 1.0
    assert all(f["MSSD"] == 0 and f["MSPD"] == 0 for f in sheet["frames"].values())
    assert report.aggregates["AR-all"] == 1.0


def test_zero_noise_human_is_perfect(tmp_path):
    sheet, report = run(tmp_path, track="human", frames=8, seed=2)
    assert sheet["aggregates"]["PCK"] == 100.0 and sheet["aggregates"]["MPJPE"] == 0.0
    assert report.aggregates["MPJPE-PA"] == pytest.approx(0.0, abs=1e-9)


def test_zero_noise_joint_is_perfect(tmp_path):
    sheet, report = run(tmp_path, track="joint", frames=3, seed=3, chamfer_samples=500)
    assert sheet["aggregates"]["SMPL"] == pytest.approx(0.0, abs=1e-6)
    assert report.aggregates["Object"] == pytest.approx(0.0, abs=1e-6)


def test_three_degrees_gives_re_ar_point_nine(tmp_path):
    sheet, report = run(tmp_path, track="object", frames=30, seed=4, rotation_deg=3.0, symmetric=False)
    assert sheet["aggregates"]["RE-AR"] == 0.9
    assert report.aggregates["RE-AR"] == 0.9


def test_49mm_offset(tmp_path):
    sheet, report = run(tmp_path, track="human", frames=10, seed=5, joint_offset_mm=49.0)
    assert sheet["aggregates"]["PCK"] == 100.0
    assert sheet["aggregates"]["MPJPE"] == pytest.approx(49.0, abs=1e-9)
    assert report.aggregates["PCK"] == 100.0


@pytest.mark.parametrize("kw", [
    dict(track="object", frames=20, rotation_deg=[0, 25], translation_sigma=0.02, missing_frames=2),
    dict(track="object", frames=20, rotation_deg=[0, 25], translation_sigma=0.02, units="mm"),
    dict(track="human", frames=20, joint_noise_sigma=0.03, part_rotation_deg=8, missing_frames=1),
    dict(track="human", frames=10, joint_noise_sigma=0.01, scene_similarity=True, units="mm"),
    dict(track="joint", frames=4, vertex_noise_sigma=0.01, rotation_deg=5, translation_sigma=0.02,
         chamfer_samples=400, missing_frames=1),
    dict(track="joint", frames=3, vertex_noise_sigma=0.005, scene_similarity=True, chamfer_samples=400),
])
def test_score_matches_answer_sheet(tmp_path, kw):
    sheet, report = run(tmp_path, seed=7, **kw)
    assert_matches(sheet, report)
    assert read_json(tmp_path / "answers.json") == sheet


def test_no_answer_sheet_option(tmp_path):
    assert generate(SynthSpec(track="joint", frames=2, answer_sheet=False, chamfer_samples=100), tmp_path) is None
    assert not (tmp_path / "answers.json").exists()
    assert (tmp_path / "submission.json").exists()


def test_generation_is_deterministic(tmp_path):
    spec = SynthSpec(track="human", frames=5, seed=9, joint_noise_sigma=0.02)
    generate(spec, tmp_path / "a")
    generate(spec, tmp_path / "b")
    for name in ("manifest.json", "submission.json", "answers.json", "gt/000003.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(track="hands")
    with pytest.raises(ValueError):
        SynthSpec(track="human", frames=3, missing_frames=4)
    spec = SynthSpec.from_dict({"track": "object", "frames": 5, "perturbation": {"rotation_deg": 3.0}})
    assert spec.rotation_deg == 3.0 and math.isclose(spec.translation_sigma, 0.0)

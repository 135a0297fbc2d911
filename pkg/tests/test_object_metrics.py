import numpy as np
import pytest

from conftest import random_pose
from hoieval import oracles
from hoieval.errors import BehindCamera, EmptyInput, EmptyMesh, FrameError
from hoieval.geometry import (
    CameraIntrinsics,
    RigidPose,
    axis_angle_matrix,
    is_rotation,
    mesh_diameter,
    random_rotation,
)
from hoieval.object_metrics import (
    MSPD_SCHEDULE,
    MSSD_SCHEDULE,
    RE_SCHEDULE,
    ObjectFrame,
    RecallSchedule,
    SymmetrySet,
    average_recall,
    expand_symmetries,
    mspd,
    mssd,
    rotation_error,
    score_object_track,
)
from hoieval.dataio import Registry
from hoieval.primitives import box, primitive_catalog

RZ = lambda deg: axis_angle_matrix([0, 0, 1], np.radians(deg))  # noqa: E731


def _k(K):
    return (K.fx, K.fy, K.cx, K.cy)


# --- schedules --------------------------------------------------------------

def test_schedules():
    np.testing.assert_allclose(MSSD_SCHEDULE.thresholds, np.arange(1, 11) * 0.05)
    np.testing.assert_allclose(MSPD_SCHEDULE.thresholds, np.arange(5, 101, 5))
    np.testing.assert_allclose(RE_SCHEDULE.thresholds, np.arange(2, 21, 2))
    with pytest.raises(ValueError):
        RecallSchedule([2.0, 1.0], "px")
    with pytest.raises(ValueError):
        RecallSchedule([], "px")


# --- symmetry expansion -----------------------------------------------------

def test_expand_without_continuous_is_unchanged():
    s = SymmetrySet("x", np.stack([np.eye(3), RZ(180)]))
    assert expand_symmetries(s) is s


def test_expand_z_axis_four_steps():
    s = expand_symmetries(SymmetrySet("x", np.eye(3)[None], (((0, 0, 1), 4),)))
    assert len(s) == 4 and not s.continuous
    for got, deg in zip(s.transforms, (0, 90, 180, 270)):
        np.testing.assert_allclose(got, RZ(deg), atol=1e-15)


def test_expand_two_axes_compose():
    s = expand_symmetries(SymmetrySet("x", np.eye(3)[None], (((0, 0, 1), 2), ((1, 0, 0), 2))))
    assert len(s) == 4
    assert all(is_rotation(r) for r in s.transforms)
    want = [np.eye(3), axis_angle_matrix([1, 0, 0], np.pi), RZ(180),
            RZ(180) @ axis_angle_matrix([1, 0, 0], np.pi)]
    for w in want:
        assert any(np.allclose(w, r, atol=1e-12) for r in s.transforms)


def test_identity_added_when_absent():
    s = SymmetrySet("x", RZ(180)[None])
    assert len(s) == 2
    assert np.allclose(s.transforms[0], np.eye(3))


# --- mssd -------------------------------------------------------------------

def test_mssd_examples():
    cube = box()
    gt = RigidPose.identity()
    assert mssd(gt, gt, cube) == 0.0
    shifted = RigidPose(np.eye(3), np.array([0.1, 0.0, 0.0]))
    assert mssd(shifted, gt, cube) == pytest.approx(0.1, abs=1e-15)
    four_fold = expand_symmetries(SymmetrySet("cube", np.eye(3)[None], (((0, 0, 1), 4),)))
    turned = RigidPose(RZ(90), np.zeros(3))
    assert mssd(turned, gt, cube, four_fold) == pytest.approx(0.0, abs=1e-15)
    assert mssd(turned, gt, cube) > 0.5


def test_mssd_pure_translation_equals_norm(rng):
    mesh = primitive_catalog()[0]["cylinder"]
    for _ in range(50):
        gt = random_pose(rng)
        delta = rng.normal(0.0, 0.1, 3)
        pred = RigidPose(gt.rotation, gt.translation + delta)
        assert mssd(pred, gt, mesh) == pytest.approx(np.linalg.norm(delta), abs=1e-12)


def test_mssd_empty_mesh():
    with pytest.raises(EmptyMesh):
        mssd(RigidPose.identity(), RigidPose.identity(), np.zeros((0, 3)))


# --- mspd -------------------------------------------------------------------

def test_mspd_examples(K):
    gt = random_pose(np.random.default_rng(0))
    assert mspd(gt, gt, box(0.1, 0.1, 0.1), None, K) == 0.0
    K500 = CameraIntrinsics(500.0, 500.0, 320.0, 240.0)
    single = np.zeros((1, 3))
    got = mspd(RigidPose(np.eye(3), np.array([0.1, 0, 2.0])), RigidPose(np.eye(3), np.array([0, 0, 2.0])),
               single, None, K500)
    assert got == pytest.approx(25.0, abs=1e-12)


def test_mspd_behind_camera(K):
    pose = RigidPose(np.eye(3), np.array([0.0, 0.0, -1.0]))
    with pytest.raises(BehindCamera):
        mspd(pose, pose, box(), None, K)


def test_mspd_matches_enumeration_on_50_vertex_model(rng, K):
    model = rng.uniform(-0.1, 0.1, size=(50, 3))
    syms = expand_symmetries(SymmetrySet("m", np.eye(3)[None], (((0, 0, 1), 6),))).transforms
    for _ in range(100):
        gt, pred = random_pose(rng), random_pose(rng)
        want = oracles.mspd_enumerate(pred.rotation, pred.translation, gt.rotation, gt.translation,
                                      model, syms, _k(K))
        assert mspd(pred, gt, model, syms, K) == pytest.approx(want, abs=1e-9)


# --- rotation error ---------------------------------------------------------

def test_rotation_error_examples(rng):
    R = random_rotation(rng)
    assert rotation_error(R, R) == pytest.approx(0.0, abs=1e-6)
    axis = rng.normal(size=3)
    assert rotation_error(R @ axis_angle_matrix(axis, np.radians(30)), R) == pytest.approx(30.0, abs=1e-9)
    sym = SymmetrySet("x", RZ(180)[None])
    assert rotation_error(R @ RZ(170), R, sym) == pytest.approx(10.0, abs=1e-9)
    want = oracles.rotation_error_enumerate(R @ RZ(170), R, sym.transforms)
    assert rotation_error(R @ RZ(170), R, sym) == pytest.approx(want, abs=1e-9)


def test_rotation_error_range(rng):
    for _ in range(200):
        e = rotation_error(random_rotation(rng), random_rotation(rng))
        assert 0.0 <= e <= 180.0


# --- average recall ---------------------------------------------------------

def test_average_recall_examples():
    assert average_recall([0.0, 0.0], MSPD_SCHEDULE) == 1.0
    assert average_recall([1, 3, 7, 20], [5, 10]) == pytest.approx(0.625, abs=0)
    assert average_recall([200.0, 300.0], MSPD_SCHEDULE) == 0.0
    with pytest.raises(EmptyInput):
        average_recall([], MSPD_SCHEDULE)


def test_average_recall_inclusive_boundary():
    assert average_recall([5.0], [5.0]) == 1.0


def test_average_recall_monotone(rng):
    for _ in range(200):
        errs = rng.uniform(0, 30, size=20)
        th = np.sort(rng.uniform(1, 30, size=5))
        base = average_recall(errs, th)
        lower = errs.copy()
        lower[rng.integers(20)] *= rng.uniform(0, 1)
        assert average_recall(lower, th) >= base
        higher_th = th.copy()
        higher_th[rng.integers(5)] += rng.uniform(0, 5)
        assert average_recall(errs, higher_th) >= base


def test_average_recall_matches_counting_oracle(rng):
    for _ in range(50):
        errs = rng.uniform(0, 25, size=30)
        assert average_recall(errs, RE_SCHEDULE) == pytest.approx(
            oracles.recall_count(errs.tolist(), RE_SCHEDULE.thresholds.tolist()), abs=1e-15)


# --- invariants -------------------------------------------------------------

def test_duplicate_identity_changes_nothing(rng, K):
    mesh = box(0.3, 0.2, 0.1)
    one = SymmetrySet("b", np.eye(3)[None])
    two = SymmetrySet("b", np.stack([np.eye(3), np.eye(3)]))
    for _ in range(20):
        gt, pred = random_pose(rng), random_pose(rng)
        assert mssd(pred, gt, mesh, one) == mssd(pred, gt, mesh, two)
        assert mspd(pred, gt, mesh, one, K) == mspd(pred, gt, mesh, two, K)
        assert rotation_error(pred.rotation, gt.rotation, one) == rotation_error(pred.rotation, gt.rotation, two)


def test_nonnegative(rng, K):
    mesh = box(0.3, 0.2, 0.1)
    for _ in range(50):
        gt, pred = random_pose(rng), random_pose(rng)
        assert mssd(pred, gt, mesh) >= 0 and mspd(pred, gt, mesh, None, K) >= 0


# --- track scoring ----------------------------------------------------------

def _registry():
    meshes, syms = primitive_catalog()
    return Registry.from_meshes(meshes, syms)


def test_perfect_track(rng, K):
    reg = _registry()
    frames = []
    for i, oid in enumerate(["box", "cylinder", "icosphere"] * 3):
        pose = random_pose(rng)
        frames.append(ObjectFrame(f"{i:03d}", oid, pose, pose, K))
    score = score_object_track(frames, reg)
    for key in ("MSSD-AR", "MSPD-AR", "RE-AR", "AR-all"):
        assert score.aggregates[key] == 1.0


def test_three_degree_offsets_give_re_ar_point_nine(rng, K):
    meshes, _ = primitive_catalog()
    reg = Registry.from_meshes(meshes, {k: SymmetrySet.identity_only(k) for k in meshes})
    frames = []
    for i in range(30):
        gt = random_pose(rng)
        pred = RigidPose(gt.rotation @ axis_angle_matrix(rng.normal(size=3), np.radians(3.0)), gt.translation)
        frames.append(ObjectFrame(f"{i:03d}", "box", gt, pred, K))
    score = score_object_track(frames, reg)
    assert score.aggregates["RE-AR"] == 0.9


def test_missing_frames_count_as_failures(rng, K):
    reg = _registry()
    pose = random_pose(rng)
    frames = [ObjectFrame("a", "box", pose, pose, K), ObjectFrame("b", "box", pose, None, K)]
    score = score_object_track(frames, reg)
    assert score.missing == ["b"]
    assert score.aggregates["AR-all"] == 0.5
    assert score.aggregates["MSSD"] == 0.0


def test_median_vs_mean_summary(rng, K):
    reg = _registry()
    frames = []
    for i, dx in enumerate([0.01, 0.02, 0.09]):
        gt = random_pose(rng)
        frames.append(ObjectFrame(str(i), "icosphere", gt, RigidPose(gt.rotation, gt.translation + [dx, 0, 0]), K))
    med = score_object_track(frames, reg).aggregates["MSSD"]
    mean = score_object_track(frames, reg, agg="mean").aggregates["MSSD"]
    assert med == pytest.approx(0.02, abs=1e-12)
    assert mean == pytest.approx(0.04, abs=1e-12)


def test_frame_error_carries_frame_id(K):
    reg = _registry()
    gt = RigidPose(np.eye(3), np.array([0.0, 0.0, 2.0]))
    behind = RigidPose(np.eye(3), np.array([0.0, 0.0, -2.0]))
    with pytest.raises(FrameError) as info:
        score_object_track([ObjectFrame("f7", "box", gt, behind, K)], reg)
    assert info.value.frame_id == "f7"


def test_registry_diameter_cache():
    reg = _registry()
    for oid in reg:
        assert reg[oid].diameter == mesh_diameter(reg[oid].mesh)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoieval import oracles
from hoieval.errors import CountMismatch
from hoieval.geometry import (
    RigidPose,
    SimilarityTransform,
    axis_angle_matrix,
    random_rotation,
    transform_points,
)
from hoieval.human_metrics import (
    HumanFrame,
    auc,
    mpjae,
    mpjae_pa,
    mpjpe,
    mpjpe_pa,
    pck,
    pck_curve,
    score_human_track,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def skeleton(rng, n=24):
    return rng.normal(0.0, 0.3, size=(n, 3)) + [0.0, 0.0, 3.0]


def parts(rng):
    return np.stack([random_rotation(rng) for _ in range(9)])


def offset_along_random_dirs(rng, joints, dist_m):
    d = rng.normal(size=joints.shape)
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return joints + dist_m * d


# --- MPJPE ------------------------------------------------------------------

def test_mpjpe_examples(rng):
    gt = skeleton(rng)
    assert mpjpe(gt, gt) == 0.0
    assert mpjpe(gt + [0.003, 0.004, 0.0], gt) == pytest.approx(5.0, abs=1e-9)
    with pytest.raises(CountMismatch):
        mpjpe(gt[:5], gt)


def test_mpjpe_matches_direct_summation(rng):
    for _ in range(100):
        gt, pred = skeleton(rng), skeleton(rng)
        assert mpjpe(pred, gt) == pytest.approx(oracles.mpjpe_direct(pred, gt), abs=1e-9)


# --- MPJPE-PA ---------------------------------------------------------------

def test_mpjpe_pa_removes_similarity(rng):
    for _ in range(50):
        gt = skeleton(rng)
        Q = SimilarityTransform(1.3, random_rotation(rng), rng.normal(size=3))
        err, _ = mpjpe_pa(transform_points(Q, gt), gt)
        assert err < 1e-7


def test_mpjpe_pa_identity(rng):
    gt = skeleton(rng)
    err, align = mpjpe_pa(gt, gt)
    assert err == 0.0
    np.testing.assert_array_equal(align.rotation, np.eye(3))
    assert align.scale == 1.0


def _rms_mm(pred, gt):
    return 1000.0 * np.sqrt(((np.asarray(pred) - gt) ** 2).sum(axis=1).mean())


def test_mpjpe_pa_anisotropic_stretch(rng):
    for _ in range(1000):
        gt = skeleton(rng)
        pred = gt * rng.uniform(0.7, 1.3, size=3)
        pa, align = mpjpe_pa(pred, gt)
        assert pa > 0
        # The alignment minimises squared error, so RMS error can never grow.
        assert _rms_mm(transform_points(align, pred), gt) <= _rms_mm(pred, gt) + 1e-9


def test_mpjpe_pa_can_exceed_mpjpe():
    """Least-squares alignment does not minimise the mean of unsquared distances.

    A frame whose errors are concentrated on few joints can get a slightly
    higher mean distance after alignment (the squared error still drops).
    """
    rng = np.random.default_rng(0)
    found = None
    for _ in range(5000):
        gt = skeleton(rng)
        pred = gt + rng.normal(0.0, 0.03, size=gt.shape)
        pa, align = mpjpe_pa(pred, gt)
        if pa > mpjpe(pred, gt) + 1e-9:
            found = (pred, gt, align)
            break
    assert found is not None
    pred, gt, align = found
    assert _rms_mm(transform_points(align, pred), gt) <= _rms_mm(pred, gt)


def test_mpjpe_pa_matches_horn(rng):
    for _ in range(100):
        gt, pred = skeleton(rng), skeleton(rng)
        want, R = oracles.mpjpe_pa_horn(pred, gt)
        got, align = mpjpe_pa(pred, gt)
        assert got == pytest.approx(want, abs=1e-9)
        np.testing.assert_allclose(align.rotation, R, atol=1e-9)


@given(seeds)
@settings(max_examples=50, deadline=None)
def test_position_errors_rigid_invariant(seed):
    rng = np.random.default_rng(seed)
    gt, pred = skeleton(rng), skeleton(rng)
    T = RigidPose(random_rotation(rng), rng.normal(size=3))
    a, b = transform_points(T, pred), transform_points(T, gt)
    assert mpjpe(a, b) == pytest.approx(mpjpe(pred, gt), abs=1e-9)
    assert mpjpe_pa(a, b)[0] == pytest.approx(mpjpe_pa(pred, gt)[0], abs=1e-9)
    err = np.linalg.norm(pred - gt, axis=1) * 1000
    if np.all(np.abs(err - 50.0) > 1e-6):  # no joint sits on the boundary
        assert pck(a, b) == pck(pred, gt)
    assert 0.0 <= auc(pred, gt) <= 1.0


# --- PCK / AUC --------------------------------------------------------------

def test_pck_examples(rng):
    gt = skeleton(rng, 2)
    assert pck(gt, gt) == 100.0
    pred = gt.copy()
    pred[0, 0] += 0.049
    pred[1, 0] += 0.051
    assert pck(pred, gt) == 50.0


def test_pck_boundary_is_strict():
    gt = np.zeros((4, 3))
    pred = np.zeros((4, 3))
    pred[:, 0] = 0.05
    assert np.linalg.norm(pred[0]) * 1000.0 == 50.0
    assert pck(pred, gt) == 0.0
    assert pck(pred, gt, threshold=50.000001) == 100.0


def test_auc_examples(rng):
    gt = skeleton(rng)
    assert auc(gt, gt) == pytest.approx(200 / 201, abs=1e-15)
    # Exactly representable offsets on a zero skeleton keep the errors exact.
    zero = np.zeros((24, 3))
    off = zero.copy()
    off[:, 1] = 0.1
    assert auc(off, zero) == pytest.approx(100 / 201, abs=1e-15)
    off[:, 1] = 0.125
    assert auc(off, zero) == pytest.approx(75 / 201, abs=1e-15)
    assert auc(gt + 0.3, gt) == 0.0


def test_auc_matches_counting_oracle(rng):
    gt = skeleton(rng)
    pred = offset_along_random_dirs(rng, gt, 0.1)
    assert auc(pred, gt) == pytest.approx(oracles.auc_count(pred, gt), abs=1e-15)


def test_pck_curve_monotone_and_oracle(rng):
    for _ in range(50):
        gt, pred = skeleton(rng), skeleton(rng)
        curve = pck_curve(pred, gt)
        assert np.all(np.diff(curve) >= 0)
        assert pck(pred, gt) == pytest.approx(oracles.pck_count(pred, gt, 50.0), abs=1e-12)
        assert auc(pred, gt) == pytest.approx(oracles.auc_count(pred, gt), abs=1e-12)


# --- MPJAE ------------------------------------------------------------------

def test_mpjae_examples(rng):
    gt = parts(rng)
    assert mpjae(gt, gt) == pytest.approx(0.0, abs=1e-6)
    Rx20 = axis_angle_matrix([1, 0, 0], np.radians(20))
    assert mpjae(gt @ Rx20, gt) == pytest.approx(20.0, abs=1e-9)
    pred = gt.copy()
    pred[0] = gt[0] @ axis_angle_matrix([0, 1, 0], np.radians(10))
    assert mpjae(pred, gt) == pytest.approx(10 / 9, abs=1e-9)
    with pytest.raises(CountMismatch):
        mpjae(gt[:8], gt)


def test_mpjae_matches_quaternion_oracle(rng):
    for _ in range(50):
        gt, pred = parts(rng), parts(rng)
        assert mpjae(pred, gt) == pytest.approx(oracles.mpjae_quat(pred, gt), abs=1e-9)


def test_mpjae_right_composition_invariant(rng):
    for _ in range(50):
        gt, pred, Q = parts(rng), parts(rng), random_rotation(rng)
        assert mpjae(pred @ Q, gt @ Q) == pytest.approx(mpjae(pred, gt), abs=1e-9)


def test_mpjae_pa_examples(rng):
    gt = parts(rng)
    assert mpjae_pa(gt, gt, np.eye(3)) == pytest.approx(0.0, abs=1e-6)
    Q = random_rotation(rng)
    assert mpjae_pa(Q[None] @ gt, gt, Q.T) == pytest.approx(0.0, abs=1e-6)
    for _ in range(50):
        pred, G = parts(rng), random_rotation(rng)
        want = oracles.mpjae_quat(pred, gt, global_R=G)
        assert mpjae_pa(pred, gt, G) == pytest.approx(want, abs=1e-9)


# --- track ------------------------------------------------------------------

def test_perfect_track(rng):
    frames = []
    for i in range(5):
        j, p = skeleton(rng), parts(rng)
        frames.append(HumanFrame(str(i), j, j.copy(), p, p.copy()))
    agg = score_human_track(frames).aggregates
    assert agg["MPJPE"] == 0 and agg["MPJPE-PA"] == 0 and agg["PCK"] == 100.0
    assert agg["MPJAE"] == pytest.approx(0.0, abs=1e-6)
    assert agg["MPJAE-PA"] == pytest.approx(0.0, abs=1e-6)


def test_uniform_offsets_49_and_51(rng):
    for dist, want_pck in ((0.049, 100.0), (0.051, 0.0)):
        frames = []
        for i in range(10):
            gt = skeleton(rng)
            frames.append(HumanFrame(str(i), gt, offset_along_random_dirs(rng, gt, dist)))
        agg = score_human_track(frames).aggregates
        assert agg["PCK"] == want_pck
        assert agg["MPJPE"] == pytest.approx(dist * 1000, abs=1e-9)
        assert agg["MPJAE"] is None


def test_missing_frames(rng):
    gt = skeleton(rng)
    frames = [HumanFrame("a", gt, gt.copy()), HumanFrame("b", gt, None)]
    score = score_human_track(frames)
    assert score.missing == ["b"]
    assert score.aggregates["PCK"] == 50.0
    assert score.aggregates["MPJPE"] == 0.0
    assert len(score.curves["PCK"]["values"]) == 201

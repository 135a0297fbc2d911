"""Slow reference implementations that share no code with the metric modules.

They back the synthetic answer sheets and the test-suite: exhaustive
symmetry x vertex enumeration, quaternion rotation distances, Horn's
quaternion alignment and O(N*M) nearest-neighbour search.
"""
from __future__ import annotations

import math

import numpy as np


def quat_from_matrix(R):
    """Unit quaternion (w, x, y, z) of a rotation matrix (Shepperd's method)."""
    R = np.asarray(R, dtype=np.float64)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    cands = [tr, R[0, 0], R[1, 1], R[2, 2]]
    k = int(np.argmax(cands))
    if k == 0:
        s = 2.0 * math.sqrt(1.0 + tr)
        q = [0.25 * s, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif k == 1:
        s = 2.0 * math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2])
        q = [(R[2, 1] - R[1, 2]) / s, 0.25 * s, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif k == 2:
        s = 2.0 * math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, 0.25 * s, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    return q / np.linalg.norm(q)


def quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_angle(Ra, Rb):
    """Angle (radians) of the relative rotation between two matrices, via quaternions."""
    qa = quat_from_matrix(Ra)
    qb = quat_from_matrix(Rb)
    rel = quat_mul(qa * np.array([1, -1, -1, -1]), qb)
    return 2.0 * math.atan2(float(np.linalg.norm(rel[1:])), abs(float(rel[0])))


def quat_to_matrix(q):
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [w * w + x * x - y * y - z * z, 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), w * w - x * x + y * y - z * z, 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), w * w - x * x - y * y + z * z],
    ])


def horn_similarity(src, dst):
    """Least-squares similarity via Horn's quaternion eigenproblem.

    Returns:
        (scale, R [3, 3], t [3]) minimising sum |s R src_i + t - dst_i|^2.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    ms, md = src.mean(axis=0), dst.mean(axis=0)
    a, b = src - ms, dst - md
    S = a.T @ b
    Sxx, Sxy, Sxz = S[0]
    Syx, Syy, Syz = S[1]
    Szx, Szy, Szz = S[2]
    N = np.array([
        [Sxx + Syy + Szz, Syz - Szy, Szx - Sxz, Sxy - Syx],
        [Syz - Szy, Sxx - Syy - Szz, Sxy + Syx, Szx + Sxz],
        [Szx - Sxz, Sxy + Syx, -Sxx + Syy - Szz, Syz + Szy],
        [Sxy - Syx, Szx + Sxz, Syz + Szy, -Sxx - Syy + Szz],
    ])
    vals, vecs = np.linalg.eigh(N)
    R = quat_to_matrix(vecs[:, np.argmax(vals)])
    s = float(np.sum(b * (a @ R.T)) / np.sum(a * a))
    return s, R, md - s * (R @ ms)


def mssd_enumerate(pred_R, pred_t, gt_R, gt_t, vertices, symmetries):
    """Loop over symmetries; every vertex distance is evaluated for each one."""
    x = np.asarray(vertices, dtype=np.float64)
    est = x @ np.asarray(pred_R).T + pred_t
    best = math.inf
    for S in symmetries:
        ref = x @ (gt_R @ S).T + gt_t
        d = est - ref
        best = min(best, float(np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2).max()))
    return best


def _pix(K, p):
    fx, fy, cx, cy = K
    return fx * p[:, 0] / p[:, 2] + cx, fy * p[:, 1] / p[:, 2] + cy


def mspd_enumerate(pred_R, pred_t, gt_R, gt_t, vertices, symmetries, K):
    """``K`` is (fx, fy, cx, cy)."""
    x = np.asarray(vertices, dtype=np.float64)
    eu, ev = _pix(K, x @ np.asarray(pred_R).T + pred_t)
    best = math.inf
    for S in symmetries:
        ru, rv = _pix(K, x @ (gt_R @ S).T + gt_t)
        best = min(best, float(np.sqrt((eu - ru) ** 2 + (ev - rv) ** 2).max()))
    return best


def rotation_error_enumerate(pred_R, gt_R, symmetries):
    return math.degrees(min(quat_angle(pred_R, gt_R @ S) for S in symmetries))


def recall_count(errors, thresholds):
    """Average over thresholds of the share of errors <= threshold, counted in a loop.

    ``thresholds`` may be a list of per-error threshold lists.
    """
    hits = 0
    per_error = len(thresholds) == len(errors) and hasattr(thresholds[0], "__len__")
    n_th = len(thresholds[0]) if per_error else len(thresholds)
    for j in range(n_th):
        for i, e in enumerate(errors):
            th = thresholds[i][j] if per_error else thresholds[j]
            if e <= th:
                hits += 1
    return hits / (len(errors) * n_th)


def _joint_dists_mm(pred, gt):
    return [1000.0 * math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(p, g)))
            for p, g in zip(pred, gt)]


def mpjpe_direct(pred, gt):
    d = _joint_dists_mm(pred, gt)
    return sum(d) / len(d)


def _pck_from_dists(d, threshold_mm):
    return 100.0 * sum(1 for e in d if e < threshold_mm) / len(d)


def pck_count(pred, gt, threshold_mm):
    return _pck_from_dists(_joint_dists_mm(pred, gt), threshold_mm)


def auc_count(pred, gt):
    d = _joint_dists_mm(pred, gt)
    passed = sum(1 for t in range(201) for e in d if e < t)
    return passed / (201 * len(d))


def mpjpe_pa_horn(pred, gt):
    s, R, t = horn_similarity(pred, gt)
    aligned = s * (np.asarray(pred) @ R.T) + t
    return mpjpe_direct(aligned, gt), R


def mpjae_quat(pred_parts, gt_parts, global_R=None):
    total = 0.0
    for P, G in zip(pred_parts, gt_parts):
        if global_R is not None:
            P = global_R @ P
        total += quat_angle(G, P)
    return math.degrees(total / len(gt_parts))


def nearest_bruteforce(src, dst, chunk=256):
    """Distance from every src point to its nearest dst point, all pairs tested."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    dx, dy, dz = dst[:, 0], dst[:, 1], dst[:, 2]
    out = np.empty(len(src))
    for i in range(0, len(src), chunk):
        s = src[i:i + chunk]
        d2 = (s[:, 0:1] - dx) ** 2
        d2 += (s[:, 1:2] - dy) ** 2
        d2 += (s[:, 2:3] - dz) ** 2
        out[i:i + chunk] = np.sqrt(d2.min(axis=1))
    return out


def chamfer_bruteforce(a, b):
    """Unsquared symmetric Chamfer distance by exhaustive search."""
    return 0.5 * (float(nearest_bruteforce(a, b).mean()) + float(nearest_bruteforce(b, a).mean()))


def diameter_bruteforce(vertices):
    v = np.asarray(vertices, dtype=np.float64)
    best = 0.0
    for i in range(len(v)):
        d = np.sqrt(((v - v[i]) ** 2).sum(axis=1)).max()
        best = max(best, float(d))
    return best


def ray_cast_mask(vertices_cam, faces, K, size):
    """Per-pixel ray/triangle intersection (Moller-Trumbore) through pixel centers.

    Returns a boolean [H, W] hit mask.
    """
    W, H = size
    fx, fy, cx, cy = K
    cols, rows = np.meshgrid(np.arange(W, dtype=np.float64), np.arange(H, dtype=np.float64))
    d = np.stack([(cols - cx) / fx, (rows - cy) / fy, np.ones_like(cols)], axis=-1).reshape(-1, 3)
    hit = np.zeros(len(d), dtype=bool)
    for f in faces:
        v0, v1, v2 = vertices_cam[f]
        e1, e2 = v1 - v0, v2 - v0
        pvec = np.cross(d, e2)
        det = pvec @ e1
        ok = np.abs(det) > 1e-15
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        tvec = -v0  # ray origin is the camera center
        u = (pvec @ tvec) * inv
        qvec = np.cross(tvec, e1)
        v = (d * qvec).sum(axis=1) * inv
        t = (qvec @ e2) * inv
        hit |= ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 0)
    return hit.reshape(H, W)

"""Shared 3D math: poses, alignment, rotation distance, projection, surface
sampling and nearest-neighbour distances.

Point sets are ``(N, 3)`` float64 arrays in meters. Rotations are ``(3, 3)``
arrays acting on column vectors, so a point ``p`` maps to ``R @ p + t``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .errors import (
    BehindCamera,
    DegenerateConfiguration,
    EmptyCloud,
    EmptyMesh,
    ZeroVariance,
)

ROTATION_TOL = 1e-6


@dataclass(frozen=True)
class RigidPose:
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    def inverse(self):
        r_inv = self.rotation.T
        return RigidPose(r_inv, -r_inv @ self.translation)

    def compose(self, other):
        """Pose equivalent to applying ``other`` first, then ``self``."""
        return RigidPose(self.rotation @ other.rotation,
                         self.rotation @ other.translation + self.translation)

    @property
    def scale(self):
        return 1.0


@dataclass(frozen=True)
class SimilarityTransform:
    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    @classmethod
    def identity(cls):
        return cls(1.0, np.eye(3), np.zeros(3))

    def inverse(self):
        r_inv = self.rotation.T
        return SimilarityTransform(1.0 / self.scale, r_inv,
                                   -(r_inv @ self.translation) / self.scale)

    def compose(self, other):
        """Transform equivalent to applying ``other`` first, then ``self``."""
        return SimilarityTransform(
            self.scale * other.scale,
            self.rotation @ other.rotation,
            self.scale * (self.rotation @ other.translation) + self.translation,
        )


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray  # (V, 3) float64
    faces: np.ndarray  # (F, 3) int64

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "faces", np.asarray(self.faces, dtype=np.int64).reshape(-1, 3))

    def validate(self):
        """Raise ValueError if a face index is out of range or repeats a vertex."""
        f = self.faces
        if f.size and (f.min() < 0 or f.max() >= len(self.vertices)):
            raise ValueError("face index out of range")
        if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
            raise ValueError("degenerate face with repeated vertex index")
        if not np.all(np.isfinite(self.vertices)):
            raise ValueError("non-finite vertex coordinate")
        return self

    def transformed(self, pose):
        return TriMesh(transform_points(pose, self.vertices), self.faces)

    def face_areas(self):
        tri = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def matrix(self):
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


def is_rotation(R, tol=ROTATION_TOL):
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return bool(np.abs(R.T @ R - np.eye(3)).max() <= tol and abs(np.linalg.det(R) - 1.0) <= tol)


def axis_angle_matrix(axis, angle):
    """Rotation of ``angle`` radians about ``axis`` (Rodrigues)."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    x, y, z = axis
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def random_rotation(rng):
    """Uniformly distributed rotation drawn from ``rng`` (a numpy Generator)."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def transform_points(pose, pts):
    """Apply ``s * R @ p + t`` to every row of ``pts``.

    Args:
        pose: RigidPose or SimilarityTransform.
        pts: points [N, 3].

    Returns:
        transformed points [N, 3]
    """
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    return pose.scale * (pts @ pose.rotation.T) + pose.translation


def _centered_rank_check(src, zero_exc):
    if len(src) < 3:
        raise DegenerateConfiguration(f"need at least 3 correspondences, got {len(src)}")
    centered = src - src.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    scale = max(np.abs(src).max(), 1.0)
    if sv[0] <= 1e-12 * scale:
        raise zero_exc("all source points coincide")
    if sv[1] <= 1e-10 * sv[0]:
        raise DegenerateConfiguration("source points are collinear")
    return centered


def _check_pair(src, dst):
    src = np.asarray(src, dtype=np.float64).reshape(-1, 3)
    dst = np.asarray(dst, dtype=np.float64).reshape(-1, 3)
    if src.shape != dst.shape:
        raise DegenerateConfiguration(f"correspondence sizes differ: {len(src)} vs {len(dst)}")
    return src, dst


def kabsch_rigid(src, dst):
    """Least-squares rigid pose mapping ``src`` onto ``dst`` (no scale).

    Raises:
        DegenerateConfiguration: fewer than 3 points, or collinear/coincident src.
    """
    src, dst = _check_pair(src, dst)
    src_c = _centered_rank_check(src, DegenerateConfiguration)
    if np.array_equal(src, dst):
        return RigidPose.identity()
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    H = src_c.T @ (dst - mu_d)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    D = np.diag([1.0, 1.0, d if d != 0 else 1.0])
    R = Vt.T @ D @ U.T
    return RigidPose(R, mu_d - R @ mu_s)


def procrustes_similarity(src, dst):
    """Least-squares similarity (scale, rotation, translation) mapping src onto dst.

    Umeyama's closed form with the reflection fixed on the weakest singular axis.

    Raises:
        ZeroVariance: all src points coincide.
        DegenerateConfiguration: fewer than 3 points or collinear src.
    """
    src, dst = _check_pair(src, dst)
    src_c = _centered_rank_check(src, ZeroVariance)
    if np.array_equal(src, dst):
        return SimilarityTransform.identity()
    n = len(src)
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    dst_c = dst - mu_d
    var_s = (src_c ** 2).sum() / n
    cov = dst_c.T @ src_c / n
    U, D, Vt = np.linalg.svd(cov)
    S = np.ones(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2] = -1.0
    R = U @ np.diag(S) @ Vt
    s = float((D * S).sum() / var_s)
    return SimilarityTransform(s, R, mu_d - s * (R @ mu_s))


def geodesic_so3(a, b):
    """Angle in radians of the relative rotation ``a.T @ b``, in [0, pi].

    Evaluated with atan2 of the sine and cosine parts, which equals
    arccos((trace - 1) / 2) but keeps full precision near 0 and pi.
    """
    rel = np.asarray(a).T @ np.asarray(b)
    cos = (np.trace(rel) - 1.0) / 2.0
    skew = np.array([rel[2, 1] - rel[1, 2], rel[0, 2] - rel[2, 0], rel[1, 0] - rel[0, 1]])
    sin = np.linalg.norm(skew) / 2.0
    return float(np.arctan2(sin, cos))


def geodesic_so3_batch(a, b):
    """Vectorised geodesic_so3 over stacks ``a`` [..., 3, 3] and ``b`` [..., 3, 3]."""
    rel = np.swapaxes(np.asarray(a), -1, -2) @ np.asarray(b)
    cos = (np.trace(rel, axis1=-2, axis2=-1) - 1.0) / 2.0
    skew = np.stack([rel[..., 2, 1] - rel[..., 1, 2],
                     rel[..., 0, 2] - rel[..., 2, 0],
                     rel[..., 1, 0] - rel[..., 0, 1]], axis=-1)
    sin = np.linalg.norm(skew, axis=-1) / 2.0
    return np.arctan2(sin, cos)


def project(K, p):
    """Pinhole projection of one point [3] or many [N, 3] to pixels.

    Raises:
        BehindCamera: any point has z <= 0.
    """
    p = np.asarray(p, dtype=np.float64)
    z = p[..., 2]
    if np.any(z <= 0):
        raise BehindCamera("point at or behind the camera plane")
    u = K.fx * p[..., 0] / z + K.cx
    v = K.fy * p[..., 1] / z + K.cy
    return np.stack([u, v], axis=-1)


def sample_surface(mesh, n, seed):
    """Draw ``n`` points uniformly over the mesh surface.

    Faces are chosen with probability proportional to their area and points
    inside a face come from the square-root barycentric map, so the density is
    uniform per unit area.

    Args:
        mesh: TriMesh with at least one face of non-zero area.
        n: number of points.
        seed: int seed or a numpy Generator.

    Returns:
        points [n, 3]
    """
    if len(mesh.faces) == 0:
        raise EmptyMesh("mesh has no faces")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    areas = mesh.face_areas()
    cum = np.cumsum(areas)
    total = cum[-1]
    if not total > 0:
        raise EmptyMesh("mesh surface area is zero")
    face_idx = np.searchsorted(cum, rng.random(n) * total, side="right")
    np.minimum(face_idx, len(cum) - 1, out=face_idx)
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    tri = mesh.vertices[mesh.faces[face_idx]]
    w0 = 1.0 - r1
    w1 = r1 * (1.0 - r2)
    w2 = r1 * r2
    return w0[:, None] * tri[:, 0] + w1[:, None] * tri[:, 1] + w2[:, None] * tri[:, 2]


def _as_cloud(pts):
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        raise EmptyCloud("point cloud is empty")
    return pts


def chamfer(a, b):
    """Symmetric, unsquared Chamfer distance using KD-trees.

    Returns ``0.5 * (mean_a min_b |a-b| + mean_b min_a |a-b|)`` in the input unit.
    """
    a = _as_cloud(a)
    b = _as_cloud(b)
    d_ab, _ = cKDTree(b).query(a, k=1)
    d_ba, _ = cKDTree(a).query(b, k=1)
    return 0.5 * (float(d_ab.mean()) + float(d_ba.mean()))


def mesh_diameter(mesh_or_vertices):
    """Largest distance between any two vertices.

    Candidate pairs are restricted to convex-hull vertices when a hull exists,
    which leaves the maximum unchanged.
    """
    v = getattr(mesh_or_vertices, "vertices", mesh_or_vertices)
    v = np.asarray(v, dtype=np.float64).reshape(-1, 3)
    if len(v) < 2:
        raise EmptyMesh("diameter needs at least two vertices")
    if len(v) > 64:
        try:
            v = v[ConvexHull(v).vertices]
        except (QhullError, ValueError):
            pass
    best = 0.0
    for i in range(len(v) - 1):
        d = np.sqrt(((v[i + 1:] - v[i]) ** 2).sum(axis=1)).max()
        best = max(best, float(d))
    return best

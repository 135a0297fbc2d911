"""NOCS canonicalisation and rendering, mask RoIs, heatmap decoding and
template fitting.

Image convention: pixel ``(row, col)`` has its center at continuous
coordinates ``(u, v) = (col, row)``, the same frame `geometry.project` maps to.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AllZero, EmptyMask, ZeroExtent
from .geometry import RigidPose, TriMesh, kabsch_rigid, transform_points

NEAR_PLANE = 1e-6


def normalize_to_nocs(mesh: TriMesh):
    """Center the mesh's bounding box at the origin and scale its longest side to [-1, 1].

    Returns:
        (canonical mesh, bbox center [3], half of the longest bbox extent)
    """
    v = mesh.vertices
    if len(v) == 0:
        raise ZeroExtent("mesh has no vertices")
    lo, hi = v.min(axis=0), v.max(axis=0)
    center = (lo + hi) / 2.0
    half = float((hi - lo).max() / 2.0)
    if not half > 0:
        raise ZeroExtent("all vertices coincide")
    return TriMesh((v - center) / half, mesh.faces), center, half


def nocs_to_color(coords):
    """Quantise canonical coordinates in [-1, 1] to 8-bit colors."""
    c = np.rint((np.asarray(coords, dtype=np.float64) + 1.0) / 2.0 * 255.0)
    return np.clip(c, 0, 255).astype(np.uint8)


def color_to_nocs(colors):
    return np.asarray(colors, dtype=np.float64) / 255.0 * 2.0 - 1.0


def render_nocs(canonical: TriMesh, pose: RigidPose, K, size):
    """Z-buffered rasterisation of canonical coordinates as colors.

    Sampling happens at pixel centers; attributes use perspective-correct
    barycentric interpolation. Triangles with any vertex at or behind the near
    plane are skipped, so a mesh fully behind the camera yields empty images.

    Args:
        canonical: mesh with coordinates in [-1, 1].
        pose: canonical -> camera transform.
        K: CameraIntrinsics.
        size: (width, height) in pixels.

    Returns:
        (nocs image [H, W, 3] uint8, mask [H, W] uint8 with 255 on foreground)
    """
    W, H = int(size[0]), int(size[1])
    cam = transform_points(pose, canonical.vertices)
    depth = np.full((H, W), np.inf)
    coords = np.zeros((H, W, 3))
    z = cam[:, 2]
    safe_z = np.where(z > NEAR_PLANE, z, 1.0)
    uv = np.stack([K.fx * cam[:, 0] / safe_z + K.cx, K.fy * cam[:, 1] / safe_z + K.cy], axis=1)

    for f in canonical.faces:
        if np.any(z[f] <= NEAR_PLANE):
            continue
        p = uv[f]
        area = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1])
        if area == 0:
            continue
        c0 = max(int(np.ceil(p[:, 0].min())), 0)
        c1 = min(int(np.floor(p[:, 0].max())), W - 1)
        r0 = max(int(np.ceil(p[:, 1].min())), 0)
        r1 = min(int(np.floor(p[:, 1].max())), H - 1)
        if c0 > c1 or r0 > r1:
            continue
        cols, rows = np.meshgrid(np.arange(c0, c1 + 1, dtype=np.float64),
                                 np.arange(r0, r1 + 1, dtype=np.float64))
        # Edge functions normalised by the signed area give screen barycentrics.
        b0 = ((p[1, 0] - cols) * (p[2, 1] - rows) - (p[2, 0] - cols) * (p[1, 1] - rows)) / area
        b1 = ((p[2, 0] - cols) * (p[0, 1] - rows) - (p[0, 0] - cols) * (p[2, 1] - rows)) / area
        b2 = 1.0 - b0 - b1
        inside = (b0 >= 0) & (b1 >= 0) & (b2 >= 0)
        if not inside.any():
            continue
        inv_z = z[f]
        w0, w1, w2 = b0[inside] / inv_z[0], b1[inside] / inv_z[1], b2[inside] / inv_z[2]
        norm = w0 + w1 + w2
        zi = 1.0 / norm
        rr = rows[inside].astype(np.int64)
        cc = cols[inside].astype(np.int64)
        closer = zi < depth[rr, cc]
        if not closer.any():
            continue
        rr, cc, zi = rr[closer], cc[closer], zi[closer]
        w = np.stack([w0[closer], w1[closer], w2[closer]], axis=1) / norm[closer, None]
        depth[rr, cc] = zi
        coords[rr, cc] = w @ canonical.vertices[f]

    fg = np.isfinite(depth)
    nocs = np.zeros((H, W, 3), dtype=np.uint8)
    nocs[fg] = nocs_to_color(coords[fg])
    mask = np.where(fg, 255, 0).astype(np.uint8)
    return nocs, mask


@dataclass(frozen=True)
class BoundingBox:
    cu: float  # center column
    cv: float  # center row
    width: float
    height: float


def mask_to_roi(mask, scale=1.5, center_noise_sigma=0.0, seed=None) -> BoundingBox:
    """Enlarged, center-jittered box around the mask foreground.

    The tight box spans whole pixels, so a single pixel has size 1x1 before
    scaling. The result is not clipped to the image.
    """
    rows, cols = np.nonzero(np.asarray(mask))
    if len(rows) == 0:
        raise EmptyMask("mask has no foreground pixels")
    cu = (cols.min() + cols.max()) / 2.0
    cv = (rows.min() + rows.max()) / 2.0
    w = float(cols.max() - cols.min() + 1)
    h = float(rows.max() - rows.min() + 1)
    if center_noise_sigma > 0:
        du, dv = np.random.default_rng(seed).normal(0.0, center_noise_sigma, size=2)
        cu, cv = cu + du, cv + dv
    return BoundingBox(float(cu), float(cv), w * scale, h * scale)


@dataclass(frozen=True)
class Heatmap3D:
    """Non-negative volume indexed [depth, height, width] = [z, y, x].

    ``bounds`` gives (min, max) grid coordinates of the first and last voxel
    center along x, y and z.
    """
    values: np.ndarray
    bounds: tuple = None

    def axes(self):
        D, H, W = self.values.shape
        bounds = self.bounds or ((0.0, W - 1.0), (0.0, H - 1.0), (0.0, D - 1.0))
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, (W, H, D))]


def soft_argmax_3d(heatmap, beta=1.0):
    """Expected grid coordinate (x, y, z) under softmax(beta * values).

    ``beta`` is the inverse temperature; large values approach a hard argmax.

    Raises:
        AllZero: no voxel is strictly positive.
    """
    if not isinstance(heatmap, Heatmap3D):
        heatmap = Heatmap3D(np.asarray(heatmap, dtype=np.float64))
    h = np.asarray(heatmap.values, dtype=np.float64)
    if not np.any(h > 0):
        raise AllZero("heatmap has no positive value")
    logits = beta * h
    p = np.exp(logits - logits.max())
    p /= p.sum()
    xs, ys, zs = heatmap.axes()
    pz, py, px = p.sum(axis=(1, 2)), p.sum(axis=(0, 2)), p.sum(axis=(0, 1))
    return np.array([px @ xs, py @ ys, pz @ zs])


def bbox_corner_keypoints(mesh_or_points):
    """The 8 corners of the axis-aligned bounding box, usable as template keypoints."""
    v = np.asarray(getattr(mesh_or_points, "vertices", mesh_or_points), dtype=np.float64)
    lo, hi = v.min(axis=0), v.max(axis=0)
    return np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])


def fit_template_keypoints(template_kps, predicted_kps) -> RigidPose:
    """Rigid pose placing the template keypoints onto predicted keypoints."""
    return kabsch_rigid(template_kps, predicted_kps)


def euler_pose_grid(per_axis=20, seq="xyz"):
    """Rotations on a regular Euler-angle grid, ``per_axis**3`` in total, all distinct.

    The first and last angles take ``per_axis`` evenly spaced values in
    [-pi, pi). The middle angle only needs half a turn to cover every
    rotation once; it takes the cell centers of (-pi/2, pi/2), which keeps it
    away from the gimbal-lock poles.
    """
    from scipy.spatial.transform import Rotation

    outer = -np.pi + 2.0 * np.pi * np.arange(per_axis) / per_axis
    middle = -np.pi / 2 + np.pi * (np.arange(per_axis) + 0.5) / per_axis
    grid = np.stack(np.meshgrid(outer, middle, outer, indexing="ij"), axis=-1).reshape(-1, 3)
    return Rotation.from_euler(seq, grid).as_matrix()


def write_png(path, image):
    from PIL import Image

    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(Path(path))


def read_png(path):
    from PIL import Image

    with Image.open(Path(path)) as im:
        arr = np.asarray(im)
    if arr.ndim == 3 and arr.shape[2] == 4:
        arr = arr[..., :3]
    return arr.astype(np.uint8)

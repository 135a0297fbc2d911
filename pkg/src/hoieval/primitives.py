"""Primitive meshes with their declared symmetry sets."""
from __future__ import annotations

import numpy as np

from .geometry import TriMesh, axis_angle_matrix
from .object_metrics import SymmetrySet


def box(ex=1.0, ey=1.0, ez=1.0):
    """Axis-aligned box centered at the origin with edge lengths ex, ey, ez."""
    h = np.array([ex, ey, ez]) / 2.0
    v = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64) * h
    # Vertex index = 4*ix + 2*iy + iz; faces wound outward.
    faces = [
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ]
    return TriMesh(v, np.array(faces))


def icosphere(radius=1.0, subdivisions=1):
    t = (1.0 + 5 ** 0.5) / 2.0
    v = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    f = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    verts = [np.array(p, dtype=np.float64) / np.linalg.norm(p) for p in v]
    faces = f
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    return TriMesh(np.array(verts) * radius, np.array(faces))


def cylinder(radius=0.5, height=1.0, segments=32):
    """Closed cylinder along z, centered at the origin."""
    ang = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    bottom = np.column_stack([ring, np.full(segments, -height / 2)])
    top = np.column_stack([ring, np.full(segments, height / 2)])
    v = np.vstack([bottom, top, [[0, 0, -height / 2], [0, 0, height / 2]]])
    cb, ct = 2 * segments, 2 * segments + 1
    faces = []
    for i in range(segments):
        j = (i + 1) % segments
        faces += [[i, j, segments + j], [i, segments + j, segments + i]]
        faces += [[cb, j, i], [ct, segments + i, segments + j]]
    return TriMesh(v, np.array(faces))


def ellipsoid(radii=(0.25, 0.85, 0.15), subdivisions=2):
    """Body proxy: a scaled icosphere."""
    s = icosphere(1.0, subdivisions)
    return TriMesh(s.vertices * np.asarray(radii, dtype=np.float64), s.faces)


def half_turns(object_id, axes=("x", "y", "z")):
    """Identity plus 180-degree turns about the named coordinate axes."""
    unit = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}
    mats = [np.eye(3)] + [np.rint(axis_angle_matrix(unit[a], np.pi)) for a in axes]
    return SymmetrySet(object_id, np.stack(mats))


def primitive_catalog(symmetric=True):
    """Meshes and symmetry sets used by the synthetic benchmarks.

    Returns:
        (dict id -> TriMesh, dict id -> SymmetrySet)
    """
    meshes = {
        "box": box(0.30, 0.20, 0.12),
        "cylinder": cylinder(0.06, 0.22, segments=32),
        "icosphere": icosphere(0.10, subdivisions=1),
    }
    if not symmetric:
        return meshes, {k: SymmetrySet.identity_only(k) for k in meshes}
    syms = {
        "box": half_turns("box"),
        "cylinder": SymmetrySet("cylinder", half_turns("cylinder", ("x",)).transforms,
                                (((0.0, 0.0, 1.0), 32),)),
        "icosphere": half_turns("icosphere"),
    }
    return meshes, syms

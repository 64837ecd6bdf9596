"""Analytic test shapes: icospheres, flat tori, a torus of revolution, and
small combinatorial surfaces of genus 1 and 2.  Used by the test suite and
for desk experiments; not a general mesh generator."""
from __future__ import annotations

import numpy as np

from .mesh import HalfedgeMesh, MetricMesh, attach_metric, build_mesh, metric_from_positions
from .spin import FaceCharts, charts_from_layout

_PHI = (1.0 + np.sqrt(5.0)) / 2.0


def icosahedron():
    """Unit-circumradius icosahedron with outward-oriented faces."""
    verts = np.array(
        [
            [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
            [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
            [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    return verts, faces


def icosphere(subdivisions: int = 0):
    """Icosahedron subdivided `subdivisions` times, vertices on the unit sphere."""
    verts, faces = icosahedron()
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}
        new_faces = []

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                p = 0.5 * (np.array(verts[a]) + np.array(verts[b]))
                p /= np.linalg.norm(p)
                cache[key] = len(verts)
                verts.append(tuple(p))
            return cache[key]

        for i, j, k in faces:
            ij, jk, ki = midpoint(i, j), midpoint(j, k), midpoint(k, i)
            new_faces += [[i, ij, ki], [j, jk, ij], [k, ki, jk], [ij, jk, ki]]
        faces = np.array(new_faces, dtype=np.int64)
    positions = np.array(verts, dtype=float)
    mesh = build_mesh(len(positions), faces)
    return mesh, positions


def embedded_metric(mesh: HalfedgeMesh, positions: np.ndarray) -> MetricMesh:
    return attach_metric(mesh, metric_from_positions(mesh, positions))


def _grid_faces(n: int, m: int) -> np.ndarray:
    if n < 3 or m < 3:
        raise ValueError("grid torus needs n, m >= 3 (smaller wraps create double edges)")
    faces = []
    for i in range(n):
        for j in range(m):
            v00 = i * m + j
            v10 = ((i + 1) % n) * m + j
            v01 = i * m + (j + 1) % m
            v11 = ((i + 1) % n) * m + (j + 1) % m
            faces.append([v00, v10, v01])
            faces.append([v10, v11, v01])
    return np.array(faces, dtype=np.int64)


def flat_torus(n: int = 8, m: int = 8, width: float = 1.0, height: float = 1.0):
    """Flat torus of side lengths (width, height) on an n x m grid.

    Returns (MetricMesh, FaceCharts) where the charts come from the plane
    layout of the fundamental domain, so every chart transition is a pure
    translation and every transition angle is exactly zero.
    """
    faces = _grid_faces(n, m)
    mesh = build_mesh(n * m, faces)
    dx, dy = width / n, height / m

    def corner_xy(i, j):
        return np.array([i * dx, j * dy])

    F = mesh.face_count
    layout = np.empty((F, 3, 2))
    idx = 0
    for i in range(n):
        for j in range(m):
            layout[idx] = [corner_xy(i, j), corner_xy(i + 1, j), corner_xy(i, j + 1)]
            layout[idx + 1] = [corner_xy(i + 1, j), corner_xy(i + 1, j + 1), corner_xy(i, j + 1)]
            idx += 2
    lengths = np.empty(mesh.edge_count)
    evec = layout[:, [1, 2, 0]] - layout[:, [0, 1, 2]]
    lnorm = np.linalg.norm(evec, axis=2).reshape(-1)
    for h in range(mesh.halfedge_count):
        lengths[mesh.edge_index[h]] = lnorm[h]
    metric = attach_metric(mesh, lengths)
    charts = charts_from_layout(mesh, layout)
    return metric, charts


def torus_of_revolution(n: int = 24, m: int = 12, R: float = 2.0, r: float = 1.0):
    """Embedded torus: tube of radius r around a circle of radius R."""
    faces = _grid_faces(n, m)
    mesh = build_mesh(n * m, faces)
    positions = np.empty((n * m, 3))
    for i in range(n):
        u = 2.0 * np.pi * i / n
        for j in range(m):
            v = 2.0 * np.pi * j / m
            w = R + r * np.cos(v)
            positions[i * m + j] = (w * np.cos(u), w * np.sin(u), r * np.sin(v))
    return mesh, positions


def csaszar_torus() -> HalfedgeMesh:
    """The 7-vertex triangulated torus (complete graph K7 on the torus)."""
    faces = []
    for i in range(7):
        faces.append([i, (i + 1) % 7, (i + 3) % 7])
        faces.append([i, (i + 3) % 7, (i + 2) % 7])
    return build_mesh(7, np.array(faces, dtype=np.int64))


def csaszar_metric() -> MetricMesh:
    mesh = csaszar_torus()
    return attach_metric(mesh, np.ones(mesh.edge_count))


def genus2_mesh() -> HalfedgeMesh:
    """Small genus-2 surface: two 7-vertex tori glued along a removed face."""
    base = []
    for i in range(7):
        base.append((i, (i + 1) % 7, (i + 3) % 7))
        base.append((i, (i + 3) % 7, (i + 2) % 7))
    removed = (0, 1, 3)  # the i = 0 face of the first family
    first = [f for f in base if f != removed]
    # second copy: orientation reversed, glue vertices 0, 1, 3 to the first copy
    relabel = {}
    for v in range(7):
        relabel[v] = v if v in removed else 7 + len([u for u in range(v) if u not in removed])
    second = [tuple(relabel[v] for v in reversed(f)) for f in base if f != removed]
    faces = np.array(first + second, dtype=np.int64)
    mesh = build_mesh(11, faces)
    if mesh.genus != 2:
        raise RuntimeError(f"genus-2 construction produced genus {mesh.genus}")
    return mesh


def genus2_metric() -> MetricMesh:
    mesh = genus2_mesh()
    return attach_metric(mesh, np.ones(mesh.edge_count))

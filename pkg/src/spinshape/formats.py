"""Mesh file ingestion and output.

Two input formats:

* metricmesh (version line ``metricmesh 1``): connectivity plus explicit
  per-edge lengths, each undirected edge listed exactly once::

      metricmesh 1
      vertices 4
      faces 4
      f 0 1 2
      ...
      edges 6
      l 0 1 1.0
      ...

* Wavefront OBJ (``v``/``f`` lines only, 1-based indices, triangles); the
  metric is induced from the vertex positions.
"""
from __future__ import annotations

import numpy as np

from .errors import FormatError
from .mesh import MetricMesh, attach_metric, build_mesh, metric_from_positions


def _tokens(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def read_metricmesh(path: str) -> MetricMesh:
    rows = list(_tokens(path))
    if not rows or rows[0][1][:2] != ["metricmesh", "1"]:
        raise FormatError(f"{path}: missing 'metricmesh 1' version line")
    it = iter(rows[1:])

    def expect(keyword):
        try:
            lineno, tok = next(it)
        except StopIteration:
            raise FormatError(f"{path}: unexpected end of file, expected '{keyword}'") from None
        if tok[0] != keyword or len(tok) != 2:
            raise FormatError(f"{path}:{lineno}: expected '{keyword} <count>'")
        return int(tok[1])

    V = expect("vertices")
    F = expect("faces")
    faces = np.empty((F, 3), dtype=np.int64)
    for i in range(F):
        lineno, tok = next(it, (None, None))
        if tok is None or tok[0] != "f" or len(tok) != 4:
            raise FormatError(f"{path}: face line {i} malformed")
        faces[i] = [int(t) for t in tok[1:]]
    E = expect("edges")
    mesh = build_mesh(V, faces)
    if E != mesh.edge_count:
        raise FormatError(f"{path}: header says {E} edges, mesh has {mesh.edge_count}")

    lengths = np.full(mesh.edge_count, np.nan)
    edge_lookup = {(int(a), int(b)): e for e, (a, b) in enumerate(mesh.edges)}
    for i in range(E):
        lineno, tok = next(it, (None, None))
        if tok is None or tok[0] != "l" or len(tok) != 4:
            raise FormatError(f"{path}: length line {i} malformed")
        a, b = int(tok[1]), int(tok[2])
        key = (min(a, b), max(a, b))
        if key not in edge_lookup:
            raise FormatError(f"{path}:{lineno}: edge {key} not in the mesh")
        e = edge_lookup[key]
        if not np.isnan(lengths[e]):
            raise FormatError(f"{path}:{lineno}: edge {key} listed twice")
        lengths[e] = float(tok[3])
    if np.any(np.isnan(lengths)):
        e = int(np.flatnonzero(np.isnan(lengths))[0])
        raise FormatError(f"{path}: edge {tuple(mesh.edges[e])} has no length")
    return attach_metric(mesh, lengths)


def write_metricmesh(path: str, m: MetricMesh) -> None:
    mesh = m.mesh
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("metricmesh 1\n")
        fh.write(f"vertices {mesh.vertex_count}\n")
        fh.write(f"faces {mesh.face_count}\n")
        for tri in mesh.faces:
            fh.write(f"f {tri[0]} {tri[1]} {tri[2]}\n")
        fh.write(f"edges {mesh.edge_count}\n")
        for (a, b), l in zip(mesh.edges, m.lengths):
            fh.write(f"l {a} {b} {float(l)!r}\n")


def read_obj(path: str):
    """Vertex positions and faces from an OBJ file. Returns (mesh, positions)."""
    verts = []
    faces = []
    for lineno, tok in _tokens(path):
        if tok[0] == "v":
            if len(tok) < 4:
                raise FormatError(f"{path}:{lineno}: vertex line needs 3 coordinates")
            verts.append([float(t) for t in tok[1:4]])
        elif tok[0] == "f":
            if len(tok) != 4:
                raise FormatError(f"{path}:{lineno}: only triangular faces are supported")
            idx = []
            for t in tok[1:]:
                t = t.split("/", 1)[0]
                i = int(t)
                if i < 0:
                    i = len(verts) + 1 + i
                idx.append(i - 1)
            faces.append(idx)
    if not faces:
        raise FormatError(f"{path}: no faces")
    positions = np.asarray(verts, dtype=float)
    mesh = build_mesh(len(verts), np.asarray(faces, dtype=np.int64))
    return mesh, positions


def write_obj(path: str, positions: np.ndarray, faces: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in positions:
            fh.write(f"v {float(p[0])!r} {float(p[1])!r} {float(p[2])!r}\n")
        for tri in faces:
            fh.write(f"f {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}\n")


def load_any(path: str):
    """Sniff the format.  Returns (MetricMesh, positions-or-None)."""
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.readline().strip()
    if head.startswith("metricmesh"):
        return read_metricmesh(path), None
    mesh, positions = read_obj(path)
    return attach_metric(mesh, metric_from_positions(mesh, positions)), positions

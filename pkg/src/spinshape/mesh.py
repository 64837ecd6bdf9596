"""Halfedge connectivity, discrete metrics, genus and homology generators.

Halfedge h = 3*f + s runs from faces[f, s] to faces[f, (s+1) % 3] inside face f.
Edges are undirected vertex pairs (a, b) with a < b, listed in lexicographic
order; this ordering, together with index-ordered BFS everywhere, makes every
derived structure a pure deterministic function of the input.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    Boundary,
    DegenerateEdge,
    Disconnected,
    NonManifold,
    NonOrientable,
    NonPositiveLength,
    TriangleInequality,
)


class HalfedgeMesh:
    """Closed, oriented, connected triangle mesh given by vertex-index triples."""

    def __init__(self, vertex_count: int, faces) -> None:
        faces = np.asarray(faces, dtype=np.int64)
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError("faces must be an (F, 3) array of vertex indices")
        if faces.size and (faces.min() < 0 or faces.max() >= vertex_count):
            raise ValueError("face vertex index out of range")
        for f, tri in enumerate(faces):
            if len(set(tri.tolist())) != 3:
                raise ValueError(f"face {f} repeats a vertex")

        self.vertex_count = int(vertex_count)
        self.faces = faces
        F = len(faces)
        self.face_count = F
        self.halfedge_count = 3 * F

        self.origin = faces[:, [0, 1, 2]].reshape(-1)
        self.dest = faces[:, [1, 2, 0]].reshape(-1)

        self._build_edges()
        self._check_vertex_fans()
        self._check_connected()

        chi = self.vertex_count - self.edge_count + self.face_count
        if chi > 2 or (2 - chi) % 2 != 0:
            raise RuntimeError(f"invalid Euler characteristic {chi} for a closed surface")
        self._genus = (2 - chi) // 2

    def _build_edges(self) -> None:
        pairs = {}
        for h in range(self.halfedge_count):
            a, b = self.origin[h], self.dest[h]
            key = (min(a, b), max(a, b))
            pairs.setdefault(key, []).append(h)

        for key in sorted(pairs):
            hs = pairs[key]
            if len(hs) == 1:
                raise Boundary(key)
            if len(hs) > 2:
                raise NonManifold(key, count=len(hs))
            h0, h1 = hs
            if self.origin[h0] == self.origin[h1]:
                raise NonOrientable(key)

        edges = sorted(pairs)
        self.edge_count = len(edges)
        self.edges = np.array(edges, dtype=np.int64).reshape(-1, 2)

        self.twin = np.empty(self.halfedge_count, dtype=np.int64)
        self.edge_index = np.empty(self.halfedge_count, dtype=np.int64)
        # canonical halfedge of an edge runs min(a,b) -> max(a,b)
        self.edge_halfedge = np.empty(self.edge_count, dtype=np.int64)
        for e, key in enumerate(edges):
            h0, h1 = pairs[key]
            self.twin[h0] = h1
            self.twin[h1] = h0
            self.edge_index[h0] = e
            self.edge_index[h1] = e
            self.edge_halfedge[e] = h0 if self.origin[h0] == key[0] else h1

    def _check_vertex_fans(self) -> None:
        degree = np.zeros(self.vertex_count, dtype=np.int64)
        first = np.full(self.vertex_count, -1, dtype=np.int64)
        for h in range(self.halfedge_count):
            v = self.origin[h]
            degree[v] += 1
            if first[v] < 0:
                first[v] = h
        self.vertex_halfedge = first
        for v in range(self.vertex_count):
            if degree[v] == 0:
                continue
            if len(self.vertex_ring(v)) != degree[v]:
                raise NonManifold((v, v), count=int(degree[v]))

    def _check_connected(self) -> None:
        seen = np.zeros(self.vertex_count, dtype=bool)
        if self.vertex_count == 0:
            return
        seen[0] = True
        queue = deque([0])
        adj = self.vertex_adjacency()
        while queue:
            v = queue.popleft()
            for w, _ in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        if not seen.all():
            raise Disconnected(int(np.flatnonzero(~seen)[0]))

    # -- derived connectivity ------------------------------------------------

    def next_halfedge(self, h: int) -> int:
        return h - h % 3 + (h + 1) % 3

    def prev_halfedge(self, h: int) -> int:
        return h - h % 3 + (h + 2) % 3

    def face_of(self, h: int) -> int:
        return h // 3

    def vertex_ring(self, v: int):
        """Halfedges with origin v in counterclockwise face order around v."""
        h0 = self.vertex_halfedge[v]
        ring = [h0]
        h = self.twin[self.prev_halfedge(h0)]
        guard = self.halfedge_count
        while h != h0:
            ring.append(h)
            h = self.twin[self.prev_halfedge(h)]
            guard -= 1
            if guard < 0:
                raise NonManifold((v, v))
        return ring

    def vertex_adjacency(self):
        """Per vertex, (neighbor, edge index) pairs sorted by neighbor index."""
        adj = [[] for _ in range(self.vertex_count)]
        for e, (a, b) in enumerate(self.edges):
            adj[a].append((int(b), e))
            adj[b].append((int(a), e))
        for lst in adj:
            lst.sort()
        return adj

    def face_adjacency(self):
        """Per face, (edge index, other face) pairs sorted by edge index."""
        adj = [[] for _ in range(self.face_count)]
        for h in range(self.halfedge_count):
            f = h // 3
            adj[f].append((int(self.edge_index[h]), int(self.twin[h] // 3)))
        for lst in adj:
            lst.sort()
        return adj

    @property
    def genus(self) -> int:
        return self._genus


def build_mesh(vertex_count: int, faces) -> HalfedgeMesh:
    return HalfedgeMesh(vertex_count, faces)


def genus(mesh: HalfedgeMesh) -> int:
    return mesh.genus


@dataclass(frozen=True)
class MetricMesh:
    """Abstract Riemannian surface: connectivity plus per-edge lengths.

    corner_angles[f, s] is the interior angle at vertex faces[f, s];
    areas are intrinsic (Heron) face areas.
    """

    mesh: HalfedgeMesh
    lengths: np.ndarray
    corner_angles: np.ndarray
    areas: np.ndarray

    @property
    def halfedge_lengths(self) -> np.ndarray:
        return self.lengths[self.mesh.edge_index]

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())


def attach_metric(mesh: HalfedgeMesh, lengths) -> MetricMesh:
    lengths = np.asarray(lengths, dtype=float)
    if lengths.shape != (mesh.edge_count,):
        raise ValueError(f"expected {mesh.edge_count} edge lengths, got {lengths.shape}")
    bad = np.flatnonzero(~(lengths > 0.0))
    if bad.size:
        raise NonPositiveLength(int(bad[0]))

    # side[f, s] = length of the halfedge at slot s (edge faces[f,s] -> faces[f,s+1])
    side = lengths[mesh.edge_index].reshape(-1, 3)
    F = mesh.face_count
    angles = np.empty((F, 3))
    areas = np.empty(F)
    for f in range(F):
        c, a, b = side[f]  # c = |v0 v1|, a = |v1 v2|, b = |v2 v0|
        if not (a + b > c and b + c > a and c + a > b):
            raise TriangleInequality(f)
        # angle at slot s lies between the two sides meeting there
        cos0 = (b * b + c * c - a * a) / (2.0 * b * c)
        cos1 = (c * c + a * a - b * b) / (2.0 * c * a)
        cos2 = (a * a + b * b - c * c) / (2.0 * a * b)
        ang = np.arccos(np.clip([cos0, cos1, cos2], -1.0, 1.0))
        if not (np.all(ang > 0.0) and np.all(ang < np.pi)):
            raise TriangleInequality(f)
        if abs(ang.sum() - np.pi) > 1e-12:
            raise TriangleInequality(f)
        angles[f] = ang
        x, y, z = sorted((a, b, c), reverse=True)  # x >= y >= z
        h = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
        areas[f] = 0.25 * np.sqrt(max(h, 0.0))
    return MetricMesh(mesh=mesh, lengths=lengths, corner_angles=angles, areas=areas)


def metric_from_positions(mesh: HalfedgeMesh, positions) -> np.ndarray:
    positions = np.asarray(positions, dtype=float)
    if positions.shape != (mesh.vertex_count, 3):
        raise ValueError("positions must be (V, 3)")
    vec = positions[mesh.edges[:, 1]] - positions[mesh.edges[:, 0]]
    lengths = np.linalg.norm(vec, axis=1)
    scale = lengths.max() if lengths.size else 0.0
    bad = np.flatnonzero(lengths <= 1e-14 * max(scale, 1.0))
    if bad.size:
        raise DegenerateEdge(int(bad[0]))
    return lengths


@dataclass(frozen=True)
class SpanningTree:
    """BFS vertex tree rooted at 0; neighbors visited in ascending index order."""

    parent_vertex: np.ndarray
    parent_edge: np.ndarray
    bfs_order: np.ndarray
    edge_mask: np.ndarray


def vertex_spanning_tree(mesh: HalfedgeMesh) -> SpanningTree:
    V = mesh.vertex_count
    parent_vertex = np.full(V, -1, dtype=np.int64)
    parent_edge = np.full(V, -1, dtype=np.int64)
    mask = np.zeros(mesh.edge_count, dtype=bool)
    order = []
    seen = np.zeros(V, dtype=bool)
    seen[0] = True
    queue = deque([0])
    adj = mesh.vertex_adjacency()
    while queue:
        v = queue.popleft()
        order.append(v)
        for w, e in adj[v]:
            if not seen[w]:
                seen[w] = True
                parent_vertex[w] = v
                parent_edge[w] = e
                mask[e] = True
                queue.append(w)
    return SpanningTree(
        parent_vertex=parent_vertex,
        parent_edge=parent_edge,
        bfs_order=np.array(order, dtype=np.int64),
        edge_mask=mask,
    )


@dataclass(frozen=True)
class HomologyBasis:
    """Tree-cotree generators of first homology.

    loops: 2p directed edge cycles in the 1-skeleton, each a list of
        (edge index, +1/-1) with +1 meaning traversal from the smaller to
        the larger endpoint.
    cocycles: 2p edge-index arrays; cocycle j is the set of edges crossed by
        the dual loop closed by leftover edge j through the cotree.  The
        intersection-parity pairing of loops against cocycles is the identity.
    """

    loops: list
    cocycles: list
    tree_mask: np.ndarray
    cotree_mask: np.ndarray
    leftover_edges: np.ndarray

    def __len__(self) -> int:
        return len(self.loops)


def homology_basis(mesh: HalfedgeMesh) -> HomologyBasis:
    tree = vertex_spanning_tree(mesh)

    # BFS cotree on the dual graph, rooted at face 0, edges in ascending index
    # order, avoiding vertex-tree edges.
    F = mesh.face_count
    parent_face = np.full(F, -1, dtype=np.int64)
    parent_cross_edge = np.full(F, -1, dtype=np.int64)
    cotree_mask = np.zeros(mesh.edge_count, dtype=bool)
    seen = np.zeros(F, dtype=bool)
    if F:
        seen[0] = True
    queue = deque([0] if F else [])
    fadj = mesh.face_adjacency()
    while queue:
        f = queue.popleft()
        for e, g in fadj[f]:
            if tree.edge_mask[e] or seen[g]:
                continue
            seen[g] = True
            parent_face[g] = f
            parent_cross_edge[g] = e
            cotree_mask[e] = True
            queue.append(g)

    leftover = np.flatnonzero(~tree.edge_mask & ~cotree_mask)

    def root_path_vertices(v):
        path = [int(v)]
        while tree.parent_vertex[path[-1]] >= 0:
            path.append(int(tree.parent_vertex[path[-1]]))
        return path

    def directed_edge(u, v):
        a, b = (u, v) if u < v else (v, u)
        lo = np.searchsorted(mesh.edges[:, 0], a)
        hi = np.searchsorted(mesh.edges[:, 0], a, side="right")
        e = lo + int(np.searchsorted(mesh.edges[lo:hi, 1], b))
        return (int(e), 1 if u < v else -1)

    loops = []
    for e in leftover:
        a, b = int(mesh.edges[e, 0]), int(mesh.edges[e, 1])
        pa, pb = root_path_vertices(a), root_path_vertices(b)
        ia, ib = len(pa) - 1, len(pb) - 1
        while ia > 0 and ib > 0 and pa[ia - 1] == pb[ib - 1]:
            ia -= 1
            ib -= 1
        # loop: a -> b across the leftover edge, then b -> lca -> a in the tree
        verts = [a] + pb[: ib + 1] + pa[1:ia][::-1]
        if len(verts) > 1 and verts[-1] == verts[0]:
            verts.pop()
        loop = []
        for u, v in zip(verts, verts[1:] + [verts[0]]):
            loop.append(directed_edge(u, v))
        loops.append(loop)

    def dual_root_path_mask(f):
        mask = np.zeros(mesh.edge_count, dtype=bool)
        while parent_face[f] >= 0:
            mask[parent_cross_edge[f]] = True
            f = int(parent_face[f])
        return mask

    cocycles = []
    for e in leftover:
        h = mesh.edge_halfedge[e]
        f, g = h // 3, mesh.twin[h] // 3
        mask = dual_root_path_mask(int(f)) ^ dual_root_path_mask(int(g))
        mask[e] = True
        cocycles.append(np.flatnonzero(mask))

    basis = HomologyBasis(
        loops=loops,
        cocycles=cocycles,
        tree_mask=tree.edge_mask,
        cotree_mask=cotree_mask,
        leftover_edges=leftover,
    )
    _check_basis(mesh, basis)
    return basis


def _check_basis(mesh: HalfedgeMesh, basis: HomologyBasis) -> None:
    p2 = 2 * mesh.genus
    if len(basis.loops) != p2:
        raise RuntimeError(f"expected {p2} homology loops, built {len(basis.loops)}")
    for i, loop in enumerate(basis.loops):
        for j, coc in enumerate(basis.cocycles):
            loop_edges = {e for e, _ in loop}
            parity = len(loop_edges & set(coc.tolist())) % 2
            if parity != (1 if i == j else 0):
                raise RuntimeError("homology loop/cocycle pairing is not the identity")

"""Face charts, transition lifts across edges, and discrete spin structures.

Each face carries an isometric planar chart in the i-j plane of Im H with
normal k.  Crossing an interior edge rotates one chart into the other by an
angle theta; its half-angle lift is a unit quaternion on the (1, k) circle,
determined only up to sign.  A spin structure resolves that sign globally:
per-edge signs s_e such that around every vertex the signed lift product is
the odd (nontrivial) lift of the ring's rotation holonomy.  On a genus-p
surface the solutions fall into 2^(2p) classes, a torsor over H^1(M, Z/2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import DegenerateFace, Unsolvable
from .mesh import HalfedgeMesh, HomologyBasis, MetricMesh, vertex_spanning_tree

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FaceCharts:
    """Planar per-face triangle layouts.

    verts[f, s] is the chart position of corner s; evec[f, s] the directed
    chart vector of the halfedge at slot s.  The three evecs of a face sum to
    zero exactly (the third is stored as the negated sum of the other two).
    """

    verts: np.ndarray  # (F, 3, 2)
    evec: np.ndarray  # (F, 3, 2)
    areas: np.ndarray  # (F,)
    bary: np.ndarray  # (F, 2)

    @property
    def face_count(self) -> int:
        return self.verts.shape[0]

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def halfedge_vectors(self) -> np.ndarray:
        """Chart edge vectors indexed by halfedge, as (3F, 2)."""
        return self.evec.reshape(-1, 2)


def layout_triangle(l01: float, l12: float, l20: float) -> np.ndarray:
    """Chart positions for side lengths: v0 at the origin, v1 on the +x axis,
    v2 in the upper half plane."""
    cos0 = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01 * l20)
    cos0 = min(1.0, max(-1.0, cos0))
    sin0 = np.sqrt(max(0.0, 1.0 - cos0 * cos0))
    return np.array([[0.0, 0.0], [l01, 0.0], [l20 * cos0, l20 * sin0]])


def _finish_charts(verts: np.ndarray) -> FaceCharts:
    e0 = verts[:, 1] - verts[:, 0]
    e1 = verts[:, 2] - verts[:, 1]
    e2 = -(e0 + e1)  # exact closure
    evec = np.stack([e0, e1, e2], axis=1)
    areas = 0.5 * np.abs(e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0])
    bary = verts.mean(axis=1)
    return FaceCharts(verts=verts, evec=evec, areas=areas, bary=bary)


def build_face_charts(m: MetricMesh) -> FaceCharts:
    side = m.halfedge_lengths.reshape(-1, 3)
    F = m.mesh.face_count
    verts = np.empty((F, 3, 2))
    for f in range(F):
        verts[f] = layout_triangle(side[f, 0], side[f, 1], side[f, 2])
    charts = _finish_charts(verts)

    mean_area = charts.areas.mean() if F else 0.0
    small = np.flatnonzero(charts.areas <= 1e-12 * mean_area)
    if small.size:
        raise DegenerateFace(int(small[0]))
    err = np.abs(np.linalg.norm(charts.evec, axis=2) - side)
    rel = err / np.maximum(side, 1e-300)
    if rel.max() > 1e-12:
        f = int(np.unravel_index(rel.argmax(), rel.shape)[0])
        raise DegenerateFace(f)
    return charts


def charts_from_layout(mesh: HalfedgeMesh, corner_xy) -> FaceCharts:
    """Charts taken from a given planar layout (one 2D position per face corner).

    Used for flat surfaces laid out by translations, where every transition
    angle vanishes.  Layout triangles must be positively oriented and match
    the metric the caller attaches.
    """
    verts = np.asarray(corner_xy, dtype=float)
    if verts.shape != (mesh.face_count, 3, 2):
        raise ValueError("corner_xy must be (F, 3, 2)")
    charts = _finish_charts(verts)
    e0, e1 = charts.evec[:, 0], charts.evec[:, 1]
    signed = 0.5 * (e0[:, 0] * e1[:, 1] - e0[:, 1] * e1[:, 0])
    if np.any(signed <= 0):
        raise DegenerateFace(int(np.flatnonzero(signed <= 0)[0]))
    return charts


@dataclass(frozen=True)
class TransitionLifts:
    """Per-halfedge chart alignment rotations and their canonical lifts.

    theta[h] rotates the chart of the twin's face onto the chart of h's face
    (the transport direction "into h's face"); rhat[h] = cos(theta/2)
    + k sin(theta/2).  Twin lifts are exact quaternion inverses.
    """

    theta: np.ndarray  # (3F,)
    rhat: np.ndarray  # (3F, 4)


def transition_lifts(m: MetricMesh, charts: FaceCharts) -> TransitionLifts:
    mesh = m.mesh
    hvec = charts.halfedge_vectors()
    theta = np.empty(mesh.halfedge_count)
    rhat = np.empty((mesh.halfedge_count, 4))
    for e in range(mesh.edge_count):
        h0 = int(mesh.edge_halfedge[e])
        h1 = int(mesh.twin[h0])
        u_f = hvec[h0]          # canonical direction (min -> max) seen in face(h0)
        u_g = -hvec[h1]         # same direction seen in face(h1)
        ang = float(np.arctan2(u_g[0] * u_f[1] - u_g[1] * u_f[0], u_g @ u_f))
        theta[h0] = ang
        theta[h1] = -ang
        half = 0.5 * ang
        c, s = np.cos(half), np.sin(half)
        rhat[h0] = (c, 0.0, 0.0, s)
        rhat[h1] = (c, 0.0, 0.0, -s)  # exact inverse, also when ang == pi
    return TransitionLifts(theta=theta, rhat=rhat)


def lift_alignment_error(m: MetricMesh, charts: FaceCharts, lifts: TransitionLifts) -> np.ndarray:
    """Per-edge residual |rhat Ê^g rhat^-1 - Ê^f|, normalized by edge length."""
    mesh = m.mesh
    hvec = charts.halfedge_vectors()
    err = np.empty(mesh.edge_count)
    for e in range(mesh.edge_count):
        h0 = int(mesh.edge_halfedge[e])
        h1 = int(mesh.twin[h0])
        qf = quat.from_plane(hvec[h0])
        qg = quat.from_plane(-hvec[h1])
        r = lifts.rhat[h0]
        moved = quat.qmul(r, quat.qmul(qg, quat.qconj(r)))
        err[e] = np.linalg.norm(moved - qf) / max(m.lengths[e], 1e-300)
    return err


def dual_directions(m: MetricMesh, charts: FaceCharts, lifts: TransitionLifts) -> np.ndarray:
    """For each halfedge h in face f: the unfolded barycenter of the twin's
    face, expressed in f's chart, minus f's barycenter.  Shape (3F, 2)."""
    mesh = m.mesh
    out = np.empty((mesh.halfedge_count, 2))
    verts = charts.verts
    for h in range(mesh.halfedge_count):
        f, s = divmod(h, 3)
        h2 = int(mesh.twin[h])
        g, s2 = divmod(h2, 3)
        # origin of h equals dest of its twin
        p_f = verts[f, s]
        p_g = verts[g, (s2 + 1) % 3]
        ang = lifts.theta[h]
        c, sn = np.cos(ang), np.sin(ang)
        d = charts.bary[g] - p_g
        unfolded = np.array([c * d[0] - sn * d[1], sn * d[0] + c * d[1]]) + p_f
        out[h] = unfolded - charts.bary[f]
    return out


@dataclass(frozen=True)
class SpinStructure:
    """Edge signs resolving the lift ambiguity, labeled by a class bitstring
    (offset from the base structure in the homology-basis cocycle directions)."""

    signs: np.ndarray  # (E,) of +1/-1
    class_bits: str

    def flipped(self, edge_set: np.ndarray, class_bits: str | None = None) -> "SpinStructure":
        signs = self.signs.copy()
        signs[edge_set] *= -1
        return SpinStructure(signs=signs, class_bits=self.class_bits if class_bits is None else class_bits)


def _ring_data(m: MetricMesh, lifts: TransitionLifts, v: int):
    ring = m.mesh.vertex_ring(v)
    theta_sum = float(sum(lifts.theta[h] for h in ring))
    cone = float(sum(m.corner_angles[h // 3, h % 3] for h in ring))
    edges = [int(m.mesh.edge_index[h]) for h in ring]
    return theta_sum, cone, edges


def _target_bits(m: MetricMesh, lifts: TransitionLifts) -> np.ndarray:
    """Per-vertex parity that the edge-sign flips around the vertex must have.

    Composing the transports counterclockwise around a vertex rotates by
    minus the cone angle (the chart-to-fan angles telescope), so the unsigned
    lift product exp(k sum(theta) / 2) differs from exp(-k cone / 2) by
    (-1)^n with n = (sum(theta) + cone) / 2pi, an exact integer.  The
    required signed product is the odd lift -exp(-k cone / 2): a loop
    encircling the vertex once must transport spinors to minus themselves
    relative to the even lift.  Hence the flips around v must have parity
    n + 1.  This orientation/sign convention is pinned by the embedded
    oracle: fields derived from embeddings satisfy it (see the tests).
    """
    V = m.mesh.vertex_count
    bits = np.zeros(V, dtype=np.int64)
    for v in range(V):
        theta_sum, cone, _ = _ring_data(m, lifts, v)
        n = (theta_sum + cone) / _TWO_PI
        n_int = int(np.rint(n))
        if abs(n - n_int) > 1e-6:
            raise Unsolvable(
                f"vertex {v}: ring rotation {theta_sum:.12g} is not minus the cone angle "
                f"{cone:.12g} mod 2*pi"
            )
        bits[v] = (n_int + 1) % 2
    return bits


def base_spin_structure(m: MetricMesh, lifts: TransitionLifts) -> SpinStructure:
    """Solve the vertex conditions for edge signs, gauge-fixed on a spanning tree.

    Non-tree edges are fixed to +1; each tree edge is then forced by the leaf
    vertex it hangs from (reverse BFS order), which is Gaussian elimination
    over Z/2 with tree edges as pivots.
    """
    mesh = m.mesh
    bits = _target_bits(m, lifts)
    tree = vertex_spanning_tree(mesh)

    edges_at = [[] for _ in range(mesh.vertex_count)]
    for v in range(mesh.vertex_count):
        _, _, edges = _ring_data(m, lifts, v)
        edges_at[v] = edges

    x = np.zeros(mesh.edge_count, dtype=np.int64)
    for v in tree.bfs_order[::-1]:
        v = int(v)
        pe = int(tree.parent_edge[v])
        if pe < 0:  # root: consistency check
            parity = sum(int(x[e]) for e in edges_at[v]) % 2
            if parity != bits[v]:
                raise Unsolvable("root vertex condition inconsistent; mesh is not a closed oriented surface")
            continue
        parity = sum(int(x[e]) for e in edges_at[v] if e != pe) % 2
        x[pe] = (bits[v] - parity) % 2

    signs = np.where(x == 1, -1, 1).astype(np.int8)
    return SpinStructure(signs=signs, class_bits="0" * (2 * mesh.genus))


def vertex_lift_check(m: MetricMesh, lifts: TransitionLifts, s: SpinStructure) -> np.ndarray:
    """True at v iff the signed lift product around v equals the target odd lift."""
    bits = _target_bits(m, lifts)
    ok = np.zeros(m.mesh.vertex_count, dtype=bool)
    for v in range(m.mesh.vertex_count):
        _, _, edges = _ring_data(m, lifts, v)
        flips = sum(1 for e in edges if s.signs[e] < 0) % 2
        ok[v] = flips == bits[v]
    return ok


def _loop_edge_set(loop) -> np.ndarray:
    # Z/2 chain support: edges traversed an odd number of times
    parity = {}
    for e, _ in loop:
        parity[e] = parity.get(e, 0) ^ 1
    return np.array(sorted(e for e, c in parity.items() if c), dtype=np.int64)


def enumerate_spin_classes(
    m: MetricMesh, base: SpinStructure, hb: HomologyBasis
) -> list[SpinStructure]:
    """All 2^(2p) classes: the base structure XOR each subset of the homology
    loops.  A loop visits every vertex an even number of times, so flipping
    its edges preserves the vertex lift condition; its class against the
    cotree cocycle basis is one basis bit."""
    p2 = len(hb.loops)
    flip_sets = [_loop_edge_set(loop) for loop in hb.loops]
    out = []
    for idx in range(1 << p2):
        bits = format(idx, f"0{p2}b") if p2 else ""
        signs = base.signs.copy()
        for j in range(p2):
            if bits[j] == "1":
                signs[flip_sets[j]] *= -1
        out.append(SpinStructure(signs=signs, class_bits=bits))
    return out


def spin_class_of(base: SpinStructure, other: SpinStructure, hb: HomologyBasis) -> str:
    """Class bits of `other` relative to `base`.

    The sign difference of two valid structures is an even subgraph; its
    homology class in the loop basis is read off by intersection parity with
    the dual cocycle basis (loops pair with cocycles as the identity, and a
    dual loop enters and leaves every face it visits, so coboundaries pair
    evenly with every cocycle)."""
    diff = np.flatnonzero(base.signs != other.signs)
    diff_set = set(diff.tolist())
    bits = []
    for coc in hb.cocycles:
        bits.append(str(len(diff_set.intersection(coc.tolist())) % 2))
    return "".join(bits)


def structure_for_class(base: SpinStructure, hb: HomologyBasis, bits: str) -> SpinStructure:
    p2 = len(hb.loops)
    if len(bits) != p2 or any(c not in "01" for c in bits):
        raise ValueError(f"class bitstring must have length {p2} over 0/1, got {bits!r}")
    signs = base.signs.copy()
    for j in range(p2):
        if bits[j] == "1":
            signs[_loop_edge_set(hb.loops[j])] *= -1
    return SpinStructure(signs=signs, class_bits=bits)


def is_coboundary(mesh: HalfedgeMesh, flip_edges: np.ndarray) -> bool:
    """Whether a flip pattern is a dual cut (face-sign coboundary): 2-color the
    dual graph so flipped edges separate opposite colors, by BFS."""
    flip = np.zeros(mesh.edge_count, dtype=bool)
    flip[flip_edges] = True
    fadj = mesh.face_adjacency()
    color = np.full(mesh.face_count, -1, dtype=np.int64)
    for start in range(mesh.face_count):
        if color[start] >= 0:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            f = stack.pop()
            for e, g in fadj[f]:
                want = color[f] ^ (1 if flip[e] else 0)
                if color[g] < 0:
                    color[g] = want
                    stack.append(g)
                elif color[g] != want:
                    return False
    return True

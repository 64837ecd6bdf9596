"""From spinor fields to vertex positions and back, plus shape diagnostics.

Integration solves the least-squares primitive of the edge-averaged one-form
(a graph Poisson problem), distributing any closedness defect over all edges
instead of concentrating it on a spanning cotree.  The reverse direction
derives the spinor field of an embedded mesh: per face the unique
orientation-preserving similarity from its chart to its world triangle,
with quaternion signs and edge signs propagated over a dual BFS tree.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import quat
from .dirac import ChannelDensities, DiracOperator
from .errors import DegenerateFace, SolveFailure
from .mesh import HalfedgeMesh, MetricMesh, attach_metric, metric_from_positions
from .spin import (
    FaceCharts,
    SpinStructure,
    TransitionLifts,
    build_face_charts,
    transition_lifts,
)


@dataclass(frozen=True)
class ImmersionResult:
    """Vertex positions integrating the one-form, with closure residuals.

    Vertex 0 is pinned at the origin.  closure_max/rms measure
    |f(head) - f(tail) - omega_e| over edges, the seam/defect indicator.
    """

    positions: np.ndarray  # (V, 3)
    closure_max: float
    closure_rms: float
    normals: np.ndarray  # (F, 3)
    mean_curvature: np.ndarray | None  # (F,), 2 U / |psi|^2 when channels given


def integrate(
    psi: np.ndarray,
    op: DiracOperator,
    channels: ChannelDensities | None = None,
) -> ImmersionResult:
    mesh = op.mesh
    omega = op.averaged_one_form(psi)[:, 1:]  # (E, 3)

    V = mesh.vertex_count
    a = mesh.edges[:, 0]
    b = mesh.edges[:, 1]
    rows = np.concatenate([a, b])
    cols = np.concatenate([b, a])
    data = -np.ones(2 * mesh.edge_count)
    lap = sp.coo_matrix((data, (rows, cols)), shape=(V, V)).tocsr()
    deg = -np.asarray(lap.sum(axis=1)).ravel()
    lap = lap + sp.diags(deg)

    rhs = np.zeros((V, 3))
    np.add.at(rhs, b, omega)
    np.add.at(rhs, a, -omega)

    # pin vertex 0 to fix the translation kernel
    interior = np.arange(1, V)
    lap_ii = lap[interior][:, interior].tocsc()
    positions = np.zeros((V, 3))
    try:
        solve = spla.factorized(lap_ii)
        for c in range(3):
            positions[1:, c] = solve(rhs[1:, c])
    except RuntimeError as exc:  # singular factorization
        raise SolveFailure(f"position solve failed: {exc}") from exc

    res = positions[b] - positions[a] - omega
    rnorm = np.linalg.norm(res, axis=1)
    closure_max = float(rnorm.max()) if rnorm.size else 0.0
    closure_rms = float(np.sqrt(np.mean(rnorm**2))) if rnorm.size else 0.0

    n = quat.normsq(psi)
    normals = quat.imag(quat.conj_sandwich(psi, quat.K)) / n[:, None]
    H = channels.mean_curvature() if channels is not None else None
    return ImmersionResult(
        positions=positions,
        closure_max=closure_max,
        closure_rms=closure_rms,
        normals=normals,
        mean_curvature=H,
    )


def _face_frames(positions: np.ndarray, tri: np.ndarray):
    p0, p1, p2 = positions[tri[0]], positions[tri[1]], positions[tri[2]]
    e0 = p1 - p0
    nrm = np.cross(e0, p2 - p0)
    area2 = np.linalg.norm(nrm)
    return e0, nrm, area2


def derive_spinor_from_embedding(
    mesh: HalfedgeMesh,
    positions: np.ndarray,
    metric: MetricMesh | None = None,
):
    """Spinor field, edge signs, and metric induced by an embedding.

    Per face, psi_f encodes the orientation-preserving similarity
    x -> psi_f-bar x psi_f from the chart triangle to the world triangle
    (|psi_f|^2 is the scale).  Quaternion signs propagate along a dual BFS
    tree, each chosen to minimize |s rhat psi_g - psi_f|; edge signs on
    non-tree edges are chosen the same way.  If no metric is supplied, the
    metric induced by the positions is used, making every |psi_f| = 1.

    Returns (psi, SpinStructure, MetricMesh, FaceCharts, TransitionLifts).
    """
    positions = np.asarray(positions, dtype=float)
    if metric is None:
        metric = attach_metric(mesh, metric_from_positions(mesh, positions))
    charts = build_face_charts(metric)
    lifts = transition_lifts(metric, charts)

    F = mesh.face_count
    psi = np.empty((F, 4))
    mean_area2 = 0.0
    for f in range(F):
        _, _, area2 = _face_frames(positions, mesh.faces[f])
        mean_area2 += area2
    mean_area2 /= max(F, 1)

    for f in range(F):
        tri = mesh.faces[f]
        e0w, nw, area2 = _face_frames(positions, tri)
        if area2 <= 1e-12 * mean_area2:
            raise DegenerateFace(f)
        # world frame (w1, w2, n) and chart frame (c1, c2, k)
        w1 = e0w / np.linalg.norm(e0w)
        nw = nw / area2
        w2 = np.cross(nw, w1)
        c0 = charts.evec[f, 0]
        l0 = np.linalg.norm(c0)
        c1 = np.array([c0[0] / l0, c0[1] / l0, 0.0])
        c2 = np.array([-c1[1], c1[0], 0.0])
        Cw = np.column_stack([w1, w2, nw])
        Cc = np.column_stack([c1, c2, [0.0, 0.0, 1.0]])
        R = Cw @ Cc.T  # chart -> world rotation
        scale = np.linalg.norm(e0w) / l0
        # x -> psi-bar x psi rotates by R when psi-bar is the quaternion of R
        # under the q x q-bar convention, so psi is its conjugate
        q = quat.from_rotation_matrix(R)
        psi[f] = np.sqrt(scale) * quat.qconj(q)

    # deterministic sign gauge before propagation
    for f in range(F):
        for comp in range(4):
            if abs(psi[f, comp]) > 1e-12:
                if psi[f, comp] < 0:
                    psi[f] = -psi[f]
                break

    # dual BFS: fix quaternion signs on tree edges, then the edge signs
    signs = np.ones(mesh.edge_count, dtype=np.int8)
    seen = np.zeros(F, dtype=bool)
    seen[0] = True
    queue = deque([0])
    fadj_h = [[] for _ in range(F)]
    for h in range(mesh.halfedge_count):
        fadj_h[h // 3].append((int(mesh.edge_index[h]), h))
    for lst in fadj_h:
        lst.sort()

    tree_edge = np.zeros(mesh.edge_count, dtype=bool)
    while queue:
        f = queue.popleft()
        for e, h in fadj_h[f]:
            g = int(mesh.twin[h]) // 3
            if seen[g]:
                continue
            seen[g] = True
            tree_edge[e] = True
            # transport g's spinor into f's chart: rhat of the halfedge in f
            moved = quat.qmul(lifts.rhat[h], psi[g])
            if moved @ psi[f] < 0:
                psi[g] = -psi[g]
            queue.append(g)

    for e in range(mesh.edge_count):
        if tree_edge[e]:
            continue
        h0 = int(mesh.edge_halfedge[e])
        f, g = h0 // 3, int(mesh.twin[h0]) // 3
        moved = quat.qmul(lifts.rhat[h0], psi[g])
        if moved @ psi[f] < 0:
            signs[e] = -1

    from .mesh import homology_basis
    from .spin import base_spin_structure, spin_class_of

    hb = homology_basis(mesh)
    base = base_spin_structure(metric, lifts)
    derived = SpinStructure(signs=signs, class_bits="0" * (2 * mesh.genus))
    bits = spin_class_of(base, derived, hb)
    structure = SpinStructure(signs=signs, class_bits=bits)
    return psi, structure, metric, charts, lifts


@dataclass(frozen=True)
class DistortionReport:
    """Chart-to-world distortion of an immersion.

    singular_values[f] = (s1, s2) of the linear chart->world map, s1 >= s2;
    conformal distortion is s1/s2 (identity map iff conformal).  Willmore
    estimates integrate H^2 over the induced area, from the channel route
    (4 sum A U^2) and from dihedral angles (sum (theta l)^2 / (4 A_diamond)).
    """

    singular_values: np.ndarray  # (F, 2)
    conformal_distortion: np.ndarray  # (F,)
    length_error_median: float
    length_error_max: float
    willmore_channel: float | None
    willmore_dihedral: float

    @property
    def willmore(self) -> float:
        return self.willmore_channel if self.willmore_channel is not None else self.willmore_dihedral

    def summary(self) -> dict:
        return {
            "distortion_max": float(self.conformal_distortion.max()),
            "distortion_median": float(np.median(self.conformal_distortion)),
            "length_error_median": self.length_error_median,
            "length_error_max": self.length_error_max,
            "willmore": float(self.willmore),
            "willmore_channel": None
            if self.willmore_channel is None
            else float(self.willmore_channel),
            "willmore_dihedral": float(self.willmore_dihedral),
        }


def dihedral_willmore(mesh: HalfedgeMesh, positions: np.ndarray) -> float:
    """Integrated squared mean curvature from dihedral bending:
    sum over edges of (theta_e |e|)^2 / (4 A_e), A_e = (A_f + A_g) / 3."""
    tri = positions[mesh.faces]
    nrm = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    area2 = np.linalg.norm(nrm, axis=1)
    nrm = nrm / area2[:, None]
    areas = 0.5 * area2

    total = 0.0
    for e in range(mesh.edge_count):
        h0 = int(mesh.edge_halfedge[e])
        f, g = h0 // 3, int(mesh.twin[h0]) // 3
        c = float(np.clip(nrm[f] @ nrm[g], -1.0, 1.0))
        theta = float(np.arccos(c))
        a, b = mesh.edges[e]
        ell = float(np.linalg.norm(positions[b] - positions[a]))
        diamond = (areas[f] + areas[g]) / 3.0
        total += (theta * ell) ** 2 / (4.0 * diamond)
    return total


def diagnostics(
    m: MetricMesh,
    positions: np.ndarray,
    charts: FaceCharts | None = None,
    channels: ChannelDensities | None = None,
) -> DistortionReport:
    mesh = m.mesh
    if charts is None:
        charts = build_face_charts(m)
    F = mesh.face_count
    sv = np.empty((F, 2))
    for f in range(F):
        tri = mesh.faces[f]
        Ec = np.column_stack([charts.evec[f, 0], charts.evec[f, 1]])  # 2x2
        Ew = np.column_stack(
            [positions[tri[1]] - positions[tri[0]], positions[tri[2]] - positions[tri[1]]]
        )  # 3x2
        det = Ec[0, 0] * Ec[1, 1] - Ec[0, 1] * Ec[1, 0]
        if abs(det) <= 0.0:
            raise DegenerateFace(f)
        M = Ew @ np.linalg.inv(Ec)
        s = np.linalg.svd(M, compute_uv=False)
        sv[f] = s[:2]
    if np.any(sv[:, 1] <= 0):
        raise DegenerateFace(int(np.flatnonzero(sv[:, 1] <= 0)[0]))

    world_len = np.linalg.norm(positions[mesh.edges[:, 1]] - positions[mesh.edges[:, 0]], axis=1)
    err = np.abs(world_len - m.lengths) / m.lengths

    wch = None
    if channels is not None:
        wch = float(4.0 * (charts.areas @ (channels.U**2)))

    return DistortionReport(
        singular_values=sv,
        conformal_distortion=sv[:, 0] / sv[:, 1],
        length_error_median=float(np.median(err)),
        length_error_max=float(err.max()),
        willmore_channel=wch,
        willmore_dihedral=dihedral_willmore(mesh, positions),
    )

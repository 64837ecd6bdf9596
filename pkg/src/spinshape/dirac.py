"""Dirac residual channels, the channel energy and its analytic gradient.

A spinor field assigns one quaternion per face chart; the candidate surface
derivative on halfedge h of face f is the conformal one-form
omega_h = psi_f-bar Ê_h psi_f.  Closedness of omega across edges is measured
per face by fitting a linear map G to the three transported neighbor
differences, projecting onto its (0,1) part, and decomposing

    q = G01(i) * psi_f^-1 = a - b k - U j - V i.

(a, b) is the holomorphicity defect alpha, V the shape-operator asymmetry, U
the mean curvature density (H = 2 U / |psi|^2); the one-form is closed iff
alpha = 0 and V = 0.  The energy

    E = eps1 * sum A (a^2 + b^2) + eps2 * sum A V^2 + eps3 * sum A U^2
        + lambda_per * sum_gamma |P_gamma|^2

is minimized over fields; all sums use intrinsic chart areas A.  Because the
least-squares fit is linear in the field, q = (sum_h c_h Delta_h) psi_f^-1
with fixed per-halfedge quaternion coefficients c_h, and the gradient is
assembled in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quat
from .errors import DegenerateSpinor, NonFinite, SingularFit
from .mesh import HomologyBasis, MetricMesh
from .spin import FaceCharts, SpinStructure, TransitionLifts, dual_directions

SPINOR_FLOOR = 1e-6  # min |psi|^2 relative to the mean, below which a field is rejected


def check_spinor(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 2 or psi.shape[1] != 4:
        raise ValueError("spinor field must have shape (F, 4)")
    n = quat.normsq(psi)
    mean = n.mean()
    bad = np.flatnonzero(n < SPINOR_FLOOR * mean)
    if bad.size:
        raise DegenerateSpinor(int(bad[0]), f"|psi|^2 = {n[bad[0]]:.3e} vs mean {mean:.3e}")
    return psi


def ones_field(face_count: int) -> np.ndarray:
    psi = np.zeros((face_count, 4))
    psi[:, 0] = 1.0
    return psi


@dataclass(frozen=True)
class ChannelDensities:
    """Per-face coefficients of the (0,1) residual, all per unit chart length."""

    alpha: np.ndarray  # (F,) complex: a + i b
    U: np.ndarray  # (F,)
    V: np.ndarray  # (F,)
    normals: np.ndarray  # (F, 3) world normals psi-bar k psi / |psi|^2
    q: np.ndarray  # (F, 4) raw residual quaternion
    psi_normsq: np.ndarray  # (F,)

    @property
    def residual01_sq(self) -> np.ndarray:
        """Squared (0,1)-residual density |G01(i)|^2 = |q|^2 |psi|^2 per face."""
        return quat.normsq(self.q) * self.psi_normsq

    def mean_curvature(self) -> np.ndarray:
        return 2.0 * self.U / self.psi_normsq


@dataclass(frozen=True)
class EnergyBreakdown:
    e_alpha: float
    e_V: float
    e_willmore: float
    e_periods: float
    total: float
    eps: tuple
    period_weight: float
    gradient: np.ndarray | None = None  # (F, 4)
    period_vectors: np.ndarray | None = None  # (n, 3)


class DiracOperator:
    """Precomputed per-halfedge transport and fit coefficients for one mesh,
    chart assignment, and lift choice.  Channel and energy evaluations are
    pure functions of (field, edge signs)."""

    def __init__(self, m: MetricMesh, charts: FaceCharts, lifts: TransitionLifts) -> None:
        mesh = m.mesh
        self.m = m
        self.charts = charts
        self.lifts = lifts
        self.mesh = mesh

        H = mesh.halfedge_count
        self.face_of_h = np.arange(H) // 3
        self.nbr_of_h = mesh.twin // 3
        self.edge_of_h = mesh.edge_index
        self.areas = charts.areas
        self.total_area = charts.total_area

        d = dual_directions(m, charts, lifts).reshape(-1, 3, 2)
        S = np.einsum("fsi,fsj->fij", d, d)
        det = S[:, 0, 0] * S[:, 1, 1] - S[:, 0, 1] * S[:, 1, 0]
        tr = S[:, 0, 0] + S[:, 1, 1]
        bad = np.flatnonzero(det <= 1e-14 * np.maximum(tr, 1e-300) ** 2)
        if bad.size:
            raise SingularFit(int(bad[0]))
        Sinv = np.empty_like(S)
        Sinv[:, 0, 0] = S[:, 1, 1] / det
        Sinv[:, 1, 1] = S[:, 0, 0] / det
        Sinv[:, 0, 1] = -S[:, 0, 1] / det
        Sinv[:, 1, 0] = -S[:, 1, 0] / det
        w = np.einsum("fij,fsj->fsi", Sinv, d)  # least-squares weights per halfedge
        self.fit_w = w.reshape(-1, 2)

        # q = sum_h c_h Delta_h with c_h = (w_x - w_y k)/2; fold the lift in:
        # contribution of the neighbor is s_e * (c_h rhat_h) psi_g.
        c = np.zeros((H, 4))
        c[:, 0] = 0.5 * self.fit_w[:, 0]
        c[:, 3] = -0.5 * self.fit_w[:, 1]
        self.c = c
        self.lhat = quat.qmul(c, lifts.rhat)
        self.c_face_sum = c.reshape(-1, 3, 4).sum(axis=1)

        self.evec_quat = quat.from_plane(charts.halfedge_vectors())  # (3F, 4)

    # -- one-forms and closedness --------------------------------------------

    def one_forms(self, psi: np.ndarray) -> np.ndarray:
        """omega on every halfedge: psi_f-bar Ê_h psi_f, shape (3F, 4)."""
        psi_h = psi[self.face_of_h]
        return quat.conj_sandwich(psi_h, self.evec_quat)

    def face_closure(self, psi: np.ndarray) -> np.ndarray:
        return self.one_forms(psi).reshape(-1, 3, 4).sum(axis=1)

    def edge_one_forms(self, psi: np.ndarray):
        """Per edge, omega seen from both sides in the canonical direction:
        (omega_f, omega_g), each (E, 4)."""
        om = self.one_forms(psi)
        mesh = self.mesh
        h0 = mesh.edge_halfedge
        h1 = mesh.twin[h0]
        return om[h0], -om[h1]

    def edge_mismatch(self, psi: np.ndarray) -> np.ndarray:
        wf, wg = self.edge_one_forms(psi)
        return wg - wf

    def averaged_one_form(self, psi: np.ndarray) -> np.ndarray:
        wf, wg = self.edge_one_forms(psi)
        return 0.5 * (wf + wg)

    def periods(self, psi: np.ndarray, hb: HomologyBasis) -> np.ndarray:
        om = self.averaged_one_form(psi)
        out = np.zeros((len(hb.loops), 3))
        for i, loop in enumerate(hb.loops):
            P = np.zeros(4)
            for e, sgn in loop:
                P += sgn * om[e]
            out[i] = P[1:]
        return out

    # -- channels and energy ---------------------------------------------------

    def transported_differences(self, psi: np.ndarray, s: SpinStructure) -> np.ndarray:
        """Delta_h = s_e rhat_h psi_g - psi_f for every halfedge."""
        se = s.signs[self.edge_of_h].astype(float)
        phi = se[:, None] * quat.qmul(self.lifts.rhat, psi[self.nbr_of_h])
        return phi - psi[self.face_of_h]

    def residual_q(self, psi: np.ndarray, s: SpinStructure) -> np.ndarray:
        se = s.signs[self.edge_of_h].astype(float)
        num = se[:, None] * quat.qmul(self.lhat, psi[self.nbr_of_h])
        num = num.reshape(-1, 3, 4).sum(axis=1) - quat.qmul(self.c_face_sum, psi)
        return quat.qmul(num, quat.qinv(psi))

    def channels(self, psi: np.ndarray, s: SpinStructure) -> ChannelDensities:
        psi = check_spinor(psi)
        q = self.residual_q(psi, s)
        n = quat.normsq(psi)
        normals = quat.imag(quat.conj_sandwich(psi, quat.K)) / n[:, None]
        return ChannelDensities(
            alpha=q[:, 0] - 1j * q[:, 3],
            U=-q[:, 2],
            V=-q[:, 1],
            normals=normals,
            q=q,
            psi_normsq=n,
        )

    def energy(
        self,
        psi: np.ndarray,
        s: SpinStructure,
        hb: HomologyBasis,
        eps=(1.0, 1.0, 1.0),
        period_weight: float = 0.0,
        want_gradient: bool = True,
    ) -> EnergyBreakdown:
        psi = check_spinor(psi)
        eps1, eps2, eps3 = (float(x) for x in eps)
        lam = float(period_weight)
        A = self.areas

        q = self.residual_q(psi, s)
        e_alpha = float(A @ (q[:, 0] ** 2 + q[:, 3] ** 2))
        e_V = float(A @ (q[:, 1] ** 2))
        e_willmore = float(A @ (q[:, 2] ** 2))

        pvec = self.periods(psi, hb)
        e_periods = float(np.sum(pvec * pvec))

        total = eps1 * e_alpha + eps2 * e_V + eps3 * e_willmore + lam * e_periods
        if not np.isfinite(total):
            raise NonFinite("energy")

        grad = None
        if want_gradient:
            grad = self._gradient(psi, s, q, pvec, hb, (eps1, eps2, eps3), lam)
            if not np.all(np.isfinite(grad)):
                raise NonFinite("gradient")

        return EnergyBreakdown(
            e_alpha=e_alpha,
            e_V=e_V,
            e_willmore=e_willmore,
            e_periods=e_periods,
            total=total,
            eps=(eps1, eps2, eps3),
            period_weight=lam,
            gradient=grad,
            period_vectors=pvec,
        )

    def _gradient(self, psi, s, q, pvec, hb, eps, lam) -> np.ndarray:
        eps1, eps2, eps3 = eps
        F = self.mesh.face_count
        A = self.areas
        n = quat.normsq(psi)
        psi_inv_conj = psi / n[:, None]  # conj(psi^-1)

        # channel part: d/dpsi of sum_f A_f q^T M q with M = diag(e1, e2, e3, e1)
        Mq = q * np.array([eps1, eps2, eps3, eps1])
        y = quat.qmul(Mq, psi_inv_conj)  # (Mq) * psi / |psi|^2

        grad = np.zeros((F, 4))
        se = s.signs[self.edge_of_h].astype(float)
        contrib = (
            2.0
            * (A[self.face_of_h] * se)[:, None]
            * quat.qmul(quat.qconj(self.lhat), y[self.face_of_h])
        )
        np.add.at(grad, self.nbr_of_h, contrib)

        own = quat.qmul(quat.qconj(self.c_face_sum), y)
        own += quat.qmul(quat.qmul(quat.qconj(q), Mq), psi_inv_conj)
        grad -= 2.0 * A[:, None] * own

        # period part: E += lam |P|^2 per loop.  grad of <u, psi-bar X psi> in
        # psi is -2 X psi u (imaginary u, X); |P|^2 contributes 2 <P, dP> and
        # each side of the averaged one-form carries 1/2, so the net
        # per-side coefficient is -2 lam sgn.
        if lam > 0.0 and len(hb.loops):
            mesh = self.mesh
            for i, loop in enumerate(hb.loops):
                P = quat.from_imag(pvec[i])
                for e, sgn in loop:
                    h0 = int(mesh.edge_halfedge[e])
                    h1 = int(mesh.twin[h0])
                    f, g = h0 // 3, h1 // 3
                    Xf = self.evec_quat[h0]
                    Xg = -self.evec_quat[h1]
                    grad[f] -= 2.0 * lam * sgn * quat.qmul(Xf, quat.qmul(psi[f], P))
                    grad[g] -= 2.0 * lam * sgn * quat.qmul(Xg, quat.qmul(psi[g], P))
        return grad

    # -- verbatim three-integral discretization --------------------------------

    def energy_three_integral(self, psi: np.ndarray, s: SpinStructure, eps=(1.0, 1.0, 1.0)) -> float:
        """Channel energy evaluated directly from the (0,1) derivative columns
        through the wedge pairings, without extracting channel coefficients:

            eps1 * I[<*dbar psi ^ dbar psi> / |psi|^2]
            + (eps2 - eps1) * I[(<*dbar psi ^ psi (psi,psi)> / |psi|^4)^2]
            + (eps3 - eps1) * I[(<*dbar psi ^ J psi (psi,psi)> / |psi|^4)^2]

        The wedge of two field-valued one-forms is evaluated on the chart
        basis (u, v) as (<mu_u, nu_v> - <mu_v, nu_u>) / 2 per unit chart area,
        the normalization under which half-density squares are area forms.
        """
        psi = check_spinor(psi)
        eps1, eps2, eps3 = (float(x) for x in eps)
        delta = self.transported_differences(psi, s).reshape(-1, 3, 4)
        w = self.fit_w.reshape(-1, 3, 2)
        Gu = np.einsum("fs,fsq->fq", w[:, :, 0], delta)
        Gv = np.einsum("fs,fsq->fq", w[:, :, 1], delta)

        # (0,1) projection: G01(X) = (G(X) - k G(jX)) / 2 with ju = v, jv = -u
        k = quat.K
        G01u = 0.5 * (Gu - quat.qmul(k, Gv))
        G01v = 0.5 * (Gv + quat.qmul(k, Gu))
        # *mu(X) = mu(jX): star columns of dbar psi
        star_u, star_v = G01v, -G01u

        n = quat.normsq(psi)
        dot = lambda a, b: np.einsum("fq,fq->f", a, b)

        I1 = 0.5 * (dot(star_u, G01v) - dot(star_v, G01u)) / n

        # psi (psi, psi) evaluated on (u, v): |psi|^2 * (i psi, j psi)
        iu = quat.qmul(quat.I, psi)
        jv = quat.qmul(quat.J, psi)
        nu_u = n[:, None] * iu
        nu_v = n[:, None] * jv
        bra2 = 0.5 * (dot(star_u, nu_v) - dot(star_v, nu_u))
        I2 = (bra2 / (n * n)) ** 2

        # J psi (psi, psi) = -k * the above
        mu_u = -quat.qmul(k, nu_u)
        mu_v = -quat.qmul(k, nu_v)
        bra3 = 0.5 * (dot(star_u, mu_v) - dot(star_v, mu_u))
        I3 = (bra3 / (n * n)) ** 2

        dens = eps1 * I1 + (eps2 - eps1) * I2 + (eps3 - eps1) * I3
        return float(self.areas @ dens)


def gradient_check(
    op: DiracOperator,
    psi: np.ndarray,
    s: SpinStructure,
    hb: HomologyBasis,
    eps,
    period_weight: float,
    h: float = 1e-5,
) -> float:
    """Max error of the analytic gradient against central differences,
    relative to the gradient magnitude (componentwise differences scaled by
    the largest component; near-zero components carry only truncation noise,
    so a per-component quotient would measure the difference scheme, not the
    gradient)."""
    base = op.energy(psi, s, hb, eps, period_weight, want_gradient=True)
    an = base.gradient
    fd = np.zeros_like(an)
    for f in range(psi.shape[0]):
        for c in range(4):
            bump = psi.copy()
            bump[f, c] += h
            ep = op.energy(bump, s, hb, eps, period_weight, want_gradient=False).total
            bump[f, c] -= 2.0 * h
            em = op.energy(bump, s, hb, eps, period_weight, want_gradient=False).total
            fd[f, c] = (ep - em) / (2.0 * h)
    scale = max(np.abs(an).max(), np.abs(fd).max(), 1e-300)
    return float(np.abs(fd - an).max() / scale)

"""Constrained minimization of the channel energy over spinor fields.

Projected gradient descent with Barzilai-Borwein steps and Armijo
backtracking, inside an outer loop that anneals the Willmore weight eps3
toward a floor and adaptively grows the period penalty.  Two constraint
modes: `isometric` renormalizes every face to |psi_f| = 1 (the discrete
unit-scale constraint), `conformal` renormalizes the global L4 integral to 1
(the energy itself is scale invariant, so this only pins the gauge).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from . import quat
from .dirac import DiracOperator, EnergyBreakdown, check_spinor, ones_field
from .errors import DegenerateSpinor, InvalidConfig, NonFinite
from .mesh import HomologyBasis, MetricMesh, homology_basis
from .spin import FaceCharts, SpinStructure, build_face_charts, transition_lifts


@dataclass
class SolveConfig:
    mode: str = "conformal"  # or "isometric"
    eps1: float = 1.0
    eps2: float = 1.0
    eps3_init: float = 1.0
    eps3_decay: float = 0.5
    eps3_floor: float = 1e-4
    period_weight: float = 1.0
    period_growth: float = 2.0
    max_outer: int = 40
    max_inner: int = 500
    grad_tol: float | None = None  # default: 1e-8 x initial energy scale
    residual_target: float = 1e-3
    rng_seed: int = 0
    init: str = "ones"  # "ones" | "random" | "from_field"
    init_noise: float = 0.1
    init_field: np.ndarray | None = None
    armijo_c: float = 1e-4
    backtrack: float = 0.5

    def validate(self) -> None:
        if self.mode not in ("conformal", "isometric"):
            raise InvalidConfig(f"unknown mode {self.mode!r}")
        if not (self.eps1 > 0.0 and self.eps2 > 0.0):
            raise InvalidConfig("eps1 and eps2 must be positive (zero-minimum characterization)")
        if self.eps3_init < 0.0:
            raise InvalidConfig("eps3_init must be nonnegative")
        if not (0.0 < self.eps3_decay < 1.0):
            raise InvalidConfig("eps3_decay must lie in (0, 1)")
        if self.eps3_floor < 0.0 or self.eps3_floor > self.eps3_init:
            raise InvalidConfig("need 0 <= eps3_floor <= eps3_init")
        if self.period_weight < 0.0:
            raise InvalidConfig("period_weight must be nonnegative")
        if self.period_growth < 1.0:
            raise InvalidConfig("period_growth must be >= 1")
        if self.max_outer < 1 or self.max_inner < 1:
            raise InvalidConfig("iteration limits must be positive")
        if self.residual_target <= 0.0:
            raise InvalidConfig("residual_target must be positive")
        if self.init not in ("ones", "random", "from_field"):
            raise InvalidConfig(f"unknown init {self.init!r}")
        if self.init == "from_field" and self.init_field is None:
            raise InvalidConfig("init 'from_field' requires init_field")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_field"] = None if self.init_field is None else "provided"
        return d


@dataclass
class SolveResult:
    psi: np.ndarray
    trace: list  # EnergyBreakdown per outer iteration (gradient stripped)
    inner_energies: list  # list of per-outer energy sequences
    converged: bool
    termination: str
    channel_residual: float
    period_norms: np.ndarray
    outer_count: int


def project_isometric(psi: np.ndarray) -> np.ndarray:
    psi = check_spinor(psi)
    return psi / np.sqrt(quat.normsq(psi))[:, None]


def normalize_L4(psi: np.ndarray, areas: np.ndarray) -> np.ndarray:
    psi = check_spinor(psi)
    s = float(areas @ (quat.normsq(psi) ** 2))
    if not np.isfinite(s) or s <= 0.0:
        raise NonFinite("L4 normalization")
    return psi / s**0.25


def initial_field(cfg: SolveConfig, face_count: int) -> np.ndarray:
    rng = np.random.default_rng(cfg.rng_seed)
    if cfg.init == "from_field":
        psi = np.array(cfg.init_field, dtype=float)
        if psi.shape != (face_count, 4):
            raise InvalidConfig(f"init_field must have shape ({face_count}, 4)")
        return psi
    psi = ones_field(face_count)
    if cfg.init == "ones":
        psi += cfg.init_noise * rng.standard_normal((face_count, 4))
    else:
        psi = rng.standard_normal((face_count, 4))
        psi /= np.sqrt(quat.normsq(psi))[:, None]
    return psi


def _tangential_gradient(psi, grad, mode, areas):
    if mode == "isometric":
        # remove the radial component on each face sphere
        rad = np.einsum("fi,fi->f", grad, psi) / quat.normsq(psi)
        return grad - rad[:, None] * psi
    # conformal: remove the component along the L4 constraint normal
    w = 4.0 * (areas * quat.normsq(psi))[:, None] * psi
    denom = float(np.sum(w * w))
    if denom == 0.0:
        return grad
    coef = float(np.sum(grad * w)) / denom
    return grad - coef * w


def minimize(
    m: MetricMesh,
    s: SpinStructure,
    cfg: SolveConfig,
    charts: FaceCharts | None = None,
    hb: HomologyBasis | None = None,
) -> SolveResult:
    cfg.validate()
    if charts is None:
        charts = build_face_charts(m)
    lifts = transition_lifts(m, charts)
    op = DiracOperator(m, charts, lifts)
    if hb is None:
        hb = homology_basis(m.mesh)

    project = (
        project_isometric
        if cfg.mode == "isometric"
        else lambda psi: normalize_L4(psi, charts.areas)
    )

    psi = project(initial_field(cfg, m.mesh.face_count))
    total_area = charts.total_area

    eps3 = cfg.eps3_init
    lam = cfg.period_weight

    def evaluate(p, want_gradient=True):
        return op.energy(p, s, hb, (cfg.eps1, cfg.eps2, eps3), lam, want_gradient)

    def targets_met(bd) -> bool:
        ch_resid = float(np.sqrt(bd.e_alpha + bd.e_V) / total_area)
        if ch_resid > cfg.residual_target:
            return False
        if lam > 0.0 and bd.period_vectors is not None and len(bd.period_vectors):
            if float(np.linalg.norm(bd.period_vectors, axis=1).max()) > cfg.residual_target:
                return False
        return True

    e0 = evaluate(psi, want_gradient=False).total
    grad_tol = cfg.grad_tol if cfg.grad_tol is not None else 1e-8 * max(e0, 0.0)

    trace: list[EnergyBreakdown] = []
    inner_energies: list[list[float]] = []
    converged = False
    termination = "max_outer"
    prev_period_norm = None
    bd = None

    for _outer in range(cfg.max_outer):
        bd = evaluate(psi)
        energies = [bd.total]
        step = None
        prev_psi = None
        prev_grad = None
        hit_target = targets_met(bd)

        for _ in range(cfg.max_inner):
            if hit_target:
                break  # residual targets met at the current weights
            g = _tangential_gradient(psi, bd.gradient, cfg.mode, charts.areas)
            gnorm = float(np.linalg.norm(g))
            scale = float(np.linalg.norm(psi))
            if gnorm * scale <= grad_tol:
                break

            if prev_psi is not None:
                sdiff = psi - prev_psi
                ydiff = g - prev_grad
                sy = float(np.sum(sdiff * ydiff))
                ss = float(np.sum(sdiff * sdiff))
                step = ss / sy if sy > 0.0 else (step or 1.0) * 2.0
            if step is None:
                step = 0.01 * scale / gnorm
            step = float(np.clip(step, 1e-14 * scale / gnorm, 1e14 * scale / gnorm))

            accepted = False
            t = step
            for _ in range(60):
                try:
                    cand = project(psi - t * g)
                    bd_new = evaluate(cand)
                except (DegenerateSpinor, NonFinite):
                    t *= cfg.backtrack
                    continue
                d = cand - psi
                gd = float(np.sum(g * d))
                if bd_new.total <= bd.total + cfg.armijo_c * min(gd, 0.0):
                    prev_psi, prev_grad = psi, g
                    psi, bd = cand, bd_new
                    energies.append(bd.total)
                    accepted = True
                    step = t
                    hit_target = targets_met(bd)
                    break
                t *= cfg.backtrack
            if not accepted:
                break  # line search stalled at this weight setting

        inner_energies.append(energies)
        trace.append(replace(bd, gradient=None))

        period_norm = (
            float(np.linalg.norm(bd.period_vectors, axis=1).max())
            if bd.period_vectors is not None and len(bd.period_vectors)
            else 0.0
        )
        if targets_met(bd):
            converged = True
            termination = "residual_target"
            break

        eps3 = max(eps3 * cfg.eps3_decay, cfg.eps3_floor)
        if lam > 0.0 and period_norm > cfg.residual_target:
            improving = (
                prev_period_norm is not None and period_norm <= 0.9 * prev_period_norm
            )
            if not improving and prev_period_norm is not None:
                lam *= cfg.period_growth
        prev_period_norm = period_norm

    final = bd if bd is not None else evaluate(psi)
    ch_resid = float(np.sqrt(final.e_alpha + final.e_V) / total_area)
    pnorms = (
        np.linalg.norm(final.period_vectors, axis=1)
        if final.period_vectors is not None
        else np.zeros(0)
    )
    return SolveResult(
        psi=psi,
        trace=trace,
        inner_energies=inner_energies,
        converged=converged,
        termination=termination,
        channel_residual=ch_resid,
        period_norms=pnorms,
        outer_count=len(trace),
    )

"""Acceptance suite.

One test per criterion (A1..A8); each prints a PASS/FAIL line.  Run with

    pytest tests/test_acceptance.py -v -s
"""
import json

import numpy as np
import pytest

from spinshape import quat, shapes
from spinshape import (
    DiracOperator,
    SolveConfig,
    SpinStructure,
    base_spin_structure,
    build_face_charts,
    derive_spinor_from_embedding,
    enumerate_spin_classes,
    gradient_check,
    homology_basis,
    integrate,
    minimize,
    ones_field,
    spin_class_of,
    transition_lifts,
    vertex_lift_check,
)
from spinshape.cli import main
from spinshape.formats import write_metricmesh
from spinshape.reconstruct import dihedral_willmore
from spinshape.spin import is_coboundary


def report(name, ok, detail=""):
    print(f"{name} {'PASS' if ok else 'FAIL'}{': ' + detail if detail else ''}")
    assert ok, f"{name}: {detail}"


def signs_to_int(signs):
    out = 0
    for i, s in enumerate(signs):
        if s < 0:
            out |= 1 << i
    return out


def test_A1_spin_class_counting(icosphere2, torus7, genus2):
    counts = {}
    for tag, b in (("genus0", icosphere2), ("genus1", torus7), ("genus2", genus2)):
        base = (
            base_spin_structure(b.m, b.lifts) if tag == "genus0" else b.base
        )
        classes = enumerate_spin_classes(b.m, base, b.hb)
        counts[tag] = len(classes)
        for c in classes:
            assert vertex_lift_check(b.m, b.lifts, c).all(), f"{tag} class {c.class_bits}"
    assert counts == {"genus0": 1, "genus1": 4, "genus2": 16}

    # brute-force coboundary orbit on the 7-vertex torus: enumerate all 2^F
    # face-sign flip patterns and check the four classes are in distinct orbits
    mesh = torus7.mesh
    F = mesh.face_count
    face_masks = np.zeros(F, dtype=np.int64)
    for h in range(3 * F):
        face_masks[h // 3] |= 1 << int(mesh.edge_index[h])
    sel = ((np.arange(1 << F)[:, None] >> np.arange(F)) & 1).astype(bool)
    orbits = np.bitwise_xor.reduce(np.where(sel, face_masks, 0), axis=1)
    coboundaries = set(orbits.tolist())
    classes = enumerate_spin_classes(torus7.m, torus7.base, torus7.hb)
    ints = [signs_to_int(c.signs) for c in classes]
    for i in range(4):
        for j in range(i + 1, 4):
            assert (ints[i] ^ ints[j]) not in coboundaries

    # genus 2: pairwise non-equivalence by dual-graph 2-coloring
    classes2 = enumerate_spin_classes(genus2.m, genus2.base, genus2.hb)
    for i in range(16):
        for j in range(i + 1, 16):
            diff = np.flatnonzero(classes2[i].signs != classes2[j].signs)
            assert not is_coboundary(genus2.mesh, diff)
    report("A1", True, "classes 1/4/16, all lift checks, orbits distinct")


def test_A2_gradient_correctness(torus7, icosphere2):
    rng = np.random.default_rng(42)
    worst = 0.0
    for b in (torus7, icosphere2):
        s = b.base if hasattr(b, "base") else base_spin_structure(b.m, b.lifts)
        psi = rng.standard_normal((b.mesh.face_count, 4))
        # keep |psi| away from zero: central differences at h = 1e-5 lose
        # accuracy to the 1/|psi| nonlinearity near degenerate faces
        psi /= np.sqrt(quat.normsq(psi))[:, None]
        psi *= (1.0 + 0.3 * rng.uniform(-1, 1, len(psi)))[:, None]
        for _ in range(5):
            eps = tuple(rng.uniform(0.1, 3.0, 3))
            lam = float(rng.uniform(0.0, 2.0))
            err = gradient_check(b.op, psi, s, b.hb, eps, lam, h=1e-5)
            worst = max(worst, err)
    report("A2", worst <= 1e-5, f"max relative gradient error {worst:.2e}")


def test_A3_gauge_invariance(torus7):
    rng = np.random.default_rng(43)
    psi = rng.standard_normal((torus7.mesh.face_count, 4))
    e0 = torus7.op.energy(psi, torus7.base, torus7.hb, (1, 1, 1), 0.0, want_gradient=False)
    p0 = np.linalg.norm(torus7.op.periods(psi, torus7.hb))
    worst_e, worst_p = 0.0, 0.0
    for _ in range(100):
        lam = rng.standard_normal(4)
        psil = quat.qmul(psi, lam)
        e1 = torus7.op.energy(psil, torus7.base, torus7.hb, (1, 1, 1), 0.0, want_gradient=False)
        worst_e = max(worst_e, abs(e1.total - e0.total) / abs(e0.total))
        p1 = np.linalg.norm(torus7.op.periods(psil, torus7.hb))
        worst_p = max(worst_p, abs(p1 - quat.normsq(lam) * p0) / (quat.normsq(lam) * p0))
    ok = worst_e <= 1e-10 and worst_p <= 1e-10
    report("A3", ok, f"energy drift {worst_e:.2e}, period-scaling drift {worst_p:.2e}")


def test_A4_roundtrip_exactness(icosphere3, revtorus):
    details = []
    for tag, b in (("icosphere", icosphere3), ("revtorus", revtorus)):
        mm = np.linalg.norm(b.op.edge_mismatch(b.psi)[:, 1:], axis=1).max()
        assert mm <= 1e-12 * b.diameter, f"{tag} mismatch {mm}"
        imm = integrate(b.psi, b.op)
        aligned = imm.positions - imm.positions[0] + b.positions[0]
        perr = np.abs(aligned - b.positions).max()
        assert perr <= 1e-10 * b.diameter, f"{tag} positions {perr}"
        details.append(f"{tag}: mismatch {mm:.1e}, pos {perr:.1e}")
    P = revtorus.op.periods(revtorus.psi, revtorus.hb)
    pn = np.linalg.norm(P, axis=1).max()
    assert pn <= 1e-10 * revtorus.diameter
    report("A4", True, "; ".join(details) + f"; periods {pn:.1e}")


def test_A5_curvature_and_willmore(icosphere3):
    b3 = icosphere3
    mesh4, pos4 = shapes.icosphere(4)
    psi4, st4, m4, charts4, lifts4 = derive_spinor_from_embedding(mesh4, pos4)
    op4 = DiracOperator(m4, charts4, lifts4)

    ch3 = b3.op.channels(b3.psi, b3.structure)
    ch4 = op4.channels(psi4, st4)
    med3 = float(np.median(ch3.mean_curvature()))
    med4 = float(np.median(ch4.mean_curvature()))
    assert abs(med3 - 1.0) <= 0.02 and abs(med4 - 1.0) <= 0.02

    e_a3 = float(b3.charts.areas @ (np.abs(ch3.alpha) ** 2))
    e_a4 = float(charts4.areas @ (np.abs(ch4.alpha) ** 2))
    e_v3 = float(b3.charts.areas @ (ch3.V**2))
    e_v4 = float(charts4.areas @ (ch4.V**2))
    assert e_a3 / e_a4 >= 1.5, f"alpha energy ratio {e_a3 / e_a4:.2f}"
    assert e_v3 / e_v4 >= 1.5, f"V energy ratio {e_v3 / e_v4:.2f}"

    target = 4.0 * np.pi
    w_ch = float(4.0 * (charts4.areas @ (ch4.U**2)))
    w_di = dihedral_willmore(mesh4, pos4)
    assert abs(w_ch - target) <= 0.05 * target
    assert abs(w_di - target) <= 0.05 * target
    report(
        "A5",
        True,
        f"median H {med3:.4f}/{med4:.4f}, ratios a {e_a3/e_a4:.2f} V {e_v3/e_v4:.2f}, "
        f"Willmore {w_ch:.3f}/{w_di:.3f} vs {target:.3f}",
    )


def test_A6_functional_equivalence(torus7):
    rng = np.random.default_rng(44)
    worst_eq, worst_py = 0.0, 0.0
    for _ in range(100):
        psi = rng.standard_normal((torus7.mesh.face_count, 4))
        eps = tuple(rng.uniform(0.05, 4.0, 3))
        net = torus7.op.energy(psi, torus7.base, torus7.hb, eps, 0.0, want_gradient=False)
        verbatim = torus7.op.energy_three_integral(psi, torus7.base, eps)
        worst_eq = max(worst_eq, abs(verbatim - net.total) / abs(net.total))
        ch = torus7.op.channels(psi, torus7.base)
        coeffs = (np.abs(ch.alpha) ** 2 + ch.U**2 + ch.V**2) * ch.psi_normsq
        py = np.abs(ch.residual01_sq - coeffs).max() / max(ch.residual01_sq.max(), 1e-300)
        worst_py = max(worst_py, py)
    ok = worst_eq <= 1e-12 and worst_py <= 1e-12
    report("A6", ok, f"three-integral vs net {worst_eq:.2e}, Pythagoras {worst_py:.2e}")


def _assert_monotone(result):
    for seq in result.inner_energies:
        diffs = np.diff(np.array(seq))
        assert (diffs <= 1e-12 * max(abs(seq[0]), 1.0)).all()


def test_A7a_flat_torus_isometric(flat_torus8):
    b = flat_torus8
    signs = np.ones(b.mesh.edge_count, dtype=np.int8)
    st = SpinStructure(signs=signs, class_bits="")
    st = SpinStructure(signs=signs, class_bits=spin_class_of(b.base, st, b.hb))
    cfg = SolveConfig(mode="isometric", period_weight=0.0, rng_seed=1, residual_target=1e-8)
    res = minimize(b.m, st, cfg, charts=b.charts, hb=b.hb)
    _assert_monotone(res)
    ok = res.channel_residual <= 1e-6
    report(
        "A7a",
        ok,
        f"channel residual {res.channel_residual:.2e}, periods "
        f"{np.round(res.period_norms, 6).tolist()} (planar branch, flagged)",
    )


def test_A7b_icosphere_conformal(icosphere2):
    b = icosphere2
    base = base_spin_structure(b.m, b.lifts)
    cfg = SolveConfig(mode="conformal", init="random", rng_seed=7)
    res = minimize(b.m, base, cfg, charts=b.charts, hb=b.hb)
    _assert_monotone(res)
    assert res.converged and res.channel_residual <= 1e-3

    mm = float(np.linalg.norm(b.op.edge_mismatch(res.psi)[:, 1:], axis=1).max())
    bound = 1e-2 * float(b.m.lengths.mean())
    ok = mm <= bound
    report(
        "A7b",
        ok,
        f"residual {res.channel_residual:.2e} (<= 1e-3 ok), closure: max edge mismatch "
        f"{mm:.3e} vs bound {bound:.3e}",
    )


def test_A8_report_determinism(tmp_path):
    mesh_path = tmp_path / "torus.metricmesh"
    m, _ = shapes.flat_torus(4, 4)
    write_metricmesh(str(mesh_path), m)
    docs = []
    for i in range(2):
        rp = tmp_path / f"report{i}.json"
        code = main(
            [
                "solve", str(mesh_path),
                "--mode", "isometric",
                "--spin-class", "00",
                "--max-outer", "5",
                "--max-inner", "100",
                "--seed", "3",
                "--report", str(rp),
                "-o", str(tmp_path / f"out{i}.obj"),
            ]
        )
        assert code in (0, 2)
        lines = rp.read_text().splitlines()
        docs.append([l for l in lines if '"timestamp"' not in l])
    ok = docs[0] == docs[1]
    report("A8", ok, f"{len(docs[0])} report lines byte-identical modulo timestamp")

import numpy as np
import pytest

from spinshape import (
    DiracOperator,
    base_spin_structure,
    build_face_charts,
    derive_spinor_from_embedding,
    homology_basis,
    transition_lifts,
)
from spinshape import shapes


class MeshBundle:
    """Everything the operators need for one metric mesh, built once."""

    def __init__(self, m, charts=None):
        self.m = m
        self.mesh = m.mesh
        self.charts = build_face_charts(m) if charts is None else charts
        self.lifts = transition_lifts(m, self.charts)
        self.op = DiracOperator(m, self.charts, self.lifts)
        self.hb = homology_basis(m.mesh)
        self.base = base_spin_structure(m, self.lifts)


class DerivedBundle:
    """An embedded mesh plus its derived spinor data."""

    def __init__(self, mesh, positions):
        self.mesh = mesh
        self.positions = positions
        psi, structure, metric, charts, lifts = derive_spinor_from_embedding(mesh, positions)
        self.psi = psi
        self.structure = structure
        self.m = metric
        self.charts = charts
        self.lifts = lifts
        self.op = DiracOperator(metric, charts, lifts)
        self.hb = homology_basis(mesh)

    @property
    def diameter(self):
        return float(np.linalg.norm(self.positions.max(axis=0) - self.positions.min(axis=0)))


@pytest.fixture(scope="session")
def torus7():
    return MeshBundle(shapes.csaszar_metric())


@pytest.fixture(scope="session")
def genus2():
    return MeshBundle(shapes.genus2_metric())


@pytest.fixture(scope="session")
def flat_torus8():
    m, charts = shapes.flat_torus(8, 8)
    return MeshBundle(m, charts=charts)


@pytest.fixture(scope="session")
def icosphere2():
    mesh, pos = shapes.icosphere(2)
    return DerivedBundle(mesh, pos)


@pytest.fixture(scope="session")
def icosphere3():
    mesh, pos = shapes.icosphere(3)
    return DerivedBundle(mesh, pos)


@pytest.fixture(scope="session")
def revtorus():
    mesh, pos = shapes.torus_of_revolution(24, 12)
    return DerivedBundle(mesh, pos)

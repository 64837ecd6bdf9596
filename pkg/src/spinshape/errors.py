"""Exception types. Each names the violated invariant and the offending element."""


class SpinshapeError(Exception):
    """Base class for all package errors."""


class MeshError(SpinshapeError):
    pass


class NonManifold(MeshError):
    def __init__(self, edge, count=None):
        self.edge = tuple(edge)
        self.count = count
        msg = f"NonManifold edge {self.edge}"
        if count is not None:
            msg += f" with {count} incident faces"
        super().__init__(msg)


class NonOrientable(MeshError):
    def __init__(self, edge):
        self.edge = tuple(edge)
        super().__init__(f"NonOrientable edge {self.edge} traversed twice in the same direction")


class Boundary(MeshError):
    def __init__(self, edge):
        self.edge = tuple(edge)
        super().__init__(f"Boundary edge {self.edge}")


class Disconnected(MeshError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"Disconnected vertex {vertex}")


class TriangleInequality(MeshError):
    def __init__(self, face):
        self.face = face
        super().__init__(f"TriangleInequality face {face}")


class NonPositiveLength(MeshError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"NonPositiveLength edge {edge}")


class DegenerateEdge(MeshError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"DegenerateEdge edge {edge}")


class DegenerateFace(SpinshapeError):
    def __init__(self, face):
        self.face = face
        super().__init__(f"DegenerateFace face {face}")


class DegenerateSpinor(SpinshapeError):
    def __init__(self, face, detail=""):
        self.face = face
        msg = f"DegenerateSpinor face {face}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class SingularFit(SpinshapeError):
    def __init__(self, face):
        self.face = face
        super().__init__(f"SingularFit face {face}: collinear dual directions")


class Unsolvable(SpinshapeError):
    """Internal error: the edge-sign system has no solution on a closed oriented mesh."""


class InvalidConfig(SpinshapeError):
    pass


class NonFinite(SpinshapeError):
    def __init__(self, where):
        super().__init__(f"NonFinite value in {where}")


class SolveFailure(SpinshapeError):
    pass


class FormatError(SpinshapeError):
    """Malformed input file."""

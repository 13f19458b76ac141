"""Exception hierarchy for polyurn."""


class PolyurnError(Exception):
    pass


class HypergraphError(PolyurnError, ValueError):
    pass


class ZeroVertices(HypergraphError):
    pass


class EmptyEdge(HypergraphError):
    def __init__(self, index):
        super().__init__(f"hyperedge {index} is empty")
        self.index = index


class VertexOutOfRange(HypergraphError):
    def __init__(self, vertex, m):
        super().__init__(f"vertex {vertex} outside 0..{m - 1}")
        self.vertex = vertex


class RepeatedVertex(HypergraphError):
    def __init__(self, index, vertex):
        super().__init__(f"vertex {vertex} repeated inside hyperedge {index}")
        self.index = index
        self.vertex = vertex


class IsolatedVertex(HypergraphError):
    def __init__(self, vertex):
        super().__init__(f"vertex {vertex} belongs to no hyperedge")
        self.vertex = vertex


class UnknownName(HypergraphError):
    pass


class ParseError(HypergraphError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class DegenerateEdgeSum(PolyurnError, ValueError):
    def __init__(self, edge, value):
        super().__init__(f"edge sum of hyperedge {edge} is {value!r} (must be > 0)")
        self.edge = edge
        self.value = value


class StepTooLarge(PolyurnError):
    pass


class DomainExit(PolyurnError):
    pass


class EdgeMissesSupport(PolyurnError, ValueError):
    def __init__(self, edge):
        super().__init__(f"hyperedge {edge} does not meet the support")
        self.edge = edge


class NoConvergence(PolyurnError):
    """Raised by the equilibrium solver; ``record`` holds the best iterate."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class BoundaryOnly(PolyurnError):
    """No interior equilibrium; ``record`` is the boundary equilibrium found."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class NotAnEquilibrium(PolyurnError, ValueError):
    pass


class NotInterior(PolyurnError, ValueError):
    pass


class SimulationOverflow(PolyurnError, OverflowError):
    pass

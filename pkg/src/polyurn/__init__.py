"""Pólya urns on finite hypergraphs: simulation, mean-field analysis, equilibria."""

__version__ = "0.1.0"

from .hypergraph import Hypergraph, builtin, parse, serialize, validate  # noqa: E402,F401

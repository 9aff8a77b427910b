"""Pauli algebra, stabilizer codes and their error graphs."""

from .codes import (
    CODE_CATALOG,
    ErrorGraph,
    StabilizerCode,
    build_error_graph,
    class_graph,
    code_distance,
    get_code,
    lump_graph,
    syndrome_chain,
    write_graph_csv,
)
from .pauli import PauliString, commutes, multiply, syndrome, syndrome_index

__all__ = [
    "CODE_CATALOG",
    "ErrorGraph",
    "StabilizerCode",
    "build_error_graph",
    "class_graph",
    "code_distance",
    "get_code",
    "lump_graph",
    "syndrome_chain",
    "write_graph_csv",
    "PauliString",
    "commutes",
    "multiply",
    "syndrome",
    "syndrome_index",
]

"""Structural counts of the catalog error graphs."""

import numpy as np

from ..core.suite import Check, CheckResult, ValidationSuite
from ..stabilizer.codes import build_error_graph, get_code, syndrome_chain

# code id -> (nodes, degree, syndromes, classes)
EXPECTED = {
    "toy1": (2, 1, 2, 2),
    "bitflip3": (8, 3, 4, 8),
    "five_qubit": (1024, 15, 16, 64),
}


class GraphStructureSuite(ValidationSuite):
    """Node, degree, syndrome and class counts of every catalog graph."""

    name = "graph-structure"
    description = "Node/degree/syndrome/class counts of the catalog error graphs"

    def checks(self) -> list[tuple[str, Check]]:
        checks: list[tuple[str, Check]] = []
        for code_id in EXPECTED:
            checks.append((f"{code_id}-counts", lambda c=code_id: self._check_counts(c)))
        checks.append(("five_qubit-partitions", self._check_partitions))
        checks.append(("five_qubit-lumpable", self._check_lumpable))
        return checks

    def _check_counts(self, code_id: str) -> CheckResult:
        nodes, degree, syndromes, classes = EXPECTED[code_id]
        stats = build_error_graph(get_code(code_id)).stats()
        ok = stats == {
            "nodes": nodes,
            "degree_min": degree,
            "degree_max": degree,
            "syndromes": syndromes,
            "classes": classes,
        }
        return CheckResult.expect(
            f"{code_id}-counts", ok, detail=", ".join(f"{k}={v}" for k, v in stats.items()), **stats
        )

    def _check_partitions(self) -> CheckResult:
        graph = build_error_graph(get_code("five_qubit"))
        per_syndrome = np.bincount(graph.syndrome_of, minlength=graph.n_syndromes)
        per_class = np.bincount(graph.class_of, minlength=graph.n_classes)
        ok = bool(np.all(per_syndrome == 64) and np.all(per_class == 16))
        return CheckResult.expect(
            "five_qubit-partitions",
            ok,
            detail=f"syndrome sizes {sorted(set(per_syndrome.tolist()))}, "
            f"class sizes {sorted(set(per_class.tolist()))}",
        )

    def _check_lumpable(self) -> CheckResult:
        lumped = syndrome_chain(get_code("five_qubit"))
        return CheckResult.expect(
            "five_qubit-lumpable", lumped.dim == 16, detail=f"{lumped.dim} syndrome states"
        )

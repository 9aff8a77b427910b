"""Syndrome probabilities of the SME against the Wonham filter."""

import numpy as np

from ..core.rng import make_generator
from ..core.suite import Check, CheckResult, ValidationSuite
from ..dynamics.chain import chain_from_graph
from ..dynamics.sme import is_density_matrix, random_density_matrix, sme_step, syndrome_probs
from ..dynamics.wonham import advance
from ..stabilizer.codes import build_error_graph, get_code, syndrome_chain

KAPPA_OVER_GAMMA = 40.0
KAPPA_DT = 1e-3


class SMEEquivalenceSuite(ValidationSuite):
    """
    Drive the density matrix and the classical filter with the same record
    and compare Tr[Pi_m rho] with the filter's syndrome probabilities.

    The classical side uses the "renormalize" normalization, which is the
    SME's trace renormalization.
    """

    name = "sme-equivalence"
    description = "SME syndrome probabilities match the Wonham filter step by step"

    def __init__(
        self,
        records: int = 20,
        steps: int = 200,
        five_qubit_records: int = 5,
        five_qubit_steps: int = 100,
        seed: int = 2024,
    ) -> None:
        self.records = records
        self.steps = steps
        self.five_qubit_records = five_qubit_records
        self.five_qubit_steps = five_qubit_steps
        self.seed = seed

    def checks(self) -> list[tuple[str, Check]]:
        return [
            ("bitflip3", lambda: self.compare("bitflip3", self.records, self.steps, 1e-12)),
            (
                "five_qubit",
                lambda: self.compare(
                    "five_qubit", self.five_qubit_records, self.five_qubit_steps, 1e-10
                ),
            ),
        ]

    def compare(self, code_id: str, records: int, steps: int, tolerance: float) -> CheckResult:
        code = get_code(code_id, gamma=1.0, kappa=KAPPA_OVER_GAMMA)
        dt = KAPPA_DT / code.kappa
        if code_id == "five_qubit":
            graph = build_error_graph(code)
        else:
            graph = syndrome_chain(code)
        chain = chain_from_graph(graph, code)

        worst = 0.0
        valid = True
        for r in range(records):
            rng = make_generator(self.seed, r)
            rho = random_density_matrix(1 << code.n, rng)
            P = syndrome_probs(rho, code)
            # Spread each syndrome's weight evenly over its states
            counts = np.bincount(graph.syndrome_of, minlength=graph.n_syndromes)
            p = P[graph.syndrome_of] / counts[graph.syndrome_of]

            for _ in range(steps):
                dY = np.sqrt(dt) * rng.standard_normal(chain.n_channels)
                dY += chain.obs_levels @ p * dt
                rho = sme_step(rho, code, dY, dt)
                p, _ = advance(p, chain, dY, dt, "renormalize")
                deviation = np.abs(syndrome_probs(rho, code) - graph.syndrome_marginals(p))
                worst = max(worst, float(deviation.max()))
            valid = valid and is_density_matrix(rho)

        result = CheckResult.compare(
            code_id,
            worst,
            tolerance,
            detail=f"{records} records x {steps} steps, max |Tr[Pi rho] - P|",
        )
        if not valid:
            return CheckResult.expect(code_id, False, detail="SME state left the density matrices")
        return result

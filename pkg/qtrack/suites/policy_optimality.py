"""The extended-chain correction does at least as well as the syndrome decision."""

from scipy import stats

from ..core.suite import Check, CheckResult, ValidationSuite
from ..montecarlo import ExperimentConfig, run_batch

SIGNIFICANCE = 0.05


class PolicyOptimalitySuite(ValidationSuite):
    """
    Paired comparison of the two correction policies on the same
    trajectories, by an exact one-sided sign test on the discordant pairs.
    """

    name = "policy-optimality"
    description = "Optimal policy success rate >= naive policy success rate"

    def __init__(
        self, trajectories: int = 500, horizon: float = 1.0, kappa: float = 40.0, seed: int = 5
    ) -> None:
        self.config = ExperimentConfig(
            code="bitflip3",
            kappa=kappa,
            horizon=horizon,
            trajectories=trajectories,
            seed=seed,
            emit_stride=1000,
        )

    def checks(self) -> list[tuple[str, Check]]:
        return [("success-rates", self._compare)]

    def _compare(self) -> CheckResult:
        batch = run_batch(self.config, range(self.config.trajectories))
        optimal, naive = batch.success["optimal"], batch.success["naive"]
        only_naive = int((naive & ~optimal).sum())
        only_optimal = int((optimal & ~naive).sum())
        discordant = only_naive + only_optimal
        pvalue = 1.0
        if discordant:
            pvalue = stats.binomtest(only_naive, discordant, 0.5, alternative="greater").pvalue
        return CheckResult.expect(
            "success-rates",
            pvalue >= SIGNIFICANCE,
            detail=f"optimal {optimal.mean():.3f} vs naive {naive.mean():.3f} "
            f"({discordant} discordant, p={pvalue:.3f})",
            optimal=float(optimal.mean()),
            naive=float(naive.mean()),
            pvalue=float(pvalue),
        )

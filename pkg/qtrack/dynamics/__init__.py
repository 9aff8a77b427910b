"""Jump chains, measurement records, the Wonham filter and the SME."""

from .chain import JumpChain, JumpPath, chain_from_graph, sample_jump_path
from .signal import MeasurementRecord, innovations_driven_record, truth_driven_record
from .wonham import FilterState, Trajectory, run_filter, wonham_step

__all__ = [
    "JumpChain",
    "JumpPath",
    "chain_from_graph",
    "sample_jump_path",
    "MeasurementRecord",
    "innovations_driven_record",
    "truth_driven_record",
    "FilterState",
    "Trajectory",
    "run_filter",
    "wonham_step",
]

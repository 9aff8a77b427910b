"""Counter-based random substreams for reproducible trajectories.

Every trajectory derives its generators from (master seed, trajectory
index) alone, so results do not depend on scheduling or worker count.
Jump sampling, measurement noise and innovations use disjoint substreams.
"""

from dataclasses import dataclass

import numpy as np

JUMPS, NOISE, INNOVATIONS = range(3)


def make_generator(master_seed: int, *spawn_key: int) -> np.random.Generator:
    """Create a Philox generator keyed by the master seed and a spawn path."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class TrajectoryStreams:
    """The independent random sources owned by one trajectory."""

    index: int
    jumps: np.random.Generator
    noise: np.random.Generator
    innovations: np.random.Generator

    @classmethod
    def derive(cls, master_seed: int, index: int) -> "TrajectoryStreams":
        """Derive the substreams of trajectory `index`."""
        return cls(
            index=index,
            jumps=make_generator(master_seed, index, JUMPS),
            noise=make_generator(master_seed, index, NOISE),
            innovations=make_generator(master_seed, index, INNOVATIONS),
        )

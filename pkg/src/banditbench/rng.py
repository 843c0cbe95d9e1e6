"""Deterministic random streams, split per (run, module) label.

Every consumer of randomness (environment, policy, Monte-Carlo suite)
pulls its own generator from an :class:`RngStream`, so adding a policy to
an experiment never perturbs the environment's draw sequence.
"""

import hashlib

import numpy as np


def _label_key(label):
    digest = hashlib.blake2s(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """Seeded factory of independent numpy generators.

    Identical ``(seed, run, label)`` triples reproduce identical draw
    sequences on any platform (SeedSequence spawn keys are stable).
    """

    def __init__(self, seed, run=0):
        self.seed = int(seed)
        self.run = int(run)

    def stream(self, label):
        """Return a fresh generator for the given module label."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.run, _label_key(label)))
        return np.random.default_rng(ss)

    def child(self, run):
        """Stream factory for repetition `run` under the same seed."""
        return RngStream(self.seed, run=run)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, run={self.run})"

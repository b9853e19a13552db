"""Counter-based random streams.

All randomness in this project flows through Philox generators keyed by
``SeedSequence(entropy=seed, spawn_key=path)``.  The path is a short tuple of
small integers naming the consumer, so independent sub-streams are fully
determined by ``(seed, path)`` and results do not depend on scheduling or
evaluation order.

Stream registry (first path element):

    3: one-prompt sampling (lsa)
    4: crossing experiment   (4,0)=population, (4,1,m)=one-step draws, (4,2,m)=trajectory batches
    5: cocycle experiment    (5,0)=population, (5,1,m,j)=realization j at batch size m
    6: multi-prompt SGD      (6,0)=prompts, (6,1)=init, (6,2)=perturbation, (6,3,m)=batches
    7: identity suite
"""

from __future__ import annotations

import numpy as np

STREAM_PROMPT = 3
STREAM_CROSSING = 4
STREAM_COCYCLE = 5
STREAM_MULTIPROMPT = 6
STREAM_IDENTITIES = 7


def stream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the sub-stream named by ``path`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))

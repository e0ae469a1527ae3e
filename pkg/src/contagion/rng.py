"""Deterministic random-stream derivation.

Every stochastic routine in the package draws from a Philox counter-based
generator keyed by ``(seed, namespace, index)``. Distinct paths give
statistically independent streams, and a stream depends only on its path,
never on scheduling, so results are reproducible for any worker count.

Namespaces used by the package:

* 0 -- Monte-Carlo replica ``r`` of the exact portfolio process
* 1 -- i.i.d. class assignment when building a portfolio
* 2 -- martingale-representation validator draws
"""

import numpy as np

REPLICA_NS = 0
PORTFOLIO_NS = 1
VALIDATOR_NS = 2


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for `path` under `seed`."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))

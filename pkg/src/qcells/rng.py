"""Counter-based random streams.

Every stream is a Philox generator keyed by ``SeedSequence([seed, *keys])``,
so draws for (seed, purpose, index) never depend on evaluation order or on
how work is split across threads.

Stream purposes in use:

* ``DEPLOY``      deployment generation (one stream per deployment)
* ``FADING``      per-location fading draws, keyed by location index
"""

from __future__ import annotations

import numpy as np

DEPLOY = 1
FADING = 2


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)])
    return np.random.Generator(np.random.Philox(ss))

"""Deterministic random streams.

All randomness in the package flows through Philox, a counter-based
generator, keyed by a root seed plus a path of component labels.  Two
streams with different label paths are independent regardless of how
many draws either one makes, so parallel execution cannot perturb
results.
"""

from __future__ import annotations

from zlib import crc32

import numpy as np


def _label_key(label) -> int:
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ValueError(f"negative label {label!r}")
        return int(label)
    return crc32(str(label).encode("utf-8"))


def stream(root_seed: int, *labels) -> np.random.Generator:
    """Return the Philox stream identified by (root_seed, *labels).

    Labels may be strings (hashed) or nonnegative integers (used as-is,
    handy for trial/iteration indices).
    """
    seq = np.random.SeedSequence(
        entropy=int(root_seed),
        spawn_key=tuple(_label_key(lab) for lab in labels),
    )
    return np.random.Generator(np.random.Philox(seq))


def derived_seed(root_seed: int, *labels) -> int:
    """Collapse (root_seed, *labels) to a single u64 child seed."""
    seq = np.random.SeedSequence(
        entropy=int(root_seed),
        spawn_key=tuple(_label_key(lab) for lab in labels),
    )
    return int(seq.generate_state(1, dtype=np.uint64)[0])

"""Counter-based random streams for reproducible parallel simulation.

Block ``b`` of a run seeded with ``seed`` draws from Philox keyed by
``(seed, b)`` starting at counter zero. Streams for different blocks never
overlap and no state is shared between workers.
"""

from __future__ import annotations

import numpy as np

_U64 = (1 << 64) - 1


def path_stream(seed: int, block: int) -> np.random.Generator:
    if block < 0:
        raise ValueError(f"block index must be nonnegative, got {block}")
    key = np.array([seed & _U64, block & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def block_layout(n_paths: int, block_size: int) -> list[tuple[int, int]]:
    """``(block_index, paths_in_block)`` for ``n_paths`` split into fixed-size blocks."""
    if n_paths <= 0 or block_size <= 0:
        raise ValueError("n_paths and block_size must be positive")
    full, rest = divmod(n_paths, block_size)
    layout = [(b, block_size) for b in range(full)]
    if rest:
        layout.append((full, rest))
    return layout

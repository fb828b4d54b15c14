"""Weighted block-to-worker assignment along a space-filling curve.

Blocks are ordered by a space-filling curve over their block indices
(Morton by default, Hilbert optional), then the ordered sequence is cut
into one contiguous segment per worker such that the largest per-worker
weight sum is minimized; among partitions achieving that minimum, the
smallest per-worker sum is maximized.  The resulting spread obeys
max - min <= max single block weight.
"""

import numpy as np

from .errors import ConfigError

CURVES = ("morton", "hilbert")


def _spread_bits(v, bits):
    out = 0
    for b in range(bits):
        out |= ((v >> b) & 1) << (3 * b)
    return out


def morton_key(ix, iy, iz, bits=21):
    """Interleave the coordinate bits, x highest."""
    return (_spread_bits(ix, bits) << 2) | (_spread_bits(iy, bits) << 1) \
        | _spread_bits(iz, bits)


def hilbert_key(ix, iy, iz, bits=21):
    """Hilbert curve index via the transpose-form bit algorithm."""
    x = [ix, iy, iz]
    m = 1 << (bits - 1)
    # inverse undo
    q = m
    while q > 1:
        p = q - 1
        for i in range(3):
            if x[i] & q:
                x[0] ^= p
            else:
                t = (x[0] ^ x[i]) & p
                x[0] ^= t
                x[i] ^= t
        q >>= 1
    # Gray encode
    for i in range(1, 3):
        x[i] ^= x[i - 1]
    t = 0
    q = m
    while q > 1:
        if x[2] & q:
            t ^= q - 1
        q >>= 1
    for i in range(3):
        x[i] ^= t
    # interleave the transpose, x highest
    key = 0
    for b in range(bits - 1, -1, -1):
        for i in range(3):
            key = (key << 1) | ((x[i] >> b) & 1)
    return key


def curve_order(grid, curve="morton"):
    """Block ids sorted by their curve key."""
    if curve not in CURVES:
        raise ConfigError(f"unknown space-filling curve {curve!r}")
    bits = max(int(c - 1).bit_length() for c in grid.counts) or 1
    keyf = morton_key if curve == "morton" else hilbert_key
    keyed = [(keyf(*desc.block_index, bits=bits), desc.id)
             for desc in grid.blocks]
    keyed.sort()
    return [bid for _, bid in keyed]


def _min_max_partition(weights, k):
    """Cut `weights` into k contiguous segments minimizing the largest sum,
    then maximizing the smallest sum at that optimum.  Returns the list of
    segment boundaries (k+1 cut indices)."""
    n = len(weights)
    prefix = np.concatenate([[0.0], np.cumsum(weights)])

    def seg(i, j):  # sum of weights[i:j]
        return prefix[j] - prefix[i]

    # dp_max[j][i]: minimal achievable largest segment over weights[:i]
    # split into j segments
    inf = float("inf")
    dp_max = [[inf] * (n + 1) for _ in range(k + 1)]
    dp_max[0][0] = 0.0
    for j in range(1, k + 1):
        for i in range(j, n + 1):
            best = inf
            for c in range(j - 1, i):
                cand = max(dp_max[j - 1][c], seg(c, i))
                if cand < best:
                    best = cand
            dp_max[j][i] = best
    m_star = dp_max[k][n]

    # dp_min[j][i]: maximal achievable smallest segment over weights[:i]
    # split into j segments, subject to every segment sum <= m_star
    eps = 1e-9 * max(1.0, abs(m_star))
    dp_min = [[-inf] * (n + 1) for _ in range(k + 1)]
    dp_min[0][0] = inf
    choice = [[-1] * (n + 1) for _ in range(k + 1)]
    for j in range(1, k + 1):
        for i in range(j, n + 1):
            best = -inf
            arg = -1
            for c in range(j - 1, i):
                s = seg(c, i)
                if s > m_star + eps:
                    continue
                cand = min(dp_min[j - 1][c], s)
                if cand > best:
                    best = cand
                    arg = c
            dp_min[j][i] = best
            choice[j][i] = arg

    cuts = [n]
    i = n
    for j in range(k, 0, -1):
        i = choice[j][i]
        cuts.append(i)
    cuts.reverse()
    return cuts


def balance_blocks_weighted_sfc(grid, n_workers, curve="morton"):
    """Assign every block an owner worker.  Returns the owner array indexed
    by block id and writes it into the descriptors."""
    n_workers = int(n_workers)
    if n_workers < 1:
        raise ConfigError("worker count must be at least 1")
    order = curve_order(grid, curve)
    k = min(n_workers, len(order))
    weights = [grid.blocks[bid].weight for bid in order]
    for w in weights:
        if not (w > 0.0) or not np.isfinite(w):
            raise ConfigError("block weights must be positive and finite")
    cuts = _min_max_partition(weights, k)

    owner = np.zeros(len(order), dtype=np.int64)
    for w in range(k):
        for pos in range(cuts[w], cuts[w + 1]):
            owner[order[pos]] = w
    for desc in grid.blocks:
        desc.owner = int(owner[desc.id])
    return owner

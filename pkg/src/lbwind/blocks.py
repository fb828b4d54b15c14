"""Block-structured decomposition of the global lattice.

The global domain of `global_dims` cells is cut into equal blocks of
`block_dims` cells (divisibility required).  Blocks are identified by their
integer block_index (bx, by, bz) and a linear id in lexicographic order
(bx slowest).  Every block knows its 26 neighbors under periodic wrap; the
`wrap` vector records, per axis, how many domain periods separate the
neighbor from the block (+1: the link crosses the +face).  A position handed
to that neighbor must be shifted by -wrap * global_dims to land in the
neighbor's natural coordinates.  Along non-periodic axes, links that would
cross the domain face are absent.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

# all 26 nonzero neighbor offsets, lexicographic
NEIGHBOR_OFFSETS = tuple(
    (ox, oy, oz)
    for ox in (-1, 0, 1)
    for oy in (-1, 0, 1)
    for oz in (-1, 0, 1)
    if (ox, oy, oz) != (0, 0, 0)
)


@dataclass
class BlockDescriptor:
    id: int
    block_index: tuple   # (bx, by, bz)
    origin: tuple        # global cell coordinate of the interior corner
    size: tuple          # cells per axis (same for every block)
    owner: int = 0
    weight: float = 1.0
    # offset -> (neighbor block id, wrap vector)
    neighbors: dict = field(default_factory=dict)


class BlockGrid:
    def __init__(self, global_dims, block_dims, periodicity, blocks, counts):
        self.global_dims = tuple(global_dims)
        self.block_dims = tuple(block_dims)
        self.periodicity = tuple(bool(p) for p in periodicity)
        self.blocks = blocks
        self.counts = tuple(counts)

    def __len__(self):
        return len(self.blocks)

    def block_id_at(self, bx, by, bz):
        cx, cy, cz = self.counts
        return (bx * cy + by) * cz + bz

    def owner_block_of_position(self, pos):
        """Block whose interior contains the continuous lattice position
        (cell units, wrapped into [0, global_dims) per periodic axis)."""
        idx = []
        for k in range(3):
            x = pos[k]
            if self.periodicity[k]:
                x = x % self.global_dims[k]
            if not (0.0 <= x < self.global_dims[k]):
                raise ConfigError(
                    f"position component {pos[k]} outside the non-periodic domain"
                )
            idx.append(int(x // self.block_dims[k]))
        return self.block_id_at(*idx)


def decompose_domain(global_dims, block_dims, periodicity=(True, True, True)):
    """Cut the global domain into equal blocks and build the neighbor table."""
    global_dims = tuple(int(d) for d in global_dims)
    block_dims = tuple(int(d) for d in block_dims)
    if min(global_dims) < 1 or min(block_dims) < 1:
        raise ConfigError("domain and block dimensions must be positive")
    for g, b in zip(global_dims, block_dims):
        if g % b != 0:
            raise ConfigError(
                f"block dims {block_dims} do not divide global dims {global_dims}"
            )
    counts = tuple(g // b for g, b in zip(global_dims, block_dims))

    blocks = []
    for bx in range(counts[0]):
        for by in range(counts[1]):
            for bz in range(counts[2]):
                bid = (bx * counts[1] + by) * counts[2] + bz
                blocks.append(
                    BlockDescriptor(
                        id=bid,
                        block_index=(bx, by, bz),
                        origin=(bx * block_dims[0], by * block_dims[1],
                                bz * block_dims[2]),
                        size=block_dims,
                    )
                )

    periodicity = tuple(bool(p) for p in periodicity)
    for desc in blocks:
        for off in NEIGHBOR_OFFSETS:
            nb = []
            wrap = []
            valid = True
            for k in range(3):
                j = desc.block_index[k] + off[k]
                w = 0
                if j < 0:
                    if not periodicity[k]:
                        valid = False
                        break
                    j += counts[k]
                    w = -1
                elif j >= counts[k]:
                    if not periodicity[k]:
                        valid = False
                        break
                    j -= counts[k]
                    w = +1
                nb.append(j)
                wrap.append(w)
            if valid:
                nbid = (nb[0] * counts[1] + nb[1]) * counts[2] + nb[2]
                desc.neighbors[off] = (nbid, tuple(wrap))

    return BlockGrid(global_dims, block_dims, periodicity, blocks, counts)

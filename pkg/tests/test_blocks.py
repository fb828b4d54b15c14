"""Decomposition geometry: block layout, neighbor links, wrap vectors."""

import numpy as np
import pytest

from lbwind.blocks import NEIGHBOR_OFFSETS, decompose_domain
from lbwind.errors import ConfigError


def test_block_layout_64_cube():
    grid = decompose_domain((64, 64, 64), (32, 32, 32))
    assert len(grid) == 8
    assert grid.counts == (2, 2, 2)
    # lexicographic ids, bx slowest
    assert grid.blocks[0].block_index == (0, 0, 0)
    assert grid.blocks[1].block_index == (0, 0, 1)
    assert grid.blocks[4].block_index == (1, 0, 0)
    assert grid.blocks[4].origin == (32, 0, 0)
    assert grid.blocks[7].origin == (32, 32, 32)
    for desc in grid.blocks:
        assert desc.size == (32, 32, 32)


def test_indivisible_dims_rejected():
    with pytest.raises(ConfigError):
        decompose_domain((65, 64, 64), (32, 32, 32))
    with pytest.raises(ConfigError):
        decompose_domain((64, 64, 64), (24, 32, 32))


def test_periodic_blocks_have_26_neighbors():
    grid = decompose_domain((96, 64, 64), (32, 32, 32))
    for desc in grid.blocks:
        assert len(desc.neighbors) == 26
        assert set(desc.neighbors) == set(NEIGHBOR_OFFSETS)


def test_single_block_is_its_own_neighbor():
    grid = decompose_domain((32, 32, 32), (32, 32, 32))
    desc = grid.blocks[0]
    assert len(desc.neighbors) == 26
    for off, (nbid, wrap) in desc.neighbors.items():
        assert nbid == 0
        assert wrap == off  # every link crosses the domain


def test_wrap_vectors():
    grid = decompose_domain((64, 64, 64), (32, 32, 32))
    b000 = grid.blocks[grid.block_id_at(0, 0, 0)]
    # crossing the -x face reaches block index (1, ., .) with wrap -1
    nbid, wrap = b000.neighbors[(-1, 0, 0)]
    assert grid.blocks[nbid].block_index == (1, 0, 0)
    assert wrap == (-1, 0, 0)
    # +x neighbor is in-domain, no wrap
    nbid, wrap = b000.neighbors[(1, 0, 0)]
    assert grid.blocks[nbid].block_index == (1, 0, 0)
    assert wrap == (0, 0, 0)
    # corner crossing three faces at once
    nbid, wrap = b000.neighbors[(-1, -1, -1)]
    assert grid.blocks[nbid].block_index == (1, 1, 1)
    assert wrap == (-1, -1, -1)


def test_neighbor_links_are_symmetric():
    grid = decompose_domain((96, 64, 32), (32, 32, 32))
    for desc in grid.blocks:
        for off, (nbid, wrap) in desc.neighbors.items():
            back = (-off[0], -off[1], -off[2])
            nb = grid.blocks[nbid]
            assert back in nb.neighbors
            bid2, wrap2 = nb.neighbors[back]
            assert bid2 == desc.id
            assert wrap2 == (-wrap[0], -wrap[1], -wrap[2])


def test_non_periodic_axis_drops_face_links():
    grid = decompose_domain((64, 64, 64), (32, 32, 32),
                            periodicity=(False, True, True))
    left = grid.blocks[grid.block_id_at(0, 0, 0)]
    # links crossing the -x face are gone: offsets with ox = -1
    missing = [off for off in NEIGHBOR_OFFSETS if off not in left.neighbors]
    assert missing == [off for off in NEIGHBOR_OFFSETS if off[0] == -1]
    right = grid.blocks[grid.block_id_at(1, 0, 0)]
    assert all(off[0] == 1
               for off in NEIGHBOR_OFFSETS if off not in right.neighbors)
    # the in-plane and cross-link structure is intact
    assert (1, 0, 0) in left.neighbors
    assert left.neighbors[(1, 0, 0)][0] == right.id


def test_owner_block_of_position_wraps():
    grid = decompose_domain((64, 64, 64), (32, 32, 32))
    assert grid.owner_block_of_position((1.0, 1.0, 1.0)) == 0
    assert grid.owner_block_of_position((33.0, 0.5, 0.5)) == \
        grid.block_id_at(1, 0, 0)
    # periodic wrap on every axis
    assert grid.owner_block_of_position((-1.0, 65.0, 130.0)) == \
        grid.block_id_at(1, 0, 0)


def test_owner_block_outside_non_periodic_domain():
    grid = decompose_domain((64, 64, 64), (32, 32, 32),
                            periodicity=(False, True, True))
    with pytest.raises(ConfigError):
        grid.owner_block_of_position((-1.0, 1.0, 1.0))

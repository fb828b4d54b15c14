import numpy as np

from lbwind import stencil


def test_counts_and_classes():
    assert stencil.Q == 27
    assert stencil.C.shape == (27, 3)
    # one rest direction, 6 faces, 12 edges, 8 corners
    sq = np.sum(stencil.C * stencil.C, axis=1)
    assert np.count_nonzero(sq == 0) == 1
    assert np.count_nonzero(sq == 1) == 6
    assert np.count_nonzero(sq == 2) == 12
    assert np.count_nonzero(sq == 3) == 8
    assert stencil.C[stencil.REST].tolist() == [0, 0, 0]


def test_weights():
    # class weights 8/27, 2/27, 1/54, 1/216
    sq = np.sum(stencil.C * stencil.C, axis=1)
    expected = {0: 8 / 27, 1: 2 / 27, 2: 1 / 54, 3: 1 / 216}
    for wi, s in zip(stencil.W, sq):
        assert wi == expected[int(s)]
    assert np.isclose(stencil.W.sum(), 1.0, rtol=0, atol=1e-15)


def test_weight_moment_identities():
    # second moment sum w c_a c_b = cs2 delta_ab; fourth-moment isotropy
    w, c = stencil.W, stencil.C.astype(float)
    for a in range(3):
        for b in range(3):
            m2 = np.sum(w * c[:, a] * c[:, b])
            assert abs(m2 - (stencil.CS2 if a == b else 0.0)) < 1e-15
    assert abs(np.sum(w * c[:, 0] ** 4) - stencil.CS2) < 1e-15
    assert abs(np.sum(w * c[:, 0] ** 2 * c[:, 1] ** 2) - stencil.CS4) < 1e-15


def test_opposites():
    c, opp = stencil.C, stencil.OPP
    for i in range(27):
        assert (c[opp[i]] == -c[i]).all()
        assert opp[opp[i]] == i  # involution
    assert opp[stencil.REST] == stencil.REST


def test_index_of_round_trip():
    for i, (cx, cy, cz) in enumerate(stencil.C):
        assert stencil.index_of(cx, cy, cz) == i

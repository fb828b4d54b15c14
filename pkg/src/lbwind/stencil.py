"""D3Q27 lattice stencil: velocities, weights, opposites.

Direction ordering is lexicographic over (cx, cy, cz) in {-1, 0, +1}^3 with
cx slowest:

    i = (cx + 1) * 9 + (cy + 1) * 3 + (cz + 1)

so i = 0 is (-1,-1,-1), i = 13 is the rest particle (0,0,0), i = 26 is
(+1,+1,+1).  With this ordering the opposite direction is simply 26 - i.
Every array in the package that carries a direction axis uses this order.
"""

import numpy as np

Q = 27
CS2 = 1.0 / 3.0  # lattice speed of sound squared
CS4 = CS2 * CS2

# velocity class -> weight: |c|^2 = 0, 1, 2, 3
_CLASS_WEIGHTS = {0: 8.0 / 27.0, 1: 2.0 / 27.0, 2: 1.0 / 54.0, 3: 1.0 / 216.0}


def _build():
    c = np.array(
        [(cx, cy, cz) for cx in (-1, 0, 1) for cy in (-1, 0, 1) for cz in (-1, 0, 1)],
        dtype=np.int64,
    )
    w = np.array([_CLASS_WEIGHTS[int(np.sum(ci * ci))] for ci in c])
    opp = np.array([26 - i for i in range(Q)], dtype=np.int64)
    return c, w, opp


C, W, OPP = _build()
C.setflags(write=False)
W.setflags(write=False)
OPP.setflags(write=False)

CX = C[:, 0].astype(np.float64)
CY = C[:, 1].astype(np.float64)
CZ = C[:, 2].astype(np.float64)
for _a in (CX, CY, CZ):
    _a.setflags(write=False)

REST = 13  # index of the (0,0,0) direction


def index_of(cx, cy, cz):
    """Direction index for a velocity (cx, cy, cz) in {-1,0,1}^3."""
    return (cx + 1) * 9 + (cy + 1) * 3 + (cz + 1)

"""Compiled per-cell collision/streaming kernels.

The per-cell physics is written exactly once (`_bgk_cell`, `_cumulant_cell`)
and reused by the block-loop kernels (driver hot path) and by the batch
wrappers behind the public single-cell API in `collision`.  All per-cell
arithmetic runs in float64 regardless of the storage dtype; values are cast
on load/store.  fastmath stays off so results are IEEE-reproducible and
identical across block decompositions.

Block arrays have shape (nx+2, ny+2, nz+2, ncomp) with a one-cell ghost ring;
interior cells are [1..n] per axis.  The direction axis uses the stencil
ordering of `stencil` (lexicographic over (cx,cy,cz), opposite(i) = 26-i).

Cumulant collision outline (per cell):
  1. rho, force-shifted velocity u.
  2. central moments kappa about u via a three-stage (per-axis) transform;
     the first-order central moments equal -F*dt/2 exactly and are set aside.
  3. normalized moments -> cumulants with the zero-mean combinatorial
     relations (exact here because the set-aside first moments are zero).
  4. relax: second order at omega toward (cs2, cs2, cs2, 0, 0, 0); orders
     3..6 toward 0 at their configured rates; first order at omega toward 0.
  5. cumulants -> moments -> populations (inverse per-axis transform about
     the same u), then add the Guo source term.
On D3Q27 (axis exponents <= 2) the factorized product-form equilibrium has
exactly these target cumulants, so it is a fixed point of the operator.
"""

import numpy as np
from numba import njit

from .stencil import C, W, CS2

_CXI = np.ascontiguousarray(C[:, 0])
_CYI = np.ascontiguousarray(C[:, 1])
_CZI = np.ascontiguousarray(C[:, 2])
_CXF = _CXI.astype(np.float64)
_CYF = _CYI.astype(np.float64)
_CZF = _CZI.astype(np.float64)
_WF = np.ascontiguousarray(W)

_JIT = dict(cache=True, nogil=True, fastmath=False)


@njit(inline="always")
def _guo_add(fl, Fx, Fy, Fz, ux, uy, uz, omega, dt):
    """Add the Guo source S_i = (1-omega/2) w_i [3(c-u)+9(c.u)c].F dt."""
    pref = (1.0 - 0.5 * omega) * dt
    uF = ux * Fx + uy * Fy + uz * Fz
    for i in range(27):
        cF = _CXF[i] * Fx + _CYF[i] * Fy + _CZF[i] * Fz
        cu = _CXF[i] * ux + _CYF[i] * uy + _CZF[i] * uz
        fl[i] += pref * _WF[i] * (3.0 * (cF - uF) + 9.0 * cu * cF)


@njit(inline="always")
def _bgk_cell(fl, Fx, Fy, Fz, omega, dt):
    """BGK collision + Guo forcing on one cell (fl modified in place)."""
    rho = 0.0
    mx = 0.0
    my = 0.0
    mz = 0.0
    for i in range(27):
        fi = fl[i]
        rho += fi
        mx += _CXF[i] * fi
        my += _CYF[i] * fi
        mz += _CZF[i] * fi
    inv_rho = 1.0 / rho
    ux = (mx + 0.5 * dt * Fx) * inv_rho
    uy = (my + 0.5 * dt * Fy) * inv_rho
    uz = (mz + 0.5 * dt * Fz) * inv_rho
    usq = ux * ux + uy * uy + uz * uz
    if omega == 1.0:
        # full relaxation collapses to the equilibrium projection exactly
        for i in range(27):
            cu = _CXF[i] * ux + _CYF[i] * uy + _CZF[i] * uz
            fl[i] = _WF[i] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
    else:
        for i in range(27):
            cu = _CXF[i] * ux + _CYF[i] * uy + _CZF[i] * uz
            feq = _WF[i] * rho * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)
            fl[i] += omega * (feq - fl[i])
    _guo_add(fl, Fx, Fy, Fz, ux, uy, uz, omega, dt)
    return rho, ux, uy, uz


@njit(inline="always")
def _cumulant_cell(fl, Fx, Fy, Fz, omega, w3, w4, w5, w6, dt, s1, s2, kap):
    """Cumulant collision + Guo forcing on one cell.

    s1, s2, kap are caller-provided (3,3,3) float64 scratch arrays so block
    loops allocate them once.  fl is modified in place.
    """
    rho = 0.0
    mx = 0.0
    my = 0.0
    mz = 0.0
    for i in range(27):
        fi = fl[i]
        rho += fi
        mx += _CXF[i] * fi
        my += _CYF[i] * fi
        mz += _CZF[i] * fi
    inv_rho = 1.0 / rho
    ux = (mx + 0.5 * dt * Fx) * inv_rho
    uy = (my + 0.5 * dt * Fy) * inv_rho
    uz = (mz + 0.5 * dt * Fz) * inv_rho

    # ---- forward transform: central moments kappa[a,b,c] about u ----
    zm = -1.0 - uz
    z0 = -uz
    zp = 1.0 - uz
    for dx in range(3):
        for dy in range(3):
            base = dx * 9 + dy * 3
            f0 = fl[base]
            f1 = fl[base + 1]
            f2 = fl[base + 2]
            s1[dx, dy, 0] = f0 + f1 + f2
            s1[dx, dy, 1] = f0 * zm + f1 * z0 + f2 * zp
            s1[dx, dy, 2] = f0 * zm * zm + f1 * z0 * z0 + f2 * zp * zp
    ym = -1.0 - uy
    y0 = -uy
    yp = 1.0 - uy
    for dx in range(3):
        for c in range(3):
            g0 = s1[dx, 0, c]
            g1 = s1[dx, 1, c]
            g2 = s1[dx, 2, c]
            s2[dx, 0, c] = g0 + g1 + g2
            s2[dx, 1, c] = g0 * ym + g1 * y0 + g2 * yp
            s2[dx, 2, c] = g0 * ym * ym + g1 * y0 * y0 + g2 * yp * yp
    xm = -1.0 - ux
    x0 = -ux
    xp = 1.0 - ux
    for b in range(3):
        for c in range(3):
            h0 = s2[0, b, c]
            h1 = s2[1, b, c]
            h2 = s2[2, b, c]
            kap[0, b, c] = h0 + h1 + h2
            kap[1, b, c] = h0 * xm + h1 * x0 + h2 * xp
            kap[2, b, c] = h0 * xm * xm + h1 * x0 * x0 + h2 * xp * xp

    # ---- normalize; set the (exactly known) first moments aside ----
    for a in range(3):
        for b in range(3):
            for c in range(3):
                kap[a, b, c] *= inv_rho
    m1x = kap[1, 0, 0]
    m1y = kap[0, 1, 0]
    m1z = kap[0, 0, 1]

    mu200 = kap[2, 0, 0]
    mu020 = kap[0, 2, 0]
    mu002 = kap[0, 0, 2]
    mu110 = kap[1, 1, 0]
    mu101 = kap[1, 0, 1]
    mu011 = kap[0, 1, 1]
    mu210 = kap[2, 1, 0]
    mu201 = kap[2, 0, 1]
    mu120 = kap[1, 2, 0]
    mu102 = kap[1, 0, 2]
    mu021 = kap[0, 2, 1]
    mu012 = kap[0, 1, 2]
    mu111 = kap[1, 1, 1]

    # ---- moments -> cumulants (zero-mean relations), ascending order ----
    c220 = kap[2, 2, 0] - mu200 * mu020 - 2.0 * mu110 * mu110
    c202 = kap[2, 0, 2] - mu200 * mu002 - 2.0 * mu101 * mu101
    c022 = kap[0, 2, 2] - mu020 * mu002 - 2.0 * mu011 * mu011
    c211 = kap[2, 1, 1] - mu200 * mu011 - 2.0 * mu110 * mu101
    c121 = kap[1, 2, 1] - mu020 * mu101 - 2.0 * mu110 * mu011
    c112 = kap[1, 1, 2] - mu002 * mu110 - 2.0 * mu101 * mu011
    c221 = (kap[2, 2, 1] - mu200 * mu021 - mu020 * mu201
            - 4.0 * mu110 * mu111 - 2.0 * mu101 * mu120 - 2.0 * mu011 * mu210)
    c212 = (kap[2, 1, 2] - mu200 * mu012 - mu002 * mu210
            - 4.0 * mu101 * mu111 - 2.0 * mu110 * mu102 - 2.0 * mu011 * mu201)
    c122 = (kap[1, 2, 2] - mu020 * mu102 - mu002 * mu120
            - 4.0 * mu011 * mu111 - 2.0 * mu110 * mu012 - 2.0 * mu101 * mu021)
    c222 = (kap[2, 2, 2]
            - (mu200 * c022 + mu020 * c202 + mu002 * c220
               + 4.0 * mu110 * c112 + 4.0 * mu101 * c121 + 4.0 * mu011 * c211)
            - (2.0 * mu210 * mu012 + 2.0 * mu201 * mu021
               + 2.0 * mu120 * mu102 + 4.0 * mu111 * mu111)
            - (mu200 * mu020 * mu002 + 2.0 * mu200 * mu011 * mu011
               + 2.0 * mu020 * mu101 * mu101 + 2.0 * mu002 * mu110 * mu110
               + 8.0 * mu110 * mu101 * mu011))

    # ---- relax ----
    r2 = 1.0 - omega
    r3 = 1.0 - w3
    r4 = 1.0 - w4
    r5 = 1.0 - w5
    r6 = 1.0 - w6
    c200p = mu200 + omega * (CS2 - mu200)
    c020p = mu020 + omega * (CS2 - mu020)
    c002p = mu002 + omega * (CS2 - mu002)
    c110p = r2 * mu110
    c101p = r2 * mu101
    c011p = r2 * mu011
    c210p = r3 * mu210
    c201p = r3 * mu201
    c120p = r3 * mu120
    c102p = r3 * mu102
    c021p = r3 * mu021
    c012p = r3 * mu012
    c111p = r3 * mu111
    c220p = r4 * c220
    c202p = r4 * c202
    c022p = r4 * c022
    c211p = r4 * c211
    c121p = r4 * c121
    c112p = r4 * c112
    c221p = r5 * c221
    c212p = r5 * c212
    c122p = r5 * c122
    c222p = r6 * c222

    # ---- cumulants -> moments (inverse relations) ----
    kap[0, 0, 0] = 1.0
    kap[1, 0, 0] = r2 * m1x
    kap[0, 1, 0] = r2 * m1y
    kap[0, 0, 1] = r2 * m1z
    kap[2, 0, 0] = c200p
    kap[0, 2, 0] = c020p
    kap[0, 0, 2] = c002p
    kap[1, 1, 0] = c110p
    kap[1, 0, 1] = c101p
    kap[0, 1, 1] = c011p
    kap[2, 1, 0] = c210p
    kap[2, 0, 1] = c201p
    kap[1, 2, 0] = c120p
    kap[1, 0, 2] = c102p
    kap[0, 2, 1] = c021p
    kap[0, 1, 2] = c012p
    kap[1, 1, 1] = c111p
    kap[2, 2, 0] = c220p + c200p * c020p + 2.0 * c110p * c110p
    kap[2, 0, 2] = c202p + c200p * c002p + 2.0 * c101p * c101p
    kap[0, 2, 2] = c022p + c020p * c002p + 2.0 * c011p * c011p
    kap[2, 1, 1] = c211p + c200p * c011p + 2.0 * c110p * c101p
    kap[1, 2, 1] = c121p + c020p * c101p + 2.0 * c110p * c011p
    kap[1, 1, 2] = c112p + c002p * c110p + 2.0 * c101p * c011p
    kap[2, 2, 1] = (c221p + c200p * c021p + c020p * c201p
                    + 4.0 * c110p * c111p + 2.0 * c101p * c120p
                    + 2.0 * c011p * c210p)
    kap[2, 1, 2] = (c212p + c200p * c012p + c002p * c210p
                    + 4.0 * c101p * c111p + 2.0 * c110p * c102p
                    + 2.0 * c011p * c201p)
    kap[1, 2, 2] = (c122p + c020p * c102p + c002p * c120p
                    + 4.0 * c011p * c111p + 2.0 * c110p * c012p
                    + 2.0 * c101p * c021p)
    kap[2, 2, 2] = (c222p
                    + (c200p * c022p + c020p * c202p + c002p * c220p
                       + 4.0 * c110p * c112p + 4.0 * c101p * c121p
                       + 4.0 * c011p * c211p)
                    + (2.0 * c210p * c012p + 2.0 * c201p * c021p
                       + 2.0 * c120p * c102p + 4.0 * c111p * c111p)
                    + (c200p * c020p * c002p + 2.0 * c200p * c011p * c011p
                       + 2.0 * c020p * c101p * c101p
                       + 2.0 * c002p * c110p * c110p
                       + 8.0 * c110p * c101p * c011p))

    for a in range(3):
        for b in range(3):
            for c in range(3):
                kap[a, b, c] *= rho

    # ---- backward transform: invert x, then y, then z ----
    # 1D inverse of central moments (m0, m1, m2) about velocity u on {-1,0,1}:
    #   g(-1) = [m2 - (1-2u) m1 + (u^2-u) m0] / 2
    #   g( 0) = (1-u^2) m0 - 2u m1 - m2
    #   g(+1) = [m2 + (1+2u) m1 + (u^2+u) m0] / 2
    for b in range(3):
        for c in range(3):
            m0 = kap[0, b, c]
            m1 = kap[1, b, c]
            m2 = kap[2, b, c]
            s1[0, b, c] = 0.5 * (m2 - (1.0 - 2.0 * ux) * m1 + (ux * ux - ux) * m0)
            s1[1, b, c] = (1.0 - ux * ux) * m0 - 2.0 * ux * m1 - m2
            s1[2, b, c] = 0.5 * (m2 + (1.0 + 2.0 * ux) * m1 + (ux * ux + ux) * m0)
    for dx in range(3):
        for c in range(3):
            m0 = s1[dx, 0, c]
            m1 = s1[dx, 1, c]
            m2 = s1[dx, 2, c]
            s2[dx, 0, c] = 0.5 * (m2 - (1.0 - 2.0 * uy) * m1 + (uy * uy - uy) * m0)
            s2[dx, 1, c] = (1.0 - uy * uy) * m0 - 2.0 * uy * m1 - m2
            s2[dx, 2, c] = 0.5 * (m2 + (1.0 + 2.0 * uy) * m1 + (uy * uy + uy) * m0)
    for dx in range(3):
        for dy in range(3):
            m0 = s2[dx, dy, 0]
            m1 = s2[dx, dy, 1]
            m2 = s2[dx, dy, 2]
            base = dx * 9 + dy * 3
            fl[base] = 0.5 * (m2 - (1.0 - 2.0 * uz) * m1 + (uz * uz - uz) * m0)
            fl[base + 1] = (1.0 - uz * uz) * m0 - 2.0 * uz * m1 - m2
            fl[base + 2] = 0.5 * (m2 + (1.0 + 2.0 * uz) * m1 + (uz * uz + uz) * m0)

    _guo_add(fl, Fx, Fy, Fz, ux, uy, uz, omega, dt)
    return rho, ux, uy, uz


@njit(**_JIT)
def collide_bgk_block(f, force, macro, omega, dt):
    """BGK collide every interior cell; refresh macro (rho, u) in place."""
    nx = f.shape[0] - 2
    ny = f.shape[1] - 2
    nz = f.shape[2] - 2
    fl = np.empty(27, np.float64)
    for x in range(1, nx + 1):
        for y in range(1, ny + 1):
            for z in range(1, nz + 1):
                for i in range(27):
                    fl[i] = f[x, y, z, i]
                Fx = np.float64(force[x, y, z, 0])
                Fy = np.float64(force[x, y, z, 1])
                Fz = np.float64(force[x, y, z, 2])
                rho, ux, uy, uz = _bgk_cell(fl, Fx, Fy, Fz, omega, dt)
                for i in range(27):
                    f[x, y, z, i] = fl[i]
                macro[x, y, z, 0] = rho
                macro[x, y, z, 1] = ux
                macro[x, y, z, 2] = uy
                macro[x, y, z, 3] = uz


@njit(**_JIT)
def collide_cumulant_block(f, force, macro, omega, w3, w4, w5, w6, dt):
    """Cumulant collide every interior cell; refresh macro in place."""
    nx = f.shape[0] - 2
    ny = f.shape[1] - 2
    nz = f.shape[2] - 2
    fl = np.empty(27, np.float64)
    s1 = np.empty((3, 3, 3), np.float64)
    s2 = np.empty((3, 3, 3), np.float64)
    kap = np.empty((3, 3, 3), np.float64)
    for x in range(1, nx + 1):
        for y in range(1, ny + 1):
            for z in range(1, nz + 1):
                for i in range(27):
                    fl[i] = f[x, y, z, i]
                Fx = np.float64(force[x, y, z, 0])
                Fy = np.float64(force[x, y, z, 1])
                Fz = np.float64(force[x, y, z, 2])
                rho, ux, uy, uz = _cumulant_cell(
                    fl, Fx, Fy, Fz, omega, w3, w4, w5, w6, dt, s1, s2, kap
                )
                for i in range(27):
                    f[x, y, z, i] = fl[i]
                macro[x, y, z, 0] = rho
                macro[x, y, z, 1] = ux
                macro[x, y, z, 2] = uy
                macro[x, y, z, 3] = uz


@njit(**_JIT)
def moments_block(f, force, macro, dt):
    """Refresh macro (rho, half-force-shifted u) without colliding."""
    nx = f.shape[0] - 2
    ny = f.shape[1] - 2
    nz = f.shape[2] - 2
    for x in range(1, nx + 1):
        for y in range(1, ny + 1):
            for z in range(1, nz + 1):
                rho = 0.0
                mx = 0.0
                my = 0.0
                mz = 0.0
                for i in range(27):
                    fi = np.float64(f[x, y, z, i])
                    rho += fi
                    mx += _CXF[i] * fi
                    my += _CYF[i] * fi
                    mz += _CZF[i] * fi
                inv_rho = 1.0 / rho
                macro[x, y, z, 0] = rho
                macro[x, y, z, 1] = (mx + 0.5 * dt * force[x, y, z, 0]) * inv_rho
                macro[x, y, z, 2] = (my + 0.5 * dt * force[x, y, z, 1]) * inv_rho
                macro[x, y, z, 3] = (mz + 0.5 * dt * force[x, y, z, 2]) * inv_rho


@njit(**_JIT)
def stream_pull_block(fsrc, fdst):
    """Pull streaming: fdst[x] = fsrc[x - c_i] over the interior.

    fsrc must have its ghost ring populated; fdst's ghost ring is left stale
    (it is overwritten by the next halo exchange).
    """
    nx = fsrc.shape[0] - 2
    ny = fsrc.shape[1] - 2
    nz = fsrc.shape[2] - 2
    for x in range(1, nx + 1):
        for y in range(1, ny + 1):
            for z in range(1, nz + 1):
                for i in range(27):
                    fdst[x, y, z, i] = fsrc[x - _CXI[i], y - _CYI[i], z - _CZI[i], i]


@njit(**_JIT)
def collide_bgk_batch(f2, F2, macro2, omega, dt):
    """BGK collide rows of an (N, 27) array (float64, contiguous)."""
    n = f2.shape[0]
    for k in range(n):
        rho, ux, uy, uz = _bgk_cell(f2[k], F2[k, 0], F2[k, 1], F2[k, 2], omega, dt)
        macro2[k, 0] = rho
        macro2[k, 1] = ux
        macro2[k, 2] = uy
        macro2[k, 3] = uz


@njit(**_JIT)
def collide_cumulant_batch(f2, F2, macro2, omega, w3, w4, w5, w6, dt):
    """Cumulant collide rows of an (N, 27) array (float64, contiguous)."""
    n = f2.shape[0]
    s1 = np.empty((3, 3, 3), np.float64)
    s2 = np.empty((3, 3, 3), np.float64)
    kap = np.empty((3, 3, 3), np.float64)
    for k in range(n):
        rho, ux, uy, uz = _cumulant_cell(
            f2[k], F2[k, 0], F2[k, 1], F2[k, 2], omega, w3, w4, w5, w6, dt,
            s1, s2, kap,
        )
        macro2[k, 0] = rho
        macro2[k, 1] = ux
        macro2[k, 2] = uy
        macro2[k, 3] = uz


def warm_up(dtypes=(np.float64,)):
    """Compile the block kernels ahead of timing loops."""
    for dtype in dtypes:
        f = np.zeros((3, 3, 3, 27), dtype)
        f[...] = _WF
        force = np.zeros((3, 3, 3, 3), dtype)
        macro = np.zeros((3, 3, 3, 4), dtype)
        collide_bgk_block(f, force, macro, 1.0, 1.0)
        collide_cumulant_block(f, force, macro, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
        moments_block(f, force, macro, 1.0)
        stream_pull_block(f, f.copy())
    f2 = np.tile(_WF, (2, 1))
    F2 = np.zeros((2, 3))
    m2 = np.zeros((2, 4))
    collide_bgk_batch(f2, F2, m2, 1.0, 1.0)
    collide_cumulant_batch(f2, F2, m2, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)

"""Collision operators, equilibria, and macroscopic moments.

The array API below accepts either a single cell (shape (27,)) or a batch
(shape (..., 27)); forces broadcast the same way with trailing dimension 3.
All operators honor two contracts for any valid state and force F:

  mass:      sum_i f'_i = sum_i f_i                       (exact)
  momentum:  sum_i c_i f'_i = sum_i c_i f_i + F * dt      (Guo forcing)

The velocity entering the equilibria and the force term is the half-force
shifted u = (sum_i c_i f_i + F dt/2) / rho.

Two equilibria are provided: the second-order polynomial form (used by the
BGK operator) and the factorized product form (the exact fixed point of the
cumulant operator).  They agree through O(u^2) and differ at O(u^3).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DegenerateStateError
from .stencil import C, W, CS2

OPERATORS = ("bgk", "cumulant")


@dataclass(frozen=True)
class CollisionConfig:
    operator: str = "bgk"
    omega: float = 1.0
    # relaxation rates for cumulant orders 3, 4, 5, 6
    higher_order_rates: tuple = (1.0, 1.0, 1.0, 1.0)

    def validate(self):
        if self.operator not in OPERATORS:
            raise ConfigError(f"unknown collision operator {self.operator!r}")
        if not (0.0 < self.omega < 2.0):
            raise ConfigError(f"omega must lie in (0, 2), got {self.omega}")
        if len(self.higher_order_rates) != 4:
            raise ConfigError("higher_order_rates needs 4 entries (orders 3..6)")
        for rate in self.higher_order_rates:
            if not (0.0 <= rate <= 2.0):
                raise ConfigError(f"higher-order rate {rate} outside [0, 2]")
        return self


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")


def equilibrium_pdf(rho, u):
    """Second-order polynomial equilibrium, shape (..., 27).

    f_i = w_i rho (1 + 3 c.u + 9/2 (c.u)^2 - 3/2 u.u)
    """
    rho = np.asarray(rho, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    _check_finite("rho", rho)
    _check_finite("u", u)
    if np.any(rho <= 0):
        raise DegenerateStateError("equilibrium requires rho > 0")
    cu = u @ C.T.astype(np.float64)  # (..., 27)
    usq = np.sum(u * u, axis=-1)[..., None]
    return W * rho[..., None] * (1.0 + 3.0 * cu + 4.5 * cu * cu - 1.5 * usq)


def product_equilibrium(rho, u):
    """Factorized product-form equilibrium, shape (..., 27).

    f_ijk = rho * g_i(ux) * g_j(uy) * g_k(uz) with the one-dimensional
    three-point weights g_-1 = (u^2 - u + cs2)/2, g_0 = 1 - u^2 - cs2,
    g_+1 = (u^2 + u + cs2)/2.  At u = 0 this reduces to w_i rho.
    """
    rho = np.asarray(rho, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    _check_finite("rho", rho)
    _check_finite("u", u)
    if np.any(rho <= 0):
        raise DegenerateStateError("equilibrium requires rho > 0")

    def g(uc):
        return np.stack(
            [
                0.5 * (uc * uc - uc + CS2),
                1.0 - uc * uc - CS2,
                0.5 * (uc * uc + uc + CS2),
            ],
            axis=-1,
        )

    gx = g(u[..., 0])
    gy = g(u[..., 1])
    gz = g(u[..., 2])
    ix = C[:, 0] + 1
    iy = C[:, 1] + 1
    iz = C[:, 2] + 1
    return rho[..., None] * gx[..., ix] * gy[..., iy] * gz[..., iz]


def macroscopic_moments(f, F=None, dt=1.0):
    """Density and force-shifted velocity: rho = sum f, u = (sum c f + F dt/2)/rho."""
    f = np.asarray(f, dtype=np.float64)
    _check_finite("f", f)
    rho = f.sum(axis=-1)
    if np.any(rho <= 0):
        raise DegenerateStateError("non-positive density")
    mom = f @ C.astype(np.float64)
    if F is not None:
        mom = mom + 0.5 * dt * np.asarray(F, dtype=np.float64)
    u = mom / rho[..., None]
    return rho, u


def guo_source(u, F, omega, dt=1.0):
    """Guo source term S_i = (1 - omega/2) w_i [3(c_i - u) + 9(c_i.u) c_i] . F dt."""
    u = np.asarray(u, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    cF = F @ C.T.astype(np.float64)
    cu = u @ C.T.astype(np.float64)
    uF = np.sum(u * F, axis=-1)[..., None]
    return (1.0 - 0.5 * omega) * dt * W * (3.0 * (cF - uF) + 9.0 * cu * cF)


def collide(f, F, cfg, dt=1.0):
    """Apply one collision (BGK or cumulant) + Guo forcing; returns new array.

    f: (..., 27), F: broadcastable (..., 3) or None.  Runs in float64.
    """
    cfg.validate()
    f = np.asarray(f, dtype=np.float64)
    _check_finite("f", f)
    shape = f.shape
    if shape[-1] != 27:
        raise ValueError("last axis of f must have length 27")
    f2 = np.ascontiguousarray(f.reshape(-1, 27)).copy()
    n = f2.shape[0]
    if F is None:
        F2 = np.zeros((n, 3))
    else:
        F = np.asarray(F, dtype=np.float64)
        _check_finite("F", F)
        F2 = np.ascontiguousarray(
            np.broadcast_to(F, shape[:-1] + (3,)).reshape(-1, 3)
        ).copy()
    macro2 = np.empty((n, 4))
    if cfg.operator == "bgk":
        _kernels.collide_bgk_batch(f2, F2, macro2, float(cfg.omega), float(dt))
    else:
        w3, w4, w5, w6 = (float(r) for r in cfg.higher_order_rates)
        _kernels.collide_cumulant_batch(
            f2, F2, macro2, float(cfg.omega), w3, w4, w5, w6, float(dt)
        )
    return f2.reshape(shape)

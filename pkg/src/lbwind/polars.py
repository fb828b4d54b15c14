"""Airfoil polar tables: tabulated lift/drag versus angle of attack."""

import csv
import io
import warnings

import numpy as np

from .errors import ConfigError


class PolarTable:
    """Tabulated C_L(alpha), C_D(alpha); alpha in radians, strictly
    increasing.  Lookups interpolate linearly and clamp outside the table
    range (warning once per table)."""

    def __init__(self, id, alpha, cl, cd):
        self.id = str(id)
        self.alpha = np.asarray(alpha, dtype=np.float64)
        self.cl = np.asarray(cl, dtype=np.float64)
        self.cd = np.asarray(cd, dtype=np.float64)
        if self.alpha.size == 0:
            raise ConfigError(f"polar {id!r}: empty table")
        if self.alpha.size < 2:
            raise ConfigError(f"polar {id!r}: needs at least 2 rows")
        if self.alpha.shape != self.cl.shape or self.alpha.shape != self.cd.shape:
            raise ConfigError(f"polar {id!r}: column lengths differ")
        if not np.all(np.diff(self.alpha) > 0.0):
            raise ConfigError(f"polar {id!r}: alpha must be strictly increasing")
        for name, col in (("alpha", self.alpha), ("cl", self.cl),
                          ("cd", self.cd)):
            if not np.all(np.isfinite(col)):
                raise ConfigError(f"polar {id!r}: non-finite {name} value")
        self._warned_clamp = False

    @classmethod
    def from_csv(cls, path_or_text, id=None):
        """Read `alpha_deg,cl,cd` rows (header required, alpha in degrees)."""
        if hasattr(path_or_text, "read"):
            text = path_or_text.read()
            name = id or "polar"
        else:
            try:
                with open(path_or_text, "r", newline="") as fh:
                    text = fh.read()
                name = id or str(path_or_text)
            except FileNotFoundError:
                raise ConfigError(f"polar table file not found: {path_or_text}")
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r and any(c.strip() for c in r)]
        if not rows:
            raise ConfigError(f"polar {name!r}: empty table")
        header = [c.strip() for c in rows[0]]
        if header != ["alpha_deg", "cl", "cd"]:
            raise ConfigError(
                f"polar {name!r}: header must be alpha_deg,cl,cd, got {header}")
        try:
            data = np.array([[float(c) for c in r[:3]] for r in rows[1:]])
        except ValueError as e:
            raise ConfigError(f"polar {name!r}: bad numeric value ({e})")
        if data.size == 0:
            raise ConfigError(f"polar {name!r}: empty table")
        return cls(name, np.deg2rad(data[:, 0]), data[:, 1], data[:, 2])

    def lookup(self, alpha):
        """(C_L, C_D) at alpha (rad); clamps outside the tabulated range."""
        a = float(alpha)
        if a < self.alpha[0] or a > self.alpha[-1]:
            if not self._warned_clamp:
                warnings.warn(
                    f"polar {self.id!r}: angle of attack "
                    f"{np.rad2deg(a):.2f} deg outside table range "
                    f"[{np.rad2deg(self.alpha[0]):.2f}, "
                    f"{np.rad2deg(self.alpha[-1]):.2f}] deg; clamping",
                    RuntimeWarning, stacklevel=2)
                self._warned_clamp = True
            a = min(max(a, self.alpha[0]), self.alpha[-1])
        cl = float(np.interp(a, self.alpha, self.cl))
        cd = float(np.interp(a, self.alpha, self.cd))
        return cl, cd


def lookup_polar(table, alpha):
    """(C_L, C_D) from a PolarTable at alpha (rad)."""
    if table is None:
        raise ConfigError("no polar table attached to this actuator point")
    return table.lookup(alpha)

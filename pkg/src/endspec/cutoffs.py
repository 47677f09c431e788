"""Smooth cutoff functions on the radius.

All localization in the package is built from a single decreasing transition
function chi with

    chi(t) = 1  for t <= 1,      chi(t) = 0  for t >= 2,
    0 <= chi <= 1,               chi' <= 0.

Inside the band (1, 2) we use the quintic smoothstep, which is C^2 at the
band edges; its value and first three derivatives are available in closed
form so that derived quantities (eta, the smoothed mean curvature, the
effective potential and its two derivatives) never need numerical
differentiation.

Derived families, for dyadic scales R_n = 2^n:

    chi_n(r)    = chi(r / R_n)
    chibar_n    = 1 - chi_n
    chi_{m,n}   = chibar_m * chi_n          (n > m >= 0)
    eta(r)      = 1 - chi(2 r / r0)         (0 below r0/2, 1 above r0)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError


def _smoothstep(s):
    """Quintic smoothstep on [0, 1] and its first three derivatives."""
    s = np.clip(s, 0.0, 1.0)
    v = s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    d1 = 30.0 * s * s * (1.0 + s * (-2.0 + s))
    d2 = s * (60.0 + s * (-180.0 + 120.0 * s))
    d3 = 60.0 + s * (-360.0 + 360.0 * s)
    return v, d1, d2, d3


@dataclass(frozen=True)
class CutoffSpec:
    """Transition function and the dimensionless interior radius r0 >= 2."""

    r0: float = 2.0

    def __post_init__(self):
        if self.r0 < 2.0:
            raise ContractError(f"r0 must be >= 2, got {self.r0}")

    # -- the base transition function ------------------------------------

    def chi(self, t, order: int = 0):
        """chi(t) or its derivative of the given order (0..3).

        Outside the band (1, 2) all derivatives vanish; at the band edges the
        third derivative is taken one-sided from inside.
        """
        t = np.asarray(t, dtype=float)
        inside = (t > 1.0) & (t < 2.0)
        v, d1, d2, d3 = _smoothstep(np.where(inside, t - 1.0, 0.0))
        if order == 0:
            out = np.where(t <= 1.0, 1.0, np.where(t >= 2.0, 0.0, 1.0 - v))
        elif order == 1:
            out = np.where(inside, -d1, 0.0)
        elif order == 2:
            out = np.where(inside, -d2, 0.0)
        elif order == 3:
            out = np.where(inside, -d3, 0.0)
        else:
            raise ContractError(f"chi derivatives available up to order 3, got {order}")
        return out if out.ndim else float(out)

    # -- dyadic family ----------------------------------------------------

    def chi_n(self, r, n: int):
        return self.chi(np.asarray(r, dtype=float) / 2.0**n)

    def chibar_n(self, r, n: int):
        return 1.0 - self.chi_n(r, n)

    def chi_mn(self, r, m: int, n: int):
        if not n > m >= 0:
            raise ContractError(f"chi_mn requires n > m >= 0, got m={m}, n={n}")
        return self.chibar_n(r, m) * self.chi_n(r, n)

    # -- interior cutoff eta ----------------------------------------------

    def eta(self, r, order: int = 0, scale: float | None = None):
        """eta = 1 - chi(2 r / scale), derivatives in r up to order 3.

        The default scale is r0, giving the interior cutoff: eta = 0 for
        r <= r0/2 and eta = 1 for r >= r0.  Other scales realize the
        threshold cutoff eta_lambda = 1 - chi(2 r / r_lambda).
        """
        R = self.r0 if scale is None else float(scale)
        r = np.asarray(r, dtype=float)
        c = self.chi(2.0 * r / R, order=order)
        if order == 0:
            return 1.0 - c
        return -c * (2.0 / R) ** order

"""Model presets: warped ends, potential wells and the two-ended line.

A ``Model`` bundles everything the solvers and experiments need: the warp
profile with its cross-section, the potential splitting, the cutoff family,
and (for one-dimensional multi-end models) the line data.  Multi-end models
live on an x-grid [x_min, R_max] with a smooth escape function r(x) that
equals x on the right end and is clamped at 1 on the left end, so the
left end sits entirely inside the first dyadic annulus; the potential steps
smoothly between the two end levels, which are the two critical energies.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .conditions import Caps, ConditionReport, InequalityRow, check_conditions
from .cutoffs import CutoffSpec
from .errors import ContractError
from .geometry import (PotentialSplit, WarpProfile, const_profile,
                       critical_energy, exp_profile, geometric_split,
                       hyperbolic_profile, power_profile,
                       stretched_exp_profile, tabulated_profile)
from .radial import (OuterPolicy, RadialGrid, assemble_line_operator,
                     assemble_radial_operator, line_grid, profile_modes,
                     uniform_grid)


@dataclass(frozen=True)
class LineEnd:
    """Data for one-dimensional two-ended models."""

    x_min: float
    v_of_x: Callable           # potential on the line
    r_of_x: Callable           # escape function (>= 1 after clamping)
    dr_of_x: Callable          # r'
    d2r_of_x: Callable         # r'' for the curvature part of the h-form
    level_right: float         # potential level on the right end (= lambda0)
    level_left: float          # potential level on the left end  (= lambda1)


@dataclass(frozen=True)
class Model:
    name: str
    kind: str                  # "warped" | "line"
    profile: WarpProfile
    potential: PotentialSplit
    cutoffs: CutoffSpec
    line: LineEnd | None = None
    thresholds: tuple = ()
    # fallback h-form constants for models without a full condition check
    fallback_C: float = 1.0
    fallback_tau: float = 2.0

    # -- structure ---------------------------------------------------------

    def make_grid(self, r_max: float, h: float) -> RadialGrid:
        if self.kind == "line":
            return line_grid(self.line.x_min, r_max, h, self.line.r_of_x)
        return uniform_grid(r_max, h)

    def modes(self, cap: float):
        if self.kind == "line":
            return [(0.0, 1)]
        return list(profile_modes(self.profile, cap))

    def operator(self, mu: float, grid: RadialGrid, z: complex,
                 policy: OuterPolicy | None = None, **kw):
        if self.kind == "line":
            return assemble_line_operator(self.line.v_of_x, grid, z, policy, **kw)
        return assemble_radial_operator(self.profile, self.potential, mu, grid,
                                        z, policy, cutoffs=self.cutoffs, **kw)

    # -- cached analysis -----------------------------------------------------

    def lambda0(self) -> float:
        return _lambda0_cached(self)

    def conditions(self, caps: Caps | None = None) -> ConditionReport:
        return _conditions_cached(self, caps or Caps())


@lru_cache(maxsize=64)
def _lambda0_cached(model: Model) -> float:
    return critical_energy(model.profile, model.potential).value


@lru_cache(maxsize=64)
def _conditions_cached(model: Model, caps: Caps) -> ConditionReport:
    if model.kind == "line":
        lam0 = model.lambda0()
        rows = [InequalityRow(name="line_model_metadata", verdict="pass",
                              margin=float("inf"), witness_r=1.0,
                              constant=model.fallback_C)]
        return ConditionReport(
            rows=rows, sigma=caps.sigma_max, tau=model.fallback_tau,
            rho_prime=caps.rho_prime_max, rho=caps.rho_max,
            constant=model.fallback_C, lambda0=lam0,
            beta_c=0.5 * min(caps.sigma_max, model.fallback_tau, caps.rho_max),
            grid_meta={"kind": "line"})
    return check_conditions(model.profile, model.potential, model.cutoffs,
                            caps=caps)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _warped(name, profile, potential=None, thresholds=()):
    cut = CutoffSpec(r0=profile.r0)
    pot = potential if potential is not None else geometric_split(profile, cut)
    return Model(name=name, kind="warped", profile=profile, potential=pot,
                 cutoffs=cut, thresholds=tuple(thresholds))


def free_model(r0: float = 2.0) -> Model:
    """Bare half-line [1, oo), Dirichlet wall at 1, no potential."""
    return _warped("free", const_profile(d=1, r0=r0))


def power_model(theta: float, d: int, r0: float = 2.0) -> Model:
    return _warped(f"power(theta={theta:g},d={d})", power_profile(theta, d, r0))


def euclidean_model(d: int, r0: float = 2.0) -> Model:
    """f = r^2 with a round sphere cross-section."""
    m = _warped(f"euclidean(d={d})", power_profile(2.0, d, r0))
    return m


def exp_model(kappa: float, d: int, r0: float = 2.0, amp: float = 1.0,
              lower_c: float = 0.0, lower_theta: float = 0.5) -> Model:
    return _warped(f"exp(kappa={kappa:g},d={d})",
                   exp_profile(kappa, d, r0, amp=amp, lower_c=lower_c,
                               lower_theta=lower_theta))


def stretched_exp_model(delta: float, theta: float, d: int,
                        r0: float = 2.0) -> Model:
    return _warped(f"stretchedexp(delta={delta:g},theta={theta:g},d={d})",
                   stretched_exp_profile(delta, theta, d, r0))


def tabulated_model(r_table, f_table, d: int, r0: float = 2.0) -> Model:
    return _warped(f"tabulated(d={d})",
                   tabulated_profile(r_table, f_table, d, r0))


def hyperbolic_model(d: int, r0: float = 2.0) -> Model:
    return _warped(f"hyperbolic(d={d})", hyperbolic_profile(d, r0))


def square_well_model(depth: float = 5.0, a: float = 1.0, b: float = 2.0,
                      r0: float = 2.0) -> Model:
    """Free half-line with the bounded compactly-supported well V = -depth on [a, b].

    The well goes into the short-range slot q22 of the splitting, so q1 = 0
    and the critical energy stays 0.
    """
    if not (1.0 <= a < b):
        raise ContractError("well must sit inside [1, oo)")
    prof = const_profile(d=1, r0=r0)
    cut = CutoffSpec(r0=r0)

    def well(r):
        # midpoint value at the jumps = cell average, keeps eigenvalues O(h^2)
        r = np.asarray(r, dtype=float)
        v = np.where((r > a) & (r < b), -float(depth), 0.0)
        on_edge = np.isclose(r, a, rtol=0.0, atol=1e-9) \
            | np.isclose(r, b, rtol=0.0, atol=1e-9)
        return np.where(on_edge, -0.5 * float(depth), v)

    pot = geometric_split(prof, cut, V_short=well)
    return Model(name=f"square_well(depth={depth:g})", kind="warped",
                 profile=prof, potential=pot, cutoffs=cut)


def multiend_model(lambda0: float = 0.0, lambda1: float = 4.0,
                   x_min: float = -24.0, r0: float = 2.0) -> Model:
    """Two-ended line with potential levels lambda1 (left) and lambda0 (right).

    The escape function is r(x) = 1 for x <= 1 and r(x) = x for x >= 2 with a
    smooth monotone blend between, so r-balls are unbounded to the left and
    lambda0 = limsup q1 is the level of the right end.  The energy window
    (lambda0, lambda1) is the certified interval; lambda1 is recorded as a
    threshold that eigenvalue scans exclude by a small window.
    """
    if not lambda1 > lambda0:
        raise ContractError("need lambda1 > lambda0")
    if x_min > -4.0:
        raise ContractError("x_min must leave room for the left end (<= -4)")
    lam0, lam1 = float(lambda0), float(lambda1)
    cut = CutoffSpec(r0=r0)

    def v_of_x(x):
        x = np.asarray(x, dtype=float)
        # smooth monotone step: lambda1 for x <= -1, lambda0 for x >= 1
        return lam0 + (lam1 - lam0) * cut.chi((x + 3.0) / 2.0)

    def r_of_x(x):
        x = np.asarray(x, dtype=float)
        w = 1.0 - cut.chi(x)
        return 1.0 + (x - 1.0) * w

    def dr_of_x(x):
        x = np.asarray(x, dtype=float)
        return (1.0 - cut.chi(x)) - (x - 1.0) * cut.chi(x, order=1)

    def d2r_of_x(x):
        x = np.asarray(x, dtype=float)
        c1 = cut.chi(x, order=1)
        c2 = cut.chi(x, order=2)
        return -2.0 * c1 - (x - 1.0) * c2

    line = LineEnd(x_min=float(x_min), v_of_x=v_of_x, r_of_x=r_of_x,
                   dr_of_x=dr_of_x, d2r_of_x=d2r_of_x,
                   level_right=lam0, level_left=lam1)
    prof = const_profile(d=1, r0=r0)

    def q1(r):
        return np.full_like(np.asarray(r, dtype=float), lam0)

    zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    pot = PotentialSplit(V=q1, q1=q1, dq1=zero, q11=q1, dq11=zero, d2q11=zero)
    return Model(name=f"multiend({lam0:g},{lam1:g})", kind="line",
                 profile=prof, potential=pot, cutoffs=cut, line=line,
                 thresholds=(lam1,))

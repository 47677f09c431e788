"""Asymptotic complex phase and the radial Riccati equation.

For a spectral parameter z = lambda +- i Gamma above the critical energy the
outgoing/incoming behavior on the end is encoded by the phase

    a_z = eta_lambda [ sqrt(2 (z - q1)) +- (1/4) (p^r q11) / (z - q1) ],

with the square-root branch Re sqrt(w) > 0 off the cut (-oo, 0] and the
threshold cutoff eta_lambda = 1 - chi(2 r / r_lambda).  The threshold radius
r_lambda is the smallest dyadic radius >= r0 with

    lambda + lambda0 - 2 q1(r) >= 0   for all r >= r_lambda / 2,

which keeps z - q1 away from the cut wherever the phase is switched on.

a_z approximately solves the radial Riccati equation

    +- p^r a + a^2 - 2 |dr|^2 (z - q1) = 0,

and the substitution a = +- (p^r b)/b linearizes that equation into
(p^r)^2 b = 2 (z - q1) b, a one-dimensional eigenequation integrated here as
an exact reference.  The radial operator A = p^r - (i/2) Delta r acts as
-i d/dr on density-flattened (reduced) functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .cutoffs import CutoffSpec
from .errors import BranchError, ContractError, EndspecError
from .geometry import (CriticalEnergy, PotentialSplit, WarpProfile,
                       critical_energy, geometry_at)
from .radial import RadialGrid


@dataclass(frozen=True)
class PhaseSpec:
    """Sampled phase a_z on a grid, with its threshold data."""

    z: complex
    sign: int
    r_lambda: float
    a: np.ndarray
    eta_lambda: np.ndarray
    grid: RadialGrid

    @property
    def gamma(self) -> float:
        return abs(self.z.imag)

    def a_at(self, r: float) -> complex:
        rr = self.grid.radii
        return complex(np.interp(r, rr, self.a.real) + 1j * np.interp(r, rr, self.a.imag))


@dataclass(frozen=True)
class RiccatiSolution:
    """Exact Riccati phase a = +-(p^r b)/b from the linearized equation."""

    z: complex
    sign: int
    r: np.ndarray
    b: np.ndarray
    a: np.ndarray
    ode_tol: float


def r_lambda(profile: WarpProfile, potential: PotentialSplit, lam: float,
             lambda0: float | CriticalEnergy | None = None,
             horizon: float = 2.0**14, samples_per_block: int = 64) -> float:
    """Smallest dyadic threshold radius R >= r0 for the energy lam.

    Dyadic quantization replaces the abstract smooth decreasing function of
    the energy; only the support property above matters downstream.  The
    result is monotone non-increasing in lam by construction.
    """
    if lambda0 is None:
        lambda0 = critical_energy(profile, potential, horizon=horizon)
    lam0 = lambda0.value if isinstance(lambda0, CriticalEnergy) else float(lambda0)
    if not lam > lam0:
        raise ContractError(f"lambda={lam} must exceed the critical energy {lam0}")
    r0 = profile.r0
    candidates = [r0]
    R = 2.0 ** np.ceil(np.log2(r0) + 1e-12)
    while R <= horizon:
        if R > r0:
            candidates.append(float(R))
        R *= 2.0
    for R in candidates:
        rr = np.geomspace(R / 2.0, horizon, max(samples_per_block,
                          int(samples_per_block * np.log2(horizon / (R / 2.0)))))
        q1 = np.asarray(potential.q1(rr), dtype=float)
        if np.all(lam + lam0 - 2.0 * q1 >= 0.0):
            return float(R)
    raise ContractError(
        f"no threshold radius below horizon {horizon}: lambda={lam} too close to {lam0}")


def phase_a(profile: WarpProfile, potential: PotentialSplit, z: complex, sign: int,
            grid: RadialGrid, cutoffs: CutoffSpec | None = None,
            r_lam: float | None = None, lambda0: float | None = None,
            with_correction: bool = True) -> PhaseSpec:
    """Sample the asymptotic phase a_z on the grid.

    ``sign`` selects the branch (+1 outgoing / -1 incoming); p^r q11 is taken
    from the declared derivative of q11.  ``with_correction=False`` drops the
    second bracket term (the cruder one-term approximation), which is useful
    for quantifying how much the correction improves the Riccati residual.
    """
    if sign not in (+1, -1):
        raise ContractError("sign must be +1 or -1")
    z = complex(z)
    gamma = z.imag
    if not 0.0 <= abs(gamma) < 1.0:
        raise ContractError(f"Gamma must lie in [0, 1), got {gamma}")
    if cutoffs is None:
        cutoffs = CutoffSpec(r0=profile.r0)
    if r_lam is None:
        r_lam = r_lambda(profile, potential, z.real, lambda0=lambda0)
    rr = grid.radii
    eta_l = np.asarray(cutoffs.eta(rr, scale=r_lam), dtype=float)
    q1 = np.asarray(potential.q1(rr), dtype=float)
    w = z - q1
    active = eta_l > 0.0
    on_cut = active & (w.real <= 0.0) & (w.imag == 0.0)
    if np.any(on_cut):
        raise BranchError(
            f"z - q1 hit the branch cut at r={rr[on_cut][0]:.6g} inside the phase region")
    a = np.zeros(rr.size, dtype=complex)
    root = np.sqrt(2.0 * w[active])
    a[active] = root
    if with_correction:
        dq11 = np.asarray(potential.dq11(rr), dtype=float)
        a[active] += sign * 0.25 * (-1j * dq11[active]) / w[active]
    a *= eta_l
    return PhaseSpec(z=z, sign=sign, r_lambda=float(r_lam), a=a,
                     eta_lambda=eta_l, grid=grid)


def grid_phase(a, h: float):
    """Dispersion-matched phase for the three-point stencil.

    A discrete plane wave exp(i kappa h j) of the central second-difference
    stencil with local wavenumber a satisfies -i D phi = (sin(kappa h)/h) phi
    with sin(kappa h)/h = a sqrt(1 - (a h / 2)^2).  Measuring (A - a) phi or
    closing the outgoing boundary row against this corrected value removes
    the O(h^2) dispersion floor that would otherwise mask decaying radiation
    remainders on large domains.
    """
    a = np.asarray(a, dtype=complex)
    return a * np.sqrt(1.0 - (a * h / 2.0) ** 2)


def _central_derivative(values, h):
    d = np.empty_like(values)
    d[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    d[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    return d


@dataclass(frozen=True)
class ResidualProfile:
    """Pointwise Riccati defect with a dyadic-decade decay fit."""

    r: np.ndarray
    residual: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    reliable: bool

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual)) if self.residual.size else 0.0

    @property
    def negligible(self) -> bool:
        """Residual at the numerical floor everywhere (exact solution)."""
        return self.max_residual <= 1e-10


def riccati_residual(phase: PhaseSpec, profile: WarpProfile,
                     potential: PotentialSplit, grid: RadialGrid,
                     fit_decades: int = 2) -> ResidualProfile:
    """| +- p^r a + a^2 - 2 |dr|^2 (z - q1) | with a log-log decay fit.

    The derivative of a uses three-point central differences; points inside
    the threshold cutoff band and the two grid edges are excluded.  The decay
    exponent is the least-squares slope over the last ``fit_decades`` dyadic
    decades, flagged unreliable when R^2 < 0.9.
    """
    rr = grid.radii
    da = _central_derivative(phase.a, grid.h)
    q1 = np.asarray(potential.q1(rr), dtype=float)
    resid = np.abs(phase.sign * (-1j * da) + phase.a**2 - 2.0 * (phase.z - q1))
    keep = (rr > phase.r_lambda * 1.0001) & (np.arange(rr.size) > 0) \
        & (np.arange(rr.size) < rr.size - 1)
    r_keep, v_keep = rr[keep], resid[keep]
    lo = grid.r_max / 2.0**fit_decades
    band = (r_keep >= lo) & (v_keep > 0.0)
    if np.count_nonzero(band) < 8:
        return ResidualProfile(r=r_keep, residual=v_keep, slope=np.nan,
                               intercept=np.nan, r_squared=0.0, reliable=False)
    x = np.log(r_keep[band])
    y = np.log(v_keep[band])
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return ResidualProfile(r=r_keep, residual=v_keep, slope=float(slope),
                           intercept=float(intercept), r_squared=float(r2),
                           reliable=bool(r2 >= 0.9))


def riccati_exact(profile: WarpProfile, potential: PotentialSplit, z: complex,
                  sign: int, grid: RadialGrid, rtol: float = 1e-10,
                  atol: float = 1e-12, step: float | None = None,
                  cutoffs: CutoffSpec | None = None,
                  r_lam: float | None = None) -> RiccatiSolution:
    """Integrate (p^r)^2 b = 2 (z - q1) b inward and return a = +-(p^r b)/b.

    Initial data at the outer edge comes from the approximate phase
    (b = 1, b' = sign * i a(R_max)), so the exact and approximate phases agree
    there and their difference decays as r grows.  Inward integration keeps
    the outgoing branch stable.  ``step`` switches from the adaptive
    Runge-Kutta 4(5) pair to a fixed-step classical RK4 (used by the
    convergence-order checks).
    """
    if sign not in (+1, -1):
        raise ContractError("sign must be +1 or -1")
    ph = phase_a(profile, potential, z, sign, grid, cutoffs=cutoffs, r_lam=r_lam)
    rr = grid.radii
    start = float(max(ph.r_lambda, rr[0]))
    sel = rr >= start - 1e-12
    r_eval = rr[sel]
    a_end = ph.a[-1]

    def rhs(r, y):
        b, bp = y[0] + 1j * y[1], y[2] + 1j * y[3]
        q1 = complex(potential.q1(r))
        bpp = -2.0 * (z - q1) * b
        return [bp.real, bp.imag, bpp.real, bpp.imag]

    y0 = [1.0, 0.0, (sign * 1j * a_end).real, (sign * 1j * a_end).imag]
    if step is None:
        sol = solve_ivp(rhs, (r_eval[-1], r_eval[0]), y0, t_eval=r_eval[::-1],
                        method="RK45", rtol=rtol, atol=atol)
        if not sol.success:
            raise EndspecError(f"Riccati linearization failed: {sol.message}")
        y = sol.y[:, ::-1]
    else:
        y = _rk4_inward(rhs, r_eval, y0, step)
    b = y[0] + 1j * y[1]
    bp = y[2] + 1j * y[3]
    small = np.abs(b) < 1e-12 * np.max(np.abs(b))
    if np.any(small):
        raise EndspecError(
            f"b vanished near r={r_eval[small][0]:.6g}; phase undefined there")
    a = sign * (-1j * bp) / b
    return RiccatiSolution(z=complex(z), sign=sign, r=r_eval, b=b, a=a,
                           ode_tol=rtol if step is None else step**4)


def _rk4_inward(rhs, r_eval, y0, step):
    out = np.empty((4, r_eval.size))
    y = np.asarray(y0, dtype=float)
    out[:, -1] = y
    for j in range(r_eval.size - 1, 0, -1):
        r_hi, r_lo = r_eval[j], r_eval[j - 1]
        n_sub = max(1, int(round((r_hi - r_lo) / step)))
        hh = (r_lo - r_hi) / n_sub
        r = r_hi
        for _ in range(n_sub):
            k1 = np.asarray(rhs(r, y))
            k2 = np.asarray(rhs(r + 0.5 * hh, y + 0.5 * hh * k1))
            k3 = np.asarray(rhs(r + 0.5 * hh, y + 0.5 * hh * k2))
            k4 = np.asarray(rhs(r + hh, y + hh * k3))
            y = y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            r += hh
        out[:, j - 1] = y
    return out


def apply_A(profile: WarpProfile, phi, grid: RadialGrid,
            representation: str = "reduced",
            cutoffs: CutoffSpec | None = None):
    """Apply A = p^r - (i/2) Delta r to a grid function.

    On reduced (density-flattened) functions A acts as -i d/dr; on unreduced
    functions the mean-curvature term is kept.  Central differences make the
    discrete operator symmetric for interior-supported functions.
    """
    if representation not in ("reduced", "unreduced"):
        raise ContractError(f"unknown representation {representation!r}")
    rep = getattr(phi, "representation", None)
    values = np.asarray(getattr(phi, "values", phi), dtype=complex)
    if rep is not None and rep != representation:
        raise ContractError(
            f"grid function carries representation {rep!r}, requested {representation!r}")
    out = -1j * _central_derivative(values, grid.h)
    if representation == "unreduced":
        pt = geometry_at(profile, cutoffs, grid.radii)
        out = out - 0.5j * pt.delta_r * values
    return out

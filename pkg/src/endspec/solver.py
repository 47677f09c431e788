"""Discrete resolvent solves and the truncated eigenvalue scan.

Two independent outer treatments are kept deliberately:

  * complex shift: solve (h_mu - lambda - i Gamma) phi = psi with Dirichlet
    truncation on a domain long enough to absorb the wave
    (Gamma (R_max - 1) >= 8 unless explicitly overridden);
  * outgoing row: solve at real lambda with the last row enforcing
    phi' = +- i a(R_max) phi.

Their agreement as Gamma -> 0 is itself an acceptance-level check of the
outgoing selection rule.

The eigenvalue scan diagonalizes the Dirichlet-truncated symmetric operator
on an interval and classifies each eigenpair by the decay of its dyadic
annulus profile: genuine point spectrum decays, while discretized continuum
shows a flat profile together with eigenvalue drift under domain doubling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, solve_banded

from .cutoffs import CutoffSpec
from .errors import (AbsorptionError, BranchError, ConditioningError,
                     ContractError)
from .geometry import PotentialSplit, WarpProfile
from .phase import grid_phase, phase_a
from .radial import (BesovProfile, OuterPolicy, RadialGrid, RadialOperator,
                     assemble_radial_operator, besov_norms, l2_norm,
                     uniform_grid)


@dataclass(frozen=True)
class ResolventSolution:
    """Solution of (h_mu - z) phi = psi with its verified residual."""

    mu: float
    z: complex
    method: str                  # "shift" | "outgoing"
    phi: np.ndarray              # full-grid values (walls included)
    residual: float
    grid: RadialGrid
    info: dict = field(default_factory=dict)


def _solve_tridiag(dl, dd, du, rhs):
    n = dd.size
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = du
    ab[1, :] = dd
    ab[2, :-1] = dl
    return solve_banded((1, 1), ab, rhs)


def resolve(op: RadialOperator, psi, allow_unabsorbed: bool = False,
            residual_tol: float = 1e-8, blowup_limit: float = 1e13) -> ResolventSolution:
    """Direct tridiagonal solve of (h_mu - z) phi = psi.

    The residual is verified by re-multiplication.  A shift solve (Dirichlet
    outer row, Im z != 0) on a domain with Gamma (R_max - 1) < 8 is refused
    unless ``allow_unabsorbed`` is set, since the reflected wave then
    contaminates every Gamma-limit experiment.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.size != op.grid.n:
        raise ContractError("psi must live on the operator's grid")
    gamma = op.z.imag
    if op.policy.kind == "dirichlet":
        if gamma == 0.0:
            raise ContractError("shift solve needs Im z != 0 (or an outgoing policy)")
        if abs(gamma) * (op.grid.r_max - 1.0) < 8.0 and not allow_unabsorbed:
            raise AbsorptionError(
                f"Gamma*(R_max-1) = {abs(gamma) * (op.grid.r_max - 1.0):.2f} < 8; "
                "enlarge the domain or pass allow_unabsorbed=True")
    i0 = op.first_unknown
    rhs = psi[i0:i0 + op.n_unknowns] * op.rhs_scale
    u = _solve_tridiag(op.dl, op.dd, op.du, rhs)
    if not np.all(np.isfinite(u.view(float))):
        raise ConditioningError("solver produced non-finite values", estimate=np.inf)
    scale = float(np.linalg.norm(rhs)) or 1.0
    growth = float(np.linalg.norm(u)) / scale
    if growth > blowup_limit:
        raise ConditioningError(
            f"solution grew by {growth:.2e}: z is within grid resolution of a "
            "discrete eigenvalue of the truncated problem", estimate=growth)
    resid = float(np.linalg.norm(op.matvec(u) - rhs)) / scale
    if resid > residual_tol:
        raise ConditioningError(f"residual {resid:.2e} above {residual_tol:.1e}",
                                estimate=resid)
    method = "shift" if op.policy.kind == "dirichlet" else "outgoing"
    return ResolventSolution(mu=op.mu, z=op.z, method=method, phi=op.embed(u),
                             residual=resid, grid=op.grid,
                             info={"growth": growth})


def resolve_outgoing(profile: WarpProfile, potential: PotentialSplit, mu: float,
                     grid: RadialGrid, lam: float, sign: int, psi,
                     cutoffs: CutoffSpec | None = None,
                     lambda0: float | None = None,
                     r_lam: float | None = None) -> ResolventSolution:
    """Solve (h_mu - lambda) phi = psi with the outgoing (sign=+1) or
    incoming (sign=-1) boundary relation phi' = +- i a(R_max) phi."""
    ph = phase_a(profile, potential, complex(lam), sign, grid,
                 cutoffs=cutoffs, lambda0=lambda0, r_lam=r_lam)
    a_end = complex(grid_phase(ph.a[-1], grid.h))
    if not a_end.real > 0.0:
        raise BranchError(f"phase at the outer edge has Re a = {a_end.real:.3g} <= 0")
    op = assemble_radial_operator(profile, potential, mu, grid, complex(lam),
                                  policy=OuterPolicy.outgoing(a_end, sign),
                                  cutoffs=cutoffs)
    sol = resolve(op, psi)
    sol.info["a_end"] = a_end
    sol.info["r_lambda"] = ph.r_lambda
    return sol


# ---------------------------------------------------------------------------
# eigenvalue scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenEntry:
    """One eigenpair of the truncated problem with its classification."""

    eigenvalue: float
    refined: float
    drift: float
    profile: BesovProfile
    profile_slope: float
    artifact: bool
    near_threshold: bool


@dataclass(frozen=True)
class EigenScanResult:
    interval: tuple
    entries: tuple
    lambda0: float | None
    grid: RadialGrid

    def genuine(self):
        return [e for e in self.entries if not e.artifact and not e.near_threshold]

    def artifacts(self):
        return [e for e in self.entries if e.artifact]


def _dirichlet_tridiag(profile, potential, mu, grid, cutoffs):
    op = assemble_radial_operator(profile, potential, mu, grid, 0.0,
                                  policy=OuterPolicy.dirichlet(), cutoffs=cutoffs,
                                  resolution_action="warn")
    return op.dd.real.copy(), op.dl.real.copy()


def _eig_interval(dd, dl, interval):
    lo, hi = interval
    vals, vecs = eigh_tridiagonal(dd, dl, select="v", select_range=(lo, hi))
    return vals, vecs


def eigen_scan(profile: WarpProfile, potential: PotentialSplit, mu: float,
               grid: RadialGrid, interval, refine: bool = True,
               flat_slope: float = -0.25, drift_tol: float = 1e-6,
               thresholds=(), threshold_window: float = 0.05,
               lambda0: float | None = None,
               cutoffs: CutoffSpec | None = None) -> EigenScanResult:
    """Scan the Dirichlet-truncated spectrum on a bounded interval.

    Classification per eigenpair: the annulus profile R_nu^{-1/2}||F_nu phi||
    must decay (log2-slope <= ``flat_slope`` over the last three full annuli)
    for a genuine eigenfunction; a flat profile combined with eigenvalue
    drift above 10 * ``drift_tol`` under domain doubling marks a truncation
    artifact.  ``refine`` adds an h-halving Richardson step so genuine
    eigenvalues carry an O(h^4) estimate.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise ContractError("scan interval must be non-degenerate")
    dd, dl = _dirichlet_tridiag(profile, potential, mu, grid, cutoffs)
    vals, vecs = _eig_interval(dd, dl, (lo, hi))

    # domain doubling for the drift diagnostic
    grid2 = uniform_grid(2.0 * grid.r_max, grid.h, r_min=grid.radii[0])
    dd2, dl2 = _dirichlet_tridiag(profile, potential, mu, grid2, cutoffs)
    pad = 0.1 * (hi - lo) + 10.0 * drift_tol
    vals2, _ = _eig_interval(dd2, dl2, (lo - pad, hi + pad))

    # h-halving for the Richardson refinement
    if refine and vals.size:
        gridh = uniform_grid(grid.r_max, 0.5 * grid.h, r_min=grid.radii[0])
        ddh, dlh = _dirichlet_tridiag(profile, potential, mu, gridh, cutoffs)
        valsh, _ = _eig_interval(ddh, dlh, (lo - pad, hi + pad))
    else:
        valsh = vals

    entries = []
    for j, lam in enumerate(vals):
        phi = np.zeros(grid.n)
        phi[1:-1] = vecs[:, j]
        nrm = l2_norm(phi, grid)
        if nrm > 0:
            phi = phi / nrm
        prof = besov_norms(phi, grid)
        slope = prof.tail_slope(3)
        slope = 0.0 if slope is None else slope
        drift = float(np.min(np.abs(vals2 - lam))) if vals2.size else np.inf
        refined = lam
        if refine and valsh.size:
            lam_h = valsh[np.argmin(np.abs(valsh - lam))]
            refined = (4.0 * lam_h - lam) / 3.0
        near = any(abs(lam - t) <= threshold_window for t in thresholds)
        artifact = (slope > flat_slope) and (drift > 10.0 * drift_tol)
        entries.append(EigenEntry(eigenvalue=float(lam), refined=float(refined),
                                  drift=drift, profile=prof,
                                  profile_slope=float(slope),
                                  artifact=bool(artifact), near_threshold=near))
    entries.sort(key=lambda e: e.eigenvalue)
    return EigenScanResult(interval=(lo, hi), entries=tuple(entries),
                           lambda0=lambda0, grid=grid)


def eigen_scan_tridiag(dd, dl, grid: RadialGrid, interval,
                       dd2=None, dl2=None, grid2=None,
                       flat_slope: float = -0.25, drift_tol: float = 1e-6,
                       thresholds=(), threshold_window: float = 0.05,
                       lambda0: float | None = None) -> EigenScanResult:
    """Scan an explicitly assembled symmetric tridiagonal (line models).

    Same classification as ``eigen_scan``; the doubled-domain matrices are
    supplied by the caller since line models own their grids.
    """
    lo, hi = float(interval[0]), float(interval[1])
    vals, vecs = _eig_interval(np.asarray(dd, float), np.asarray(dl, float), (lo, hi))
    if dd2 is not None:
        pad = 0.1 * (hi - lo) + 10.0 * drift_tol
        vals2, _ = _eig_interval(np.asarray(dd2, float), np.asarray(dl2, float),
                                 (lo - pad, hi + pad))
    else:
        vals2 = np.array([])
    entries = []
    for j, lam in enumerate(vals):
        phi = np.zeros(grid.n)
        phi[1:-1] = vecs[:, j]
        nrm = l2_norm(phi, grid)
        if nrm > 0:
            phi = phi / nrm
        prof = besov_norms(phi, grid)
        slope = prof.tail_slope(3)
        slope = 0.0 if slope is None else slope
        drift = float(np.min(np.abs(vals2 - lam))) if vals2.size else np.inf
        near = any(abs(lam - t) <= threshold_window for t in thresholds)
        artifact = (slope > flat_slope) and (drift > 10.0 * drift_tol)
        entries.append(EigenEntry(eigenvalue=float(lam), refined=float(lam),
                                  drift=drift, profile=prof,
                                  profile_slope=float(slope),
                                  artifact=bool(artifact), near_threshold=near))
    entries.sort(key=lambda e: e.eigenvalue)
    return EigenScanResult(interval=(lo, hi), entries=tuple(entries),
                           lambda0=lambda0, grid=grid)

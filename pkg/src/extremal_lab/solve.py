"""Minimal solutions, continuation along the ray gam = sigma * lam, and the
extremal pair at the fold.

Minimal solutions are reached from below. A few monotone (shifted Picard)
sweeps from a subsolution are followed by Newton steps. F and G are
increasing and convex, and the Jacobian is an M-matrix below the fold, so
Newton iterates from a subsolution increase monotonically. A decreasing step
is therefore taken as evidence that the parameter lies beyond the fold.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh, lu_factor, lu_solve

from .discretize import DiscreteOperator
from .errors import (ConstraintHit, ConstraintViolation, DomainError, InfeasibleStart,
                     NeedMoreRecords, NoSolution, NumericalFailure)
from .systems import SystemSpec
from .verify import StabilityForm, stability_indicator

log = logging.getLogger(__name__)

GELFAND_CAP = 50.0
DEFAULT_CAP = 1e8


class MonotonicityViolation(NumericalFailure):
    """u or v decreased at some node between consecutive branch records."""


@dataclass
class BranchRecord:
    lam: float
    gam: float
    u: np.ndarray
    v: np.ndarray
    newton_iters: int
    residual_norm: float
    stability_indicator: Optional[float] = None

    @property
    def sup_u(self) -> float:
        return float(np.max(self.u))

    @property
    def sup_v(self) -> float:
        return float(np.max(self.v))


@dataclass
class StepPolicy:
    lambda0: Optional[float] = None
    initial_step: Optional[float] = None
    growth: float = 2.0
    resolution: float = 1e-4  # relative bracket width at which the fold is declared
    max_steps: int = 1000
    max_records: int = 500
    tol: float = 1e-10
    max_iters: int = 50

    def __post_init__(self):
        if not self.growth >= 1:
            raise DomainError("step growth factor must be >= 1")
        if not 0 < self.resolution < 1:
            raise DomainError("resolution must lie in (0, 1)")


@dataclass
class Branch:
    records: List[BranchRecord]
    sigma: float
    status: str
    lambda_lower: float
    lambda_upper: float
    system: SystemSpec = field(repr=False, default=None)
    scalar: bool = False

    @property
    def lambda_star(self) -> float:
        if math.isinf(self.lambda_upper):
            return self.lambda_lower
        return 0.5 * (self.lambda_lower + self.lambda_upper)

    @property
    def gamma_star(self) -> float:
        return self.sigma * self.lambda_star

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])


def _residual(A, lam, gam, system, u, v):
    F, G, *_ = system.eval(u, v)
    ru, rv = A @ u - lam * F, A @ v - gam * G
    scale = max(float(np.max(np.abs(lam * F))), float(np.max(np.abs(gam * G))), 1e-300)
    return ru, rv, max(float(np.max(np.abs(ru))), float(np.max(np.abs(rv)))) / scale


def _cap_for(system: SystemSpec, cap: Optional[float]) -> float:
    if cap is not None:
        return cap
    return GELFAND_CAP if system.family == "gelfand" else DEFAULT_CAP


def _guard(system, cap, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)) or float(np.max(a)) > cap:
            raise NoSolution(f"iterate exceeded the blow-up cap {cap:g}")
    try:
        system._admissible(*arrays)
    except ConstraintViolation as exc:
        raise ConstraintHit(str(exc)) from exc


def _monotone_sweeps(A, system, lam, gam, u, v, sweeps, cap):
    """u <- (A + c)^{-1}(lam F + c u); c bounds lam F_u so the map is order preserving."""
    N = len(u)
    for _ in range(sweeps):
        F, G, Fu, _, _, Gv = system.eval(u, v)
        cu = 1.1 * lam * float(np.max(Fu))
        cv = 1.1 * gam * float(np.max(Gv))
        un = cho_solve(cho_factor(A + cu * np.eye(N)), lam * F + cu * u)
        vn = cho_solve(cho_factor(A + cv * np.eye(N)), gam * G + cv * v)
        _guard(system, cap, un, vn)
        scale = max(float(np.max(np.abs(un))), float(np.max(np.abs(vn))), 1e-300)
        if min(float(np.min(un - u)), float(np.min(vn - v))) < -1e-8 * scale:
            raise NumericalFailure("monotone sweep decreased: the start is not a subsolution")
        # clip rounding-level decreases so the iterate stays a subsolution
        u, v = np.maximum(un, u), np.maximum(vn, v)
    return u, v


def minimal_solution(opr: DiscreteOperator, system: SystemSpec, lam: float, gam: float,
                     init: Optional[Tuple[np.ndarray, np.ndarray]] = None, tol: float = 1e-10,
                     max_iters: int = 50, cap: Optional[float] = None, sweeps: int = 2,
                     scalar: bool = False) -> BranchRecord:
    """Minimal solution at (lam, gam) from the subsolution ``init`` (default zero).

    ``scalar`` solves the reduction u = v of a symmetric family with lam = gam.
    """
    if not (lam > 0 and gam > 0):
        raise DomainError("lam and gam must be positive")
    if scalar and (not system.symmetric or lam != gam):
        raise DomainError("scalar mode needs a symmetric family and lam == gam")
    A = opr.matrix
    N = opr.N
    cap = _cap_for(system, cap)
    u = np.zeros(N) if init is None else np.array(init[0], dtype=float)
    v = np.zeros(N) if init is None else np.array(init[1], dtype=float)
    if scalar:
        v = u
    u, v = _monotone_sweeps(A, system, lam, gam, u, v, sweeps, cap)
    if scalar:
        u = v = np.maximum(u, v)

    I = np.eye(N)
    for it in range(1, max_iters + 1):
        if scalar:
            phi, dphi = system.scalar(u)
            r = A @ u - lam * phi
            J = A - lam * dphi[:, None] * I
            rhs = -r
        else:
            F, G, Fu, Fv, Gu, Gv = system.eval(u, v)
            ru, rv = A @ u - lam * F, A @ v - gam * G
            J = np.block([[A - lam * Fu[:, None] * I, -lam * Fv[:, None] * I],
                          [-gam * Gu[:, None] * I, A - gam * Gv[:, None] * I]])
            rhs = -np.concatenate([ru, rv])
        try:
            delta = lu_solve(lu_factor(J, check_finite=False), rhs, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise NoSolution(f"singular Jacobian: {exc}") from exc
        dn = float(np.max(np.abs(delta)))
        wn = max(float(np.max(np.abs(u))), float(np.max(np.abs(v))), 1.0)
        if float(np.min(delta)) < -1e-6 * dn - 1e-12 * wn:
            raise NoSolution("Newton step decreased the iterate (beyond the fold)")
        if scalar:
            u = v = u + delta
        else:
            u, v = u + delta[:N], v + delta[N:]
        _guard(system, cap, u, v)
        _, _, res = _residual(A, lam, gam, system, u, v)
        if res <= tol and dn <= 1e-6 * wn:
            return BranchRecord(lam, gam, u.copy(), v.copy(), it, res)
    raise NoSolution(f"no convergence in {max_iters} Newton iterations")


def first_eigenvalue(opr: DiscreteOperator) -> float:
    return float(eigh(opr.matrix, subset_by_index=[0, 0], eigvals_only=True)[0])


def continue_branch(opr: DiscreteOperator, system: SystemSpec, sigma: float,
                    policy: Optional[StepPolicy] = None, compute_stability: bool = True,
                    scalar: Optional[bool] = None) -> Branch:
    """March lam upward along gam = sigma lam until the fold is bracketed."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    policy = policy or StepPolicy()
    if scalar is None:
        scalar = system.symmetric and sigma == 1.0
    lam = policy.lambda0 or 1e-3 * first_eigenvalue(opr) / max(1.0, sigma)
    step = policy.initial_step or lam

    def attempt(l, init):
        rec = minimal_solution(opr, system, l, sigma * l, init=init, tol=policy.tol,
                               max_iters=policy.max_iters, scalar=scalar)
        if compute_stability:
            rec.stability_indicator = stability_indicator(StabilityForm.at(opr, system, rec))
        return rec

    try:
        rec = attempt(lam, None)
    except NoSolution as exc:
        raise InfeasibleStart(f"no minimal solution at the starting lam={lam:g}: {exc}") from exc
    records = [rec]
    lam_fail, fail_kind = math.inf, None
    status = "StepLimit"
    for _ in range(policy.max_steps):
        last = records[-1]
        if lam_fail - last.lam <= policy.resolution * last.lam:
            status = "ConstraintHit" if fail_kind == "constraint" else "FoldFound"
            break
        if len(records) >= policy.max_records:
            break
        trial = last.lam + step
        if trial >= lam_fail:
            trial = last.lam + 0.5 * (lam_fail - last.lam)
        try:
            rec = attempt(trial, (last.u, last.v))
        except ConstraintHit:
            lam_fail, fail_kind = trial, "constraint"
            step = 0.5 * (trial - last.lam)
            continue
        except NoSolution:
            lam_fail, fail_kind = trial, "fold"
            step = 0.5 * (trial - last.lam)
            continue
        _assert_monotone(last, rec)
        records.append(rec)
        if math.isinf(lam_fail):
            step *= policy.growth
    lower = records[-1].lam
    return Branch(records=records, sigma=sigma, status=status, lambda_lower=lower,
                  lambda_upper=lam_fail, system=system, scalar=scalar)


def _assert_monotone(prev: BranchRecord, new: BranchRecord, rtol: float = 1e-8):
    scale = max(new.sup_u, new.sup_v, 1.0)
    du = float(np.min(new.u - prev.u))
    dv = float(np.min(new.v - prev.v))
    if min(du, dv) < -rtol * scale:
        raise MonotonicityViolation(
            f"branch not monotone between lam={prev.lam:g} and lam={new.lam:g} (min change {min(du, dv):.3e})")


@dataclass
class ExtremalEstimate:
    u: np.ndarray
    v: np.ndarray
    lambda_star: float
    sup_u: float
    sup_v: float
    weak_F: float
    weak_G: float


def _lagrange_at_zero(taus, values, target=0.0):
    taus = np.asarray(taus, dtype=float)
    out = np.zeros_like(values[0], dtype=float)
    for i, ti in enumerate(taus):
        w = 1.0
        for j, tj in enumerate(taus):
            if j != i:
                w *= (target - tj) / (ti - tj)
        out = out + w * values[i]
    return out


def extrapolate(branch: Branch, lam_target: float, k: int = 3):
    """Interpolate (u, v) in tau = sqrt(lam* - lam) through the k records nearest the fold."""
    recs = branch.records
    if len(recs) < k:
        raise NeedMoreRecords(f"need at least {k} records, branch has {len(recs)}")
    ls = branch.lambda_star
    near = recs[-k:]
    taus = [math.sqrt(max(ls - r.lam, 0.0)) for r in near]
    if len(set(taus)) < k:
        raise NeedMoreRecords("records too close to separate in sqrt(lam* - lam)")
    target = math.sqrt(max(ls - lam_target, 0.0))
    u = _lagrange_at_zero(taus, [r.u for r in near], target)
    v = _lagrange_at_zero(taus, [r.v for r in near], target)
    return u, v


def extremal_estimate(branch: Branch, opr: DiscreteOperator, k: int = 3) -> ExtremalEstimate:
    """(u*, v*) by extrapolation to lam*, plus int F(u*, v*) delta^s and int G delta^s."""
    u, v = extrapolate(branch, branch.lambda_star, k)
    u, v = np.maximum(u, branch.records[-1].u), np.maximum(v, branch.records[-1].v)
    sysm = branch.system
    try:
        F, G, *_ = sysm.eval(u, v)
    except ConstraintViolation:
        F = G = np.full_like(u, np.inf)
    delta_s = opr.grid.distance_to_boundary() ** opr.kernel.s
    return ExtremalEstimate(u=u, v=v, lambda_star=branch.lambda_star,
                            sup_u=float(np.max(u)), sup_v=float(np.max(v)),
                            weak_F=opr.grid.integrate(F * delta_s),
                            weak_G=opr.grid.integrate(G * delta_s))

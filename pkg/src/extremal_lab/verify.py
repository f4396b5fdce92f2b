"""Verification engines: the discrete stability form of minimal solutions,
the single-test-function corollaries, the integral estimate chains and the
pointwise inequalities those chains rest on.

All integrals over the interval use the grid rule h * sum(.), matching the
h-weighting of the energy form, so discrete identities hold exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.linalg import LinAlgError, eigh

from .discretize import DiscreteOperator, energy_form
from .errors import ConstraintViolation, DomainError, NumericalFailure
from .systems import Nonlinearity, SystemSpec

EPS_SWEEP = (0.01, 0.05, 0.1)


@dataclass(frozen=True)
class EstimateReport:
    name: str
    lhs: float
    rhs: float
    passed: bool
    quantities: Dict[str, float] = field(default_factory=dict)
    tolerance: float = 0.0

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @classmethod
    def compare(cls, name, lhs, rhs, tol=1e-8, **quantities):
        lhs, rhs = float(lhs), float(rhs)
        finite = math.isfinite(lhs) and math.isfinite(rhs)
        ok = finite and (rhs - lhs) >= -tol * max(abs(lhs), abs(rhs))
        return cls(name=name, lhs=lhs, rhs=rhs, passed=bool(ok),
                   quantities={k: float(v) for k, v in quantities.items()}, tolerance=tol)

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "pass": self.passed, "quantities": dict(self.quantities)}


# --------------------------------------------------------------------------- stability


@dataclass
class StabilityForm:
    """Q[(z, e)] = E(z, z)/lam + E(e, e)/gam - int (F_u z^2 + G_v e^2 + 2 sqrt(F_v G_u) z e).

    E already carries the factor 1/2 of the double integral and the exterior
    part, so it is exactly the right-hand side of the continuous inequality.
    """
    opr: DiscreteOperator
    system: SystemSpec
    lam: float
    gam: float
    u: np.ndarray
    v: np.ndarray

    @classmethod
    def at(cls, opr, system, record) -> "StabilityForm":
        return cls(opr, system, record.lam, record.gam, np.asarray(record.u), np.asarray(record.v))

    def weights(self):
        _, _, Fu, Fv, Gu, Gv = self.system.eval(self.u, self.v)
        cross = np.sqrt(np.maximum(Fv * Gu, 0.0))
        return Fu, Gv, cross

    def matrix(self) -> np.ndarray:
        """Q divided by the mass form h I, as a dense symmetric 2N x 2N matrix."""
        A = self.opr.matrix
        Fu, Gv, S = self.weights()
        N = self.opr.N
        K = np.empty((2 * N, 2 * N))
        K[:N, :N] = A / self.lam
        K[N:, N:] = A / self.gam
        K[:N, N:] = 0.0
        K[N:, :N] = 0.0
        i = np.arange(N)
        K[i, i] -= Fu
        K[N + i, N + i] -= Gv
        K[i, N + i] = -S
        K[N + i, i] = -S
        return K

    def value(self, zeta, eta) -> float:
        Fu, Gv, S = self.weights()
        h = self.opr.grid.h
        nonlin = h * float(np.sum(Fu * zeta ** 2 + Gv * eta ** 2 + 2 * S * zeta * eta))
        return (energy_form(self.opr, zeta, zeta) / self.lam
                + energy_form(self.opr, eta, eta) / self.gam - nonlin)


def stability_indicator(form: StabilityForm, return_vector: bool = False):
    """Smallest generalized eigenvalue of Q against the grid mass form."""
    K = form.matrix()
    if not np.all(np.isfinite(K)):
        raise NumericalFailure("stability matrix has non-finite entries")
    try:
        w, vec = eigh(K, subset_by_index=[0, 0], check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"eigensolver failed: {exc}") from exc
    mu = float(w[0])
    return (mu, vec[:, 0]) if return_vector else mu


# --------------------------------------------------------------------------- corollaries


def _weight_symmetric(system: SystemSpec, u, v):
    """w with sqrt(lam gam) * int w z^2 <= E(z, z) (the single-test-function form)."""
    _, _, _, Fv, Gu, _ = system.eval(u, v)
    return np.sqrt(Fv * Gu)


def proof_test_functions(system: SystemSpec, u, v, ts: Sequence[float] = (1.0, 1.5, 2.0)):
    """The test functions used in the integral estimates, keyed by a label."""
    fam, out = system.family, {}
    with np.errstate(over="ignore"):
        if fam == "gelfand":
            for t in ts:
                out[f"exp(t u/2)-1, t={t:g}"] = np.expm1(t * u / 2)
        elif fam == "lane_emden":
            p = system.p
            out["(1+u)^((p+1)/2)-1"] = (1 + u) ** ((p + 1) / 2) - 1
            for t in ts:
                out[f"(1+u)^((t+1)/2)-1, t={t:g}"] = (1 + u) ** ((t + 1) / 2) - 1
        elif fam == "mems":
            p = system.p
            out["(1-u)^((1-p)/2)-1"] = (1 - u) ** ((1 - p) / 2) - 1
            for t in ts:
                if t > 1:
                    out[f"(1-u)^((1-t)/2)-1, t={t:g}"] = (1 - u) ** ((1 - t) / 2) - 1
    return {k: val for k, val in out.items() if np.all(np.isfinite(val))}


def generic_test_bank(opr: DiscreteOperator, n_hats: int = 5):
    """Hats at a few nodes and smooth bumps, all vanishing outside the interval."""
    x, R, N = opr.grid.nodes, opr.grid.R, opr.N
    bank = {}
    for k in np.unique(np.linspace(0, N - 1, n_hats).round().astype(int)):
        e = np.zeros(N)
        e[k] = 1.0
        bank[f"hat@{k}"] = e
    y = x / R
    bank["bump (1-x^2)"] = 1 - y ** 2
    bank["bump (1-x^2)^2"] = (1 - y ** 2) ** 2
    bank["bump exp"] = np.exp(-1.0 / np.maximum(1 - y ** 2, 1e-300))
    bank["odd x(1-x^2)"] = y * (1 - y ** 2)
    return bank


def check_corollary_inequality(opr: DiscreteOperator, system: SystemSpec, record,
                               test_bank: Optional[dict] = None, tol: float = 1e-8) -> EstimateReport:
    """Worst case of the corollary inequality over a test bank.

    Symmetric families: sqrt(lam gam) int sqrt(F_v G_u) z^2 <= E(z, z).
    Gradient family: the two-test-function form with (z, e), using pairs
    (z, sqrt(gam/lam) z) and (f'(u) - a, g'(v) - b).
    """
    u, v = np.asarray(record.u), np.asarray(record.v)
    lam, gam = record.lam, record.gam
    h = opr.grid.h
    bank = dict(generic_test_bank(opr)) if test_bank is None else dict(test_bank)
    worst, worst_name, worst_pair = math.inf, "", (0.0, 0.0)
    if system.family != "gradient":
        bank.update(proof_test_functions(system, u, v))
        w = _weight_symmetric(system, u, v)
        for name, z in bank.items():
            lhs = math.sqrt(lam * gam) * h * float(np.sum(w * z * z))
            rhs = energy_form(opr, z, z)
            rel = (rhs - lhs) / max(abs(lhs), abs(rhs), 1e-300)
            if rel < worst:
                worst, worst_name, worst_pair = rel, name, (lhs, rhs)
    else:
        form = StabilityForm.at(opr, system, record)
        Fu, Gv, S = form.weights()
        pairs = {name: (z, math.sqrt(gam / lam) * z) for name, z in bank.items()}
        pairs["(f'(u)-a, g'(v)-b)"] = (system.f(u, 1) - system.f(0.0, 1), system.g(v, 1) - system.g(0.0, 1))
        for name, (z, e) in pairs.items():
            lhs = h * float(np.sum(Fu * z * z + Gv * e * e + 2 * S * z * e))
            rhs = energy_form(opr, z, z) / lam + energy_form(opr, e, e) / gam
            rel = (rhs - lhs) / max(abs(lhs), abs(rhs), 1e-300)
            if rel < worst:
                worst, worst_name, worst_pair = rel, name, (lhs, rhs)
    if not bank:
        return EstimateReport("corollary", 0.0, 0.0, True)
    lhs, rhs = worst_pair
    return EstimateReport.compare(f"corollary[{worst_name}]", lhs, rhs, tol=tol,
                                  worst_relative_slack=worst, n_tests=len(bank))


# --------------------------------------------------------------------------- integral chains


def _grid_int(opr, f) -> float:
    return opr.grid.h * float(np.sum(f))


def _check_family(system: SystemSpec, family: str):
    if system.family != family:
        raise DomainError(f"estimate needs the {family} family, got {system.family}")


def exp_L1_estimates(opr, system, record, tol=1e-8) -> List[EstimateReport]:
    """int e^{u+v} bound: the stability chain and the closing quadratic bound."""
    _check_family(system, "gelfand")
    u, v, lam, gam = record.u, record.v, record.lam, record.gam
    A = _grid_int(opr, np.exp(u + v))
    B = _grid_int(opr, np.exp((u + v) / 2))
    Pu = _grid_int(opr, np.exp((u + v) / 2 + u))
    Pv = _grid_int(opr, np.exp((u + v) / 2 + v))
    rl = math.sqrt(lam * gam)
    z = np.expm1(u / 2)
    chain = EstimateReport.compare(
        "exp-L1-chain", rl * _grid_int(opr, np.exp((u + v) / 2) * z * z), 0.25 * lam * A, tol=tol,
        int_exp_u_plus_v=A)
    cs = EstimateReport.compare("exp-L1-cauchy-schwarz", A * A, Pu * Pv, tol=1e-12)
    k = 8 * rl
    prod = EstimateReport.compare("exp-L1-product", 4 * lam * gam * A * A,
                                  (lam * A + k * B) * (gam * A + k * B), tol=tol)
    # 3 lam gam A^2 - (lam + gam) k B A - k^2 B^2 <= 0 closes the estimate
    a2, a1, a0 = 3 * lam * gam, -(lam + gam) * k * B, -k * k * B * B
    bound = (-a1 + math.sqrt(a1 * a1 - 4 * a2 * a0)) / (2 * a2)
    final = EstimateReport.compare("exp-L1", A, bound, tol=tol, int_exp_u_plus_v=A,
                                   int_exp_half=B)
    return [chain, cs, prod, final]


def _power_L1(opr, system, record, sign: int, tol: float, name: str) -> List[EstimateReport]:
    """Common chain for (1+u)^p (sign=+1) and (1-u)^{-p} (sign=-1)."""
    u, v, lam, gam, p = record.u, record.v, record.lam, record.gam, system.p
    base_u, base_v = 1 + sign * u, 1 + sign * v
    if sign > 0:
        c = (p + 1) ** 2 / (4 * p)
        w = (base_u * base_v) ** ((p - 1) / 2)
        zu, zv = base_u ** ((p + 1) / 2), base_v ** ((p + 1) / 2)
        A = _grid_int(opr, (base_u * base_v) ** p)
    else:
        c = (p - 1) ** 2 / (4 * p)
        w = (base_u * base_v) ** (-(p + 1) / 2)
        zu, zv = base_u ** ((1 - p) / 2), base_v ** ((1 - p) / 2)
        A = _grid_int(opr, (base_u * base_v) ** (-p))
    rl = math.sqrt(lam * gam)
    Z = _grid_int(opr, w)
    chain = EstimateReport.compare(f"{name}-chain", rl * p * _grid_int(opr, w * (zu - 1) ** 2),
                                   c * lam * A, tol=tol, A=A)
    reports = [chain]
    best = None
    for eps in EPS_SWEEP:
        Xu, Xv = _grid_int(opr, w * zu * zu), _grid_int(opr, w * zv * zv)
        k = rl * p / eps
        lhs = lam * gam * (p * (1 - eps)) ** 2 * Xu * Xv
        rhs = (c * lam * A + k * Z) * (c * gam * A + k * Z)
        rep = EstimateReport.compare(f"{name}-product", lhs, rhs, tol=tol, eps=eps, A=A, Z=Z)
        if best is None or rep.slack / max(abs(rep.rhs), 1e-300) > best.slack / max(abs(best.rhs), 1e-300):
            best = rep
    reports.append(best)
    # closing bound on A from the product step and Cauchy-Schwarz, at the best eps
    eps = best.quantities["eps"]
    k = rl * p / eps
    a2 = lam * gam * ((p * (1 - eps)) ** 2 - c * c)
    a1 = -c * (lam + gam) * k * Z
    a0 = -k * k * Z * Z
    bound = (-a1 + math.sqrt(a1 * a1 - 4 * a2 * a0)) / (2 * a2) if a2 > 0 else math.inf
    reports.append(EstimateReport.compare(name, A, bound, tol=tol, A=A, Z=Z, eps=eps))
    return reports


def power_L1_estimates(opr, system, record, tol=1e-8):
    _check_family(system, "lane_emden")
    return _power_L1(opr, system, record, +1, tol, "power-L1")


def singular_L1_estimates(opr, system, record, tol=1e-8):
    _check_family(system, "mems")
    return _power_L1(opr, system, record, -1, tol, "singular-L1")


def exp_XY_relations(opr, system, record, t: float = 1.0, tol=1e-8) -> List[EstimateReport]:
    """sqrt(lam gam) X <= (t/4 + eps) lam X^{(2t-1)/2t} Y^{1/2t} + (gam/eps) Z, and the mirror."""
    _check_family(system, "gelfand")
    if not t > 0.5:
        raise DomainError("the Gelfand X-Y relation needs t > 1/2")
    u, v, lam, gam = record.u, record.v, record.lam, record.gam
    X = _grid_int(opr, np.exp((2 * t + 1) / 2 * u + v / 2))
    Y = _grid_int(opr, np.exp((2 * t + 1) / 2 * v + u / 2))
    Z, W = _grid_int(opr, np.exp(u)), _grid_int(opr, np.exp(v))
    rl = math.sqrt(lam * gam)
    a, b = (2 * t - 1) / (2 * t), 1 / (2 * t)
    out = []
    for tag, (P, Q, coef, rest, mult) in {"X": (X, Y, lam, Z, gam), "Y": (Y, X, gam, W, lam)}.items():
        reps = [EstimateReport.compare(f"exp-XY-{tag}", rl * P,
                                       (t / 4 + eps) * coef * P ** a * Q ** b + mult / eps * rest,
                                       tol=tol, X=X, Y=Y, Z=Z, W=W, eps=eps, t=t)
                for eps in EPS_SWEEP]
        out.append(max(reps, key=lambda r: r.slack / max(abs(r.rhs), 1e-300)))
    return out


def _power_XY(opr, system, record, t, sign, tol, name):
    u, v, lam, gam, p = record.u, record.v, record.lam, record.gam, system.p
    bu, bv = 1 + sign * u, 1 + sign * v
    rl = math.sqrt(lam * gam)
    if sign > 0:
        c = (t + 1) ** 2 / (4 * t)
        m = (p - 1) / 2
        X = _grid_int(opr, bu ** (m + t + 1) * bv ** m)
        Y = _grid_int(opr, bv ** (m + t + 1) * bu ** m)
        Z = _grid_int(opr, (bu * bv) ** m)
        inv_beta = (2 * t - p + 1) / (2 * (t + 1))
    else:
        c = (t - 1) ** 2 / (4 * t)
        m = -(p + 1) / 2
        X = _grid_int(opr, bu ** (m - t + 1) * bv ** m)
        Y = _grid_int(opr, bv ** (m - t + 1) * bu ** m)
        Z = _grid_int(opr, (bu * bv) ** m)
        inv_beta = (2 * t - p - 1) / (2 * (t - 1))
    if not 0 <= inv_beta <= 1:
        raise DomainError(f"Hoelder exponent 1/beta={inv_beta!r} outside [0, 1] for t={t}, p={p}")
    out = []
    for tag, (P, Q, coef) in {"X": (X, Y, lam), "Y": (Y, X, gam)}.items():
        reps = [EstimateReport.compare(
            f"{name}-{tag}", rl * p * (1 - eps) * P,
            c * coef * P ** inv_beta * Q ** (1 - inv_beta) + rl * p / eps * Z,
            tol=tol, X=X, Y=Y, Z=Z, eps=eps, t=t) for eps in EPS_SWEEP]
        out.append(max(reps, key=lambda r: r.slack / max(abs(r.rhs), 1e-300)))
    return out


def power_XY_relations(opr, system, record, t: float = 1.5, tol=1e-8):
    _check_family(system, "lane_emden")
    if not t > 1:
        raise DomainError("the power X-Y relation needs t > 1")
    return _power_XY(opr, system, record, t, +1, tol, "power-XY")


def singular_XY_relations(opr, system, record, t: float = 1.5, tol=1e-8):
    _check_family(system, "mems")
    if not t > 1:
        raise DomainError("the power X-Y relation needs t > 1")
    return _power_XY(opr, system, record, t, -1, tol, "singular-XY")


def holder_check(opr, system, record, t: float, tol: float = 1e-10) -> EstimateReport:
    """int (1+u)^t (1+v)^p <= X^{1/beta} Y^{1-1/beta} on the grid."""
    _check_family(system, "lane_emden")
    u, v, p = record.u, record.v, system.p
    m = (p - 1) / 2
    X = _grid_int(opr, (1 + u) ** (m + t + 1) * (1 + v) ** m)
    Y = _grid_int(opr, (1 + v) ** (m + t + 1) * (1 + u) ** m)
    ib = (2 * t - p + 1) / (2 * (t + 1))
    return EstimateReport.compare("power-XY-hoelder", _grid_int(opr, (1 + u) ** t * (1 + v) ** p),
                                  X ** ib * Y ** (1 - ib), tol=tol)


def _h_integral(f: Nonlinearity, x: np.ndarray) -> np.ndarray:
    """h(s) = int_0^s f''(w)^2 dw by adaptive quadrature at each point."""
    flat = np.asarray(x, dtype=float).ravel()
    out = np.array([quad(lambda w: float(f(w, 2)) ** 2, 0.0, s, epsrel=1e-12, limit=200)[0]
                    for s in flat])
    return out.reshape(np.shape(x))


def gradient_estimate(opr, system, record, tol=1e-8) -> List[EstimateReport]:
    """int [f''g (f'-a)^2 + f g''(g'-b)^2 + 2 f'g'(f'-a)(g'-b)] <= int [h1(u) f'g + h2(v) f g']."""
    _check_family(system, "gradient")
    u, v = np.asarray(record.u), np.asarray(record.v)
    f, g = system.f, system.g
    a, b = float(f(0.0, 1)), float(g(0.0, 1))
    if not (a > 0 and b > 0):
        raise DomainError("needs f'(0) > 0 and g'(0) > 0")
    fu, fu1, fu2 = f(u), f(u, 1), f(u, 2)
    gv, gv1, gv2 = g(v), g(v, 1), g(v, 2)
    za, eb = fu1 - a, gv1 - b
    lhs = _grid_int(opr, fu2 * gv * za ** 2 + fu * gv2 * eb ** 2 + 2 * fu1 * gv1 * za * eb)
    h1, h2 = _h_integral(f, u), _h_integral(g, v)
    rhs = _grid_int(opr, h1 * fu1 * gv + h2 * fu * gv1)
    bounded = _grid_int(opr, fu1 * gv1 * za * eb)
    return [EstimateReport.compare("gradient", lhs, rhs, tol=tol, boundedness=bounded)]


def check_integral_estimates(opr, system, record, t: Optional[float] = None,
                             tol: float = 1e-8) -> List[EstimateReport]:
    """The family's L^1 chain and, when ``t`` is given, its X-Y relations."""
    fam = system.family
    try:
        system._admissible(np.asarray(record.u), np.asarray(record.v))
        if fam == "gelfand":
            reps = exp_L1_estimates(opr, system, record, tol)
            if t is not None:
                reps += exp_XY_relations(opr, system, record, t, tol)
        elif fam == "lane_emden":
            reps = power_L1_estimates(opr, system, record, tol)
            if t is not None:
                reps += power_XY_relations(opr, system, record, t, tol)
        elif fam == "mems":
            reps = singular_L1_estimates(opr, system, record, tol)
            if t is not None:
                reps += singular_XY_relations(opr, system, record, t, tol)
        else:
            reps = gradient_estimate(opr, system, record, tol)
    except (ConstraintViolation, FloatingPointError, OverflowError):
        return [EstimateReport("ConstraintProximity", math.inf, math.nan, False,
                               {"error": math.nan}, tol)]
    return reps


# --------------------------------------------------------------------------- pointwise


@dataclass(frozen=True)
class InequalityResult:
    name: str
    samples: int
    violations: int
    witness: Optional[Tuple[float, ...]] = None
    worst_slack: float = math.inf

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _tally(name, lhs, rhs, args, rtol):
    slack = rhs - lhs
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    bad = slack < -rtol * scale
    idx = int(np.argmin(slack / np.where(scale > 0, scale, 1.0)))
    witness = tuple(float(a[np.argmax(bad)]) for a in args) if bad.any() else None
    return InequalityResult(name, len(lhs), int(bad.sum()), witness,
                            float(slack[idx] / (scale[idx] if scale[idx] > 0 else 1.0)))


def ineq_four_variable(a, b, c, d):
    """(a+b)(c^2/a + d^2/b) <= (c-d)^2 for ab < 0; returns (lhs, rhs)."""
    return (a + b) * (c * c / a + d * d / b), (c - d) ** 2


def ineq_exponential(alpha, beta):
    """|e^{b/2} - e^{a/2}|^2 <= (e^b - e^a)(b - a)/4."""
    return (np.exp(beta / 2) - np.exp(alpha / 2)) ** 2, 0.25 * (np.exp(beta) - np.exp(alpha)) * (beta - alpha)


def ineq_power(alpha, beta, p):
    """4p/(p+1)^2 |(1+a)^{(p+1)/2} - (1+b)^{(p+1)/2}|^2 <= ((1+a)^p - (1+b)^p)(a - b)."""
    lhs = 4 * p / (p + 1) ** 2 * ((1 + alpha) ** ((p + 1) / 2) - (1 + beta) ** ((p + 1) / 2)) ** 2
    return lhs, ((1 + alpha) ** p - (1 + beta) ** p) * (alpha - beta)


def ineq_singular(alpha, beta, p):
    """4p/(p-1)^2 |(1-a)^{(1-p)/2} - (1-b)^{(1-p)/2}|^2 <= ((1-a)^{-p} - (1-b)^{-p})(a - b)."""
    lhs = 4 * p / (p - 1) ** 2 * ((1 - alpha) ** ((1 - p) / 2) - (1 - beta) ** ((1 - p) / 2)) ** 2
    return lhs, ((1 - alpha) ** (-p) - (1 - beta) ** (-p)) * (alpha - beta)


def ineq_cauchy_schwarz_h(alpha, beta, f: Nonlinearity):
    """|f'(b) - f'(a)|^2 <= (h(b) - h(a))(b - a) with h(s) = int_0^s f''^2.

    h is available in closed form for the exponential and the powers.
    """
    if f.name == "exp":
        H = lambda s: 0.5 * np.expm1(2 * s)
    elif "p" in f.params and f.lower == -1.0:
        p = f.params["p"]
        k = (p * (p - 1)) ** 2
        if abs(2 * p - 3) < 1e-14:
            H = lambda s: k * np.log1p(s)
        else:
            H = lambda s: k * ((1 + s) ** (2 * p - 3) - 1) / (2 * p - 3)
    else:
        H = lambda s: _h_integral(f, s)
    return (f(beta, 1) - f(alpha, 1)) ** 2, (H(beta) - H(alpha)) * (beta - alpha)


def elementary_inequalities(samples: int = 100_000, seed: int = 0, rtol: float = 1e-10,
                            p_values: Sequence[float] = (1.5, 2.0, 3.0, 5.0)) -> List[InequalityResult]:
    """Property-test the five pointwise inequalities on random samples."""
    rng = np.random.default_rng(seed)
    out = []

    a = rng.uniform(0.01, 10, samples) * rng.choice([-1, 1], samples)
    b = -np.sign(a) * rng.uniform(0.01, 10, samples)
    c, d = rng.normal(0, 3, (2, samples))
    out.append(_tally("four-variable", *ineq_four_variable(a, b, c, d), (a, b, c, d), rtol))

    al, be = rng.uniform(-20, 20, (2, samples))
    out.append(_tally("exponential", *ineq_exponential(al, be), (al, be), rtol))

    p = rng.choice(np.asarray(p_values), samples)
    al, be = rng.uniform(-1, 20, (2, samples))
    out.append(_tally("power", *ineq_power(al, be, p), (al, be, p), rtol))

    ps = p[p != 1]
    al, be = 1 - np.exp(rng.uniform(-8, 4, (2, len(ps))))
    out.append(_tally("singular-power", *ineq_singular(al, be, ps), (al, be, ps), rtol))

    al, be = rng.uniform(-5, 8, (2, samples))
    half = samples // 2
    l1, r1 = ineq_cauchy_schwarz_h(al[:half], be[:half], Nonlinearity.exponential())
    al2, be2 = rng.uniform(-0.99, 20, (2, samples - half))
    l2, r2 = ineq_cauchy_schwarz_h(al2, be2, Nonlinearity.power(3.0))
    out.append(_tally("f''-cauchy-schwarz", np.concatenate([l1, l2]), np.concatenate([r1, r2]),
                      (np.concatenate([al[:half], al2]), np.concatenate([be[:half], be2])), rtol))
    return out

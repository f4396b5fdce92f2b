"""Nonlinearity packages for the coupled problems

    L u = lam F(u, v),  L v = gam G(u, v)  in (-R, R),   u = v = 0 outside,

and evaluators for the structural conditions on a scalar nonlinearity f.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConstraintViolation, DomainError

MEMS_MARGIN = 1e-8


@dataclass(frozen=True)
class Nonlinearity:
    """Scalar f with closed-form derivatives ``derivs[k]`` = f^{(k)}, k = 0..3.

    ``upper`` is the supremum of the domain (1 for the singular power), and
    ``lower`` the infimum (-1 for the powers (1+u)^p).
    """
    name: str
    derivs: Tuple[Callable, ...] = field(compare=False)
    upper: float = math.inf
    lower: float = -math.inf
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, u, k: int = 0):
        if k >= len(self.derivs):
            raise DomainError(f"{self.name}: derivative of order {k} not supplied")
        return self.derivs[k](np.asarray(u, dtype=float))

    @classmethod
    def exponential(cls) -> "Nonlinearity":
        return cls("exp", (np.exp,) * 4)

    @classmethod
    def power(cls, p: float) -> "Nonlinearity":
        """(1 + u)^p."""
        if not p > 1:
            raise DomainError(f"power exponent p={p!r} must exceed 1")
        d = tuple(_falling(p, k) for k in range(4))
        return cls(f"power({p:g})", tuple(
            (lambda u, k=k, c=d[k]: c * (1.0 + u) ** (p - k)) for k in range(4)),
            lower=-1.0, params={"p": p})

    @classmethod
    def singular(cls, p: float) -> "Nonlinearity":
        """(1 - u)^{-p}."""
        if not p > 0:
            raise DomainError(f"singular exponent p={p!r} must be positive")
        d = tuple(_rising(p, k) for k in range(4))
        return cls(f"singular({p:g})", tuple(
            (lambda u, k=k, c=d[k]: c * (1.0 - u) ** (-p - k)) for k in range(4)),
            upper=1.0, params={"p": p})

    @classmethod
    def polynomial(cls, coeffs: Sequence[float], name: Optional[str] = None) -> "Nonlinearity":
        """sum_k coeffs[k] u^k, handy for negative examples (1 + u, 1 + u^2, ...)."""
        P = np.polynomial.Polynomial(coeffs)
        polys = [P, P.deriv(1), P.deriv(2), P.deriv(3)]
        return cls(name or f"poly{tuple(coeffs)}", tuple((lambda u, q=q: q(u)) for q in polys))


def _falling(p: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= p - j
    return out


def _rising(p: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= p + j
    return out


FAMILIES = ("gelfand", "lane_emden", "mems", "gradient")


@dataclass(frozen=True)
class SystemSpec:
    """F(u, v), G(u, v) for one of the four families.

    gelfand:     F = e^v,        G = e^u
    lane_emden:  F = (1+v)^p,    G = (1+u)^p
    mems:        F = (1-v)^{-p}, G = (1-u)^{-p}
    gradient:    F = f'(u) g(v), G = f(u) g'(v)
    """
    family: str
    p: Optional[float] = None
    f: Optional[Nonlinearity] = None
    g: Optional[Nonlinearity] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        if self.family == "gelfand":
            phi = Nonlinearity.exponential()
        elif self.family == "lane_emden":
            phi = Nonlinearity.power(_need_p(self.p))
        elif self.family == "mems":
            phi = Nonlinearity.singular(_need_p(self.p))
        else:
            if self.f is None or self.g is None:
                raise DomainError("gradient family needs both f and g")
            phi = None
        object.__setattr__(self, "_phi", phi)

    @classmethod
    def gelfand(cls):
        return cls("gelfand")

    @classmethod
    def lane_emden(cls, p: float):
        return cls("lane_emden", p=p)

    @classmethod
    def mems(cls, p: float):
        return cls("mems", p=p)

    @classmethod
    def gradient(cls, f: Nonlinearity, g: Nonlinearity):
        return cls("gradient", f=f, g=g)

    @classmethod
    def gradient_power(cls, p: float, q: float):
        """f = (1+u)^p, g = (1+v)^q."""
        return cls("gradient", f=Nonlinearity.power(p), g=Nonlinearity.power(q))

    @property
    def phi(self) -> Optional[Nonlinearity]:
        """The scalar nonlinearity of a symmetric family (F = phi(v), G = phi(u))."""
        return self._phi

    @property
    def symmetric(self) -> bool:
        """True when swapping (u, v) swaps F and G, so u = v on the ray sigma = 1."""
        if self._phi is not None:
            return True
        return self.f == self.g

    @property
    def upper(self) -> float:
        if self._phi is not None:
            return self._phi.upper
        return min(self.f.upper, self.g.upper)

    def scalar(self, w):
        """phi(w) and phi'(w) for the reduction u = v = w (sigma = 1)."""
        w = self._admissible(w)
        if self._phi is not None:
            return self._phi(w), self._phi(w, 1)
        f = self.f
        return f(w, 1) * f(w), f(w, 2) * f(w) + f(w, 1) ** 2

    def _admissible(self, *arrays):
        ub = self.upper
        if math.isfinite(ub):
            lim = ub - MEMS_MARGIN
            for a in arrays:
                a = np.asarray(a, dtype=float)
                if np.any(a > lim):
                    raise ConstraintViolation(
                        f"iterate reached {float(np.max(a))!r}, admissible bound {lim!r}")
        return arrays[0] if len(arrays) == 1 else arrays

    def eval(self, u, v):
        """(F, G, F_u, F_v, G_u, G_v) at the grid pair (u, v)."""
        u, v = self._admissible(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
        if self._phi is not None:
            phi = self._phi
            F, G = phi(v), phi(u)
            zero = np.zeros_like(u)
            return F, G, zero, phi(v, 1), phi(u, 1), zero.copy()
        f, g = self.f, self.g
        f0, f1, f2 = f(u), f(u, 1), f(u, 2)
        g0, g1, g2 = g(v), g(v, 1), g(v, 2)
        F = f1 * g0
        G = f0 * g1
        return F, G, f2 * g0, f1 * g1, f1 * g1, f0 * g2

    def describe(self) -> dict:
        out = {"family": self.family}
        if self.p is not None:
            out["p"] = self.p
        if self.family == "gradient":
            out["f"] = self.f.name
            out["g"] = self.g.name
        return out


def _need_p(p):
    if p is None:
        raise DomainError("this family needs an exponent p")
    return float(p)


@dataclass(frozen=True)
class ConditionReport:
    passed: bool
    violations: Tuple[str, ...] = ()
    value: float = math.nan
    degenerate: bool = False


def default_probe_grid(f: Nonlinearity, top: float = 1e4, n: int = 400) -> np.ndarray:
    if math.isfinite(f.upper):
        # approach the singular endpoint geometrically
        return f.upper - np.geomspace(f.upper, 1e-6, n)
    return np.concatenate([np.linspace(0.0, 1.0, 50), np.geomspace(1.0, top, n)])


def check_condition_R(f: Nonlinearity, probe_grid=None, T: float = 1e4,
                      superlinear_ratio: float = 10.0) -> ConditionReport:
    """f smooth, increasing, convex, f(0) = 1 and superlinear (proxy f(T)/T >= 10)."""
    x = default_probe_grid(f, T) if probe_grid is None else np.asarray(probe_grid, dtype=float)
    bad = []
    if not math.isclose(float(f(0.0)), 1.0, rel_tol=0, abs_tol=1e-14):
        bad.append(f"f(0) = {float(f(0.0))!r} != 1")
    with np.errstate(over="ignore"):
        if np.any(~(f(x, 1) > 0)):
            bad.append("f' not positive on the probe grid")
        if np.any(~(f(x, 2) >= 0)):
            bad.append("f'' negative on the probe grid")
        if math.isfinite(f.upper):
            ratio = math.inf  # blows up at the endpoint of a bounded domain
        else:
            fT = float(f(T))
            ratio = fT / T if math.isfinite(fT) else math.inf
    if not ratio >= superlinear_ratio:
        bad.append(f"f(T)/T = {ratio!r} below {superlinear_ratio} at T = {T}")
    return ConditionReport(passed=not bad, violations=tuple(bad), value=ratio)


def _tail(f: Nonlinearity, probe_grid, top: float):
    if probe_grid is not None:
        x = np.asarray(probe_grid, dtype=float)
    elif math.isfinite(f.upper):
        x = f.upper - np.geomspace(1e-1, 1e-6, 200)
    else:
        x = np.geomspace(1.0, top, 400)
    return x[len(x) // 2:]


def _log_abs(f: Nonlinearity, x, k):
    with np.errstate(over="ignore", divide="ignore"):
        if f.name == "exp":
            return np.asarray(x, dtype=float)  # log e^x without overflow
        return np.log(np.abs(f(x, k)))


def check_condition_deltaeps(f: Nonlinearity, probe_grid=None, top: float = 1e6) -> ConditionReport:
    """Tail minimum of f''^2 / (f''' f') on a geometric probe grid; must stay positive."""
    x = _tail(f, probe_grid, top)
    with np.errstate(over="ignore"):
        f3, f1 = f(x, 3), f(x, 1)
    if np.any(f3 == 0):
        return ConditionReport(passed=False, violations=("f''' vanishes on the tail",),
                               degenerate=True)
    # ratio in log space: exp overflows long before 1e6
    lr = 2 * _log_abs(f, x, 2) - _log_abs(f, x, 3) - _log_abs(f, x, 1)
    ratio = float(np.exp(np.min(lr)))
    ok = ratio > 0 and np.all(np.sign(f3) == np.sign(f1))
    return ConditionReport(passed=bool(ok), value=ratio,
                           violations=() if ok else ("ratio not positive on the tail",))


def check_condition_conf(f: Nonlinearity, probe_grid=None, top: float = 1e6) -> float:
    """Tail supremum of f f'' / f'^2."""
    x = _tail(f, probe_grid, top)
    lr = _log_abs(f, x, 0) + _log_abs(f, x, 2) - 2 * _log_abs(f, x, 1)
    return float(np.exp(np.max(lr)))

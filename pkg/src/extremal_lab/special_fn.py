"""Closed-form quantities: log-Gamma, dimension thresholds, Gamma criteria,
singular-solution constants, embedding exponents and the integrability
bootstrap for gradient systems.

Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import zeta

from .errors import DomainError

_EULER = 0.57721566490153286061
# zeta(k) - 1 for k >= 2; index k
_ZETA_M1 = [0.0, 0.0] + [float(zeta(k, 2)) for k in range(2, 90)]
# Bernoulli numbers B_2, B_4, ...
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6,
              -3617 / 510, 43867 / 798)
_STIRLING_FROM = 15.0
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)

GUARD_BAND = 1e-12


def _lgamma_two_plus(z: float) -> float:
    """log Gamma(2 + z) for |z| <= 1 by its Taylor series about 2."""
    acc = 0.0
    zk = z
    for k in range(2, len(_ZETA_M1)):
        zk *= z
        term = _ZETA_M1[k] / k * zk
        acc += term if k % 2 == 0 else -term
        if abs(term) <= 1e-18 * abs(acc):
            break
    return (1.0 - _EULER) * z + acc


def _stirling(x: float) -> float:
    s = (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI
    x2 = x * x
    xp = x
    for k, b in enumerate(_BERNOULLI, 1):
        s += b / (2 * k * (2 * k - 1) * xp)
        xp *= x2
    return s


def _log_gamma_scalar(x: float) -> float:
    if not math.isfinite(x):
        raise DomainError(f"log_gamma: non-finite argument {x!r}")
    if x <= 0.0:
        if x == math.floor(x):
            raise DomainError(f"log_gamma: pole at {x!r}")
        # reflection; returns log|Gamma(x)|
        return math.log(math.pi / abs(math.sin(math.pi * x))) - _log_gamma_scalar(1.0 - x)
    if x < 0.5:
        return _lgamma_two_plus(x - 1.0) - math.log(x)
    if x < 1.5:
        return _lgamma_two_plus(x - 1.0) - math.log1p(x - 1.0)
    if x < 2.5:
        return _lgamma_two_plus(x - 2.0)
    if x >= _STIRLING_FROM:
        return _stirling(x)
    m = math.ceil(_STIRLING_FROM - x)
    shift = 0.0
    for j in range(m):
        shift += math.log(x + j)
    return _stirling(x + m) - shift


def log_gamma(x):
    """Natural log of |Gamma(x)|.

    Scalars return a float, array-likes an ndarray. Non-positive integers
    raise :class:`DomainError`. Relative accuracy is about 3e-14 on
    [1e-3, 1e3], including the neighbourhoods of the roots at 1 and 2.
    """
    if np.ndim(x) == 0:
        return _log_gamma_scalar(float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([_log_gamma_scalar(v) for v in arr.ravel()]).reshape(arr.shape)


def gamma_ratio(num, den) -> float:
    """prod Gamma(num) / prod Gamma(den) for positive arguments, via log space."""
    for a in (*num, *den):
        if not a > 0:
            raise DomainError(f"Gamma argument {a!r} is not positive")
    return math.exp(sum(log_gamma(a) for a in num) - sum(log_gamma(a) for a in den))


# ---------------------------------------------------------------- thresholds

def _check_order(s: float, allow_one: bool = False) -> None:
    hi_ok = s <= 1.0 if allow_one else s < 1.0
    if not (s > 0.0 and hi_ok):
        raise DomainError(f"order s={s!r} outside (0, 1{']' if allow_one else ')'}")


def threshold_gelfand(s: float) -> float:
    _check_order(s, allow_one=True)
    return 10.0 * s


def threshold_lane_emden(s: float, p: float) -> float:
    _check_order(s, allow_one=True)
    if not p > 1.0:
        raise DomainError(f"Lane-Emden exponent p={p!r} must exceed 1")
    return 2 * s + 4 * s / (p - 1) * (p + math.sqrt(p * (p - 1)))


def threshold_mems(s: float, p: float) -> float:
    _check_order(s, allow_one=True)
    if not p > 1.0:
        raise DomainError(f"MEMS exponent p={p!r} must exceed 1")
    return 2 * s + 4 * s / (p + 1) * (p + math.sqrt(p * (p + 1)))


def joseph_lundgren_T(t: float) -> float:
    return t + math.sqrt(t * (t - 1))


def threshold_gradient(s: float, p: float, q: float) -> float:
    """Dimension bound for the power gradient system f=(1+u)^p, g=(1+v)^q."""
    _check_order(s, allow_one=True)
    if not (p > 2.0 and q > 2.0):
        raise DomainError(f"gradient system needs p, q > 2 (got {p!r}, {q!r})")
    top = max(joseph_lundgren_T(p - 1), joseph_lundgren_T(q - 1))
    return 2 * s + 4 * s / (p + q - 2) * top


# ------------------------------------------------------------ Gamma criteria

class Verdict(enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    MARGINAL = "marginal"

    def __bool__(self) -> bool:
        return self is Verdict.HOLDS


def _verdict(log_lhs: float, log_rhs: float) -> Verdict:
    band = GUARD_BAND * max(1.0, abs(log_lhs), abs(log_rhs))
    diff = log_lhs - log_rhs
    if abs(diff) <= band:
        return Verdict.MARGINAL
    return Verdict.HOLDS if diff > 0 else Verdict.FAILS


def _stability_rhs_log(n: float, s: float) -> float:
    # log of Gamma^2((n+2s)/4) / Gamma^2((n-2s)/4)
    return 2.0 * (log_gamma((n + 2 * s) / 4) - log_gamma((n - 2 * s) / 4))


def gelfand_gamma_margin(n: float, s: float) -> float:
    """log(LHS) - log(RHS) of the Gelfand Gamma criterion; positive means it holds."""
    _check_order(s)
    if not n > 2 * s:
        raise DomainError(f"Gelfand criterion needs n > 2s (n={n!r}, s={s!r})")
    log_lhs = log_gamma(n / 2) + log_gamma(1 + s) - log_gamma((n - 2 * s) / 2)
    return log_lhs - _stability_rhs_log(n, s)


def gelfand_gamma_criterion(n: float, s: float) -> Verdict:
    _check_order(s)
    if math.isclose(n, 2 * s, rel_tol=GUARD_BAND, abs_tol=0.0):
        return Verdict.MARGINAL
    if n < 2 * s:
        raise DomainError(f"Gelfand criterion needs n >= 2s (n={n!r}, s={s!r})")
    log_lhs = log_gamma(n / 2) + log_gamma(1 + s) - log_gamma((n - 2 * s) / 2)
    return _verdict(log_lhs, _stability_rhs_log(n, s))


def _lane_emden_args(n: float, s: float, p: float):
    if not p > 1.0:
        raise DomainError(f"Lane-Emden exponent p={p!r} must exceed 1")
    k = s / (p - 1)
    args = (n / 2 - k, s + k, k, (n - 2 * s) / 2 - k)
    if min(args) <= 0.0 or not (n - 2 * s) > 0:
        raise DomainError(
            f"Gamma arguments not all positive for n={n!r}, s={s!r}, p={p!r}: {args}")
    return args


def lane_emden_gamma_margin(n: float, s: float, p: float) -> float:
    _check_order(s)
    a1, a2, a3, a4 = _lane_emden_args(n, s, p)
    log_lhs = math.log(p) + log_gamma(a1) + log_gamma(a2) - log_gamma(a3) - log_gamma(a4)
    return log_lhs - _stability_rhs_log(n, s)


def lane_emden_gamma_criterion(n: float, s: float, p: float) -> Verdict:
    _check_order(s)
    a1, a2, a3, a4 = _lane_emden_args(n, s, p)
    log_lhs = math.log(p) + log_gamma(a1) + log_gamma(a2) - log_gamma(a3) - log_gamma(a4)
    return _verdict(log_lhs, _stability_rhs_log(n, s))


def lane_emden_crossover(s: float, p: float, n_span: float = 200.0, dn: float = 0.01) -> float:
    """Largest dimension n at which the Lane-Emden Gamma criterion switches
    from holding to failing, located by a sweep in steps of ``dn`` and then
    refined with Brent's method."""
    n0 = 2 * s * p / (p - 1)
    grid = n0 + dn * np.arange(1, int(n_span / dn) + 1)
    last = None
    prev_n, prev_m = None, None
    for n in grid:
        m = lane_emden_gamma_margin(float(n), s, p)
        if prev_m is not None and prev_m > 0 >= m:
            last = (prev_n, float(n))
        prev_n, prev_m = float(n), m
    if last is None:
        raise DomainError(f"no crossover found for s={s!r}, p={p!r} within span {n_span}")
    return brentq(lambda n: lane_emden_gamma_margin(n, s, p), *last, xtol=1e-13)


def gelfand_crossover(s: float, n_max: float = 60.0, dn: float = 0.01) -> float:
    """Smallest n > 2s where the Gelfand Gamma criterion starts failing."""
    grid = 2 * s + dn * np.arange(1, int((n_max - 2 * s) / dn) + 1)
    prev_n = None
    for n in grid:
        if gelfand_gamma_margin(float(n), s) <= 0:
            if prev_n is None:
                return float(n)
            return brentq(lambda x: gelfand_gamma_margin(x, s), prev_n, float(n), xtol=1e-13)
        prev_n = float(n)
    raise DomainError(f"criterion holds on the whole sweep up to n={n_max}")


# ---------------------------------------------------- singular solutions

P_MAX_SINGULAR = 1e3


def gelfand_singular_lambda(n: float, s: float) -> float:
    """Constant lambda with L log(1/|x|^{2s}) = lambda |x|^{-2s} on R^n."""
    _check_order(s)
    if not n > 2 * s:
        raise DomainError(f"singular Gelfand solution needs n > 2s (n={n!r}, s={s!r})")
    return 2 ** (2 * s) * gamma_ratio((n / 2, 1 + s), ((n - 2 * s) / 2,))


def lane_emden_singular_A(n: float, s: float, p: float, p_max: float = P_MAX_SINGULAR) -> float:
    """Amplitude A of the singular profile A|x|^{-2s/(p-1)}.

    With this A the profile solves L u = 2^{2s} u^p; the factor 2^{2s} is the
    same one carried by the Gelfand constant.
    """
    _check_order(s)
    if p > p_max:
        raise DomainError(f"p={p!r} beyond the configured range p <= {p_max}")
    a1, a2, a3, a4 = _lane_emden_args(n, s, p)
    return gamma_ratio((a1, a2), (a3, a4)) ** (1.0 / (p - 1))


def lane_emden_singular_lambda(s: float) -> float:
    return 2 ** (2 * s)


def singular_constants(n: float, s: float, p: Optional[float] = None) -> float:
    """lambda of the Gelfand singular solution when ``p`` is None, else the
    Lane-Emden amplitude A."""
    if p is None:
        return gelfand_singular_lambda(n, s)
    return lane_emden_singular_A(n, s, p)


# ------------------------------------------------------- threshold report

@dataclass(frozen=True)
class ProblemParams:
    n: float
    s: float
    p: Optional[float] = None

    def __post_init__(self):
        if not self.n > 0:
            raise DomainError(f"dimension n={self.n!r} must be positive")
        _check_order(self.s, allow_one=True)
        if self.p is not None and not self.p > 1:
            raise DomainError(f"exponent p={self.p!r} must exceed 1")


@dataclass(frozen=True)
class ThresholdReport:
    n: float
    s: float
    p: float
    q: Optional[float]
    gelfand_bound: float
    lane_emden_bound: float
    mems_bound: float
    gradient_bound: Optional[float]
    gelfand_gamma_ok: Optional[Verdict]
    lane_emden_gamma_ok: Optional[Verdict]
    singular_lambda: Optional[float]
    singular_A: Optional[float]
    notes: tuple = field(default=())


def threshold_report(n: float, s: float, p: float, q: Optional[float] = None) -> ThresholdReport:
    params = ProblemParams(n, s, p)
    q_eff = p if q is None else q
    notes = []

    def attempt(label, fn, *args):
        try:
            return fn(*args)
        except DomainError as exc:
            notes.append(f"{label}: {exc}")
            return None

    return ThresholdReport(
        n=params.n, s=params.s, p=p, q=q,
        gelfand_bound=threshold_gelfand(s),
        lane_emden_bound=threshold_lane_emden(s, p),
        mems_bound=threshold_mems(s, p),
        gradient_bound=attempt("gradient_bound", threshold_gradient, s, p, q_eff),
        gelfand_gamma_ok=attempt("gelfand_gamma", gelfand_gamma_criterion, n, s),
        lane_emden_gamma_ok=attempt("lane_emden_gamma", lane_emden_gamma_criterion, n, s, p),
        singular_lambda=attempt("singular_lambda", gelfand_singular_lambda, n, s),
        singular_A=attempt("singular_A", lane_emden_singular_A, n, s, p),
        notes=tuple(notes),
    )


# ------------------------------------------------ embeddings and bootstrap

class Integrability(enum.Enum):
    ANY_FINITE = "any_finite"
    UNBOUNDED = "unbounded"  # the L-infinity conclusion


def embedding_exponent(n: float, s: float, r: float) -> Union[float, Integrability]:
    """Integrability gained by solving L u = f with f in L^r.

    Returns the exponent q = nr/(n - 2rs) below the critical r = n/(2s),
    ``Integrability.ANY_FINITE`` at it and ``Integrability.UNBOUNDED``
    (u bounded) above it.
    """
    if not r >= 1:
        raise DomainError(f"r={r!r} must be >= 1")
    crit = n / (2 * s)
    if math.isclose(r, crit, rel_tol=1e-14, abs_tol=0.0):
        return Integrability.ANY_FINITE
    if r > crit:
        return Integrability.UNBOUNDED
    return n * r / (n - 2 * r * s)


class BootstrapVerdict(enum.Enum):
    BOUNDED = "Bounded"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class BootstrapTrace:
    exponents: list
    verdict: BootstrapVerdict
    steps: int
    stages: list = field(default_factory=list)


def _forcing_exponent(p_star: float) -> float:
    # split Omega where f'(u)g(v) is large/small against (v+1)^{2/alpha};
    # alpha = 4/(p*+2) balances the two pieces
    alpha = 4.0 / (p_star + 2.0)
    return min(2.0 - alpha, alpha * p_star / 2.0)


def bootstrap_step(n: float, s: float, p_star: float):
    """One pass: u, v in L^p for p < p_star  ->  new exponent (or None when
    the forcing lands above n/(2s), i.e. the next denominator is <= 0)."""
    denom = p_star * (n - 4 * s) + 2 * n
    if denom <= 0:
        return None
    return 2 * p_star * n / denom


def nedev_bootstrap(n: float, s: float, p0: float, max_steps: int = 10_000,
                    replay_stages: bool = False) -> BootstrapTrace:
    """Iterate the integrability bootstrap p -> 2pn/(p(n-4s)+2n).

    The verdict is Bounded once the forcing exponent 2p/(p+2) reaches n/(2s),
    which is the same event as the recursion's denominator becoming <= 0.
    With ``replay_stages`` the sequence starts at the L^1 embedding exponent
    n/(n-2s) and the first three stages are evaluated with their own closed
    forms (stored in ``stages``) for cross-checking against the recursion.
    """
    if not p0 > 1:
        raise DomainError(f"p0={p0!r} must exceed 1")
    if max_steps < 1:
        raise DomainError("max_steps must be >= 1")
    stages = []
    if replay_stages:
        if not n > 2 * s:
            raise DomainError("stage replay needs n > 2s")
        p0 = n / (n - 2 * s)
        closed = []
        for crit, form in ((8 * s / 3, lambda: 2 * n / (3 * n - 8 * s)),
                           (3 * s, lambda: n / (2 * (n - 3 * s))),
                           (16 * s / 5, lambda: 2 * n / (5 * n - 16 * s))):
            if n <= crit:
                break
            closed.append(form())
        stages = closed
    exps = [float(p0)]
    p = float(p0)
    for k in range(max_steps):
        r = _forcing_exponent(p)
        nxt = bootstrap_step(n, s, p)
        if nxt is None or r > n / (2 * s):
            return BootstrapTrace(exps, BootstrapVerdict.BOUNDED, k + 1, stages)
        p = nxt
        exps.append(p)
    return BootstrapTrace(exps, BootstrapVerdict.INCONCLUSIVE, max_steps, stages)

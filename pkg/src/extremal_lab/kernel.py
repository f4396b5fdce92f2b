"""Even jump kernels J(y) = c * a(y/|y|) / |y|^{n+2s}.

Numerics run in one space dimension, where the unit sphere is the two
points {+1, -1} and the spectral density reduces to one weight. The
sphere/direction machinery is kept dimension-generic so the ellipticity
check also works on the circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BoundaryDivergence, DomainError, EllipticityViolation
from .special_fn import log_gamma

FAMILIES = ("fractional_laplacian", "weighted_even")


def frac_lap_constant(n: float, s: float) -> float:
    """c_{n,s} = 4^s Gamma(n/2+s) / (pi^{n/2} |Gamma(-s)|), the constant whose
    Fourier symbol is |xi|^{2s}."""
    if not 0 < s < 1:
        raise DomainError(f"order s={s!r} outside (0, 1)")
    if not n >= 1:
        raise DomainError(f"dimension n={n!r} must be >= 1")
    # |Gamma(-s)| = Gamma(1-s)/s
    log_c = (s * math.log(4.0) + log_gamma(n / 2 + s) - 0.5 * n * math.log(math.pi)
             - log_gamma(1 - s) + math.log(s))
    return math.exp(log_c)


def sphere_quadrature(dim: int, resolution: int = 1):
    """Nodes and weights on S^{dim-1}.

    dim 1: the atoms +-1 with unit (counting) weight. dim 2: ``resolution``
    equispaced angles with arc-length weights.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if dim == 2:
        m = max(int(resolution), 4)
        m += m % 2  # keep the node set symmetric under theta -> -theta
        ang = 2 * np.pi * np.arange(m) / m
        return np.stack([np.cos(ang), np.sin(ang)], axis=1), np.full(m, 2 * np.pi / m)
    raise DomainError(f"sphere quadrature not available for dim={dim}")


@dataclass(frozen=True)
class SpectralKernel:
    s: float
    weight: float = 1.0
    normalization: Optional[float] = None
    dim: int = 1
    density: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    family: str = "fractional_laplacian"

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise DomainError(f"kernel order s={self.s!r} outside (0, 1)")
        if self.family not in FAMILIES:
            raise DomainError(f"unknown kernel family {self.family!r}")
        if self.weight < 0 or not math.isfinite(self.weight):
            raise DomainError(f"density weight {self.weight!r} must be finite and >= 0")
        if self.normalization is None:
            object.__setattr__(self, "normalization", frac_lap_constant(self.dim, self.s))
        nodes, _ = sphere_quadrature(self.dim, 64)
        a_plus, a_minus = self.spectral_density(nodes), self.spectral_density(-nodes)
        if np.any(a_plus < 0) or not np.array_equal(a_plus, a_minus):
            raise DomainError("spectral density must be even and nonnegative")

    @classmethod
    def fractional_laplacian(cls, s: float) -> "SpectralKernel":
        return cls(s=s)

    @classmethod
    def weighted_even(cls, s: float, weight: float) -> "SpectralKernel":
        return cls(s=s, weight=weight, family="weighted_even")

    def spectral_density(self, theta) -> np.ndarray:
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        if self.density is not None:
            return np.asarray(self.density(theta), dtype=float)
        return np.full(theta.shape[0], self.weight)

    @property
    def one_sided_weight(self) -> float:
        """c with J(y) = c/|y|^{1+2s} in one dimension."""
        if self.dim != 1:
            raise DomainError("one-sided weight is defined for dim=1 kernels")
        return self.normalization * float(self.spectral_density([[1.0]])[0])

    def __call__(self, y):
        """J(y) for 1-D points ``y`` (array) or, when dim > 1, rows of ``y``."""
        y = np.asarray(y, dtype=float)
        if self.dim == 1:
            r = np.abs(y)
            theta = np.sign(y).reshape(-1, 1)
            a = self.spectral_density(np.where(theta == 0, 1.0, theta)).reshape(r.shape)
            with np.errstate(divide="ignore"):
                return self.normalization * a / r ** (1 + 2 * self.s)
        r = np.linalg.norm(y, axis=-1)
        a = self.spectral_density(y / r[..., None])
        with np.errstate(divide="ignore"):
            return self.normalization * a / r ** (self.dim + 2 * self.s)


@dataclass(frozen=True)
class EllipticityCertificate:
    c1: float
    c2: float
    grid_resolution: int


def check_ellipticity(kernel: SpectralKernel, resolution: Optional[int] = None) -> EllipticityCertificate:
    """Certify 0 < c1 <= inf_nu int |nu.theta|^{2s} a(theta) dtheta and a <= c2.

    The spectral density alone enters (the normalization constant is not part
    of a). ``resolution`` is the number of sampled directions nu; in dim 1 the
    sphere has two points and one direction suffices up to symmetry.
    """
    if resolution is None:
        resolution = 1 if kernel.dim == 1 else 256
    theta, w = sphere_quadrature(kernel.dim, max(resolution, 64) if kernel.dim > 1 else 1)
    a = kernel.spectral_density(theta)
    if kernel.dim == 1:
        nus = np.array([[1.0]])
    else:
        nus, _ = sphere_quadrature(kernel.dim, resolution)
    proj = np.abs(nus @ theta.T) ** (2 * kernel.s)
    integrals = proj @ (a * w)
    c1 = float(integrals.min())
    c2 = float(a.max())
    if not c1 > 0:
        raise EllipticityViolation(f"ellipticity lower constant {c1!r} is not positive")
    return EllipticityCertificate(c1=c1, c2=c2, grid_resolution=int(len(nus)))


def exterior_mass(kernel: SpectralKernel, x, R: float = 1.0):
    """int_{R \\ (-R, R)} J(x - z) dz for x inside (-R, R), in closed form."""
    x = np.asarray(x, dtype=float)
    c = kernel.one_sided_weight
    s = kernel.s
    dr, dl = R - x, R + x
    # keep distance^{-2s} below 1e300
    floor = 10.0 ** (-150.0 / s)
    if np.any(dr <= floor) or np.any(dl <= floor):
        raise BoundaryDivergence(f"exterior mass diverges at the boundary (x={x!r}, R={R!r})")
    val = c * (dr ** (-2 * s) + dl ** (-2 * s)) / (2 * s)
    return float(val) if val.ndim == 0 else val

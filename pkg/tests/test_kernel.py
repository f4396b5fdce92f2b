import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from extremal_lab.discretize import pv_apply
from extremal_lab.errors import BoundaryDivergence, DomainError, EllipticityViolation
from extremal_lab.kernel import (SpectralKernel, check_ellipticity, exterior_mass,
                                 frac_lap_constant)


def test_frac_lap_constant_half():
    assert frac_lap_constant(1, 0.5) == pytest.approx(1 / math.pi, rel=1e-14)


@pytest.mark.parametrize("n, s", [(1, 0.1), (1, 0.3), (1, 0.75), (2, 0.5), (3, 0.9)])
def test_frac_lap_constant_oracle(n, s):
    ref = 4 ** mpmath.mpf(s) * mpmath.gamma(n / 2 + s) / (mpmath.pi ** (n / 2) * abs(mpmath.gamma(-s)))
    assert frac_lap_constant(n, s) == pytest.approx(float(ref), rel=1e-13)


def test_frac_lap_constant_vanishes_as_s_to_zero():
    vals = [frac_lap_constant(1, s) for s in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-5


@pytest.mark.parametrize("s", [0.25, 0.5, 0.8])
def test_constant_gives_unit_fourier_symbol(s):
    # L e^{-x^2/2} at 0 from the symbol |xi|^{2s}, by quadrature on the Fourier side
    fourier = quad(lambda xi: xi ** (2 * s) * math.exp(-xi * xi / 2), 0, np.inf,
                   epsabs=1e-14)[0] * 2 / math.sqrt(2 * math.pi)
    k = SpectralKernel.fractional_laplacian(s)
    val = pv_apply(k, lambda y: math.exp(-y * y / 2), 0.0)
    assert val == pytest.approx(fourier, rel=1e-6)


def test_isotropic_ellipticity_two_point_value():
    k = SpectralKernel.weighted_even(0.4, 2.5)
    cert = check_ellipticity(k)
    assert cert.c1 == pytest.approx(5.0, abs=1e-12)
    assert cert.c2 == 2.5
    assert cert.grid_resolution == 1


def test_atom_pair_density():
    w = 0.7
    k = SpectralKernel(0.3, density=lambda th: np.full(th.shape[0], w))
    cert = check_ellipticity(k)
    assert cert.c1 == pytest.approx(2 * w, abs=1e-12)
    assert cert.c2 == pytest.approx(w)


def test_zero_density_violates_ellipticity():
    with pytest.raises(EllipticityViolation):
        check_ellipticity(SpectralKernel.weighted_even(0.5, 0.0))


def test_uneven_density_rejected():
    with pytest.raises(DomainError):
        SpectralKernel(0.5, density=lambda th: np.where(th[:, 0] > 0, 1.0, 2.0))


@pytest.mark.parametrize("kwargs", [dict(s=0.0), dict(s=1.0), dict(s=0.5, weight=-1.0),
                                    dict(s=0.5, family="tempered")])
def test_kernel_argument_checks(kwargs):
    with pytest.raises(DomainError):
        SpectralKernel(**kwargs)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1e-3, 1e3), st.floats(0.01, 100.0))
def test_kernel_even_and_homogeneous(s, y, t):
    k = SpectralKernel.fractional_laplacian(s)
    assert k(y) == k(-y)
    assert k(t * y) == pytest.approx(t ** (-(1 + 2 * s)) * k(y), rel=1e-12)


def test_exterior_mass_symmetric_at_centre():
    k = SpectralKernel.fractional_laplacian(0.5)
    c = k.one_sided_weight
    assert exterior_mass(k, 0.0) == pytest.approx(2 * c / (2 * 0.5), rel=1e-15)


def test_exterior_mass_matches_quadrature(rng):
    worst = 0.0
    for _ in range(100):
        s = rng.uniform(0.05, 0.95)
        x = rng.uniform(-0.95, 0.95)
        k = SpectralKernel.fractional_laplacian(s)
        J = lambda z: k.one_sided_weight * abs(x - z) ** (-1 - 2 * s)
        ref = quad(J, 1.0, np.inf, epsrel=1e-13, epsabs=0)[0] + \
            quad(J, -np.inf, -1.0, epsrel=1e-13, epsabs=0)[0]
        worst = max(worst, abs(exterior_mass(k, x) / ref - 1))
    assert worst <= 1e-10


def test_exterior_mass_example_half():
    k = SpectralKernel.fractional_laplacian(0.5)
    ref = quad(lambda z: k(0.5 - z), 1.0, np.inf, epsrel=1e-13)[0] + \
        quad(lambda z: k(0.5 - z), -np.inf, -1.0, epsrel=1e-13)[0]
    assert exterior_mass(k, 0.5) == pytest.approx(ref, rel=1e-10)


def test_exterior_mass_boundary():
    k = SpectralKernel.fractional_laplacian(0.5)
    with pytest.raises(BoundaryDivergence):
        exterior_mass(k, 1.0)
    assert exterior_mass(k, 1 - 1e-12) > 1e11

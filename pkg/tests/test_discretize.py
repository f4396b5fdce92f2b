import math

import numpy as np
import pytest
from scipy.integrate import quad

from extremal_lab.discretize import (SINGULAR_RULES, Grid, assemble, carre_du_champ,
                                     energy_form, energy_identity_defect, product_rule_defect,
                                     pv_apply)
from extremal_lab.errors import DomainError, GridMismatch, TailDivergence, UnsupportedGrid
from extremal_lab.kernel import SpectralKernel, exterior_mass
from extremal_lab.special_fn import gelfand_singular_lambda


def frac(s):
    return SpectralKernel.fractional_laplacian(s)


def bump(y):
    return math.exp(-1.0 / (1.0 - y * y)) if abs(y) < 1 else 0.0


def cos_cutoff(y):
    return math.cos(y) * bump(y)


# ------------------------------------------------------------------ grid

def test_grid_nodes_uniform_and_interior():
    g = Grid(9, R=2.0)
    assert g.h == pytest.approx(0.4)
    assert np.allclose(np.diff(g.nodes), g.h, rtol=1e-14)
    assert g.nodes[0] > -2.0 and g.nodes[-1] < 2.0
    assert g.distance_to_boundary()[0] == pytest.approx(g.h)


def test_grid_rejects_bad_input():
    with pytest.raises(UnsupportedGrid):
        Grid(10, kind="chebyshev")
    with pytest.raises(DomainError):
        Grid(0)
    with pytest.raises(DomainError):
        Grid(10, R=0.0)


def test_unknown_singular_rule():
    with pytest.raises(DomainError):
        assemble(frac(0.5), Grid(8), "midpoint")


# ------------------------------------------------------------------ structure

@pytest.mark.parametrize("rule", SINGULAR_RULES)
@pytest.mark.parametrize("s", [0.02, 0.1, 0.3, 0.5, 0.7, 0.95])
@pytest.mark.parametrize("N", [1, 2, 5, 64])
def test_operator_invariants(rule, s, N):
    op = assemble(frac(s), Grid(N), rule)
    assert np.array_equal(op.W, op.W.T)
    assert np.all(np.diag(op.W) == 0)
    assert np.all(op.W >= 0)
    assert np.all(op.tau > 0)


def test_operator_is_immutable(op_half_200):
    with pytest.raises(ValueError):
        op_half_200.W[0, 1] = 1.0
    with pytest.raises(ValueError):
        op_half_200.matrix[0, 0] = 1.0


def test_tau_exceeds_exterior_mass():
    op = assemble(frac(0.4), Grid(50))
    assert np.all(op.tau >= exterior_mass(op.kernel, op.grid.nodes))


def test_constant_function(op_half_200):
    Lu = op_half_200.apply(np.full(200, 3.0))
    assert np.allclose(Lu, 3.0 * op_half_200.tau, rtol=1e-12)


def test_odd_function_centre_node():
    op = assemble(frac(0.6), Grid(201))
    x = op.grid.nodes
    Lu = op.apply(x ** 3 - x)
    assert abs(Lu[100]) <= 1e-12 * np.max(np.abs(Lu))


def test_grid_mismatch(op_half_200):
    with pytest.raises(GridMismatch):
        op_half_200.apply(np.ones(10))
    with pytest.raises(GridMismatch):
        energy_form(op_half_200, np.ones(200), np.ones(201))


# ------------------------------------------------------------------ consistency

def torsion_constant(s):
    return 2 ** (2 * s) * math.gamma(1 + s) * math.gamma(0.5 + s) / math.sqrt(math.pi)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.9])
def test_torsion_profile_is_constant(s):
    g = Grid(799)
    Lu = assemble(frac(s), g).apply((1 - g.nodes ** 2) ** s)
    i0, i5 = 399, 599  # x = 0 and x = 0.5
    assert Lu[i0] / Lu[i5] == pytest.approx(1.0, abs=0.02)
    assert Lu[i0] == pytest.approx(torsion_constant(s), rel=1e-3)


def test_torsion_ratio_converges_at_half():
    ratios = []
    for N in (199, 399, 799):
        g = Grid(N)
        Lu = assemble(frac(0.5), g).apply(np.sqrt(1 - g.nodes ** 2))
        ratios.append(Lu[(N - 1) // 2] / Lu[3 * (N + 1) // 4 - 1])
    errs = [abs(r - 1) for r in ratios]
    assert errs[-1] <= 0.02 and errs[0] > errs[1] > errs[2]


@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_consistency_order(s):
    k = frac(s)
    pts = (0.0, 0.5)
    ref = [pv_apply(k, cos_cutoff, x, singular_points=(-1.0, 1.0)) for x in pts]
    errs = []
    for N in (255, 511, 1023):
        g = Grid(N)
        Lu = assemble(k, g).apply(np.array([cos_cutoff(x) for x in g.nodes]))
        errs.append(max(abs(Lu[int(round((x + 1) / g.h)) - 1] - r) for x, r in zip(pts, ref)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= min(2 - 2 * s, 1)


def test_taylor2_rule_consistent_at_lower_order():
    g = Grid(799)
    Lu = assemble(frac(0.5), g, "taylor2").apply(np.sqrt(1 - g.nodes ** 2))
    assert Lu[399] == pytest.approx(1.0, rel=2e-2)


def test_first_eigenvalue_half_laplacian():
    # first Dirichlet eigenvalue of the square-root Laplacian on (-1, 1)
    from extremal_lab.solve import first_eigenvalue
    vals = [first_eigenvalue(assemble(frac(0.5), Grid(N))) for N in (200, 400, 800)]
    ref = 1.1577738836977
    errs = [v / ref - 1 for v in vals]
    assert errs[0] > errs[1] > errs[2] > 0
    assert errs[2] < 1e-3


# ------------------------------------------------------------------ energy identities

def test_energy_form_zero_and_hot_node(op_half_200):
    N, h = 200, op_half_200.grid.h
    assert energy_form(op_half_200, np.zeros(N), np.random.default_rng(0).normal(size=N)) == 0.0
    e = np.zeros(N)
    e[17] = 1.0
    expected = (op_half_200.W[17].sum() + op_half_200.tau[17]) * h
    assert energy_form(op_half_200, e, e) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("N", [64, 400])
def test_energy_identity_random(N, rng):
    op = assemble(frac(0.37), Grid(N))
    for _ in range(20):
        f, g = rng.normal(size=(2, N))
        assert energy_identity_defect(op, f, g) <= 1e-12
        assert energy_form(op, f, g) == energy_form(op, g, f)


def test_energy_form_positive(rng):
    op = assemble(frac(0.6), Grid(64))
    for _ in range(50):
        f = rng.normal(size=64)
        assert energy_form(op, f, f) > 0


@pytest.mark.parametrize("N", [64, 400])
def test_product_rule_random(N, rng):
    op = assemble(frac(0.45), Grid(N))
    x = op.grid.nodes
    for _ in range(20):
        a, b = rng.normal(size=2)
        f = np.cos(a * x) + rng.normal(scale=0.1, size=N)
        g = np.exp(b * x)
        assert product_rule_defect(op, f, g) <= 1e-12
    assert product_rule_defect(op, f, f) <= 1e-12
    assert product_rule_defect(op, np.ones(N), g) <= 1e-12


def test_carre_du_champ_of_constant(op_half_200):
    one = np.ones(200)
    assert np.allclose(carre_du_champ(op_half_200, one, one), op_half_200.tau, rtol=1e-14)


def test_discrete_maximum_principle(rng):
    op = assemble(frac(0.35), Grid(120))
    for _ in range(20):
        rhs = rng.exponential(size=120) * (rng.random(120) < 0.3)
        u = np.linalg.solve(op.matrix, rhs)
        assert u.min() >= -1e-14 * max(1.0, u.max())


# ------------------------------------------------------------------ principal values

def test_pv_odd_and_constant():
    k = frac(0.4)
    assert pv_apply(k, lambda y: y, 0.0) == pytest.approx(0.0, abs=1e-14)
    assert pv_apply(k, lambda y: 2.5, 0.3) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("x", [0.25, 0.5])
def test_pv_gelfand_singular_profile(x):
    s = 0.3
    k = frac(s)
    val = pv_apply(k, lambda y: -2 * s * math.log(abs(y)) if y else 0.0, x, singular_points=(0.0,))
    assert val == pytest.approx(gelfand_singular_lambda(1, s) * x ** (-2 * s), rel=1e-8)


@pytest.mark.parametrize("s, beta", [(0.3, 0.2), (0.45, 0.5), (0.7, 0.3)])
def test_pv_scaling_law(s, beta):
    k = frac(s)
    prof = lambda y: abs(y) ** (-beta) if y else 0.0
    v1 = pv_apply(k, prof, 0.3, singular_points=(0.0,))
    v2 = pv_apply(k, prof, 0.6, singular_points=(0.0,))
    assert v1 / v2 == pytest.approx(2 ** (beta + 2 * s), rel=1e-8)


def test_pv_bump_matches_fourier_oracle():
    s = 0.9
    uhat = lambda xi: 2 * quad(bump, 0, 1, weight="cos", wvar=xi, epsabs=1e-15, limit=200)[0]
    edges = np.linspace(0, 400, 201)
    four = sum(quad(lambda t: t ** (2 * s) * uhat(t), a, b, epsabs=1e-13, limit=200)[0]
               for a, b in zip(edges[:-1], edges[1:])) / math.pi
    val = pv_apply(frac(s), bump, 0.0, singular_points=(-1.0, 1.0))
    assert val == pytest.approx(four, rel=1e-5)


def test_pv_tail_divergence():
    with pytest.raises(TailDivergence):
        pv_apply(frac(0.3), lambda y: y * y, 0.2)

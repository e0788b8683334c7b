"""Torus symbols, continuum constants, exponent fits, symbol grammar."""

import math

import numpy as np
import pytest

from specdecay.invariant import (
    discrete_bilaplacian_symbol,
    lattice_laplacian_symbol,
    moser_constant_rn,
    ns_exponent_fit,
    parse_symbol,
    rn_laplacian_profile,
    sobolev_constant_rn,
    symbol_density_profile,
    unit_ball_volume,
)
from specdecay.operators import cycle_laplacian, decay_profiles
from specdecay.profiles import evaluate, g_transform, power_profile


def test_lattice_symbol_values():
    s1 = lattice_laplacian_symbol(1)
    assert s1.eigenvalues_at(np.array([[math.pi]]))[0, 0] == pytest.approx(4.0)
    s2 = lattice_laplacian_symbol(2)
    assert s2.eigenvalues_at(np.array([[math.pi, math.pi]]))[0, 0] == pytest.approx(8.0)
    s3 = lattice_laplacian_symbol(3)
    assert s3.eigenvalues_at(np.zeros((1, 3)))[0, 0] == pytest.approx(0.0, abs=1e-15)


def test_symbol_density_d1():
    sym = lattice_laplacian_symbol(1)
    res = symbol_density_profile(sym, [2.0, 4.0], resolution=4096)
    # measure of {xi : 2 - 2 cos xi <= 2} is pi out of 2 pi
    assert evaluate(res.profile, 2.0) == pytest.approx(0.5, abs=2e-3)
    assert evaluate(res.profile, 4.0) == pytest.approx(1.0, abs=1e-12)
    assert res.error_estimate < 2e-3


def test_symbol_density_d1_matches_arccos():
    sym = lattice_laplacian_symbol(1)
    lams = np.linspace(0.05, 3.95, 40)
    res = symbol_density_profile(sym, lams, resolution=4096)
    for lam in lams:
        exact = math.acos(1.0 - lam / 2.0) / math.pi
        assert evaluate(res.profile, lam) == pytest.approx(exact, abs=1e-3)


def test_symbol_density_d2_small_lambda_slope():
    sym = lattice_laplacian_symbol(2)
    lams = np.geomspace(0.02, 0.2, 8)
    res = symbol_density_profile(sym, lams, resolution=2048)
    # integrated density of states ~ lam / (4 pi) near zero
    for lam in lams:
        assert evaluate(res.profile, lam) / lam == pytest.approx(1.0 / (4.0 * math.pi), rel=0.05)


def test_symbol_density_grid_rejection():
    sym = lattice_laplacian_symbol(1)
    with pytest.raises(ValueError, match="grid too coarse"):
        symbol_density_profile(sym, [0.5], resolution=8, tol=1e-9)
    with pytest.raises(ValueError):
        symbol_density_profile(sym, [], resolution=64)
    with pytest.raises(ValueError):
        symbol_density_profile(sym, [1.0], resolution=4)


def test_symbol_density_consistent_with_cycle():
    # finite-quotient: cycle eigenvalue counts approach the torus measure,
    # with gaps shrinking as the quotient grows
    sym = lattice_laplacian_symbol(1)
    lams = [0.5, 1.0, 2.0, 3.0]
    res = symbol_density_profile(sym, lams, resolution=8192)
    last_gap = math.inf
    for n, tol in ((16, 0.2), (64, 0.05), (256, 0.015)):
        fd = decay_profiles(cycle_laplacian(n), "density", "half_open")
        gap = max(abs(evaluate(res.profile, lam) - evaluate(fd, lam)) for lam in lams)
        assert gap < tol
        assert gap <= last_gap + 1e-12
        last_gap = gap


def test_rn_profile_constants():
    p2 = rn_laplacian_profile(2)
    assert p2.coefficient == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-14)
    assert p2.exponent == 1.0
    p3 = rn_laplacian_profile(3)
    assert p3.coefficient == pytest.approx(1.0 / (6.0 * math.pi**2), rel=1e-14)
    assert p3.exponent == 1.5
    p1 = rn_laplacian_profile(1)
    assert p1.coefficient == pytest.approx(1.0 / math.pi, rel=1e-14)
    assert p1.exponent == 0.5
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-14)


def test_rn_profile_feeds_g_transform():
    # G = n C_n / (n - 2) lam^(n/2 - 1)
    for n in (3, 4, 5):
        f = rn_laplacian_profile(n)
        g = g_transform(f)
        cn = f.coefficient
        assert g.coefficient == pytest.approx(n * cn / (n - 2.0), rel=1e-13)
        assert g.exponent == pytest.approx(0.5 * n - 1.0, rel=1e-14)


def test_sobolev_constant_d3():
    expect = (4.0 * math.pi) ** (1.0 / 3.0) / math.pi
    assert sobolev_constant_rn(3) == pytest.approx(expect, abs=1e-12)
    assert sobolev_constant_rn(3) == pytest.approx(0.7400369679, abs=1e-9)
    with pytest.raises(ValueError):
        sobolev_constant_rn(2)


def test_constant_asymptotics():
    n = 10_000
    dn = sobolev_constant_rn(n)
    assert dn * math.sqrt(n * math.pi / (2.0 * math.e)) == pytest.approx(1.0, abs=0.02)
    en = moser_constant_rn(n)
    assert en * n * math.pi / (2.0 * math.e) == pytest.approx(1.0, abs=0.02)


def test_ns_exponent_fit_power_law():
    slope, intercept, residual = ns_exponent_fit(power_profile(1.0, 1.5), (1e-3, 1e-1))
    assert slope == pytest.approx(1.5, abs=1e-12)
    assert intercept == pytest.approx(0.0, abs=1e-10)
    assert residual < 1e-10


def test_ns_exponent_fit_lattice_d1():
    sym = lattice_laplacian_symbol(1)
    lams = np.geomspace(1e-4, 1e-2, 48)
    res = symbol_density_profile(sym, lams, resolution=2**16)
    slope, _, _ = ns_exponent_fit(res.profile, (1e-4, 1e-2), samples=48)
    assert slope == pytest.approx(0.5, abs=0.02)


def test_ns_exponent_fit_lattice_d3():
    sym = lattice_laplacian_symbol(3)
    lams = np.geomspace(1e-2, 1e-1, 24)
    res = symbol_density_profile(sym, lams, resolution=256)
    slope, _, _ = ns_exponent_fit(res.profile, (1e-2, 1e-1), samples=24)
    assert slope == pytest.approx(1.5, rel=0.05)


def test_ns_exponent_fit_errors():
    with pytest.raises(ValueError):
        ns_exponent_fit(power_profile(1.0, 1.0), (1e-1, 1e-3))
    from specdecay.profiles import step_profile
    with pytest.raises(ValueError, match="vanishes"):
        ns_exponent_fit(step_profile([(1.0, 1.0)]), (1e-3, 1e-1))


def test_discrete_bilaplacian():
    sym = discrete_bilaplacian_symbol(1)
    assert sym.eigenvalues_at(np.array([[math.pi]]))[0, 0] == pytest.approx(16.0)


def test_parse_symbol_lattice():
    sym = parse_symbol("4 - 2*cos(1,0) - 2*cos(0,1)", dimension=2)
    ref = lattice_laplacian_symbol(2)
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 2 * math.pi, size=(20, 2))
    np.testing.assert_allclose(sym.eigenvalues_at(pts), ref.eigenvalues_at(pts), atol=1e-12)


def test_parse_symbol_sin_and_bare_terms():
    sym = parse_symbol("1 + 0.5*sin(2)", dimension=1)
    x = np.array([[0.3]])
    assert sym.eigenvalues_at(x)[0, 0] == pytest.approx(1.0 + 0.5 * math.sin(0.6), rel=1e-12)
    sym2 = parse_symbol("cos(1) + 1", dimension=1)
    assert sym2.eigenvalues_at(x)[0, 0] == pytest.approx(math.cos(0.3) + 1.0, rel=1e-12)


def test_parse_symbol_positional_errors():
    with pytest.raises(ValueError, match="position"):
        parse_symbol("2 - 2*cois(1)", dimension=1)
    with pytest.raises(ValueError, match="position"):
        parse_symbol("", dimension=1)
    with pytest.raises(ValueError, match="components"):
        parse_symbol("cos(1,2)", dimension=1)
    with pytest.raises(ValueError, match="position"):
        parse_symbol("1 1", dimension=1)

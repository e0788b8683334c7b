"""Monotone/decay profile calculus: exact examples and invariants."""

import json
import math

import numpy as np
import pytest

from specdecay.profiles import (
    DecayProfile,
    ExponentialTail,
    MonotoneProfile,
    check_doubling,
    check_growth_condition,
    evaluate,
    g_transform,
    h_of,
    laplace_stieltjes,
    m_transform,
    n_of,
    power_profile,
    quadrature,
    right_inverse_decreasing,
    right_inverse_increasing,
    step_profile,
    sum_exp_decay,
    tabulated_decay,
    tabulated_profile,
)


def brute_right_inverse(p, y, lam_hi=100.0, n=20001):
    """Independent oracle: sup{x : p(x) <= y} by dense scan."""
    if y < p.value_at_zero:
        return 0.0
    xs = np.linspace(0.0, lam_hi, n)
    ok = np.array([evaluate(p, x) <= y for x in xs])
    if ok.all():
        return math.inf
    first_bad = np.argmin(ok)
    return xs[first_bad]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def test_evaluate_step_includes_jump():
    p = step_profile([(2.0, 0.5)])
    assert evaluate(p, 2.0) == 0.5


def test_evaluate_step_below_breakpoint():
    p = step_profile([(2.0, 0.5)])
    assert evaluate(p, 1.999) == 0.0


def test_evaluate_power():
    p = power_profile(1.0, 1.5)
    assert evaluate(p, 4.0) == pytest.approx(8.0, abs=1e-14)


def test_evaluate_negative_rejected():
    with pytest.raises(ValueError):
        evaluate(step_profile([(1.0, 1.0)]), -0.5)


def test_evaluate_tabulated_staircase():
    p = tabulated_profile([1.0, 2.0, 3.0], [0.25, 0.5, 0.5])
    assert evaluate(p, 0.5) == 0.0
    assert evaluate(p, 1.0) == 0.25
    assert evaluate(p, 1.7) == 0.25
    assert evaluate(p, 2.0) == 0.5
    assert evaluate(p, 10.0) == 0.5


def test_step_validation():
    with pytest.raises(ValueError):
        step_profile([(1.0, 0.0)])
    with pytest.raises(ValueError):
        MonotoneProfile(kind="step", positions=np.array([2.0, 1.0]),
                        increments=np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        power_profile(0.0, 1.0)
    with pytest.raises(ValueError):
        power_profile(1.0, -2.0)


# ---------------------------------------------------------------------------
# right inverses
# ---------------------------------------------------------------------------


def test_right_inverse_step():
    # {x : p <= 0.3} = [0, 2), sup = 2
    p = step_profile([(2.0, 0.5)])
    assert right_inverse_increasing(p, 0.3) == 2.0
    assert brute_right_inverse(p, 0.3, lam_hi=4.0) == pytest.approx(2.0, abs=1e-3)


def test_right_inverse_completion_below_mass_at_zero():
    p = step_profile([(2.0, 0.5)], value_at_zero=0.25)
    assert right_inverse_increasing(p, 0.1) == 0.0


def test_right_inverse_power():
    p = power_profile(1.0, 2.0)
    assert right_inverse_increasing(p, 9.0) == pytest.approx(3.0, abs=1e-14)


def test_right_inverse_bounded_profile_is_inf():
    p = step_profile([(2.0, 0.5)])
    assert right_inverse_increasing(p, 0.5) == math.inf
    assert right_inverse_increasing(p, 1.0) == math.inf


def test_right_inverse_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(25):
        k = rng.integers(1, 6)
        pos = np.sort(rng.uniform(0.1, 8.0, size=k))
        pos += np.arange(k) * 1e-3  # enforce strict increase
        inc = rng.uniform(0.05, 1.0, size=k)
        v0 = float(rng.choice([0.0, rng.uniform(0.0, 0.3)]))
        p = MonotoneProfile(kind="step", value_at_zero=v0, positions=pos, increments=inc)
        y = float(rng.uniform(0.0, v0 + inc.sum() * 1.2))
        got = right_inverse_increasing(p, y)
        want = brute_right_inverse(p, y, lam_hi=10.0)
        if math.isinf(want):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(want, abs=2e-3)


def test_idempotent_monotone_calculus():
    # p(right_inverse(p, y)) >= y whenever the inverse is finite
    rng = np.random.default_rng(11)
    for _ in range(50):
        k = int(rng.integers(1, 5))
        pos = np.sort(rng.uniform(0.1, 5.0, size=k)) + np.arange(k) * 1e-3
        inc = rng.uniform(0.01, 1.0, size=k)
        p = MonotoneProfile(kind="step", value_at_zero=float(rng.uniform(0, 0.2)),
                            positions=pos, increments=inc)
        y = float(rng.uniform(0.0, float(inc.sum()) * 1.1))
        inv = right_inverse_increasing(p, y)
        if math.isfinite(inv):
            assert evaluate(p, inv) >= y - 1e-12


def test_right_inverse_decreasing_examples():
    m = sum_exp_decay([0.25], [2.0])
    assert right_inverse_decreasing(m, 0.25) == 0.0
    assert right_inverse_decreasing(m, 0.025) == pytest.approx(math.log(10.0) / 2.0, abs=1e-9)
    assert right_inverse_decreasing(m, 1.0) == 0.0
    with pytest.raises(ValueError):
        right_inverse_decreasing(m, 0.0)


# ---------------------------------------------------------------------------
# G transform and H
# ---------------------------------------------------------------------------


def test_g_transform_step():
    f = step_profile([(2.0, 0.5), (4.0, 0.25)])
    g = g_transform(f)
    assert g.kind == "step"
    np.testing.assert_allclose(g.positions, [2.0, 4.0])
    np.testing.assert_allclose(g.increments, [0.25, 0.0625])


def test_g_transform_power():
    g = g_transform(power_profile(1.0, 2.0))
    assert g.kind == "power"
    assert g.coefficient == pytest.approx(2.0)
    assert g.exponent == pytest.approx(1.0)

    g2 = g_transform(power_profile(3.0, 1.5))
    assert g2.coefficient == pytest.approx(9.0)
    assert g2.exponent == pytest.approx(0.5)


def test_g_transform_divergence():
    with pytest.raises(ValueError):
        g_transform(power_profile(1.0, 1.0))
    with pytest.raises(ValueError):
        g_transform(power_profile(1.0, 0.5))
    with pytest.raises(ValueError):
        g_transform(step_profile([(0.0, 1.0)]))
    with pytest.raises(ValueError):
        g_transform(step_profile([(1.0, 1.0)], value_at_zero=0.5))
    with pytest.raises(ValueError):
        g_transform(step_profile([(1e-9, 1.0)]), breakpoint_floor=1e-6)


def test_g_transform_eq26_identity():
    # G(x) = F(x)/x + int_0^x F(u)/u^2 du, exact for steps
    f = step_profile([(0.5, 0.3), (2.0, 0.5), (4.0, 0.25)])
    g = g_transform(f)
    for x in [0.5, 1.0, 2.0, 3.0, 4.0, 7.0]:
        pieces = evaluate(f, x) / x
        knots = [p for p in f.positions if p <= x] + [x]
        for a, b in zip(knots[:-1], knots[1:]):
            if a < b:
                pieces += evaluate(f, a) * (1.0 / a - 1.0 / b)
        assert evaluate(g, x) == pytest.approx(pieces, rel=1e-12)


def test_g_transform_monotonicity_and_h_antitonicity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        k = int(rng.integers(1, 5))
        pos = np.sort(rng.uniform(0.2, 5.0, size=k)) + np.arange(k) * 1e-3
        inc = rng.uniform(0.05, 1.0, size=k)
        f1 = MonotoneProfile(kind="step", positions=pos, increments=inc)
        extra_pos = pos * rng.uniform(0.3, 0.95)
        f2 = step_profile(list(zip(pos, inc)) + list(zip(extra_pos, rng.uniform(0.01, 0.5, size=k))))
        g1, g2 = g_transform(f1), g_transform(f2)
        for x in np.linspace(0.05, 6.0, 40):
            assert evaluate(f1, x) <= evaluate(f2, x) + 1e-12
            assert evaluate(g1, x) <= evaluate(g2, x) + 1e-12
        for y in np.linspace(0.01, 2.0, 25):
            assert h_of(g1, y) >= h_of(g2, y) - 1e-12


def test_h_of_examples():
    g = step_profile([(2.0, 0.25)])
    assert h_of(g, 0.0625) == pytest.approx(0.125, abs=1e-15)
    gp = power_profile(2.0, 1.0)
    assert h_of(gp, 8.0) == pytest.approx(32.0, abs=1e-12)
    assert h_of(gp, 0.0) == 0.0
    assert h_of(step_profile([(1.0, 0.5)]), 0.0) == 0.0
    assert math.isinf(h_of(step_profile([(1.0, 0.5)]), 2.0))


# ---------------------------------------------------------------------------
# M transform and N
# ---------------------------------------------------------------------------


def test_m_transform_sum_exp():
    m = m_transform(sum_exp_decay([0.5], [2.0]))
    assert m.kind == "sum_exp"
    for t in [0.0, 0.3, 1.0, 5.0]:
        assert m(t) == pytest.approx(0.25 * math.exp(-2.0 * t), rel=1e-14)


def test_m_transform_termwise():
    m = m_transform(sum_exp_decay([1.0, 1.0], [1.0, 4.0]))
    for t in [0.1, 1.0, 2.0]:
        assert m(t) == pytest.approx(math.exp(-t) + 0.25 * math.exp(-4.0 * t), rel=1e-14)


def test_m_transform_zero():
    m = m_transform(sum_exp_decay([], []))
    assert m(1.0) == 0.0


def test_m_transform_tabulated_against_closed_form():
    # tabulate 0.5 e^{-2t} densely and compare with the exact integral
    ts = np.geomspace(1e-4, 6.0, 800)
    ts = np.concatenate([[0.0], ts])
    vals = 0.5 * np.exp(-2.0 * ts)
    tail = ExponentialTail(rate=2.0, coefficient=float(vals[-1]), start=float(ts[-1]))
    m = m_transform(tabulated_decay(ts, vals, tail))
    for t in [0.0, 0.2, 1.0, 3.0]:
        exact = 0.25 * math.exp(-2.0 * t)
        assert m(t) == pytest.approx(exact, rel=5e-3)
        assert m(t) >= exact  # chord quadrature dominates convex decay


def test_m_transform_requires_tail():
    ts = np.linspace(0.1, 2.0, 5)
    l = tabulated_decay(ts, 1.0 / ts)
    with pytest.raises(ValueError):
        m_transform(l)


def test_n_of_examples():
    m = sum_exp_decay([0.25], [2.0])
    assert n_of(m, 0.025) == pytest.approx(0.025 / (math.log(10.0) / 2.0), rel=1e-9)
    assert math.isinf(n_of(m, 0.5))
    with pytest.raises(ValueError):
        n_of(m, 0.0)
    # M(t) = 1/t tabulated: Minv(0.1) = 10, N = 0.01
    ts = np.geomspace(0.01, 100.0, 2001)  # includes t=10 up to float rounding
    m2 = tabulated_decay(ts, 1.0 / ts)
    assert n_of(m2, 0.1) == pytest.approx(0.01, rel=1e-9)


# ---------------------------------------------------------------------------
# Laplace transform of dF
# ---------------------------------------------------------------------------


def test_laplace_stieltjes_step():
    f = step_profile([(2.0, 0.5)])
    assert laplace_stieltjes(f, 1.0) == pytest.approx(0.5 * math.exp(-2.0), rel=1e-14)


def test_laplace_stieltjes_total_mass_limit():
    f = step_profile([(2.0, 0.5), (4.0, 0.25)])
    assert laplace_stieltjes(f, 1e-13) == pytest.approx(0.75, abs=1e-10)


def test_laplace_stieltjes_power():
    f = power_profile(1.0, 1.0)
    assert laplace_stieltjes(f, 2.0) == pytest.approx(0.5, rel=1e-14)


def test_laplace_consistency_with_g():
    # L(dG)(t) = sum dF_i exp(-x_i t)/x_i, termwise
    f = step_profile([(0.5, 0.25), (2.0, 0.5), (4.0, 0.25)])
    g = g_transform(f)
    for t in [0.2, 1.0, 3.0]:
        expected = sum(df * math.exp(-x * t) / x for x, df in zip(f.positions, f.increments))
        assert laplace_stieltjes(g, t) == pytest.approx(expected, rel=1e-14)


# ---------------------------------------------------------------------------
# growth / doubling conditions
# ---------------------------------------------------------------------------


def test_check_growth_condition():
    g = power_profile(1.0, 1.0)
    grid = [(u, y) for u in (0.5, 1.0, 2.0) for y in (0.5, 1.0, 2.0)]
    ok, _, _ = check_growth_condition(g, 2.0, grid)
    assert ok

    bounded = step_profile([(2.0, 0.25)])
    ok, _, _ = check_growth_condition(bounded, 0.1, [(1e6, 1.0)])
    assert ok

    xs = np.array([2.0, 4.0])
    gauss = tabulated_profile(xs, np.exp(xs**2))
    ok, worst, margin = check_growth_condition(gauss, 1.0, [(2.0, 2.0)])
    assert not ok
    assert worst == (2.0, 2.0)
    assert margin > 0


def test_check_doubling():
    assert check_doubling(power_profile(1.0, 2.0), 0.9, 10.0)
    assert not check_doubling(power_profile(1.0, 1.0), 0.1, 10.0)
    # boundary: ratio 2^1.5 == 2(1 + eps) exactly
    assert check_doubling(power_profile(1.0, 1.5), math.sqrt(2.0) - 1.0, 10.0)


def test_doubling_implies_g_pinch():
    # whenever the doubling test passes: F <= x G(x) <= (2 + 1/eps) F
    for alpha in (1.5, 2.0, 3.0):
        f = power_profile(1.0, alpha)
        g = g_transform(f)
        eps_star = 2.0 ** (alpha - 1.0) - 1.0
        assert check_doubling(f, eps_star, 10.0)
        for x in np.linspace(0.1, 10.0, 30):
            ratio = x * evaluate(g, x) / evaluate(f, x)
            assert ratio == pytest.approx(alpha / (alpha - 1.0), rel=1e-12)
            assert evaluate(f, x) <= x * evaluate(g, x) + 1e-12
            assert ratio <= 2.0 + 1.0 / eps_star + 1e-12


# ---------------------------------------------------------------------------
# Young-type inequality: s t <= s F(s) + t Finv(t)
# ---------------------------------------------------------------------------


def young_holds(p, s, t):
    lhs = s * t
    rhs = s * evaluate(p, s)
    inv = right_inverse_increasing(p, t)
    if math.isinf(inv):
        return True
    rhs += t * inv
    return lhs <= rhs + 1e-10 * max(1.0, abs(rhs))


def test_young_inequality_random_profiles():
    rng = np.random.default_rng(23)
    for _ in range(300):
        k = int(rng.integers(1, 6))
        pos = np.sort(rng.uniform(0.05, 8.0, size=k)) + np.arange(k) * 1e-3
        inc = rng.uniform(0.01, 2.0, size=k)
        v0 = float(rng.choice([0.0, rng.uniform(0.0, 0.5)]))
        p = MonotoneProfile(kind="step", value_at_zero=v0, positions=pos, increments=inc)
        for _ in range(20):
            s = float(rng.choice([0.0, rng.uniform(0, 10), 10 ** rng.uniform(-3, 2)]))
            t = float(rng.choice([0.0, rng.uniform(0, 3), 10 ** rng.uniform(-3, 1)]))
            assert young_holds(p, s, t)


# ---------------------------------------------------------------------------
# quadrature sanity
# ---------------------------------------------------------------------------


def test_quadrature_two_log_two():
    val = quadrature(lambda u: (1.0 - math.exp(-u)) ** 2 / u**2, 0.0, math.inf)
    assert val == pytest.approx(2.0 * math.log(2.0), abs=1e-8)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_monotone_json_roundtrip():
    for p in (step_profile([(2.0, 0.5), (4.0, 0.25)], value_at_zero=0.1),
              power_profile(0.5, 1.5),
              tabulated_profile([1.0, 2.0], [0.3, 0.7])):
        q = MonotoneProfile.from_json(json.loads(json.dumps(p.to_json())))
        for x in [0.0, 0.5, 1.0, 2.0, 3.5]:
            assert evaluate(q, x) == evaluate(p, x)


def test_decay_json_roundtrip():
    tail = ExponentialTail(rate=1.0, coefficient=0.1, start=2.0)
    for p in (sum_exp_decay([0.5, 0.2], [1.0, 3.0]),
              tabulated_decay([0.5, 1.0, 2.0], [1.0, 0.5, 0.1], tail)):
        q = DecayProfile.from_json(json.loads(json.dumps(p.to_json())))
        for t in [0.0, 0.7, 1.5, 3.0]:
            assert q(t) == p(t)


def test_csv_headers():
    assert step_profile([(2.0, 0.5)]).to_csv().startswith("lambda,value\n")
    assert tabulated_decay([0.1, 1.0], [1.0, 0.2]).to_csv().startswith("t,value\n")

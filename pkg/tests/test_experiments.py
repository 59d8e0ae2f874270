import numpy as np
import pytest

from trotterlab.errors import HypothesisViolated, NotInvertible
from trotterlab.experiments import (WINDOW_SAMPLES, commuting_control,
                                    divergence_experiment, exact_evolution,
                                    generator_residual, pde_residual, pow2_list,
                                    stability_probe)
from trotterlab.funcspace import (Bump, Interval, Sine, Term, VectorFunction,
                                  bump_direction, support_interval)
from trotterlab.spectral import decompose

from conftest import A_DEMO, B_DEMO, C_DEMO

# bump value at sqrt(10) - 3, 40-digit mpmath evaluation
PHI_WINDOW_END = 0.034874805932005212


def test_pow2_list():
    assert pow2_list(3) == [1, 2, 4, 8]
    assert len(pow2_list(10)) == 11


# --- exact evolution --------------------------------------------------------

def test_exact_evolution_at_zero(rng):
    dC = decompose(C_DEMO)
    f = VectorFunction(2, [Term(Bump(), 0.3, [1.0, -2.0]), Term(Sine(2.0), 0.0, [0.5, 0.5])])
    xs = rng.uniform(-2, 2, 50)
    np.testing.assert_allclose(exact_evolution(dC, 0.0, f).evaluate(xs), f.evaluate(xs),
                               atol=1e-14)


def test_exact_evolution_top_eigendirection():
    dC = decompose(C_DEMO)
    u = exact_evolution(dC, 1.0, bump_direction(dC))
    assert len(u.terms) == 1
    assert u.terms[0].shift == pytest.approx(np.sqrt(10), abs=1e-15)
    sup = support_interval(u)
    assert sup.lo == pytest.approx(-np.sqrt(10), abs=1e-15)
    assert sup.hi == pytest.approx(1 - np.sqrt(10), abs=1e-15)


def test_exact_evolution_scalar_translation(rng):
    d = decompose([[1.7]])
    f = VectorFunction(1, [Term(Bump(), 0.0, [1.0])])
    u = exact_evolution(d, 0.4, f)
    xs = rng.uniform(-2, 2, 100)
    np.testing.assert_array_equal(u.evaluate(xs)[:, 0], Bump()(xs + 1.7 * 0.4))


# --- divergence -------------------------------------------------------------

@pytest.fixture(scope="module")
def small_report():
    return divergence_experiment(A_DEMO, B_DEMO, 1.0, [1, 2, 4, 8], 1024)


def test_divergence_window(small_report):
    w = small_report.window
    assert w.lo == pytest.approx(-np.sqrt(10), abs=1e-15)
    assert w.hi == pytest.approx(-3.0, abs=1e-15)
    assert small_report.hypothesis.satisfied


def test_divergence_rows(small_report):
    step = (np.sqrt(10) - 3) / (WINDOW_SAMPLES + 1)
    # bump increasing on (0, 1/2): window sup sits at the last sample
    floor = Bump()(np.array([np.sqrt(10) - 3 - step]))[0]
    assert small_report.gap_floor == pytest.approx(floor, rel=1e-12)
    assert floor < PHI_WINDOW_END < floor * 1.01
    for row in small_report.rows:
        assert row.trotter_edge == pytest.approx(-3.0, abs=1e-9)
        assert row.window_gap == pytest.approx(floor, rel=1e-12)
        assert row.d_m >= row.window_gap
        assert row.d_m >= 0.99 * small_report.gap_floor
        assert row.term_count == 3 * row.m + 1
        assert 1.0 < row.norm_lower <= row.norm_upper


def test_divergence_iterates_vanish_exactly_left_of_edge(rng):
    dA, dB, dC = decompose(A_DEMO), decompose(B_DEMO), decompose(C_DEMO)
    from trotterlab.transport import apply, trotter_operator
    f = bump_direction(dC)
    u = exact_evolution(dC, 1.0, f)
    xs = np.concatenate([[-3.0], rng.uniform(-np.sqrt(10), -3.0, 200), -3 - rng.exponential(1, 50)])
    for m in (1, 3, 16):
        it = apply(trotter_operator(dA, dB, 1.0, m), f)
        assert not np.any(it.evaluate(xs))
    # away from the ends, where the bump underflows to an exact zero
    inside = rng.uniform(-np.sqrt(10) + 0.01, -3.01, 200)
    assert np.all(np.any(u.evaluate(inside) != 0, axis=1))


def test_divergence_rejects_commuting_pair():
    with pytest.raises(HypothesisViolated) as info:
        divergence_experiment(np.diag([1.0, -1.0]), np.diag([2.0, -2.0]), 1.0, [1])
    assert info.value.report.gap == 0.0


def test_divergence_general_t():
    rep = divergence_experiment(A_DEMO, B_DEMO, 2.5, [1, 4], 512)
    assert rep.window.lo == pytest.approx(-2.5 * np.sqrt(10))
    assert rep.window.hi == pytest.approx(-7.5)
    for row in rep.rows:
        assert row.trotter_edge == pytest.approx(-7.5, abs=1e-9)
        assert row.d_m >= row.window_gap >= 0.99 * rep.gap_floor


def test_divergence_long_time_window_capped_by_bump_support():
    # gap * t > 1: window right end is 1 - lambda_C t and contains the bump peak
    rep = divergence_experiment(A_DEMO, B_DEMO, 8.0, [1], 256)
    assert rep.window.hi == pytest.approx(1 - 8 * np.sqrt(10))
    assert rep.gap_floor == 1.0
    assert rep.rows[0].window_gap == pytest.approx(1.0, abs=1e-6)


# --- generator residuals ----------------------------------------------------

def test_generator_residual_zero_function():
    d = decompose(A_DEMO)
    f = VectorFunction(2, [Term(Sine(0.0), 0.0, [1.0, 2.0])])
    table = generator_residual(d, f, [1e-1, 1e-2], Interval(-3, 3), 64)
    assert table.residual == [0.0, 0.0]


def test_generator_residual_linear_rate():
    d = decompose(A_DEMO)
    f = VectorFunction(2, [Term(Sine(1.0), 0.0, [1.0, 0.0])])
    table = generator_residual(d, f, [1e-2, 5e-3, 2.5e-3], Interval(0, 2 * np.pi), 512)
    for ratio in table.ratios():
        assert 0.35 <= ratio <= 0.65
    assert all(b < a for a, b in zip(table.residual, table.residual[1:]))


@pytest.mark.parametrize("c", [1.5, -0.8])
def test_generator_residual_scalar_closed_form(c):
    d = decompose([[c]])
    f = VectorFunction(1, [Term(Sine(1.0), 0.0, [1.0])])
    dom = Interval(-1.0, 4.0)
    hs = [0.1, 0.05, 0.01]
    table = generator_residual(d, f, hs, dom, 256)
    xs = np.linspace(dom.lo, dom.hi, int(np.ceil(dom.length * 256)) + 1)
    for h, r in zip(hs, table.residual):
        direct = np.max(np.abs((np.sin(xs + c * h) - np.sin(xs)) / h - c * np.cos(xs)))
        assert r == pytest.approx(direct, rel=1e-9)


def test_generator_residual_rejects_increasing_h():
    with pytest.raises(ValueError):
        generator_residual(decompose(A_DEMO), VectorFunction(2), [1e-3, 1e-2], Interval(0, 1))


# --- PDE residual -----------------------------------------------------------

def test_pde_residual_scalar_sine():
    d = decompose([[1.5]])
    f = VectorFunction(1, [Term(Sine(1.0), 0.0, [1.0])])
    xs = np.linspace(-3, 3, 61)
    r1 = pde_residual(d, f, 0.3, xs, 1e-2)
    r2 = pde_residual(d, f, 0.3, xs, 5e-3)
    assert r2 / r1 == pytest.approx(0.25, abs=0.01)
    assert pde_residual(d, f, 0.3, xs, 1e-4) < 1e-6


def test_pde_residual_at_time_zero():
    d = decompose(A_DEMO)
    f = VectorFunction(2, [Term(Sine(1.0), 0.0, [1.0, 0.0])])
    xs = np.linspace(0, 6, 31)
    assert pde_residual(d, f, 0.0, xs, 1e-3) < 1e-6


def test_pde_residual_bump_is_second_order():
    # u = phi(x + sqrt(10) t) r; the centered-difference residual is
    # (lambda^3 - lambda) h^2 / 6 |phi'''| + O(h^4)
    dC = decompose(C_DEMO)
    f = bump_direction(dC)
    xs = np.linspace(0.02, 0.98, 241) - np.sqrt(10)
    r4 = pde_residual(dC, f, 1.0, xs, 1e-4)
    r5 = pde_residual(dC, f, 1.0, xs, 1e-5)
    assert r5 / r4 == pytest.approx(0.01, rel=0.02)
    lam = np.sqrt(10)
    # max |phi'''| on (0,1) is 456.739, near x = 0.878 (mpmath)
    assert r4 == pytest.approx((lam**3 - lam) / 6 * 1e-8 * 456.739, rel=0.05)


# --- commuting control ------------------------------------------------------

def test_commuting_control_demo_a():
    rep = commuting_control(A_DEMO, 2.0, 1.0, [1, 2, 4, 16, 64], points_per_unit=512)
    assert rep.max_deviation <= 1e-10
    assert rep.max_d <= 1e-10


def test_commuting_control_equal_pair_is_double_time():
    from trotterlab.transport import from_semigroup, max_deviation, trotter_operator
    dA = decompose(A_DEMO)
    for m in (1, 5, 12):
        assert max_deviation(trotter_operator(dA, dA, 0.7, m), from_semigroup(dA, 1.4)) <= 1e-12
    rep = commuting_control(A_DEMO, 1.0, 0.7, [1, 5, 12], points_per_unit=256)
    assert rep.max_deviation <= 1e-12


def test_commuting_control_scalar():
    rep = commuting_control([[2.0]], -0.5, 1.0, [1, 3, 10], points_per_unit=256)
    assert rep.max_deviation == 0.0
    # shifts accumulate in floating point; the sampled distance stays at rounding level
    assert rep.max_d <= 1e-14
    assert all(r.term_count == 1 for r in rep.rows)


# --- stability probe --------------------------------------------------------

def test_stability_probe_commuting_diagonal():
    rep = stability_probe(np.diag([1.0, -1.0]), np.diag([2.0, -2.0]), 1.0, [1, 2, 5, 20])
    # two translated coordinate projections: norm sqrt(2), sum of norms 2
    for row in rep.rows:
        assert row.norm_lower == pytest.approx(np.sqrt(2), abs=1e-12)
        assert row.norm_upper == pytest.approx(2.0)
    assert rep.log_slope == pytest.approx(0.0, abs=1e-12)


def test_stability_probe_demo_pair():
    rep = stability_probe(A_DEMO, B_DEMO, 1.0, range(1, 65), restarts=4, seed=7)
    assert [r.m for r in rep.rows] == list(range(1, 65))
    assert rep.endpoints_nondecreasing
    assert rep.rows[-1].norm_lower > rep.rows[0].norm_lower
    assert rep.log_slope > 0
    assert rep.fit_M > 0


def test_stability_probe_rejects_singular_b():
    with pytest.raises(NotInvertible) as info:
        stability_probe(A_DEMO, np.zeros((2, 2)), 1.0, [1])
    assert info.value.matrix == "B"

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betbounds._dual import fan_lower_bound
from betbounds.betting import (
    CsState,
    Fixed,
    GridConfig,
    LogOptimalOracle,
    Mixture,
    PrPlLambda,
    _invert,
    _reject_prefilter,
    bet_range,
    betting_ci,
    betting_cs,
    betting_cs_step,
    log_wealth_grid,
    mixture_nodes,
    new_wealth_state,
    next_bet,
    realized_regret,
    regret_corrected_cs,
    sup_log_wealth,
    update_wealth,
)
from betbounds.classical import prpl_eb_ci
from betbounds.core import Bernoulli, Beta, PointMass, Seed, draw_sample, empirical_distribution
from betbounds.exceptions import (
    DomainError,
    EmptySampleError,
    HorizonDependentStrategyError,
    OutOfRangeError,
    ParameterError,
)

unit = st.floats(0.0, 1.0, allow_nan=False)


def replay(xs, m, strategy, alpha=0.05):
    """Terminal log-wealth through the one-step recursion."""
    state = new_wealth_state(m, strategy, alpha, n_target=len(xs))
    for x in xs:
        state = update_wealth(state, x, strategy)
    return state.total_log_wealth


def dense_hull(xs, strategy, alpha, pts):
    """Acceptance hull on a dense m-grid by brute-force replay."""
    thr = math.log(1 / alpha)
    acc = [m for m in pts if replay(xs, m, strategy, alpha) < thr]
    return min(acc), max(acc)


class TestStrategies:

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            Mixture(n_nodes=4)
        with pytest.raises(ParameterError):
            Mixture(mode="plus_minus")
        with pytest.raises(ParameterError):
            PrPlLambda(cap=1.0)
        with pytest.raises(ParameterError):
            Fixed(0.3, clip_eps=0.5)
        with pytest.raises(ParameterError):
            GridConfig(grid_points=1)
        with pytest.raises(ParameterError):
            GridConfig(refine_tol=0.0)

    def test_bet_range(self):
        lo, hi = bet_range(0.25, 1e-6)
        assert lo == pytest.approx(-(1 - 1e-6) / 0.75)
        assert hi == pytest.approx((1 - 1e-6) / 0.25)

    def test_mixture_nodes_span_range_with_trapezoid_weights(self):
        lam, log_w = mixture_nodes(0.4, 16)
        lo, hi = bet_range(0.4)
        assert lam[0, 0] == pytest.approx(lo) and lam[0, -1] == pytest.approx(hi)
        w = np.exp(log_w)
        assert w.sum() == pytest.approx(1.0)
        assert w[0] == pytest.approx(w[1] / 2)


class TestSupLogWealth:

    def test_flat_objective(self):
        assert sup_log_wealth([0.5, 0.5], 0.5) == (0.0, 0.0)

    def test_boundary_optimum(self):
        lam, val = sup_log_wealth([1.0, 1.0, 1.0], 0.5)
        assert lam == pytest.approx(2 * (1 - 1e-6), rel=1e-12)
        assert val == pytest.approx(3 * math.log(2), abs=1e-5)

    def test_symmetric_objective(self):
        lam, val = sup_log_wealth([0.0, 1.0], 0.5)
        assert abs(lam) < 1e-10
        assert abs(val) < 1e-12

    def test_errors(self):
        with pytest.raises(EmptySampleError):
            sup_log_wealth([], 0.5)
        with pytest.raises(DomainError):
            sup_log_wealth([0.5], 1.5)

    @settings(max_examples=40)
    @given(st.lists(unit, min_size=1, max_size=40), st.floats(0.01, 0.99))
    def test_beats_random_probes(self, xs, m):
        lam, val = sup_log_wealth(xs, m)
        lo, hi = bet_range(m)
        probes = np.random.default_rng(0).uniform(lo, hi, 100)
        d = np.asarray(xs) - m
        vals = np.log1p(probes[:, None] * d[None, :]).sum(axis=1)
        assert val >= vals.max() - 1e-10

    def test_vectorized(self, rng):
        x = rng.random(30)
        ms = np.array([0.2, 0.5, 0.8])
        lam, val = sup_log_wealth(x, ms)
        for i, m in enumerate(ms):
            assert (lam[i], val[i]) == sup_log_wealth(x, m)


class TestOneStep:

    def test_mixture_first_bet_is_zero(self):
        for m in (0.1, 0.5, 0.9):
            s = new_wealth_state(m, Mixture())
            assert next_bet(s, Mixture()) == 0.0

    def test_mixture_second_bet_matches_integral(self):
        # exact: int l (1 + l/2) dl / int (1 + l/2) dl over [-2, 2] = 2/3
        strat = Mixture(64)
        s = update_wealth(new_wealth_state(0.5, strat), 1.0, strat)
        assert next_bet(s, strat) == pytest.approx(2 / 3, abs=1e-3)

    def test_fixed_bet_constant(self):
        strat = Fixed(0.3)
        s = new_wealth_state(0.5, strat)
        for x in (0.1, 0.9, 0.4):
            assert next_bet(s, strat) == 0.3
            s = update_wealth(s, x, strat)

    def test_zero_bet_keeps_wealth(self):
        s = update_wealth(new_wealth_state(0.5, Fixed(0.0)), 0.9, Fixed(0.0))
        assert s.wealth == 1.0

    def test_single_multiplication(self):
        s = update_wealth(new_wealth_state(0.5, Fixed(2.0)), 1.0, Fixed(2.0))
        # the bet is clipped to 2 (1 - 1e-6)
        assert s.wealth == pytest.approx(2.0, rel=1e-6)

    def test_plus_minus_pair(self):
        strat = Fixed(0.5, mode="plus_minus")
        s = update_wealth(new_wealth_state(0.5, strat), 1.0, strat)
        lp, lm = s.log_wealth
        assert math.exp(lp) == pytest.approx(1.25)
        assert math.exp(lm) == pytest.approx(0.75)
        assert s.wealth == pytest.approx(1.0)

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            update_wealth(new_wealth_state(0.5, Fixed(0.1)), 1.2, Fixed(0.1))
        with pytest.raises(DomainError):
            new_wealth_state(1.2, Fixed(0.1))

    def test_prpl_needs_horizon(self):
        with pytest.raises(ParameterError):
            new_wealth_state(0.5, PrPlLambda())

    def test_oracle_bet_stationarity(self):
        # interior optimum: E[1 / (1 + lam (X - m))] = 1
        d = empirical_distribution([0.1, 0.3, 0.35, 0.8, 0.9])
        strat = LogOptimalOracle(d)
        for m in (0.3, 0.45, 0.6):
            lam = next_bet(new_wealth_state(m, strat), strat)
            lo, hi = bet_range(m)
            assert lo < lam < hi
            val = float(np.dot(d.probs, 1 / (1 + lam * (d.support - m))))
            assert val == pytest.approx(1.0, abs=1e-8)


class TestLogWealthGrid:

    @pytest.mark.parametrize("strategy", [
        Mixture(16), Mixture(64), Fixed(0.7), Fixed(-1.5), Fixed(0.4, mode="plus_minus"),
        PrPlLambda(), PrPlLambda(mode="signed"),
    ], ids=repr)
    def test_matches_step_recursion(self, strategy, rng):
        x = rng.beta(2, 5, size=40)
        ms = np.array([0.05, 0.2, 0.3, 0.5, 0.77, 0.99])
        grid = log_wealth_grid(x, ms, strategy, alpha=0.05)
        ref = [replay(x, m, strategy, 0.05) for m in ms]
        np.testing.assert_allclose(grid, ref, rtol=1e-10, atol=1e-10)

    def test_oracle_matches_step_recursion(self, rng):
        x = rng.random(30)
        strat = LogOptimalOracle(empirical_distribution(x))
        ms = np.array([0.2, 0.5, 0.7])
        np.testing.assert_allclose(log_wealth_grid(x, ms, strat),
                                   [replay(x, m, strat) for m in ms], atol=1e-10)

    def test_empty_sample_has_unit_wealth(self):
        np.testing.assert_array_equal(log_wealth_grid([], [0.2, 0.8], Mixture()), [0.0, 0.0])

    def test_prefilter_is_sound(self, rng):
        alpha = 0.05
        thr = math.log(1 / alpha)
        ms = np.linspace(0, 1, 801)
        for dist in (Bernoulli(0.5), Beta(2, 5), Bernoulli(0.95)):
            x = draw_sample(dist, 400, Seed(int(rng.integers(1 << 30)))).values
            for strat in (Mixture(32), PrPlLambda(), Fixed(0.3)):
                flagged = _reject_prefilter(x, strat, alpha, thr)(ms)
                if flagged.any():
                    lw = log_wealth_grid(x, ms[flagged], strat, alpha)
                    assert (lw >= thr).all()


class TestBettingCI:

    def test_empty_sample_is_vacuous(self):
        iv = betting_ci([], 0.05)
        assert (iv.lower, iv.upper) == (0.0, 1.0)

    def test_point_mass(self):
        x = draw_sample(PointMass(0.3), 1000, Seed(0))
        iv = betting_ci(x, 0.05, Mixture())
        assert iv.contains(0.3)
        assert iv.width <= 0.02

    @pytest.mark.parametrize("strategy", [Mixture(32), PrPlLambda(), Fixed(0.5)], ids=repr)
    def test_agrees_with_dense_brute_force(self, strategy, rng):
        x = rng.beta(2, 3, size=60)
        pts = np.linspace(0.0, 1.0, 4001)
        lo, hi = dense_hull(x.tolist(), strategy, 0.1, pts)
        iv = betting_ci(x, 0.1, strategy, GridConfig(256, 1e-7))
        # reported ends are rejected points one refine_tol outside the accepted hull
        assert iv.lower <= lo + 1e-12 and iv.upper >= hi - 1e-12
        assert iv.lower >= lo - 1 / 4000 - 1e-7
        assert iv.upper <= hi + 1 / 4000 + 1e-7

    def test_finer_grid_never_wider_by_more_than_a_cell(self, rng):
        x = rng.random(300)
        coarse = betting_ci(x, 0.05, Mixture(), GridConfig(64, 1e-4))
        fine = betting_ci(x, 0.05, Mixture(), GridConfig(1024, 1e-7))
        cell = 1 / 63
        assert fine.width <= coarse.width + cell

    def test_prpl_bets_not_worse_than_prpl_eb(self, rng):
        x = draw_sample(Bernoulli(0.5), 5000, Seed(9))
        a = betting_ci(x, 0.05, PrPlLambda())
        b = prpl_eb_ci(x, 0.05)
        assert a.width <= b.width * 1.05

    def test_method_tags(self, rng):
        x = rng.random(20)
        assert betting_ci(x, 0.05, Mixture()).method == "betting-mixture"
        assert betting_ci(x, 0.05, PrPlLambda()).method == "betting-prpl"

    def test_empty_acceptance_flag(self):
        # every m rejected: degenerate interval at the minimal-wealth grid point
        lo, hi, flags = _invert(lambda ms: 10.0 + (ms - 0.3) ** 2, 1.0, GridConfig(11))
        assert flags == ("empty_acceptance",)
        assert lo == hi == pytest.approx(0.3)


class TestConfidenceSequence:

    def test_first_step_rejects_nothing(self):
        cs = CsState(0.05, Mixture(), GridConfig(64))
        iv = cs.step(0.9)
        assert (iv.lower, iv.upper) == (0.0, 1.0)

    def test_widths_nonincreasing(self, rng):
        lo, hi = betting_cs(rng.random(2000), 0.05, Mixture(), GridConfig(256))
        w = hi - lo
        assert (np.diff(w) <= 1e-15).all()
        assert (np.diff(lo) >= 0).all() and (np.diff(hi) <= 0).all()

    @pytest.mark.parametrize("strategy", [Mixture(32), Fixed(0.4)], ids=repr)
    def test_step_matches_compiled_run(self, strategy, rng):
        x = rng.random(300)
        a = CsState(0.05, strategy, GridConfig(128))
        steps = np.array([[iv.lower, iv.upper] for iv in map(a.step, x)])
        b = CsState(0.05, strategy, GridConfig(128))
        lo, hi = b.run(x)
        np.testing.assert_array_equal(steps[:, 0], lo)
        np.testing.assert_array_equal(steps[:, 1], hi)

    def test_grid_wealth_matches_replay(self, rng):
        x = rng.random(150)
        cs = CsState(0.05, Mixture(32), GridConfig(32))
        cs.run(x)
        for j in (3, 10, 20):
            if cs.active[j]:
                assert cs.log_wealth[j] == pytest.approx(replay(x, cs.ms[j], Mixture(32)), abs=1e-9)
            else:
                assert cs.log_wealth[j] >= math.log(20)

    def test_resume_after_run(self, rng):
        x = rng.random(400)
        a = CsState(0.05, Mixture(32), GridConfig(128))
        a.run(x[:200])
        lo2, hi2 = a.run(x[200:])
        lo, hi = betting_cs(x, 0.05, Mixture(32), GridConfig(128))
        np.testing.assert_array_equal(lo2, lo[200:])
        np.testing.assert_array_equal(hi2, hi[200:])

    def test_refined_interval_inside_running(self, rng):
        x = draw_sample(Bernoulli(0.3), 500, Seed(2)).values
        cs = CsState(0.05, Mixture(32), GridConfig(64))
        cs.run(x)
        ref = cs.refined_interval()
        run = cs.running_interval
        assert run.lower <= ref.lower <= ref.upper <= run.upper
        assert ref.contains(0.3)

    def test_horizon_dependent_strategy_rejected(self):
        with pytest.raises(HorizonDependentStrategyError):
            CsState(0.05, PrPlLambda())
        cs = CsState(0.05)
        with pytest.raises(HorizonDependentStrategyError):
            betting_cs_step(cs, 0.5, strategy=PrPlLambda())

    def test_step_wrapper(self):
        cs = CsState(0.05, Mixture(), GridConfig(32))
        cs2, iv = betting_cs_step(cs, 0.3, 0.05, Mixture())
        assert cs2 is cs and iv.n == 1
        with pytest.raises(ParameterError):
            betting_cs_step(cs, 0.3, alpha=0.1)
        with pytest.raises(OutOfRangeError):
            cs.step(-0.1)


class TestRegret:

    def test_constant_stream_at_m(self):
        x = np.full(50, 0.4)
        assert realized_regret(x, 0.4, Mixture()) == pytest.approx(0.0, abs=1e-12)

    def test_fixed_at_empirical_optimum(self, rng):
        x = rng.random(200)
        lam, _ = sup_log_wealth(x, 0.4)
        assert realized_regret(x, 0.4, Fixed(lam)) <= 1e-9

    def test_regret_nonnegative(self, rng):
        x = rng.random(100)
        for m in (0.2, 0.5, 0.8):
            assert realized_regret(x, m, Mixture(32)) >= -1e-12

    def test_mixture_regret_bound_small_sample(self):
        n = 200
        for r in range(10):
            x = draw_sample(Bernoulli(0.5), n, Seed(5, r))
            assert realized_regret(x, 0.3, Mixture(256)) <= math.log(n) + 2 + 0.1


class TestRegretCorrectedCs:

    def test_infinite_regret_is_vacuous(self, rng):
        iv = regret_corrected_cs(rng.random(10), 0.05, math.inf)
        assert (iv.lower, iv.upper) == (0.0, 1.0)

    def test_point_mass(self):
        x = np.full(100, 0.6)
        iv = regret_corrected_cs(x, 0.05, 0.0)
        assert iv.contains(0.6) and iv.width <= 0.1

    def test_contains_oracle_ci_when_regret_dominates(self, rng):
        x = rng.random(200)
        strat = LogOptimalOracle(empirical_distribution(x))
        regret_bound = math.log(200) + 2
        ms = np.linspace(0.01, 0.99, 99)
        regret = np.array([realized_regret(x, m, strat) for m in ms])
        assert (regret <= regret_bound).all()
        iv = regret_corrected_cs(x, 0.05, regret_bound)
        oracle = betting_ci(x, 0.05, strat, GridConfig(512, 1e-7))
        assert iv.lower <= oracle.lower + 1e-6 and iv.upper >= oracle.upper - 1e-6

    def test_errors(self):
        with pytest.raises(EmptySampleError):
            regret_corrected_cs([], 0.05, 1.0)
        with pytest.raises(ParameterError):
            regret_corrected_cs([0.5], 0.05, -1.0)


class TestFanInequality:

    @settings(max_examples=300)
    @given(st.floats(0.0, 0.999999), st.floats(-1.0, 1.0))
    def test_pointwise(self, lam, x):
        lb = fan_lower_bound(np.array([lam]), x, x * x)[0]
        assert math.log1p(lam * x) - lb >= -1e-12

    def test_negative_bets_mirror(self, rng):
        lam = -rng.uniform(0, 0.99, 1000)
        x = rng.uniform(-1, 1, 1000)
        lb = fan_lower_bound(lam, x, x * x)
        assert (np.log1p(lam * x) - lb >= -1e-12).all()

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from betbounds.betting import GridConfig, Mixture, PrPlLambda, betting_ci, betting_cs
from betbounds.classical import bernstein_ci, hoeffding_ci
from betbounds.estimators import (
    BettingCSEstimator,
    MeanCIEstimator,
    WorMeanCIEstimator,
    check_sample,
)
from betbounds.exceptions import OutOfRangeError, ParameterError
from betbounds.wor import wor_prpl_eb_ci

from . import oracles


class TestCheckSample:

    def test_column_vector_flattened(self):
        x = np.array([[0.1], [0.5], [0.9]])
        np.testing.assert_array_equal(check_sample(x), [0.1, 0.5, 0.9])

    def test_wide_matrix_rejected(self):
        with pytest.raises(ParameterError):
            check_sample(np.zeros((3, 2)))

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            check_sample([0.5, 1.2])


class TestMeanCIEstimator:

    def test_params_and_clone(self):
        est = MeanCIEstimator(method="hoeffding", alpha=0.1)
        assert est.get_params()["alpha"] == 0.1
        c = clone(est.set_params(alpha=0.2))
        assert c.alpha == 0.2 and c.method == "hoeffding"

    def test_hoeffding_width(self):
        est = MeanCIEstimator(method="hoeffding", clip=False).fit(np.full(100, 0.5))
        assert est.width_ == pytest.approx(oracles.HOEFFDING_N100_A05, rel=1e-15)
        assert est.n_samples_ == 100
        assert est.contains(0.5)

    def test_clip(self):
        x = np.zeros(20)
        clipped = MeanCIEstimator(method="hoeffding").fit(x)
        raw = MeanCIEstimator(method="hoeffding", clip=False).fit(x)
        assert clipped.lower_ == 0.0 and raw.lower_ < 0.0
        assert raw.interval_ == hoeffding_ci(x, 0.05)

    def test_matches_functional(self, rng):
        x = rng.random(150)
        est = MeanCIEstimator(method="betting-prpl", grid_points=256, clip=False).fit(x[:, None])
        iv = betting_ci(x, 0.05, PrPlLambda(), GridConfig(256, 1e-6))
        assert est.get_interval() == (iv.lower, iv.upper)

    def test_mixture_nodes_passed(self, rng):
        x = rng.random(80)
        est = MeanCIEstimator(n_nodes=16, grid_points=256, clip=False).fit(x)
        iv = betting_ci(x, 0.05, Mixture(16), GridConfig(256, 1e-6))
        assert (est.lower_, est.upper_) == (iv.lower, iv.upper)

    def test_bernstein_needs_sigma(self):
        with pytest.raises(ParameterError):
            MeanCIEstimator(method="bernstein").fit([0.5, 0.5])
        est = MeanCIEstimator(method="bernstein", sigma=0.3, clip=False).fit([0.5, 0.5])
        assert est.interval_ == bernstein_ci([0.5, 0.5], 0.05, 0.3)

    def test_unknown_method(self):
        with pytest.raises(ParameterError):
            MeanCIEstimator(method="nope").fit([0.5])

    @pytest.mark.parametrize("method", ["hoeffding", "mp-eb", "prpl-eb"])
    def test_all_methods_fit(self, method, rng):
        est = MeanCIEstimator(method=method).fit(rng.random(50))
        assert 0.0 <= est.lower_ <= est.upper_ <= 1.0

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            MeanCIEstimator().get_interval()


class TestWorEstimator:

    def test_matches_functional(self, rng):
        x = rng.random(40)
        est = WorMeanCIEstimator(M=100, method="wor-prpl-eb", clip=False).fit(x)
        assert est.interval_ == wor_prpl_eb_ci(x, 100, 0.05)

    def test_betting_collapse(self):
        x = np.linspace(0, 1, 200)
        est = WorMeanCIEstimator(M=200).fit(x)
        assert est.width_ <= 2e-6 + 1 / 2048
        assert est.contains(0.5)

    def test_bernstein_serfling_needs_sigma(self):
        with pytest.raises(ParameterError):
            WorMeanCIEstimator(M=10, method="bernstein-serfling").fit([0.5])

    def test_unknown_method(self):
        with pytest.raises(ParameterError):
            WorMeanCIEstimator(M=10, method="hoeffding").fit([0.5])


class TestBettingCSEstimator:

    def test_partial_fit_equals_fit(self, rng):
        x = rng.random(300)
        one = BettingCSEstimator(grid_points=128).fit(x)
        inc = BettingCSEstimator(grid_points=128)
        for chunk in np.array_split(x, 7):
            inc.partial_fit(chunk)
        np.testing.assert_array_equal(one.lower_path_, inc.lower_path_)
        np.testing.assert_array_equal(one.upper_path_, inc.upper_path_)
        assert one.interval_ == inc.interval_ and inc.n_samples_ == 300

    def test_matches_functional_cs(self, rng):
        x = rng.random(100)
        est = BettingCSEstimator(grid_points=128).fit(x)
        lo, hi = betting_cs(x, 0.05, Mixture(64), GridConfig(128, 1e-6))
        np.testing.assert_array_equal(est.lower_path_, lo)
        np.testing.assert_array_equal(est.upper_path_, hi)

    def test_fit_restarts(self, rng):
        est = BettingCSEstimator(grid_points=64).fit(rng.random(50))
        est.fit(rng.random(20))
        assert est.n_samples_ == 20 and est.lower_path_.size == 20

    def test_paths_nested(self, rng):
        est = BettingCSEstimator(strategy="fixed", lam=0.4, grid_points=128).fit(rng.random(200))
        assert (np.diff(est.lower_path_) >= 0).all()
        assert (np.diff(est.upper_path_) <= 0).all()

    def test_bad_strategy(self):
        with pytest.raises(ParameterError):
            BettingCSEstimator(strategy="prpl").fit([0.5])

"""Threshold-kernel nearest-neighbor estimator."""

import numpy as np
import pytest

from sitc.distance import DistanceMatrix
from sitc.estimator import (
    EstimatorConfig,
    choose_eta,
    error_metrics,
    estimate,
    infer_kappa,
    kernel,
    resolve_etas,
)
from sitc.io import dump_estimate, load_estimate
from sitc.model import Shape, SparseObservations, build_orthogonal_cp_model, sample_observations
from sitc.oracle import brute_force_nn
from tests.test_model import raw_rank1_model


def zero_distances(n):
    return DistanceMatrix(mode=0, values=np.zeros((n, n)),
                          valid_mask=np.ones((n, n), dtype=bool))


def random_distances(n, seed, invalid_frac=0.0):
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0, 1, (n, n))
    vals = (raw + raw.T) / 2
    np.fill_diagonal(vals, 0.0)
    valid = np.ones((n, n), dtype=bool)
    if invalid_frac > 0:
        bad = rng.random((n, n)) < invalid_frac
        bad = bad | bad.T
        np.fill_diagonal(bad, False)
        valid &= ~bad
        vals = np.where(valid, vals, np.nan)
    return DistanceMatrix(mode=0, values=vals, valid_mask=valid)


class TestChooseEta:
    def test_hand_values(self):
        assert choose_eta(100, 3, 0.5, 1.0) == pytest.approx(0.31623, abs=1e-4)
        assert choose_eta(100, 3, 1.0, 1.0) == pytest.approx(0.1, abs=1e-12)

    def test_linear_in_c(self):
        assert choose_eta(50, 3, 0.7, 2.0) == 2 * choose_eta(50, 3, 0.7, 1.0)

    def test_bad_kappa(self):
        with pytest.raises(ValueError):
            choose_eta(100, 3, 0.0)

    def test_infer_kappa_inverts_density(self):
        n, t, kappa = 80, 3, 0.6
        p = float(n) ** (kappa - (t - 1))
        assert infer_kappa(p, n, t) == pytest.approx(kappa, abs=1e-12)


class TestKernel:
    def test_self_match(self):
        dms = [random_distances(5, s) for s in range(3)]
        assert kernel((2, 3, 1), (2, 3, 1), dms, 1e-9) == 1

    def test_single_far_mode_kills(self):
        dms = [zero_distances(4) for _ in range(3)]
        vals = dms[1].values.copy()
        vals[0, 1] = vals[1, 0] = 5.0
        dms[1] = DistanceMatrix(mode=1, values=vals, valid_mask=dms[1].valid_mask)
        assert kernel((0, 0, 0), (0, 1, 0), dms, 1.0) == 0
        assert kernel((0, 0, 0), (1, 0, 0), dms, 1.0) == 1

    def test_invalid_counts_as_far(self):
        dm = random_distances(4, 0, invalid_frac=0.9)
        dms = [dm, zero_distances(4), zero_distances(4)]
        bad = np.argwhere(~dm.valid_mask)
        a, b = bad[0]
        assert kernel((a, 0, 0), (b, 0, 0), dms, 1e9) == 0

    def test_huge_eta_accepts_valid(self):
        dms = [random_distances(4, s) for s in range(3)]
        assert kernel((0, 1, 2), (3, 2, 0), dms, 1e9) == 1


class TestEstimate:
    def test_constant_tensor_exact(self):
        model = raw_rank1_model((4, 4, 4), 0.7, (1.0, 1.0, 1.0))
        obs = sample_observations(model, 0.3, 0.0, seed=1)
        dms = [zero_distances(4) for _ in range(3)]
        est = estimate(obs, dms, EstimatorConfig(eta_rule="manual", eta=0.5))
        # averages of identical values: exact up to repeated-addition rounding
        assert np.abs(est.values - 0.7).max() <= 1e-12
        assert not est.fallback_mask.any()

    def test_huge_eta_gives_global_mean(self):
        model = build_orthogonal_cp_model((5, 5, 5), 1, [1.0], "cosine", seed=2)
        obs = sample_observations(model, 0.4, 0.0, seed=2)
        dms = [random_distances(5, s) for s in range(3)]
        est = estimate(obs, dms, EstimatorConfig(eta_rule="manual", eta=1e9))
        mean = 0.0
        for v in obs.values:
            mean += float(v)
        mean /= obs.n_obs
        assert np.all(est.values == mean)
        assert np.all(est.support_counts == obs.n_obs)

    def test_empty_split_global_mean_errors(self):
        shape = Shape((4, 4, 4))
        empty = SparseObservations(shape, np.empty((0, 3), dtype=np.int64),
                                   np.empty(0), density=0.1, seed=0)
        dms = [zero_distances(4) for _ in range(3)]
        with pytest.raises(ValueError, match="mean"):
            estimate(empty, dms, EstimatorConfig(eta_rule="manual", eta=1.0))

    def test_empty_split_unestimated(self):
        shape = Shape((4, 4, 4))
        empty = SparseObservations(shape, np.empty((0, 3), dtype=np.int64),
                                   np.empty(0), density=0.1, seed=0)
        dms = [zero_distances(4) for _ in range(3)]
        est = estimate(empty, dms, EstimatorConfig(eta_rule="manual", eta=1.0,
                                                   fallback="unestimated"))
        assert est.fallback_mask.all()
        assert np.isnan(est.values).all()

    def test_matches_brute_force_bitwise(self):
        rng = np.random.default_rng(42)
        for trial in range(20):
            n = int(rng.integers(4, 9))
            model = build_orthogonal_cp_model((n, n, n), 1, [1.0], "cosine",
                                              seed=trial, noise_headroom=0.1)
            obs = sample_observations(model, 0.3, 0.1, seed=trial)
            if obs.n_obs == 0:
                continue
            dms = [random_distances(n, 100 + trial * 3 + ell, invalid_frac=0.2)
                   for ell in range(3)]
            eta = float(rng.uniform(0.1, 0.9))
            config = EstimatorConfig(eta_rule="manual", eta=eta,
                                     fallback="global_mean" if trial % 2 else "unestimated")
            fast = estimate(obs, dms, config)
            slow = brute_force_nn(obs, dms, config)
            assert np.array_equal(fast.values, slow.values, equal_nan=True)
            assert np.array_equal(fast.support_counts, slow.support_counts)
            assert np.array_equal(fast.fallback_mask, slow.fallback_mask)

    def test_fourth_order_matches_brute_force(self):
        model = build_orthogonal_cp_model((4, 5, 4, 5), 1, [1.0], "cosine", seed=11)
        obs = sample_observations(model, 0.2, 0.0, seed=11)
        dms = [random_distances(d, 60 + ell) for ell, d in enumerate((4, 5, 4, 5))]
        config = EstimatorConfig(eta_rule="manual", eta=0.5)
        fast = estimate(obs, dms, config)
        slow = brute_force_nn(obs, dms, config)
        assert np.array_equal(fast.values, slow.values, equal_nan=True)
        assert np.array_equal(fast.support_counts, slow.support_counts)

    def test_convex_combination_bounds(self):
        model = build_orthogonal_cp_model((6, 6, 6), 2, [1.0, 0.5], "cosine", seed=3)
        obs = sample_observations(model, 0.3, 0.0, seed=5)
        dms = [random_distances(6, s) for s in range(3)]
        est = estimate(obs, dms, EstimatorConfig(eta_rule="manual", eta=0.5))
        covered = ~est.fallback_mask
        assert est.values[covered].min() >= obs.values.min() - 1e-12
        assert est.values[covered].max() <= obs.values.max() + 1e-12

    def test_eta_monotonicity_of_support(self):
        model = build_orthogonal_cp_model((6, 6, 6), 1, [1.0], "cosine", seed=4)
        obs = sample_observations(model, 0.3, 0.0, seed=6)
        dms = [random_distances(6, s) for s in range(3)]
        small = estimate(obs, dms, EstimatorConfig(eta_rule="manual", eta=0.2))
        large = estimate(obs, dms, EstimatorConfig(eta_rule="manual", eta=0.6))
        assert np.all(large.support_counts >= small.support_counts)

    def test_permutation_equivariance(self):
        n = 5
        model = build_orthogonal_cp_model((n, n, n), 1, [1.0], "cosine", seed=7)
        obs = sample_observations(model, 0.4, 0.0, seed=8)
        dms = [random_distances(n, 50 + s) for s in range(3)]
        config = EstimatorConfig(eta_rule="manual", eta=0.4)
        base = estimate(obs, dms, config)
        # relabel mode-0 coordinate a -> perm[a] everywhere
        perm = np.random.default_rng(9).permutation(n)
        idx2 = obs.indices.copy()
        idx2[:, 0] = perm[idx2[:, 0]]
        obs2 = SparseObservations(obs.shape, idx2, obs.values, obs.density, obs.seed)
        d0 = dms[0]
        inv = np.argsort(perm)
        dms2 = [DistanceMatrix(mode=0,
                               values=d0.values[np.ix_(inv, inv)],
                               valid_mask=d0.valid_mask[np.ix_(inv, inv)]),
                dms[1], dms[2]]
        est2 = estimate(obs2, dms2, config)
        # relabeling reorders per-cell accumulation, so compare to rounding
        want = base.values[inv]
        both = ~(np.isnan(est2.values) | np.isnan(want))
        assert np.array_equal(np.isnan(est2.values), np.isnan(want))
        assert np.abs(est2.values[both] - want[both]).max(initial=0.0) <= 1e-12

    def test_paper_rule_uses_kappa(self):
        model = build_orthogonal_cp_model((6, 6, 6), 1, [1.0], "cosine", seed=1)
        obs = sample_observations(model, 0.3, 0.0, seed=1)
        dms = [random_distances(6, s) for s in range(3)]
        est = estimate(obs, dms, EstimatorConfig(eta_rule="paper", c=1.0), kappa=0.5)
        assert len(est.etas) == 3
        assert all(e > 0 for e in est.etas)


class TestResolveEtas:
    def test_manual_same_everywhere(self):
        dms = [random_distances(5, s) for s in range(3)]
        etas = resolve_etas(EstimatorConfig(eta_rule="manual", eta=0.3), dms, 3, None)
        assert etas == (0.3, 0.3, 0.3)

    def test_paper_scales_with_median(self):
        n = 6
        small = DistanceMatrix(mode=0, values=np.full((n, n), 1e-4) - 1e-4 * np.eye(n),
                               valid_mask=np.ones((n, n), bool))
        big = DistanceMatrix(mode=0, values=np.full((n, n), 1.0) - np.eye(n),
                             valid_mask=np.ones((n, n), bool))
        cfg = EstimatorConfig(eta_rule="paper", c=1.0)
        eta_small, = resolve_etas(cfg, [small], 3, 0.5)
        eta_big, = resolve_etas(cfg, [big], 3, 0.5)
        assert eta_big / eta_small == pytest.approx(1e4, rel=1e-9)

    def test_gap_rule_splits_bimodal(self):
        n = 10
        vals = np.full((n, n), 2.0)
        vals[:5, :5] = 1e-4
        vals[5:, 5:] = 1e-4
        vals = (vals + vals.T) / 2
        np.fill_diagonal(vals, 0.0)
        dm = DistanceMatrix(mode=0, values=vals, valid_mask=np.ones((n, n), bool))
        eta, = resolve_etas(EstimatorConfig(eta_rule="gap"), [dm], 3, None)
        assert 1e-4 < eta < 2.0

    def test_missing_kappa_raises(self):
        dms = [random_distances(4, 0)]
        with pytest.raises(ValueError, match="kappa"):
            resolve_etas(EstimatorConfig(eta_rule="paper"), dms, 3, None)


class TestErrorMetrics:
    def test_exact_recovery(self):
        model = build_orthogonal_cp_model((4, 4, 4), 1, [1.0], "cosine", seed=0)
        from sitc.model import dense_tensor
        from sitc.estimator import Estimate
        est = Estimate(values=dense_tensor(model),
                       support_counts=np.ones((4, 4, 4), dtype=np.int64),
                       fallback_mask=np.zeros((4, 4, 4), dtype=bool))
        assert error_metrics(est, model) == (0.0, 0.0)

    def test_constant_shift(self):
        model = build_orthogonal_cp_model((4, 4, 4), 1, [0.0], "cosine", seed=0)
        from sitc.estimator import Estimate
        est = Estimate(values=np.full((4, 4, 4), 0.1),
                       support_counts=np.ones((4, 4, 4), dtype=np.int64),
                       fallback_mask=np.zeros((4, 4, 4), dtype=bool))
        max_err, mse = error_metrics(est, model)
        assert max_err == pytest.approx(0.1)
        assert mse == pytest.approx(0.01)

    def test_sampled_mode_warns(self):
        model = build_orthogonal_cp_model((6, 6, 6), 1, [1.0], "cosine", seed=0)
        from sitc.model import dense_tensor
        from sitc.estimator import Estimate
        est = Estimate(values=dense_tensor(model),
                       support_counts=np.ones((6, 6, 6), dtype=np.int64),
                       fallback_mask=np.zeros((6, 6, 6), dtype=bool))
        with pytest.warns(UserWarning, match="sample"):
            max_err, mse = error_metrics(est, model, sample_size=100)
        assert max_err == 0.0


class TestDump:
    def test_round_trip(self):
        model = build_orthogonal_cp_model((4, 4, 4), 1, [1.0], "cosine", seed=2)
        obs = sample_observations(model, 0.3, 0.0, seed=2)
        dms = [zero_distances(4) for _ in range(3)]
        est = estimate(obs, dms, EstimatorConfig(eta_rule="manual", eta=0.5))
        values, fallback, shape = load_estimate(dump_estimate(est, model.shape))
        assert shape.dims == (4, 4, 4)
        assert np.array_equal(values, est.values, equal_nan=True)
        assert np.array_equal(fallback, est.fallback_mask)

import numpy as np
import pytest

import _oracles
from surrloss import decoders, kernels, losses, surrogate


# ---------------------------------------------------------------------------
# Exhaustive decoder

def test_exhaustive_single_active_term():
    y, val = decoders.decode_exhaustive([0, 1], np.array([1.0, 0.0]),
                                        losses.ZeroOne(), [0, 1])
    assert y == 0 and val == 0.0


def test_exhaustive_majority_vote():
    alphas = np.array([0.2, 0.2, 0.2])
    y, val = decoders.decode_exhaustive(["a", "b"], alphas, losses.ZeroOne(),
                                        ["a", "a", "b"])
    assert y == "a"
    assert val == pytest.approx(0.2)


def test_exhaustive_matches_scan_oracle():
    rng = np.random.default_rng(0)
    loss = losses.ZeroOne()
    for _ in range(100):
        n = int(rng.integers(1, 12))
        labels = list(range(int(rng.integers(2, 6))))
        y_train = [int(v) for v in rng.integers(0, len(labels), size=n)]
        alphas = rng.normal(size=n)
        got, got_val = decoders.decode_exhaustive(labels, alphas, loss, y_train)
        idx, val = _oracles.scan_minimum(labels, alphas, loss, y_train)
        assert got == labels[idx]
        assert got_val == pytest.approx(val, abs=1e-12)


def test_exhaustive_lowest_index_tie_break():
    # both labels absent from training -> all candidates tie at alpha-sum
    y, _ = decoders.decode_exhaustive(["u", "v"], np.array([1.0]), losses.ZeroOne(), ["w"])
    assert y == "u"


def test_exhaustive_rejects_empty():
    with pytest.raises(ValueError):
        decoders.decode_exhaustive([], np.array([1.0]), losses.ZeroOne(), [0])


# ---------------------------------------------------------------------------
# FAS ranking decoder

def test_fas_single_profile_descending():
    profiles = np.array([[5.0, 3.0, 2.0]])
    ranks = decoders.decode_ranking_fas(np.array([1.0]), profiles, 3)
    np.testing.assert_array_equal(ranks, [1, 2, 3])
    W = decoders.aggregate_pair_costs(np.array([1.0]), profiles)
    assert decoders.ranking_objective(W, ranks) == 0.0


def test_fas_opposite_profiles_tie():
    profiles = np.array([[1.0, 5.0], [5.0, 1.0]])
    alphas = np.array([1.0, 1.0])
    ranks = decoders.decode_ranking_fas(alphas, profiles, 2)
    W = decoders.aggregate_pair_costs(alphas, profiles)
    got = decoders.ranking_objective(W, ranks)
    # symmetric W: every permutation attains the same objective
    vals = [decoders.ranking_objective(W, p) for p in _oracles.all_permutations(2)]
    assert got == pytest.approx(min(vals), abs=1e-12)


def test_fas_within_factor_two_of_exhaustive():
    rng = np.random.default_rng(1)
    perms = _oracles.all_permutations(5)
    for _ in range(60):
        t = int(rng.integers(2, 11))
        profiles = rng.uniform(1, 5, size=(t, 5))
        alphas = rng.dirichlet(np.ones(t))
        ranks = decoders.decode_ranking_fas(alphas, profiles, 5)
        W = decoders.aggregate_pair_costs(alphas, profiles)
        got = decoders.ranking_objective(W, ranks)
        best = min(decoders.ranking_objective(W, p) for p in perms)
        assert got <= 2.0 * best + 1e-9


def test_fas_aggregation_identity():
    # sum_t alpha_t * rank_loss(y, profile_t) == sum_ij W_ij (1-sign)/2
    rng = np.random.default_rng(2)
    for _ in range(500):
        m = int(rng.integers(2, 6))
        t = int(rng.integers(1, 8))
        profiles = rng.uniform(1, 5, size=(t, m))
        alphas = rng.normal(size=t)
        perm = rng.permutation(m) + 1
        lhs = sum(a * losses.rank_loss(perm, pr) for a, pr in zip(alphas, profiles))
        W = decoders.aggregate_pair_costs(alphas, profiles)
        rhs = decoders.ranking_objective(W, perm)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_fas_always_a_permutation():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = int(rng.integers(2, 9))
        t = int(rng.integers(1, 6))
        profiles = rng.uniform(1, 5, size=(t, m))
        alphas = rng.normal(size=t)
        ranks = decoders.decode_ranking_fas(alphas, profiles, m)
        np.testing.assert_array_equal(np.sort(ranks), np.arange(1, m + 1))


def test_fas_never_worse_than_best_profile_sort():
    rng = np.random.default_rng(4)
    for _ in range(100):
        m = int(rng.integers(2, 7))
        t = int(rng.integers(1, 9))
        profiles = rng.uniform(1, 5, size=(t, m))
        alphas = rng.normal(size=t)
        ranks = decoders.decode_ranking_fas(alphas, profiles, m)
        W = decoders.aggregate_pair_costs(alphas, profiles)
        got = decoders.ranking_objective(W, ranks)
        sorts = [decoders.profile_sort_ranks(profiles[t_]) for t_ in range(t)]
        best_sort = min(decoders.ranking_objective(W, s) for s in sorts)
        assert got <= best_sort + 1e-12


def test_fas_rejects_inconsistent_items():
    with pytest.raises(ValueError):
        decoders.decode_ranking_fas(np.array([1.0]), np.array([[1.0, 2.0]]), 3)


# ---------------------------------------------------------------------------
# Scalar grid decoder

SPEC = decoders.ScalarGrid(bound=3.0, grid_points=512, refine_iters=40)


def test_scalar_single_training_point():
    y1 = 0.8317
    got = decoders.decode_scalar_grid(np.array([1.0]), np.array([y1]),
                                      losses.Cauchy(1.0), SPEC)
    assert got == pytest.approx(y1, abs=1e-6)


def test_scalar_symmetric_cauchy_matches_dense_grid():
    a = 1.3
    alphas = np.array([1.0, 1.0])
    y_train = np.array([-a, a])
    loss = losses.Cauchy(1.0)
    got = decoders.decode_scalar_grid(alphas, y_train, loss, SPEC)
    got_val = _oracles.weighted_objective(got, alphas, loss, y_train)
    _, dense_val = _oracles.dense_grid_min_cauchy(alphas, y_train, 1.0, 3.0)
    assert abs(got_val - dense_val) <= 1e-6


def test_scalar_random_cauchy_matches_dense_grid():
    rng = np.random.default_rng(5)
    loss = losses.Cauchy(0.7)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        y_train = rng.uniform(-2.5, 2.5, size=n)
        alphas = np.abs(rng.normal(size=n))
        got = decoders.decode_scalar_grid(alphas, y_train, loss, SPEC)
        got_val = _oracles.weighted_objective(got, alphas, loss, y_train)
        _, dense_val = _oracles.dense_grid_min_cauchy(alphas, y_train, 0.7, 3.0,
                                                      points=200_000)
        assert got_val <= dense_val + 1e-6


def test_scalar_squared_error_weighted_mean():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(2, 10))
        y_train = rng.uniform(-2, 2, size=n)
        alphas = np.abs(rng.normal(size=n)) + 0.05
        got = decoders.decode_scalar_grid(alphas, y_train, losses.SquaredError(), SPEC)
        assert got == pytest.approx(float(alphas @ y_train / alphas.sum()), abs=1e-6)


def test_scalar_deterministic_and_grid_monotone():
    rng = np.random.default_rng(7)
    loss = losses.Cauchy(1.0)
    for _ in range(10):
        n = int(rng.integers(2, 10))
        y_train = rng.uniform(-2.5, 2.5, size=n)
        alphas = rng.normal(size=n)
        a = decoders.decode_scalar_grid(alphas, y_train, loss, SPEC)
        b = decoders.decode_scalar_grid(alphas, y_train, loss, SPEC)
        assert a == b
        # a nested (doubled) grid never returns a worse objective
        coarse = decoders.ScalarGrid(bound=3.0, grid_points=129, refine_iters=12)
        fine = decoders.ScalarGrid(bound=3.0, grid_points=257, refine_iters=12)
        fa = _oracles.weighted_objective(
            decoders.decode_scalar_grid(alphas, y_train, loss, coarse),
            alphas, loss, y_train)
        fb = _oracles.weighted_objective(
            decoders.decode_scalar_grid(alphas, y_train, loss, fine),
            alphas, loss, y_train)
        assert fb <= fa + 1e-9


def test_scalar_grid_validation():
    with pytest.raises(ValueError):
        decoders.ScalarGrid(grid_points=1)
    with pytest.raises(ValueError):
        decoders.ScalarGrid(bound=-1.0)
    with pytest.raises(ValueError):
        decoders.ScalarGrid(refine_iters=-1)


def test_scalar_batch_matches_single():
    rng = np.random.default_rng(8)
    n, q = 6, 5
    y_train = rng.uniform(-2, 2, size=n)
    A = rng.normal(size=(n, q))
    loss = losses.Cauchy(1.0)
    pts, vals = decoders.decode_scalar_grid_batch(A, y_train, loss, SPEC)
    for j in range(q):
        single = decoders.decode_scalar_grid(A[:, j], y_train, loss, SPEC)
        assert pts[j] == single
        assert vals[j] == pytest.approx(
            _oracles.weighted_objective(pts[j], A[:, j], loss, y_train), abs=1e-10)


# ---------------------------------------------------------------------------
# Simplex Hellinger decoder

def test_simplex_single_histogram():
    y = np.array([[0.2, 0.3, 0.5]])
    got = decoders.decode_simplex_hellinger(np.array([1.0]), y)
    np.testing.assert_allclose(got, y[0], atol=1e-12)


def test_simplex_single_active_weight():
    Y = np.array([[0.7, 0.3], [0.1, 0.9]])
    got = decoders.decode_simplex_hellinger(np.array([2.5, 0.0]), Y)
    np.testing.assert_allclose(got, Y[0], atol=1e-12)


def test_simplex_output_on_simplex():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n, d = int(rng.integers(1, 10)), int(rng.integers(2, 17))
        Y = rng.dirichlet(np.ones(d), size=n)
        alphas = rng.normal(size=n)
        got = decoders.decode_simplex_hellinger(alphas, Y)
        assert np.all(got >= -1e-15)
        assert abs(got.sum() - 1.0) <= 1e-12


def _random_simplex_instance(rng, force_positive=True):
    n, d = int(rng.integers(2, 10)), int(rng.integers(2, 17))
    Y = rng.dirichlet(np.ones(d), size=n)
    while True:
        alphas = rng.normal(size=n) / n + (0.5 / n if force_positive else 0.0)
        b = alphas @ np.sqrt(Y)
        if not force_positive or np.any(b > 0):
            return alphas, Y


def test_simplex_beats_random_sampling():
    rng = np.random.default_rng(10)
    for _ in range(20):
        alphas, Y = _random_simplex_instance(rng)
        got = decoders.decode_simplex_hellinger(alphas, Y)
        got_val = _oracles.hellinger_objective(got, alphas, Y)
        samples = rng.dirichlet(np.ones(Y.shape[1]), size=10_000)
        sample_vals = [
            _oracles.hellinger_objective(s, alphas, Y) for s in samples[:200]
        ]
        # vectorized check over the full sample
        sq = np.sqrt(samples)
        b = alphas @ np.sqrt(Y)
        full = float(alphas.sum()) - 2.0 * sq @ b + float(alphas @ Y.sum(axis=1))
        assert got_val <= full.min() + 1e-9
        assert got_val <= min(sample_vals) + 1e-9


def test_simplex_matches_projected_gradient_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        alphas, Y = _random_simplex_instance(rng)
        got = decoders.decode_simplex_hellinger(alphas, Y)
        oracle = _oracles.projected_gradient_hellinger(alphas, Y)
        assert losses.squared_hellinger(got, oracle) <= 1e-6


def test_simplex_degenerate_falls_back_to_training_outputs():
    Y = np.array([[0.5, 0.5], [0.9, 0.1]])
    alphas = np.array([-1.0, -2.0])  # all b_j <= 0
    got = decoders.decode_simplex_hellinger(alphas, Y)
    cands = [Y[0], Y[1]]
    vals = [_oracles.hellinger_objective(c, alphas, Y) for c in cands]
    np.testing.assert_allclose(got, cands[int(np.argmin(vals))])


def test_simplex_rejects_empty():
    with pytest.raises(ValueError):
        decoders.decode_simplex_hellinger(np.array([]), np.empty((0, 3)))


def test_simplex_batch_matches_single():
    rng = np.random.default_rng(12)
    Y = rng.dirichlet(np.ones(5), size=6)
    A = rng.normal(size=(6, 4))
    batch = decoders.decode_simplex_hellinger_batch(A, Y)
    for q in range(4):
        np.testing.assert_allclose(batch[q],
                                   decoders.decode_simplex_hellinger(A[:, q], Y),
                                   atol=1e-14)


# ---------------------------------------------------------------------------
# predict composition

def test_predict_exhaustive_composition():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(10, 2))
    Y = [int(v) for v in rng.integers(0, 3, size=10)]
    model = surrogate.fit(X, Y, kernels.gaussian(1.0), 0.1)
    dec = decoders.Exhaustive([0, 1, 2])
    q = rng.normal(size=2)
    got = decoders.predict(model, dec, losses.ZeroOne(), q)
    a = surrogate.alpha_weights(model, q).weights
    idx, _ = _oracles.scan_minimum([0, 1, 2], a, losses.zero_one, Y)
    assert got == [0, 1, 2][idx]


def test_predict_scalar_composition():
    rng = np.random.default_rng(14)
    X = rng.uniform(-1, 1, size=(15, 1))
    y = np.sin(3.0 * X[:, 0])
    model = surrogate.fit(X, y, kernels.gaussian(0.1), 1e-3)
    got = decoders.predict(model, decoders.ScalarGrid(bound=3.0), losses.Cauchy(1.0),
                           np.array([0.2]))
    assert abs(got - np.sin(0.6)) < 0.2


def test_predict_ranking_composition():
    rng = np.random.default_rng(15)
    X = rng.normal(size=(12, 3))
    R = rng.uniform(1, 5, size=(12, 4))
    model = surrogate.fit(X, R, kernels.linear(), 0.5)
    got = decoders.predict(model, decoders.RankingFas(items=4), losses.RankLoss(),
                           X[3])
    np.testing.assert_array_equal(np.sort(got), [1, 2, 3, 4])


def test_predict_mismatched_decoder_errors():
    rng = np.random.default_rng(16)
    X = rng.normal(size=(5, 2))
    model = surrogate.fit(X, ["a"] * 5, kernels.gaussian(1.0), 0.1)
    with pytest.raises(ValueError):
        decoders.predict(model, decoders.ScalarGrid(), losses.Cauchy(1.0),
                         rng.normal(size=2))
    model2 = surrogate.fit(X, np.zeros(5), kernels.gaussian(1.0), 0.1)
    with pytest.raises(ValueError):
        decoders.predict(model2, decoders.RankingFas(items=3), losses.RankLoss(),
                         rng.normal(size=2))


def test_predict_batch_matches_predict():
    rng = np.random.default_rng(17)
    X = rng.uniform(-1, 1, size=(12, 1))
    y = np.cos(2.0 * X[:, 0])
    model = surrogate.fit(X, y, kernels.gaussian(0.2), 1e-2)
    Q = rng.uniform(-1, 1, size=(6, 1))
    spec = decoders.ScalarGrid(bound=3.0, grid_points=128, refine_iters=10)
    batch = decoders.predict_batch(model, spec, losses.Cauchy(1.0), Q)
    for j in range(6):
        assert batch[j] == decoders.predict(model, spec, losses.Cauchy(1.0), Q[j])

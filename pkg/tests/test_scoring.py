"""Scoring rules: closed forms vs quadrature, empirical identities, batching.

Frozen expected values come from direct adaptive quadrature of
scipy.stats CDFs (truncnorm / lognorm), independent of the package's
formulas and integration code.
"""

import math

import numpy as np
import pytest

from windemos import (
    GEV,
    Empirical,
    InvalidInputError,
    LogNormal,
    MeanVariance,
    NumericFailureError,
    ScoreSummary,
    TruncatedNormal,
    UndefinedSkillError,
    aggregate_log_scores,
    crps_empirical,
    crps_ln,
    crps_numeric,
    crps_quad_batch,
    crps_tn,
    crps_values,
    log_score,
    mae_median,
    rmse_mean,
    twcrps,
    twcrps_values,
    twcrpss,
)


@pytest.mark.parametrize(
    "mu,sigma,x,expected",
    [
        (0.0, 1.0, 0.0, 0.46738995451021814),
        (3.0, 2.0, 2.5, 0.52520207490073),
        (-5.0, 2.0, 0.3, 0.1490019667193741),
        (10.0, 1.0, 10.0, 0.23369497725510902),
    ],
)
def test_crps_tn_frozen(mu, sigma, x, expected):
    d = TruncatedNormal(mu, sigma)
    assert crps_tn(d, x) == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize(
    "mu,sigma,x,expected",
    [
        (0.0, 1.0, 1.0, 0.2674054670211673),
        (1.2, 0.4, 2.0, 0.8624384255751771),
        (0.0, 1.0, 0.0, 0.7905620507563946),
    ],
)
def test_crps_ln_frozen(mu, sigma, x, expected):
    d = LogNormal(mu, sigma)
    assert crps_ln(d, x) == pytest.approx(expected, rel=1e-8)


def test_crps_ln_accepts_mean_variance():
    mv = MeanVariance(3.0, 4.0)
    direct = crps_ln(mv.to_lognormal(), 2.5)
    assert crps_ln(mv, 2.5) == pytest.approx(direct, rel=1e-15)


def _tn_grid():
    grid = []
    for mu in (-6.0, -1.0, 0.0, 2.0, 8.0):
        for sigma in (0.3, 1.0, 3.0):
            for x in (0.0, 0.4, 2.0, 9.0):
                grid.append((mu, sigma, x))
    return grid


@pytest.mark.parametrize("mu,sigma,x", _tn_grid())
def test_crps_tn_matches_quadrature(mu, sigma, x):
    d = TruncatedNormal(mu, sigma)
    assert crps_tn(d, x) == pytest.approx(crps_numeric(d.cdf, x), abs=2e-8)


@pytest.mark.parametrize("mu", [-30.0, -15.0])
def test_crps_tn_deep_truncation_is_stable(mu):
    # Nearly all normal mass lies below zero here; the score must stay
    # finite, positive, and agree with quadrature.
    d = TruncatedNormal(mu, 1.0)
    for x in (0.0, 0.02, 0.2):
        val = crps_tn(d, x)
        assert math.isfinite(val) and val >= 0.0
        assert val == pytest.approx(crps_numeric(d.cdf, x), abs=2e-8)


def test_crps_tn_far_from_truncation_matches_gaussian():
    # With mu = 50*sigma the truncation is irrelevant and the score must
    # collapse to the plain Gaussian CRPS closed form.
    mu, sigma = 25.0, 0.5
    for x in (24.0, 25.0, 26.5):
        z = (x - mu) / sigma
        phi = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
        cdf = 0.5 * math.erfc(-z / math.sqrt(2.0))
        gaussian = sigma * (z * (2.0 * cdf - 1.0) + 2.0 * phi - 1.0 / math.sqrt(math.pi))
        assert crps_tn(TruncatedNormal(mu, sigma), x) == pytest.approx(gaussian, rel=1e-12)


@pytest.mark.parametrize(
    "mu,sigma,x",
    [(0.0, 1.0, 0.5), (1.5, 0.3, 5.0), (-1.0, 0.8, 0.2), (2.0, 1.2, 0.0)],
)
def test_crps_ln_matches_quadrature(mu, sigma, x):
    d = LogNormal(mu, sigma)
    assert crps_ln(d, x) == pytest.approx(crps_numeric(d.cdf, x), abs=2e-8)


def test_crps_rejects_bad_observations():
    with pytest.raises(InvalidInputError):
        crps_tn(TruncatedNormal(1.0, 1.0), math.nan)
    with pytest.raises(InvalidInputError):
        crps_numeric(TruncatedNormal(1.0, 1.0).cdf, math.inf)


def test_crps_numeric_flags_broken_cdf():
    with pytest.raises(NumericFailureError) as info:
        crps_numeric(lambda y: np.full_like(np.asarray(y, dtype=float), np.nan), 1.0)
    assert info.value.diagnostics  # carries the failure context


def test_crps_empirical_two_point():
    assert crps_empirical([1.0, 3.0], 2.0) == pytest.approx(0.5, abs=1e-15)


def test_crps_empirical_singleton_is_absolute_error():
    assert crps_empirical([4.0], 1.5) == pytest.approx(2.5, abs=1e-15)
    assert crps_empirical([4.0], 4.0) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_crps_empirical_matches_pairwise_sum(seed):
    # E|X - x| - 0.5 E|X - X'| evaluated by the O(n^2) double sum.
    rng = np.random.default_rng(seed)
    v = rng.gamma(2.0, 2.0, size=rng.integers(2, 40))
    x = float(rng.gamma(2.0, 2.0))
    direct = np.mean(np.abs(v - x)) - 0.5 * np.mean(
        np.abs(v[:, None] - v[None, :])
    )
    assert crps_empirical(v, x) == pytest.approx(direct, rel=1e-12)
    assert crps_empirical(Empirical(v), x) == pytest.approx(direct, rel=1e-12)


def test_crps_empirical_translation_equivariance():
    v = np.array([0.5, 2.0, 2.5, 7.0])
    base = crps_empirical(v, 3.0)
    assert crps_empirical(v + 10.0, 13.0) == pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize(
    "values,x,r,expected",
    [
        ([1.0, 3.0], 2.0, -math.inf, 0.5),
        ([1.0, 3.0], 2.0, 1.5, 0.375),
        ([1.0, 3.0], 2.0, 2.5, 0.125),
        ([2.0, 4.0, 6.0, 8.0], 5.0, 3.0, 0.6875),
        ([2.0, 4.0, 6.0, 8.0], 1.0, 3.0, 1.1875),
    ],
)
def test_twcrps_empirical_frozen(values, x, r, expected):
    assert twcrps(Empirical(values), x, r) == pytest.approx(expected, abs=1e-14)


def test_twcrps_empirical_full_weight_equals_crps():
    v = [0.3, 1.1, 4.0, 4.0, 9.0]
    for x in (0.0, 2.0, 10.0):
        assert twcrps(Empirical(v), x, -math.inf) == pytest.approx(
            crps_empirical(v, x), rel=1e-13
        )
        assert twcrps(Empirical(v), x, None) == pytest.approx(
            crps_empirical(v, x), rel=1e-13
        )


@pytest.mark.parametrize(
    "d",
    [TruncatedNormal(2.0, 1.0), LogNormal(0.5, 0.6), GEV(4.0, 1.5, 0.1)],
    ids=["tn", "ln", "gev"],
)
def test_twcrps_parametric_reduces_and_decreases(d):
    x = 3.0
    full = twcrps(d.cdf, x, -math.inf)
    assert full == pytest.approx(crps_numeric(d.cdf, x), rel=1e-10)
    last = full
    for r in (0.0, 2.0, 4.0, 8.0):
        val = twcrps(d.cdf, x, r)
        assert val <= last + 1e-12
        last = val
    assert twcrps(d.cdf, x, 60.0) < 1e-8


def test_twcrpss_identities():
    assert twcrpss(1.0, 1.0) == 0.0
    assert twcrpss(0.5, 1.0) == pytest.approx(0.5)
    assert twcrpss(2.0, 1.0) == pytest.approx(-1.0)
    with pytest.raises(UndefinedSkillError):
        twcrpss(0.5, 0.0)


def test_log_score_and_aggregation():
    scores = log_score(np.array([1.0, math.exp(-2.0), 0.0]))
    assert scores[0] == 0.0
    assert scores[1] == pytest.approx(2.0, rel=1e-15)
    assert math.isinf(scores[2])
    mean, n_inf = aggregate_log_scores(scores)
    assert mean == pytest.approx(1.0, rel=1e-15)
    assert n_inf == 1
    with pytest.raises(InvalidInputError):
        log_score([-0.1])


def test_point_score_hand_values():
    pairs = [(3.0, 4.0), (5.0, 2.0), (1.0, 1.0)]
    assert mae_median(pairs) == pytest.approx(4.0 / 3.0, rel=1e-15)
    assert rmse_mean(pairs) == pytest.approx(math.sqrt(10.0 / 3.0), rel=1e-15)
    with pytest.raises(InvalidInputError):
        mae_median([])


GEV_QUAD_GRID = [
    (4.0, 1.5, 0.2, 3.0),
    (4.0, 1.5, 0.2, 9.0),
    (4.0, 1.5, -0.2, 3.0),
    (4.0, 1.5, 0.0, 5.0),
    (1.0, 0.5, 0.4, 0.2),
]


@pytest.mark.parametrize("loc,scale,xi,x", GEV_QUAD_GRID)
def test_gev_batch_quadrature_matches_adaptive(loc, scale, xi, x):
    d = GEV(loc, scale, xi)
    batch = crps_quad_batch(d, np.array([x]))
    assert batch.shape == (1,)
    assert batch[0] == pytest.approx(crps_numeric(d.cdf, x), abs=1e-9)


def test_batch_quadrature_handles_mixed_rows():
    locs = np.array([4.0, 5.0, 6.0])
    d = GEV(locs, 1.5, 0.1)
    obs = np.array([3.5, 7.0, 5.0])
    batch = crps_quad_batch(d, obs)
    for i in range(3):
        single = crps_numeric(GEV(locs[i], 1.5, 0.1).cdf, obs[i])
        assert batch[i] == pytest.approx(single, abs=1e-9)


def test_crps_values_dispatches_per_family():
    dists = [
        TruncatedNormal(2.0, 1.0),
        LogNormal(0.5, 0.6),
        GEV(4.0, 1.5, 0.1),
        MeanVariance(3.0, 4.0),
        TruncatedNormal(1.0, 0.5),
    ]
    obs = np.array([1.5, 2.0, 5.0, 2.5, 1.0])
    out = crps_values(dists, obs)
    assert out.shape == (5,)
    assert out[0] == pytest.approx(crps_tn(dists[0], 1.5), rel=1e-12)
    assert out[1] == pytest.approx(crps_ln(dists[1], 2.0), rel=1e-12)
    assert out[2] == pytest.approx(crps_numeric(dists[2].cdf, 5.0), abs=1e-9)
    assert out[3] == pytest.approx(crps_ln(dists[3], 2.5), rel=1e-12)
    assert out[4] == pytest.approx(crps_tn(dists[4], 1.0), rel=1e-12)


def test_crps_values_empirical_forecasts():
    dists = [Empirical([1.0, 3.0]), Empirical([2.0, 2.0, 5.0])]
    obs = np.array([2.0, 4.0])
    out = crps_values(dists, obs)
    assert out[0] == pytest.approx(0.5, abs=1e-14)
    assert out[1] == pytest.approx(crps_empirical([2.0, 2.0, 5.0], 4.0), rel=1e-14)


def test_twcrps_values_matches_scalar_path():
    dists = [TruncatedNormal(2.0, 1.0), GEV(4.0, 1.5, 0.1), Empirical([1.0, 3.0])]
    obs = np.array([1.5, 5.0, 2.0])
    out = twcrps_values(dists, obs, 2.5)
    assert out[0] == pytest.approx(twcrps(dists[0].cdf, 1.5, 2.5), abs=1e-9)
    assert out[1] == pytest.approx(twcrps(dists[1].cdf, 5.0, 2.5), abs=1e-9)
    assert out[2] == pytest.approx(0.125, abs=1e-14)


def test_empirical_quantiles_use_plotting_positions():
    emp = Empirical([2.0, 4.0, 6.0, 8.0])
    # h = p(n+1) - 1 interpolation: p = k/(n+1) hits the k-th order stat.
    assert emp.quantile(0.2) == pytest.approx(2.0)
    assert emp.quantile(0.4) == pytest.approx(4.0)
    assert emp.quantile(0.5) == pytest.approx(5.0)
    assert emp.quantile(0.99) == pytest.approx(8.0)
    assert emp.median() == pytest.approx(5.0)
    assert emp.neg_mass() == 0.0
    assert Empirical([-1.0, 1.0]).neg_mass() == pytest.approx(0.5)


def test_score_summary_serialization():
    summary = ScoreSummary(
        mean_crps=0.5,
        mean_twcrps={8.0: 0.05, 10.5: 0.01},
        mean_log_score=1.2,
        n_log_infinite=0,
        mae=0.6,
        rmse=0.8,
    )
    d = summary.to_dict()
    assert d["mean_crps"] == 0.5
    assert d["mean_twcrps"] == {"8": 0.05, "10.5": 0.01}
    assert set(d) == {
        "mean_crps",
        "mean_twcrps",
        "mean_log_score",
        "n_log_infinite",
        "mae",
        "rmse",
    }

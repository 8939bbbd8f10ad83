"""Synthetic scenario generation: determinism, structure, and knobs."""

import datetime

import numpy as np
import pytest

from windemos import (
    GroupSpec,
    InvalidParameterError,
    ScenarioConfig,
    generate,
    ranks_of_obs,
    reliability_index,
)

G8 = GroupSpec((8,))


def _cfg(**kw):
    base = dict(days=40, stations=3, group_spec=G8, seed=0)
    base.update(kw)
    return ScenarioConfig(**base)


def test_generate_is_seed_deterministic():
    a = generate(_cfg(seed=5))
    b = generate(_cfg(seed=5))
    assert a == b
    c = generate(_cfg(seed=6))
    assert a != c


def test_generate_layout_and_ordering():
    cfg = _cfg(days=4, stations=12)
    data = generate(cfg)
    assert len(data) == 4 * 12
    assert data[0].date == datetime.date(2024, 1, 1)
    assert data[0].station == "S01"  # zero-padded to the station-count width
    assert data[11].station == "S12"
    assert data[12].date == datetime.date(2024, 1, 2)
    assert all(len(c.members) == 8 for c in data)
    assert all(c.obs is not None and c.obs >= 0.0 for c in data)
    assert all(min(c.members) >= 0.0 for c in data)


@pytest.mark.parametrize("truth", ["tn", "ln", "gev", "switching"])
def test_generate_supports_each_truth_model(truth):
    data = generate(_cfg(truth=truth, days=20))
    assert len(data) == 20 * 3
    assert all(np.isfinite(c.obs) for c in data)


def test_bias_shifts_members_away_from_obs():
    biased = generate(_cfg(bias=2.0, days=150, seed=1))
    gap = np.mean([np.mean(c.members) - c.obs for c in biased])
    assert 1.6 < gap < 2.4


def test_deflation_shrinks_member_spread():
    wide = generate(_cfg(deflation=1.0, days=150, seed=2))
    narrow = generate(_cfg(deflation=0.4, days=150, seed=2))
    sd_wide = np.mean([np.std(c.members) for c in wide])
    sd_narrow = np.mean([np.std(c.members) for c in narrow])
    assert sd_narrow < 0.55 * sd_wide


def test_group_bias_offsets_each_group():
    g = GroupSpec((4, 4))
    data = generate(
        _cfg(group_spec=g, group_bias=(0.0, 3.0), days=200, seed=3)
    )
    members = np.array([c.members for c in data])
    gap = np.mean(members[:, 4:]) - np.mean(members[:, :4])
    assert 2.6 < gap < 3.4


def test_switching_truth_widens_the_high_regime():
    data = generate(_cfg(truth="switching", days=400, stations=4, theta_star=6.0, seed=4))
    med = np.array([np.median(c.members) for c in data])
    err = np.array([c.obs - np.median(c.members) for c in data])
    low = err[med < 5.0]
    high = err[med > 7.0]
    assert low.size > 50 and high.size > 50
    assert np.std(high) > 1.25 * np.std(low)


def test_calibrated_scenario_has_flat_ranks():
    # members and obs are exchangeable draws, so the rank histogram
    # should be near-uniform over the 9 classes.
    data = generate(_cfg(days=250, stations=8, seed=7))
    members = np.array([c.members for c in data])
    obs = np.array([c.obs for c in data])
    ranks = ranks_of_obs(members, obs, np.random.default_rng(0))
    counts = np.bincount(ranks, minlength=10)[1:]
    assert reliability_index(tuple(counts)) < 0.2


def test_scenario_validation():
    with pytest.raises(InvalidParameterError):
        _cfg(deflation=0.0)
    with pytest.raises(InvalidParameterError):
        _cfg(deflation=1.2)
    with pytest.raises(InvalidParameterError):
        _cfg(truth="weibull")
    with pytest.raises(InvalidParameterError):
        _cfg(days=0)
    with pytest.raises(InvalidParameterError):
        _cfg(group_bias=(1.0, 2.0))  # one group only
    with pytest.raises(InvalidParameterError):
        _cfg(obs_sd=0.0)

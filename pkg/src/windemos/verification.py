"""Calibration diagnostics and report assembly.

Rank histograms (with seeded random tie-breaking), PIT histograms, the
reliability index, central-interval coverage and width, a hand-rolled
one-sample Kolmogorov-Smirnov uniformity test, negative-mass
diagnostics, and a single report builder that aggregates all of them
for either parametric or empirical (ensemble/climatology) forecasts.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidInputError
from .scoring import (
    Empirical,
    ScoreSummary,
    _batch_of,
    _family_groups,
    aggregate_log_scores,
    crps_values,
    log_score,
    mae_median,
    rmse_mean,
    twcrps_values,
)


def rank_of_obs(members, obs, rng):
    """Rank of the observation among members plus itself, 1..M+1.

    Ties are broken uniformly at random with the supplied generator.
    """
    members = np.asarray(members, dtype=float)
    if members.size == 0:
        raise InvalidInputError("rank needs at least one member")
    less = int(np.sum(members < obs))
    ties = int(np.sum(members == obs))
    offset = int(rng.integers(0, ties + 1)) if ties else 0
    return less + 1 + offset


def ranks_of_obs(member_matrix, obs, rng):
    """Vectorized ranks for uniform-size forecasts, one row per case."""
    member_matrix = np.asarray(member_matrix, dtype=float)
    obs = np.asarray(obs, dtype=float)
    less = np.sum(member_matrix < obs[:, None], axis=1)
    ties = np.sum(member_matrix == obs[:, None], axis=1)
    offsets = rng.integers(0, ties + 1)
    return (less + 1 + offsets).astype(int)


@dataclass(frozen=True)
class RankHistogram:
    """Counts of observation ranks over classes 1..c."""

    counts: tuple
    c: int

    def __post_init__(self):
        counts = tuple(int(v) for v in self.counts)
        if len(counts) != self.c or any(v < 0 for v in counts):
            raise InvalidInputError("histogram needs c nonnegative class counts")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return sum(self.counts)

    @property
    def frequencies(self):
        total = self.total
        if total == 0:
            raise InvalidInputError("empty histogram")
        return np.asarray(self.counts, dtype=float) / total

    @classmethod
    def from_ranks(cls, ranks, c):
        ranks = np.asarray(ranks, dtype=int)
        counts = np.bincount(ranks, minlength=c + 1)[1 : c + 1]
        if np.any(ranks < 1) or np.any(ranks > c):
            raise InvalidInputError("rank outside 1..c")
        return cls(tuple(int(v) for v in counts), c)


def reliability_index(h):
    """L1 distance of the class frequencies from uniformity.

    Accepts a RankHistogram or a raw count sequence.
    """
    if isinstance(h, RankHistogram):
        freqs = h.frequencies
    else:
        counts = np.asarray(h, dtype=float)
        if counts.size == 0 or counts.sum() == 0:
            raise InvalidInputError("empty histogram")
        freqs = counts / counts.sum()
    c = freqs.size
    return float(np.sum(np.abs(freqs - 1.0 / c)))


def ensemble_coverage(members, obs):
    """Whether the observation falls inside the ensemble range."""
    members = np.asarray(members, dtype=float)
    if members.size == 0:
        raise InvalidInputError("coverage needs at least one member")
    return bool(members.min() <= obs <= members.max())


def nominal_coverage(M):
    """Nominal range coverage of an M-member ensemble, in percent."""
    M = int(M)
    if M < 1:
        raise InvalidInputError("ensemble size must be >= 1")
    return 100.0 * (M - 1) / (M + 1)


def central_interval(d, alpha):
    """(alpha/2, 1 - alpha/2) quantile interval of a predictive law."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidInputError("alpha must lie in (0, 1)")
    return d.quantile(alpha / 2.0), d.quantile(1.0 - alpha / 2.0)


def pit(d, obs):
    """Probability integral transform: the predictive CDF at the obs."""
    return d.cdf(obs)


def pit_histogram(pits, bins):
    """Equal-width histogram of PIT values over [0, 1]."""
    pits = np.asarray(pits, dtype=float)
    if pits.size == 0:
        raise InvalidInputError("empty PIT sample")
    if np.any(pits < 0.0) or np.any(pits > 1.0):
        raise InvalidInputError("PIT values must lie in [0, 1]")
    counts, edges = np.histogram(pits, bins=int(bins), range=(0.0, 1.0))
    return counts, edges


def _kolmogorov_sf(lam):
    # Survival function of the asymptotic Kolmogorov law; the direct
    # alternating series stalls for small arguments, where the
    # theta-transformed CDF series converges in a couple of terms.
    if lam <= 0.0:
        return 1.0
    if lam < 1.0:
        total = 0.0
        for k in range(1, 201):
            term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * lam * lam))
            total += term
            if term < 1e-10:
                break
        cdf = math.sqrt(2.0 * math.pi) / lam * total
        return min(1.0, max(0.0, 1.0 - cdf))
    total = 0.0
    sign = 1.0
    for k in range(1, 201):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += sign * term
        if term < 1e-10:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_uniform_test(pits):
    """One-sample KS test of PIT values against Uniform(0, 1).

    Returns the statistic and its asymptotic p-value.
    """
    pits = np.sort(np.asarray(pits, dtype=float).ravel())
    n = pits.size
    if n < 10:
        raise InsufficientDataError("KS test needs at least 10 values")
    if np.any(pits < 0.0) or np.any(pits > 1.0):
        raise InvalidInputError("PIT values must lie in [0, 1]")
    i = np.arange(1, n + 1, dtype=float)
    d_plus = np.max(i / n - pits)
    d_minus = np.max(pits - (i - 1.0) / n)
    stat = float(max(d_plus, d_minus))
    return stat, _kolmogorov_sf(math.sqrt(n) * stat)


@dataclass
class VerificationReport:
    """Every summary row of the evaluation tables, for one forecast stream."""

    kind: str  # "parametric" | "empirical"
    model: str | None
    n_cases: int
    scores: ScoreSummary
    reliability_index: float
    class_count: int
    histogram_kind: str  # "rank" | "pit"
    histogram_counts: tuple
    coverage_pct: float
    nominal_coverage_pct: float
    mean_width: float
    alpha: float
    thresholds: tuple
    mean_pit: float | None
    ks_statistic: float | None
    ks_p_value: float | None
    neg_mass_mean: float
    neg_mass_max: float
    tie_break_seed: int | None

    def to_dict(self):
        return {
            "kind": self.kind,
            "model": self.model,
            "n_cases": self.n_cases,
            "scores": self.scores.to_dict(),
            "reliability_index": self.reliability_index,
            "class_count": self.class_count,
            "histogram_kind": self.histogram_kind,
            "histogram_counts": list(self.histogram_counts),
            "coverage_pct": self.coverage_pct,
            "nominal_coverage_pct": self.nominal_coverage_pct,
            "mean_width": self.mean_width,
            "alpha": self.alpha,
            "thresholds": list(self.thresholds),
            "mean_pit": self.mean_pit,
            "ks_statistic": self.ks_statistic,
            "ks_p_value": self.ks_p_value,
            "neg_mass_mean": self.neg_mass_mean,
            "neg_mass_max": self.neg_mass_max,
            "tie_break_seed": self.tie_break_seed,
        }


def _default_thresholds(obs):
    return tuple(float(v) for v in np.percentile(obs, [90.0, 95.0, 99.0]))


def _parametric_columns(forecasts, obs, alpha):
    """PIT, log density, median, mean, interval, neg mass, batched by family."""
    n = len(forecasts)
    pits = np.empty(n)
    dens = np.empty(n)
    med = np.empty(n)
    mean = np.empty(n)
    lo = np.empty(n)
    hi = np.empty(n)
    neg = np.empty(n)
    for _, idx in _family_groups(forecasts).items():
        batch = _batch_of(forecasts, idx)
        x = obs[idx]
        pits[idx] = np.clip(batch.cdf(x), 0.0, 1.0)
        dens[idx] = batch.pdf(x)
        med[idx] = batch.median()
        mean[idx] = batch.mean()
        lo[idx], hi[idx] = central_interval(batch, alpha)
        neg[idx] = batch.neg_mass()
    return pits, dens, med, mean, lo, hi, neg


def build_report(cases, forecasts, thresholds=None, alpha=None, seed=0, bins=None, model=None):
    """Assemble the full verification report for one forecast stream.

    `forecasts` holds one predictive law per case: either parametric
    distributions (TN/LN/GEV, possibly mixed via regime switching) or
    Empirical forecasts (raw ensemble, climatology) - not a mixture of
    the two kinds.  `alpha` defaults to 2/(M+1), matching the nominal
    coverage of the raw M-member ensemble.
    """
    if len(cases) == 0 or len(forecasts) != len(cases):
        raise InvalidInputError("need one forecast per case and at least one case")
    if any(c.obs is None for c in cases):
        raise InvalidInputError("every verification case needs an observation")
    obs = np.array([c.obs for c in cases], dtype=float)
    M = len(cases[0].members)
    if any(len(c.members) != M for c in cases):
        raise InvalidInputError("verification cases must share one ensemble size")

    empirical = [isinstance(d, Empirical) for d in forecasts]
    if any(empirical) and not all(empirical):
        raise InvalidInputError("cannot mix empirical and parametric forecasts in one report")
    is_empirical = all(empirical)

    if alpha is None:
        alpha = 2.0 / (M + 1.0)
    alpha = float(alpha)
    nominal = 100.0 * (1.0 - alpha)
    if thresholds is None:
        thresholds = _default_thresholds(obs)
    thresholds = tuple(float(r) for r in thresholds)

    crps = crps_values(forecasts, obs)
    mean_twcrps = {
        r: float(np.mean(twcrps_values(forecasts, obs, r))) for r in thresholds
    }

    if is_empirical:
        sizes = {d.n for d in forecasts}
        if len(sizes) != 1:
            raise InvalidInputError("empirical forecasts must share one sample size")
        size = sizes.pop()
        c = size + 1
        rng = np.random.default_rng(seed)
        values = np.array([d.values for d in forecasts])
        ranks = ranks_of_obs(values, obs, rng)
        hist = RankHistogram.from_ranks(ranks, c)
        delta = reliability_index(hist)
        intervals = np.array([central_interval(d, alpha) for d in forecasts])
        covered = (obs >= intervals[:, 0]) & (obs <= intervals[:, 1])
        med = np.array([d.median() for d in forecasts])
        mean = np.array([d.mean() for d in forecasts])
        neg = np.array([d.neg_mass() for d in forecasts])
        summary = ScoreSummary(
            mean_crps=float(np.mean(crps)),
            mean_twcrps=mean_twcrps,
            mean_log_score=None,
            n_log_infinite=0,
            mae=mae_median(np.column_stack([med, obs])),
            rmse=rmse_mean(np.column_stack([mean, obs])),
        )
        return VerificationReport(
            kind="empirical",
            model=model,
            n_cases=len(cases),
            scores=summary,
            reliability_index=delta,
            class_count=c,
            histogram_kind="rank",
            histogram_counts=hist.counts,
            coverage_pct=100.0 * float(np.mean(covered)),
            nominal_coverage_pct=nominal,
            mean_width=float(np.mean(intervals[:, 1] - intervals[:, 0])),
            alpha=alpha,
            thresholds=thresholds,
            mean_pit=None,
            ks_statistic=None,
            ks_p_value=None,
            neg_mass_mean=float(np.mean(neg)),
            neg_mass_max=float(np.max(neg)),
            tie_break_seed=int(seed),
        )

    if bins is None:
        bins = M + 1
    pits, dens, med, mean, lo, hi, neg = _parametric_columns(forecasts, obs, alpha)
    counts, _ = pit_histogram(pits, bins)
    delta = reliability_index(counts)
    mean_log, n_inf = aggregate_log_scores(log_score(dens))
    ks_stat, ks_p = ks_uniform_test(pits) if pits.size >= 10 else (None, None)
    covered = (obs >= lo) & (obs <= hi)
    summary = ScoreSummary(
        mean_crps=float(np.mean(crps)),
        mean_twcrps=mean_twcrps,
        mean_log_score=mean_log,
        n_log_infinite=n_inf,
        mae=mae_median(np.column_stack([med, obs])),
        rmse=rmse_mean(np.column_stack([mean, obs])),
    )
    return VerificationReport(
        kind="parametric",
        model=model,
        n_cases=len(cases),
        scores=summary,
        reliability_index=delta,
        class_count=int(bins),
        histogram_kind="pit",
        histogram_counts=tuple(int(v) for v in counts),
        coverage_pct=100.0 * float(np.mean(covered)),
        nominal_coverage_pct=nominal,
        mean_width=float(np.mean(hi - lo)),
        alpha=alpha,
        thresholds=thresholds,
        mean_pit=float(np.mean(pits)),
        ks_statistic=ks_stat,
        ks_p_value=ks_p,
        neg_mass_mean=float(np.mean(neg)),
        neg_mass_max=float(np.max(neg)),
        tie_break_seed=None,
    )

"""Adaptive ALCS fuzzy join and join-quality metrics.

The join threshold is derived from the data instead of fixed up front:
the mean of per-row best scores and the mean of the middle similarity
stratum are combined with max(), then a length-dependent tolerance is
subtracted. Short identifiers get a tight tolerance, long noisy text a
loose one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ._kmeans import kmeans_1d
from .similarity import AlcsConfig, DEFAULT_ALCS, alcs, alcs_matrix

__all__ = [
    "JoinResult",
    "JoinThreshold",
    "JoinerConfig",
    "adaptive_threshold",
    "fuzzy_join",
    "score_against_truth",
]


@dataclass(frozen=True)
class JoinerConfig:
    short_max_len: float = 8.0
    long_min_len: float = 20.0
    d_short: float = 0.05
    d_medium: float = 0.10
    d_long: float = 0.15
    # Per-regime similarity weights are carried for config completeness;
    # the match rule itself does not consume them.
    alpha_sim_short: float = 1.0
    alpha_sim_medium: float = 0.8
    alpha_sim_long: float = 0.6

    def __post_init__(self) -> None:
        if not self.d_short < self.d_medium < self.d_long:
            raise ValueError("tolerances must be strictly ordered short < medium < long")


@dataclass(frozen=True)
class JoinThreshold:
    thr_join: float
    tolerance: float
    alpha_sim: float
    regime: str
    alcs_mean: float
    alcs_middle: float

    @property
    def bar(self) -> float:
        return self.thr_join - self.tolerance


@dataclass(frozen=True)
class JoinResult:
    matches: tuple[tuple[int, int, float], ...]
    threshold: JoinThreshold
    match_count: int
    distinct_sources: int
    distinct_targets: int


def _middle_cluster_mean(row_maxima: Sequence[float]) -> float:
    labels, centroids = kmeans_1d(row_maxima, k=3, iters=20)
    if len(centroids) >= 3:
        order = sorted(range(len(centroids)), key=lambda c: centroids[c])
        middle = order[len(order) // 2]
        members = [row_maxima[i] for i in range(len(row_maxima)) if labels[i] == middle]
        if members:
            return sum(members) / len(members)
    # Degenerate stratification: fall back to the plain median.
    ordered = sorted(row_maxima)
    n = len(ordered)
    if n % 2:
        return ordered[n // 2]
    return (ordered[n // 2 - 1] + ordered[n // 2]) / 2.0


def adaptive_threshold(
    vals_a: Sequence[str],
    vals_b: Sequence[str],
    cfg: JoinerConfig = JoinerConfig(),
    alcs_cfg: AlcsConfig = DEFAULT_ALCS,
) -> JoinThreshold:
    """Data-driven join threshold for two transformed value lists.

    The length regime is picked by the smaller of the two average text
    lengths; the threshold is max(mean of row maxima, mean of the middle
    k-means stratum of row maxima).
    """
    if not vals_a or not vals_b:
        raise ValueError("both value lists must be non-empty")
    avg_a = sum(len(v) for v in vals_a) / len(vals_a)
    avg_b = sum(len(v) for v in vals_b) / len(vals_b)
    l_min = min(avg_a, avg_b)
    if l_min < cfg.short_max_len:
        regime, d, alpha = "short", cfg.d_short, cfg.alpha_sim_short
    elif l_min < cfg.long_min_len:
        regime, d, alpha = "medium", cfg.d_medium, cfg.alpha_sim_medium
    else:
        regime, d, alpha = "long", cfg.d_long, cfg.alpha_sim_long
    matrix = alcs_matrix(vals_a, vals_b, alcs_cfg)
    mean_score = matrix.mean_row_max
    middle = _middle_cluster_mean(list(matrix.row_max))
    return JoinThreshold(
        thr_join=max(mean_score, middle),
        tolerance=d,
        alpha_sim=alpha,
        regime=regime,
        alcs_mean=mean_score,
        alcs_middle=middle,
    )


def fuzzy_join(
    vals_a: Sequence[str],
    vals_b: Sequence[str],
    thr: JoinThreshold,
    alcs_cfg: AlcsConfig = DEFAULT_ALCS,
) -> JoinResult:
    """All row pairs whose ALCS clears thr_join - tolerance. A source row
    may match several targets; no 1:1 resolution is applied here."""
    bar = thr.bar
    matches: list[tuple[int, int, float]] = []
    for i, a in enumerate(vals_a):
        for j, b in enumerate(vals_b):
            score = alcs(a, b, alcs_cfg)
            if score >= bar:
                matches.append((i, j, score))
    return JoinResult(
        matches=tuple(matches),
        threshold=thr,
        match_count=len(matches),
        distinct_sources=len({i for i, _, _ in matches}),
        distinct_targets=len({j for _, j, _ in matches}),
    )


def score_against_truth(
    result: JoinResult, truth: Sequence[tuple[int, int]]
) -> tuple[float, float, float]:
    """Standard precision/recall/F1 of the matched row-pair set."""
    got = {(i, j) for i, j, _ in result.matches}
    want = set(truth)
    if not got:
        return 0.0, 0.0, 0.0
    hit = len(got & want)
    precision = hit / len(got)
    recall = hit / len(want) if want else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1

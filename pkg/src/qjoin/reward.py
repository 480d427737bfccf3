"""Uniqueness-aware composite reward for transformation steps.

The reward mixes two gated components: an ALCS alignment gain (granted
only when enough rows actually improve) and a duplicate penalty (granted
only when enough rows do not get worse), minus an operator cost and a
step penalty that discourages long chains. The duplicate penalty is what
keeps the agent away from value-collapsing transformations like prefix
truncation on ID columns.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .similarity import AlcsMatrix

__all__ = [
    "RewardBreakdown",
    "RewardConfig",
    "adaptive_weights",
    "alcs_gain",
    "composite_reward",
    "duplicate_score",
    "per_row_duplicates",
    "uniqueness_reward",
]


@dataclass(frozen=True)
class RewardConfig:
    alcs_weight_default: float = 1.0
    uniq_weight_default: float = 1.0
    alcs_weight_high: float = 2.0
    uniq_weight_low: float = 0.5
    p_min_alcs: float = 0.25
    p_min_uniq: float = 0.25
    tau_high: float = 0.7
    tau_diff: float = 0.3
    step_penalty: float = 0.05
    op_cost_unary: float = 0.0
    op_cost_concat: float = 0.02

    def __post_init__(self) -> None:
        if self.alcs_weight_high < self.alcs_weight_default:
            raise ValueError("alcs_weight_high must be >= alcs_weight_default")
        if self.uniq_weight_low > self.uniq_weight_default:
            raise ValueError("uniq_weight_low must be <= uniq_weight_default")

    def op_cost(self, op_class: str) -> float:
        return self.op_cost_concat if op_class == "concat" else self.op_cost_unary


@dataclass(frozen=True)
class RewardBreakdown:
    delta_alcs: float
    p_alcs: float
    phi_prev: int
    phi_new: int
    delta_dup: float
    p_uniq: float
    r_alcs: float
    r_uniq: float
    op_cost: float
    step_pen: float
    total: float
    alcs_gate_passed: bool
    uniq_gate_passed: bool


def alcs_gain(prev: AlcsMatrix, new: AlcsMatrix) -> tuple[float, float]:
    """Aggregate per-row best-match improvement.

    Returns (sum of per-row deltas, fraction of rows that improved).
    Deltas cancel in the sum, which is exactly why the fraction is
    reported alongside: an outlier-only gain shows up as a high delta
    with a low fraction and gets gated off.
    """
    if len(prev.row_max) != len(new.row_max):
        raise ValueError("matrices do not share source rows")
    deltas = [n - p for p, n in zip(prev.row_max, new.row_max)]
    improved = sum(1 for d in deltas if d > 0)
    return sum(deltas), improved / len(deltas)


def per_row_duplicates(matrix: AlcsMatrix) -> list[int]:
    """f(x_i) per source row: how many rows share row i's best-match value.

    Rows whose best score is zero have no significant match at all; their
    argmax is a tie-break artifact, so they carry no best-match token and
    report f = 0. Without this, an action that wipes out all alignment
    would look like it "resolved" duplicates.
    """
    best = matrix.best_match_values()
    significant = [v for v, s in zip(best, matrix.row_max) if s > 0]
    freq = Counter(significant)
    return [freq[v] if s > 0 else 0 for v, s in zip(best, matrix.row_max)]


def duplicate_score(matrix: AlcsMatrix) -> int:
    """phi = sum_i max(0, f(x_i) - 1) over best-match target values."""
    return sum(max(0, f - 1) for f in per_row_duplicates(matrix))


def uniqueness_reward(phi_prev: int, phi_new: int, cfg: RewardConfig, p_uniq: float) -> float:
    """Signed duplicate-change reward, gated by the fraction of rows
    whose duplicate count did not worsen. phi_prev == 0 yields 0: there
    is no baseline duplication to scale against."""
    if p_uniq < cfg.p_min_uniq:
        return 0.0
    if phi_prev <= 0:
        return 0.0
    delta_dup = (phi_new - phi_prev) / phi_prev
    return -cfg.uniq_weight_default * delta_dup


def adaptive_weights(candidate_sims: list[float], cfg: RewardConfig) -> tuple[float, float]:
    """Concat weighting from the similarity landscape over candidate pairs.

    A single dominant candidate (exactly one above tau_high, or exactly
    one trailing the maximum by more than tau_diff) boosts the alignment
    weight and relaxes uniqueness; everything else keeps the balanced
    defaults. Pure in the multiset of similarities.
    """
    if not candidate_sims:
        raise ValueError("candidate_sims must be non-empty")
    sigma_max = max(candidate_sims)
    n1 = sum(1 for s in candidate_sims if s > cfg.tau_high)
    n2 = sum(1 for s in candidate_sims if sigma_max - s > cfg.tau_diff)
    if max(n1, n2) == 1:
        return cfg.alcs_weight_high, cfg.uniq_weight_low
    return cfg.alcs_weight_default, cfg.uniq_weight_default


def composite_reward(
    gain: tuple[float, float],
    phis: tuple[int, int, float],
    op_class: str,
    weights: tuple[float, float],
    step_index: int,
    cfg: RewardConfig,
) -> RewardBreakdown:
    """Total reward for one transformation step.

    ``gain`` is (delta_alcs, p_alcs); ``phis`` is (phi_prev, phi_new,
    p_uniq). Unary steps use the default weights; concat steps use the
    adaptive ``weights`` pair. ``step_index`` is the number of steps
    already in the chain, so the first step carries no length penalty.
    """
    if step_index < 0:
        raise ValueError("step_index must be >= 0")
    delta_alcs, p_alcs = gain
    phi_prev, phi_new, p_uniq = phis
    if op_class == "concat":
        alcs_weight, uniq_weight = weights
    else:
        alcs_weight, uniq_weight = cfg.alcs_weight_default, cfg.uniq_weight_default

    alcs_gate = p_alcs >= cfg.p_min_alcs
    r_alcs = alcs_weight * delta_alcs if alcs_gate else 0.0

    uniq_gate = p_uniq >= cfg.p_min_uniq
    if uniq_gate and phi_prev > 0:
        delta_dup = (phi_new - phi_prev) / phi_prev
    else:
        delta_dup = 0.0 if phi_prev <= 0 else (phi_new - phi_prev) / phi_prev
    r_uniq = -uniq_weight * delta_dup if (uniq_gate and phi_prev > 0) else 0.0

    op_cost = cfg.op_cost(op_class)
    step_pen = cfg.step_penalty * step_index
    total = r_alcs + r_uniq - op_cost - step_pen
    return RewardBreakdown(
        delta_alcs=delta_alcs,
        p_alcs=p_alcs,
        phi_prev=phi_prev,
        phi_new=phi_new,
        delta_dup=delta_dup,
        p_uniq=p_uniq,
        r_alcs=r_alcs,
        r_uniq=r_uniq,
        op_cost=op_cost,
        step_pen=step_pen,
        total=total,
        alcs_gate_passed=alcs_gate,
        uniq_gate_passed=uniq_gate,
    )

"""Composite reward components against hand-computed values."""

import itertools
import random

import pytest

from qjoin.agent import PairEnv
from qjoin.operators import ExclusionDicts
from qjoin.reward import (
    RewardConfig,
    adaptive_weights,
    alcs_gain,
    composite_reward,
    duplicate_score,
    per_row_duplicates,
    uniqueness_reward,
)
from qjoin.similarity import AlcsConfig, alcs_matrix

from conftest import enumerate_best_chain

CFG = RewardConfig(p_min_alcs=0.5, p_min_uniq=0.5)


def _matrix_with_row_max(values):
    """Fabricated diagonal matrix whose row maxima equal ``values``."""
    from qjoin.similarity import AlcsMatrix

    n = len(values)
    return AlcsMatrix(
        rows=tuple(f"r{i}" for i in range(n)),
        cols=tuple(f"c{i}" for i in range(n)),
        scores=tuple(tuple(values[i] if j == i else 0.0 for j in range(n)) for i in range(n)),
        lcs_lengths=tuple(tuple(3 for _ in range(n)) for _ in range(n)),
        row_max=tuple(values),
        row_argmax=tuple(range(n)),
    )


def test_alcs_gain_examples():
    prev = _matrix_with_row_max([0.5, 0.5])
    assert alcs_gain(prev, _matrix_with_row_max([0.7, 0.9])) == pytest.approx((0.6, 1.0))
    assert alcs_gain(prev, prev) == (0.0, 0.0)
    delta, p = alcs_gain(prev, _matrix_with_row_max([0.9, 0.1]))
    assert delta == pytest.approx(0.0)
    assert p == 0.5


def test_alcs_gain_row_mismatch():
    with pytest.raises(ValueError):
        alcs_gain(_matrix_with_row_max([0.5]), _matrix_with_row_max([0.5, 0.5]))


def _matrix(src, tgt, n=3):
    return alcs_matrix(src, tgt, AlcsConfig(n))


def test_duplicate_score_examples():
    # best matches land on a, a, b
    m = _matrix(["aaa", "aaa", "bbb"], ["aaa", "bbb"])
    assert m.best_match_values() == ["aaa", "aaa", "bbb"]
    assert duplicate_score(m) == 2

    m2 = _matrix(["aaa", "bbb", "ccc"], ["aaa", "bbb", "ccc"])
    assert duplicate_score(m2) == 0

    # collapsed-ID case: all rows significantly matching the same "0"
    # (significance lowered so single characters count as real matches)
    m3 = _matrix(["0", "0", "0"], ["0"], n=1)
    assert per_row_duplicates(m3) == [3, 3, 3]
    assert duplicate_score(m3) == 6


def test_duplicate_score_ignores_insignificant_rows():
    # Best scores of zero are argmax artifacts, not matches.
    m = _matrix(["xxx", "yyy"], ["zzz"])
    assert m.row_max == (0.0, 0.0)
    assert per_row_duplicates(m) == [0, 0]
    assert duplicate_score(m) == 0


def test_uniqueness_reward_examples():
    assert uniqueness_reward(0, 99, CFG, p_uniq=1.0) == 0.0
    assert uniqueness_reward(2, 4, CFG, p_uniq=1.0) == pytest.approx(-1.0)
    assert uniqueness_reward(2, 1, CFG, p_uniq=1.0) == pytest.approx(0.5)
    assert uniqueness_reward(2, 4, CFG, p_uniq=0.1) == 0.0  # gated


def test_adaptive_weights_examples():
    cfg = RewardConfig(tau_high=0.7, tau_diff=0.3)
    boosted = (cfg.alcs_weight_high, cfg.uniq_weight_low)
    default = (cfg.alcs_weight_default, cfg.uniq_weight_default)
    assert adaptive_weights([0.9], cfg) == boosted
    assert adaptive_weights([0.9, 0.85], cfg) == default
    assert adaptive_weights([0.5, 0.4], cfg) == default
    with pytest.raises(ValueError):
        adaptive_weights([], cfg)


def test_adaptive_weights_permutation_invariant():
    cfg = RewardConfig()
    rng = random.Random(2)
    for _ in range(50):
        sims = [round(rng.random(), 3) for _ in range(rng.randrange(1, 6))]
        base = adaptive_weights(sims, cfg)
        for perm in itertools.permutations(sims):
            assert adaptive_weights(list(perm), cfg) == base


def test_composite_reward_examples():
    cfg = RewardConfig(p_min_alcs=0.5, p_min_uniq=0.5, step_penalty=0.05)
    b = composite_reward((1.0, 1.0), (3, 3, 1.0), "unary", (1.0, 1.0), 3, cfg)
    assert b.total == pytest.approx(0.85)

    gated = composite_reward((1.0, 0.3), (0, 0, 1.0), "unary", (1.0, 1.0), 0, cfg)
    assert gated.r_alcs == 0.0
    assert not gated.alcs_gate_passed

    zero = composite_reward((0.0, 0.0), (0, 0, 1.0), "unary", (1.0, 1.0), 0, cfg)
    assert zero.total == 0.0


def test_composite_reward_concat_uses_adaptive_weights():
    cfg = RewardConfig()
    boosted = composite_reward((1.0, 1.0), (0, 0, 1.0), "concat", (2.0, 0.5), 0, cfg)
    assert boosted.r_alcs == pytest.approx(2.0)
    assert boosted.op_cost == cfg.op_cost_concat
    unary = composite_reward((1.0, 1.0), (0, 0, 1.0), "unary", (2.0, 0.5), 0, cfg)
    assert unary.r_alcs == pytest.approx(1.0)


def test_gating_boundaries():
    cfg = RewardConfig(p_min_alcs=0.5, p_min_uniq=0.5)
    eps = 1e-9
    at = composite_reward((1.0, 0.5), (2, 1, 0.5), "unary", (1.0, 1.0), 0, cfg)
    assert at.alcs_gate_passed and at.uniq_gate_passed
    assert at.r_alcs == pytest.approx(1.0)
    assert at.r_uniq == pytest.approx(0.5)
    below = composite_reward((1.0, 0.5 - eps), (2, 1, 0.5 - eps), "unary", (1.0, 1.0), 0, cfg)
    assert not below.alcs_gate_passed and not below.uniq_gate_passed
    assert below.r_alcs == 0.0 and below.r_uniq == 0.0
    above = composite_reward((1.0, 0.5 + eps), (2, 1, 0.5 + eps), "unary", (1.0, 1.0), 0, cfg)
    assert above.r_alcs == pytest.approx(1.0)
    assert above.r_uniq == pytest.approx(0.5)


def test_monotone_step_penalty():
    cfg = RewardConfig(step_penalty=0.05)
    totals = [
        composite_reward((1.0, 1.0), (0, 0, 1.0), "unary", (1.0, 1.0), i, cfg).total
        for i in range(6)
    ]
    assert all(a > b for a, b in zip(totals, totals[1:]))


def test_collapse_repellence_on_id_fixture(ids_repo, ids_pair):
    env = PairEnv(ids_repo, ids_pair, seed=0, include_numeric_partners=True)
    config = env.initial_config()
    prefix_rewards = {}
    for action in env.legal_actions(config, ExclusionDicts()):
        if action.op.kind == "substring" and action.op.direction == "prefix":
            breakdown, _ = env.evaluate_action(config, action, 0)
            prefix_rewards[action.id] = breakdown.total
    assert len(prefix_rewards) == 6  # k in {1,2,3} on both slots
    assert all(total <= 0 for total in prefix_rewards.values()), prefix_rewards


def test_id_fixture_best_chain_excludes_prefix_truncation(ids_repo, ids_pair):
    env = PairEnv(ids_repo, ids_pair, seed=0, include_numeric_partners=True)
    best_reward, best_steps = enumerate_best_chain(env, max_depth=3)
    assert best_reward == 0.0
    assert best_steps == ()

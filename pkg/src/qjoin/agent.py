"""Tabular Q-learning agent over transformation actions.

One agent serves one column pair. It keeps two tables: per-slot operator
probabilities that drive exploration sampling, and a Q-table keyed by a
discretized state that drives warm starts and exploitation tie-breaks.
Exploitation simulates every legal action and takes the best strictly
positive one; a step with non-positive reward is never kept, so the
working configuration only ever moves through improvements.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

from ._kmeans import kmeans_1d
from .corpus import ColumnRef, Repository, sample_column
from .operators import (
    Action,
    ChainStep,
    ExclusionDicts,
    Operator,
    OperatorChain,
    SlotState,
    apply_operator,
    default_library,
    enumerate_actions,
)
from .reward import (
    RewardBreakdown,
    RewardConfig,
    adaptive_weights,
    alcs_gain,
    composite_reward,
    duplicate_score,
    per_row_duplicates,
)
from .similarity import AlcsConfig, AlcsMatrix, DEFAULT_ALCS, alcs_matrix

__all__ = [
    "Agent",
    "AgentConfig",
    "Choice",
    "PairEnv",
    "StateKey",
    "StepTrace",
    "Trainer",
    "TrainResult",
    "choose_action",
    "init_agent",
    "stratified_sample",
    "train",
    "update",
]

SLOTS = ("a", "b")


@dataclass(frozen=True)
class AgentConfig:
    learning_rate: float = 0.1
    discount: float = 1.0
    epsilon: float = 0.3
    epsilon_decay: float = 0.95
    max_depth: int = 6
    tau_sim: float = 0.95
    eps_tol: float = 1e-3
    patience: int = 5
    max_iterations: int = 100
    strata_proportions: tuple[float, float, float] = (0.3, 0.3, 0.4)
    top_k_targets: int = 5
    max_working_rows: int = 30
    max_working_targets: int = 60
    sample_proportion: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must be in [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")


@dataclass(frozen=True)
class StateKey:
    """Discretized observation: chain text per side, mean-ALCS bucket,
    uniqueness bucket, and chain depth. Buckets are 0.1 wide so the
    Q-table stays small enough to transfer between tasks."""

    chain_signature: str
    alcs_bucket: int
    uniq_bucket: int
    depth: int

    @property
    def text(self) -> str:
        return f"{self.chain_signature}#d{self.depth}a{self.alcs_bucket}u{self.uniq_bucket}"


@dataclass
class Agent:
    policy: dict[str, dict[str, float]]
    q: dict[str, dict[str, float]]
    epsilon: float
    exclusions: ExclusionDicts = field(default_factory=ExclusionDicts)


def init_agent(
    library: Sequence[Operator],
    cfg: AgentConfig,
    warm_start: dict[str, dict[str, float]] | None = None,
    slots: Sequence[str] = SLOTS,
) -> Agent:
    """Fresh agent with uniform per-slot operator probabilities; the
    Q-table starts empty unless copied from a prior task."""
    if not library:
        raise ValueError("operator library must be non-empty")
    uniform = 1.0 / len(library)
    policy = {slot: {op.id: uniform for op in library} for slot in slots}
    q = {state: dict(row) for state, row in (warm_start or {}).items()}
    return Agent(policy=policy, q=q, epsilon=cfg.epsilon)


def stratified_sample(
    row_maxima: Sequence[float], seed: int, cfg: AgentConfig, floor: int = 20
) -> list[int]:
    """Pick training rows across low/mid/high similarity strata.

    k-means (k=3) on the per-row best scores; proportions (p1, p2, p3)
    are drawn from the strata in ascending-centroid order. Degenerate
    inputs (under 3 rows, or strata that collapse) fall back to uniform
    sampling at the combined proportion. At least min(floor, n) rows are
    kept regardless of proportions: the reward gates need a nontrivial
    row count, and tiny tables carry their duplication signal in every
    row.
    """
    n = len(row_maxima)
    if n < 3:
        return list(range(n))
    labels, centroids = kmeans_1d(row_maxima, k=3, iters=20)
    order = sorted(range(len(centroids)), key=lambda c: centroids[c])
    strata = [[i for i in range(n) if labels[i] == c] for c in order]
    strata = [s for s in strata if s]
    props = list(cfg.strata_proportions)
    if len(strata) < 3:
        combined = min(1.0, sum(props))
        props = [combined] * len(strata)
    rng = random.Random(seed)
    selected: list[int] = []
    for stratum, p in zip(strata, props):
        k = min(len(stratum), math.ceil(p * len(stratum)))
        selected.extend(rng.sample(stratum, k))
    minimum = min(floor, n, cfg.max_working_rows)
    if len(selected) < minimum:
        remaining = sorted(set(range(n)) - set(selected))
        selected.extend(rng.sample(remaining, minimum - len(selected)))
    if len(selected) > cfg.max_working_rows:
        selected = rng.sample(selected, cfg.max_working_rows)
    return sorted(selected)


@dataclass(frozen=True)
class Choice:
    action: Action | None  # None signals RESET
    breakdown: RewardBreakdown | None
    explored: bool = False
    evaluated: tuple[tuple[Action, RewardBreakdown], ...] | None = None


def choose_action(
    agent: Agent,
    state: StateKey,
    actions: Sequence[Action],
    evaluate: Callable[[Action], RewardBreakdown],
    rng: random.Random,
    cfg: AgentConfig,
) -> Choice:
    """Epsilon-greedy step selection.

    Exploration samples a slot uniformly and an operator from the slot's
    probability row. Exploitation scores every legal action and returns
    the argmax if it is strictly positive; ties break toward the higher
    Q-value, then the smaller action id. No positive action means RESET.
    """
    if not actions:
        return Choice(action=None, breakdown=None)
    if rng.random() < agent.epsilon:
        slots = sorted({a.slot for a in actions})
        slot = slots[rng.randrange(len(slots))]
        slot_actions = [a for a in actions if a.slot == slot]
        op_ids = sorted({a.op.id for a in slot_actions})
        weights = [agent.policy[slot].get(op_id, 0.0) for op_id in op_ids]
        if sum(weights) <= 0:
            weights = [1.0] * len(op_ids)
        op_id = rng.choices(op_ids, weights=weights, k=1)[0]
        variants = [a for a in slot_actions if a.op.id == op_id]
        action = variants[rng.randrange(len(variants))]
        return Choice(action=action, breakdown=evaluate(action), explored=True)
    evaluated = tuple((a, evaluate(a)) for a in actions)
    q_row = agent.q.get(state.text, {})
    best: tuple[tuple[float, float, str], Action, RewardBreakdown] | None = None
    for action, br in evaluated:
        key = (-br.total, -q_row.get(action.id, 0.0), action.id)
        if best is None or key < best[0]:
            best = (key, action, br)
    assert best is not None
    if best[2].total > 0:
        return Choice(action=best[1], breakdown=best[2], evaluated=evaluated)
    return Choice(action=None, breakdown=None, evaluated=evaluated)


def update(
    agent: Agent,
    state: StateKey,
    action: Action,
    reward: float,
    next_state: StateKey,
    cfg: AgentConfig,
) -> Agent:
    """One learning step: Q(s,a) <- (1-lr)Q(s,a) + lr(R + gamma max Q(s',.))
    plus the probability nudge for the taken operator, renormalized per
    slot. Reward exactly 0 counts as the non-positive branch."""
    lr = cfg.learning_rate
    next_best = max(agent.q.get(next_state.text, {}).values(), default=0.0)
    row = agent.q.setdefault(state.text, {})
    old = row.get(action.id, 0.0)
    row[action.id] = (1.0 - lr) * old + lr * (reward + cfg.discount * next_best)
    probs = agent.policy[action.slot]
    p = probs.get(action.op.id, 0.0)
    if reward > 0:
        probs[action.op.id] = p + lr * (1.0 - p)
    else:
        probs[action.op.id] = p - lr * p
    total = sum(probs.values())
    if total > 0:
        for key in probs:
            probs[key] /= total
    return agent


# --- evaluation environment -------------------------------------------------


@dataclass
class PairConfig:
    """One point in the search space: current working values on both
    sides, the chains that produced them, and the scored matrix."""

    values_a: tuple[str, ...]
    values_b: tuple[str, ...]
    chain_a: OperatorChain
    chain_b: OperatorChain
    steps: tuple[tuple[str, ChainStep], ...]
    matrix: AlcsMatrix
    slot_states: dict[str, SlotState]

    @property
    def depth(self) -> int:
        return len(self.steps)

    def chain_signature(self) -> str:
        a = "|".join(step.text for slot, step in self.steps if slot == "a")
        b = "|".join(step.text for slot, step in self.steps if slot == "b")
        return f"{a}~{b}"


class PairEnv:
    """Shared evaluation context for one column pair.

    Holds the deterministic working sample (stratified rows, top-k
    targets) and prices candidate actions with the composite reward.
    The trainer, the reuse machinery, and test oracles all evaluate
    through the same environment so their rewards are comparable.
    """

    def __init__(
        self,
        repo: Repository,
        pair: tuple[ColumnRef, ColumnRef],
        agent_cfg: AgentConfig | None = None,
        reward_cfg: RewardConfig | None = None,
        alcs_cfg: AlcsConfig = DEFAULT_ALCS,
        candidate_sims: Sequence[float] | None = None,
        seed: int = 0,
        include_numeric_partners: bool = False,
    ) -> None:
        self.repo = repo
        self.pair = pair
        self.agent_cfg = agent_cfg or AgentConfig()
        self.reward_cfg = reward_cfg or RewardConfig()
        self.alcs_cfg = alcs_cfg
        self.seed = seed
        self.library = default_library()

        col_a = repo.column(pair[0])
        col_b = repo.column(pair[1])
        sample_a = sample_column(col_a, self.agent_cfg.sample_proportion, seed)
        sample_b = sample_column(col_b, self.agent_cfg.sample_proportion, seed + 1)
        if not sample_a.values or not sample_b.values:
            raise ValueError(f"degenerate samples for pair {pair[0].key} ~ {pair[1].key}")
        base_matrix = alcs_matrix(sample_a.values, sample_b.values, alcs_cfg)
        selected = stratified_sample(base_matrix.row_max, seed + 2, self.agent_cfg)
        tgt_selected = self._select_targets(base_matrix, selected)

        self.src_rows = tuple(sample_a.indices[i] for i in selected)
        self.tgt_rows = tuple(sample_b.indices[j] for j in tgt_selected)
        self.values_a0 = tuple(sample_a.values[i] for i in selected)
        self.values_b0 = tuple(sample_b.values[j] for j in tgt_selected)

        table_a = repo.tables[pair[0].table]
        table_b = repo.tables[pair[1].table]
        self.partner_values: dict[tuple[str, str], tuple[str, ...]] = {}
        partners_a = []
        for col in table_a.columns:
            if col.is_numeric and not include_numeric_partners:
                continue
            partners_a.append(col.name)
            self.partner_values[("a", col.name)] = tuple(col.values[r] for r in self.src_rows)
        partners_b = []
        for col in table_b.columns:
            if col.is_numeric and not include_numeric_partners:
                continue
            partners_b.append(col.name)
            self.partner_values[("b", col.name)] = tuple(col.values[r] for r in self.tgt_rows)
        self._initial_slots = {
            "a": SlotState("a", table_a.id, pair[0].column, pair[0].column, tuple(partners_a)),
            "b": SlotState("b", table_b.id, pair[1].column, pair[1].column, tuple(partners_b)),
        }
        sims = list(candidate_sims) if candidate_sims else [base_matrix.mean_row_max]
        self.concat_weights = adaptive_weights(sims, self.reward_cfg)
        self._matrix_cache: dict[tuple[tuple[str, ...], tuple[str, ...]], AlcsMatrix] = {}
        # Optional callable(action_id, RewardBreakdown) fed every evaluation.
        self.eval_sink: Callable[[str, RewardBreakdown], None] | None = None

    def _select_targets(self, matrix: AlcsMatrix, rows: Sequence[int]) -> list[int]:
        k = self.agent_cfg.top_k_targets
        votes: dict[int, int] = {}
        best: dict[int, float] = {}
        for i in rows:
            ranked = sorted(
                range(len(matrix.cols)),
                key=lambda j: (-matrix.scores[i][j], -matrix.lcs_lengths[i][j], j),
            )[:k]
            for j in ranked:
                votes[j] = votes.get(j, 0) + 1
                best[j] = max(best.get(j, 0.0), matrix.scores[i][j])
        ranked_targets = sorted(votes, key=lambda j: (-votes[j], -best[j], j))
        ranked_targets = ranked_targets[: self.agent_cfg.max_working_targets]
        return sorted(ranked_targets)

    def _matrix(self, values_a: tuple[str, ...], values_b: tuple[str, ...]) -> AlcsMatrix:
        key = (values_a, values_b)
        found = self._matrix_cache.get(key)
        if found is None:
            if len(self._matrix_cache) > 8192:
                self._matrix_cache.clear()
            found = alcs_matrix(values_a, values_b, self.alcs_cfg)
            self._matrix_cache[key] = found
        return found

    def initial_config(self) -> PairConfig:
        return PairConfig(
            values_a=self.values_a0,
            values_b=self.values_b0,
            chain_a=OperatorChain(self.pair[0], max_len=self.agent_cfg.max_depth),
            chain_b=OperatorChain(self.pair[1], max_len=self.agent_cfg.max_depth),
            steps=(),
            matrix=self._matrix(self.values_a0, self.values_b0),
            slot_states=dict(self._initial_slots),
        )

    def legal_actions(self, config: PairConfig, exclusions: ExclusionDicts) -> list[Action]:
        return enumerate_actions(config.slot_states, exclusions, self.library)

    def apply_action(self, config: PairConfig, action: Action) -> PairConfig:
        partner_vals = None
        if action.partner is not None:
            partner_vals = self.partner_values[(action.slot, action.partner)]
        step = ChainStep(action.op, action.partner)
        if action.slot == "a":
            values_a = tuple(apply_operator(action.op, config.values_a, partner_vals))
            values_b = config.values_b
            chain_a = config.chain_a.extended(step)
            chain_b = config.chain_b
        else:
            values_a = config.values_a
            values_b = tuple(apply_operator(action.op, config.values_b, partner_vals))
            chain_a = config.chain_a
            chain_b = config.chain_b.extended(step)
        slot_states = dict(config.slot_states)
        if action.op.clazz == "concat" and action.partner is not None:
            state = slot_states[action.slot]
            if action.op.direction == "back":
                slot_states[action.slot] = replace(state, back_column=action.partner)
            else:
                slot_states[action.slot] = replace(state, front_column=action.partner)
        return PairConfig(
            values_a=values_a,
            values_b=values_b,
            chain_a=chain_a,
            chain_b=chain_b,
            steps=config.steps + ((action.slot, step),),
            matrix=self._matrix(values_a, values_b),
            slot_states=slot_states,
        )

    def evaluate_action(
        self, config: PairConfig, action: Action, step_index: int
    ) -> tuple[RewardBreakdown, PairConfig]:
        new_config = self.apply_action(config, action)
        gain = alcs_gain(config.matrix, new_config.matrix)
        phi_prev = duplicate_score(config.matrix)
        phi_new = duplicate_score(new_config.matrix)
        dups_prev = per_row_duplicates(config.matrix)
        dups_new = per_row_duplicates(new_config.matrix)
        not_worse = sum(1 for p, n in zip(dups_prev, dups_new) if n <= p)
        p_uniq = not_worse / len(dups_prev)
        breakdown = composite_reward(
            gain,
            (phi_prev, phi_new, p_uniq),
            action.op.clazz,
            self.concat_weights,
            step_index,
            self.reward_cfg,
        )
        if self.eval_sink is not None:
            self.eval_sink(action.id, breakdown)
        return breakdown, new_config

    def evaluate_steps(
        self, config: PairConfig, steps: Sequence[tuple[str, ChainStep]]
    ) -> tuple[float, list[RewardBreakdown], PairConfig]:
        """Cumulative reward of a fixed step sequence applied from
        ``config``, accepting every step regardless of sign."""
        total = 0.0
        breakdowns: list[RewardBreakdown] = []
        current = config
        for index, (slot, step) in enumerate(steps, start=config.depth):
            action = Action(slot, step.op, step.partner)
            if step.partner is not None and (slot, step.partner) not in self.partner_values:
                raise KeyError(f"missing column {slot}:{step.partner}")
            breakdown, current = self.evaluate_action(current, action, index)
            total += breakdown.total
            breakdowns.append(breakdown)
        return total, breakdowns, current

    def chain_reward(self, initial: PairConfig, final: PairConfig) -> float:
        """Reward of a whole transformation, scored as one move from the
        initial to the final configuration.

        Unlike the sum of per-step rewards this is path-independent: the
        ratio-based duplicate term cannot be farmed by splitting one
        reduction across several steps, and intermediate oscillations
        cancel. Per-step op costs and length penalties still accumulate,
        so shorter chains win among equals. The identity chain scores 0.
        """
        new_steps = final.steps[len(initial.steps):]
        if not new_steps:
            return 0.0
        gain = alcs_gain(initial.matrix, final.matrix)
        phi_prev = duplicate_score(initial.matrix)
        phi_new = duplicate_score(final.matrix)
        dups_prev = per_row_duplicates(initial.matrix)
        dups_new = per_row_duplicates(final.matrix)
        not_worse = sum(1 for p, n in zip(dups_prev, dups_new) if n <= p)
        p_uniq = not_worse / len(dups_prev)
        op_class = "concat" if any(s.op.clazz == "concat" for _, s in new_steps) else "unary"
        breakdown = composite_reward(
            gain,
            (phi_prev, phi_new, p_uniq),
            op_class,
            self.concat_weights,
            0,
            self.reward_cfg,
        )
        costs = sum(self.reward_cfg.op_cost(step.op.clazz) for _, step in new_steps)
        pens = self.reward_cfg.step_penalty * sum(
            range(len(initial.steps), len(final.steps))
        )
        return breakdown.r_alcs + breakdown.r_uniq - costs - pens

    def state_key(self, config: PairConfig) -> StateKey:
        mean = config.matrix.mean_row_max
        m = len(config.matrix.row_max)
        phi = duplicate_score(config.matrix)
        uniq_ratio = max(0.0, min(1.0, 1.0 - phi / m if m else 0.0))
        return StateKey(
            chain_signature=config.chain_signature(),
            alcs_bucket=min(10, int(mean * 10)),
            uniq_bucket=min(10, int(uniq_ratio * 10)),
            depth=config.depth,
        )


# --- training loop -----------------------------------------------------------


@dataclass(frozen=True)
class StepTrace:
    episode: int
    step_index: int
    action_id: str
    reward: float
    cumulative: float
    accepted: bool
    explored: bool
    evaluated: tuple[tuple[str, float], ...] | None = None


@dataclass
class TrainResult:
    best_chains: tuple[OperatorChain, OperatorChain]
    best_reward: float
    best_steps: tuple[tuple[str, ChainStep], ...]
    final_alcs_mean: float
    iterations: int
    reward_trace: list[StepTrace]
    terminated_by: str
    agent: Agent


class Trainer:
    """Runs episodes against a PairEnv until a termination clause fires."""

    def __init__(
        self,
        env: PairEnv,
        warm_start: dict[str, dict[str, float]] | None = None,
        seed: int = 0,
        trace_sink: Callable[[StepTrace], None] | None = None,
        record_evaluations: bool = False,
    ) -> None:
        self.env = env
        self.cfg = env.agent_cfg
        self.agent = init_agent(env.library, self.cfg, warm_start)
        self.rng = random.Random(seed)
        self.trace_sink = trace_sink
        self.record_evaluations = record_evaluations

    def _emit(self, trace: StepTrace, out: list[StepTrace]) -> None:
        out.append(trace)
        if self.trace_sink is not None:
            self.trace_sink(trace)

    def _run_episode(
        self, episode: int, trace: list[StepTrace], initial: PairConfig, epsilon: float
    ) -> tuple[PairConfig, float]:
        config = initial
        chain_value = 0.0
        saved_epsilon = self.agent.epsilon
        self.agent.epsilon = epsilon
        try:
            for _attempt in range(self.cfg.max_depth):
                state = self.env.state_key(config)
                actions = self.env.legal_actions(config, self.agent.exclusions)
                evaluations: dict[str, tuple[RewardBreakdown, PairConfig]] = {}

                def evaluate(action: Action) -> RewardBreakdown:
                    breakdown, new_config = self.env.evaluate_action(config, action, config.depth)
                    evaluations[action.id] = (breakdown, new_config)
                    return breakdown

                choice = choose_action(self.agent, state, actions, evaluate, self.rng, self.cfg)
                if choice.action is None:
                    break
                breakdown, new_config = evaluations[choice.action.id]
                accepted = breakdown.total > 0
                next_config = new_config if accepted else config
                next_state = self.env.state_key(next_config)
                update(self.agent, state, choice.action, breakdown.total, next_state, self.cfg)
                slot_state = config.slot_states[choice.action.slot]
                if choice.action.op.clazz == "concat":
                    if accepted:
                        self.agent.exclusions.record_positive(slot_state)
                    else:
                        self.agent.exclusions.record_negative(choice.action, slot_state)
                if accepted:
                    config = new_config
                    chain_value = self.env.chain_reward(initial, config)
                evaluated = None
                if self.record_evaluations and choice.evaluated is not None:
                    evaluated = tuple((a.id, br.total) for a, br in choice.evaluated)
                self._emit(
                    StepTrace(
                        episode=episode,
                        step_index=config.depth - 1 if accepted else config.depth,
                        action_id=choice.action.id,
                        reward=breakdown.total,
                        cumulative=chain_value,
                        accepted=accepted,
                        explored=choice.explored,
                        evaluated=evaluated,
                    ),
                    trace,
                )
        finally:
            self.agent.epsilon = saved_epsilon
        return config, chain_value

    def train(self) -> TrainResult:
        """Episodes until a termination clause fires: (i) the best
        configuration's mean ALCS reaches tau_sim, (ii) the best chain
        reward stalls for ``patience`` consecutive episodes, or (iii)
        the iteration cap. The best configuration is the one whose
        whole-chain reward is highest; a final pure-greedy pass makes
        sure exploration noise never hides the greedy solution."""
        env = self.env
        trace: list[StepTrace] = []
        initial = env.initial_config()
        best_config = initial
        best_reward = 0.0
        terminated = "max_iterations"
        episodes = 0
        if initial.matrix.mean_row_max >= self.cfg.tau_sim:
            terminated = "alcs"
        elif self.cfg.max_iterations > 0:
            prev_best = 0.0
            stale = 0
            for episode in range(self.cfg.max_iterations):
                episodes = episode + 1
                config, chain_value = self._run_episode(
                    episode, trace, initial, self.agent.epsilon
                )
                if chain_value > best_reward:
                    best_reward = chain_value
                    best_config = config
                if best_config.matrix.mean_row_max >= self.cfg.tau_sim:
                    terminated = "alcs"
                    break
                if best_reward - prev_best < self.cfg.eps_tol:
                    stale += 1
                    if stale >= self.cfg.patience:
                        terminated = "plateau"
                        break
                else:
                    stale = 0
                prev_best = best_reward
                self.agent.epsilon *= self.cfg.epsilon_decay
            # Readout pass: with exploration off, the greedy chain is the
            # floor for what training reports.
            config, chain_value = self._run_episode(episodes, trace, initial, 0.0)
            if chain_value > best_reward:
                best_reward = chain_value
                best_config = config
            if best_config.matrix.mean_row_max >= self.cfg.tau_sim:
                terminated = "alcs"
        return TrainResult(
            best_chains=(best_config.chain_a, best_config.chain_b),
            best_reward=best_reward,
            best_steps=best_config.steps,
            final_alcs_mean=best_config.matrix.mean_row_max,
            iterations=episodes,
            reward_trace=trace,
            terminated_by=terminated,
            agent=self.agent,
        )


def train(
    pair: tuple[ColumnRef, ColumnRef],
    repo: Repository,
    agent_cfg: AgentConfig | None = None,
    reward_cfg: RewardConfig | None = None,
    alcs_cfg: AlcsConfig = DEFAULT_ALCS,
    warm_start: dict[str, dict[str, float]] | None = None,
    candidate_sims: Sequence[float] | None = None,
    seed: int = 0,
    trace_sink: Callable[[StepTrace], None] | None = None,
    include_numeric_partners: bool = False,
) -> TrainResult:
    """Train an agent for one column pair and return the best chains."""
    env = PairEnv(
        repo,
        pair,
        agent_cfg=agent_cfg,
        reward_cfg=reward_cfg,
        alcs_cfg=alcs_cfg,
        candidate_sims=candidate_sims,
        seed=seed,
        include_numeric_partners=include_numeric_partners,
    )
    trainer = Trainer(env, warm_start=warm_start, seed=seed, trace_sink=trace_sink)
    return trainer.train()

"""Transformation reuse: the persisted chain library, best-pair
selection, cluster-equivalent replacements, and one-shot/sequential
replay of stored chains.

A stored chain is only ever adopted when its measured reward on the new
pair is strictly positive; reuse can therefore skip training entirely
(a hit) but never degrade a task below what training from scratch would
accept.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .agent import PairEnv
from .corpus import ColumnRef
from .operators import ChainStep, OperatorChain, _op_from_text
from .reward import RewardConfig
from .similarity import alcs_matrix

logger = logging.getLogger(__name__)

__all__ = [
    "PairEvaluation",
    "ReuseConfig",
    "ReuseEntry",
    "ReuseLibrary",
    "ReuseOutcome",
    "apply_reuse",
    "find_equivalent_replacements",
    "select_best_pair",
]

LIBRARY_HEADER = "qjoin-library v1"


@dataclass(frozen=True)
class ReuseConfig:
    max_combinations: int = 32


@dataclass(frozen=True)
class ReuseEntry:
    """A validated chain with enough context to replay it elsewhere:
    the combined step sequence, cluster membership, the feature vector
    of its origin pair, its reward trace summary, and the agent tables
    for warm starts. ``sequence`` is a logical insertion counter used as
    the provenance timestamp (wall clocks would break byte-for-byte
    reproducibility of the library file)."""

    steps: tuple[tuple[str, str], ...]  # (slot, step text)
    base_a: str
    base_b: str
    cluster_id: int
    feature_signature: tuple[float, ...]
    best_reward: float
    final_alcs: float
    policy: dict
    q: dict
    pair_a_key: str
    pair_b_key: str
    sequence: int = 0

    @property
    def provenance(self) -> tuple[str, str]:
        return (self.pair_a_key, self.pair_b_key)

    def chain_text(self) -> str:
        a = "|".join(text for slot, text in self.steps if slot == "a")
        b = "|".join(text for slot, text in self.steps if slot == "b")
        return f"{self.base_a}::{a} ~ {self.base_b}::{b}"

    def to_record(self) -> dict:
        return {
            "steps": [list(s) for s in self.steps],
            "base_a": self.base_a,
            "base_b": self.base_b,
            "cluster_id": self.cluster_id,
            "features": list(self.feature_signature),
            "best_reward": self.best_reward,
            "final_alcs": self.final_alcs,
            "policy": self.policy,
            "q": self.q,
            "pair_a": self.pair_a_key,
            "pair_b": self.pair_b_key,
            "sequence": self.sequence,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ReuseEntry":
        return cls(
            steps=tuple((slot, text) for slot, text in record["steps"]),
            base_a=record["base_a"],
            base_b=record["base_b"],
            cluster_id=record["cluster_id"],
            feature_signature=tuple(record["features"]),
            best_reward=record["best_reward"],
            final_alcs=record["final_alcs"],
            policy=record["policy"],
            q=record["q"],
            pair_a_key=record["pair_a"],
            pair_b_key=record["pair_b"],
            sequence=record["sequence"],
        )


@dataclass
class ReuseLibrary:
    entries: list[ReuseEntry] = field(default_factory=list)

    def store(self, entry: ReuseEntry) -> bool:
        """Append a validated entry. A duplicate provenance key replaces
        the old entry only when the new reward is higher."""
        if entry.best_reward <= 0:
            raise ValueError("library entries must carry positive reward")
        for i, existing in enumerate(self.entries):
            if existing.provenance == entry.provenance:
                if entry.best_reward > existing.best_reward:
                    self.entries[i] = entry
                    return True
                return False
        self.entries.append(entry)
        return True

    def next_sequence(self) -> int:
        return max((e.sequence for e in self.entries), default=-1) + 1

    def in_cluster(self, cluster_id: int) -> list[ReuseEntry]:
        return [e for e in self.entries if e.cluster_id == cluster_id]

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            fh.write(LIBRARY_HEADER + "\n")
            for entry in self.entries:
                fh.write(json.dumps(entry.to_record(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ReuseLibrary":
        path = Path(path)
        lib = cls()
        if not path.exists():
            return lib
        with path.open(encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != LIBRARY_HEADER:
                raise ValueError(f"unrecognized library format: {header!r}")
            for line in fh:
                line = line.strip()
                if line:
                    lib.entries.append(ReuseEntry.from_record(json.loads(line)))
        return lib


# --- best-pair selection -----------------------------------------------------


@dataclass(frozen=True)
class PairEvaluation:
    """What the selection wrapper sees of one transformed pair: its id,
    mean-max ALCS, and duplicate score on the working sample."""

    pair_id: str
    alcs_mean: float
    phi: int


def select_best_pair(
    pairs: Sequence[PairEvaluation], cfg: RewardConfig = RewardConfig()
) -> PairEvaluation:
    """Sequential update-and-selection: the challenger replaces the
    incumbent only when the relative composite reward is strictly
    positive. This is a left fold, deliberately order-sensitive; the
    relative duplicate term is a ratio, so the comparison is not a
    global argmax of any fixed score."""
    if not pairs:
        raise ValueError("need at least one pair to select from")
    best = pairs[0]
    for challenger in pairs[1:]:
        r_alcs = challenger.alcs_mean - best.alcs_mean
        if best.phi > 0:
            r_uniq = -(challenger.phi - best.phi) / best.phi
        else:
            r_uniq = 0.0
        r_final = cfg.alcs_weight_default * r_alcs + cfg.uniq_weight_default * r_uniq
        if r_final > 0:
            best = challenger
    return best


# --- replacements ------------------------------------------------------------


def find_equivalent_replacements(
    cluster_map: dict[int, Iterable[tuple[str, str]]],
    learning_pair: tuple[ColumnRef, ColumnRef],
    stored_pair: tuple[ColumnRef, ColumnRef],
    missing_column: ColumnRef,
) -> set[str]:
    """Columns that can stand in for a chain reference the new schema
    lacks.

    The stored pair's other side anchors the lookup: the cluster that
    contained (other, missing) is searched for pairs involving the
    learning pair's matching side, and their opposite columns are the
    replacement candidates. No such cluster means no replacements.
    """
    stored_a, stored_b = stored_pair
    if missing_column.table == stored_a.table:
        anchor = learning_pair[1]
        other = stored_b
    else:
        anchor = learning_pair[0]
        other = stored_a
    wanted = frozenset((other.key, missing_column.key))
    for cid in sorted(cluster_map):
        pairs = list(cluster_map[cid])
        if not any(frozenset(p) == wanted for p in pairs):
            continue
        reps: set[str] = set()
        for key_a, key_b in pairs:
            if anchor.key == key_a:
                reps.add(key_b)
            elif anchor.key == key_b:
                reps.add(key_a)
        return reps
    return set()


# --- reuse execution ---------------------------------------------------------


@dataclass(frozen=True)
class ReuseOutcome:
    mode: str
    hit: bool
    accepted_chain: tuple[OperatorChain, OperatorChain] | None
    reward_delta: float
    fell_back_to_training: bool
    accepted_steps: tuple[tuple[str, ChainStep], ...] = ()
    warm_start_q: dict | None = None
    source_provenance: tuple[str, str] | None = None


def _parse_steps(entry: ReuseEntry, swap: bool) -> list[tuple[str, str, str | None]]:
    """Entry steps as (slot, op text, partner name), optionally with the
    two sides swapped."""
    out = []
    for slot, text in entry.steps:
        if "@" in text:
            op_text, partner = text.split("@", 1)
        else:
            op_text, partner = text, None
        if swap:
            slot = "b" if slot == "a" else "a"
        out.append((slot, op_text, partner))
    return out


def _resolve_candidates(
    env: PairEnv,
    entry: ReuseEntry,
    swap: bool,
    cluster_map: dict[int, Iterable[tuple[str, str]]],
    cfg: ReuseConfig,
) -> list[list[tuple[str, ChainStep]]]:
    """Step sequences runnable on the new pair, with missing partner
    columns substituted by cluster-equivalent replacements or dropped.
    The combination count is capped; a None option drops the step."""
    parsed = _parse_steps(entry, swap)
    missing: list[tuple[int, str, str]] = []  # (step idx, slot, partner)
    for idx, (slot, _, partner) in enumerate(parsed):
        if partner is not None and (slot, partner) not in env.partner_values:
            missing.append((idx, slot, partner))
    stored_pair = (
        ColumnRef(*entry.pair_a_key.rsplit(".", 1)),
        ColumnRef(*entry.pair_b_key.rsplit(".", 1)),
    )
    options: list[list[str | None]] = []
    for idx, slot, partner in missing:
        stored_side = stored_pair[0] if (slot == "a") ^ swap else stored_pair[1]
        missing_ref = ColumnRef(stored_side.table, partner)
        reps = find_equivalent_replacements(cluster_map, env.pair, stored_pair, missing_ref)
        slot_table = env.pair[0].table if slot == "a" else env.pair[1].table
        usable = sorted(
            ref_key.rsplit(".", 1)[1]
            for ref_key in reps
            if ref_key.rsplit(".", 1)[0] == slot_table
            and (slot, ref_key.rsplit(".", 1)[1]) in env.partner_values
        )
        options.append(usable + [None])
    sequences: list[list[tuple[str, ChainStep]]] = []
    combos = itertools.product(*options) if options else [()]
    for combo in itertools.islice(combos, cfg.max_combinations):
        substitution = {missing[i][0]: combo[i] for i in range(len(missing))}
        steps: list[tuple[str, ChainStep]] = []
        ok = True
        for idx, (slot, op_text, partner) in enumerate(parsed):
            if idx in substitution:
                partner = substitution[idx]
                if partner is None:
                    continue  # the no-change option drops this step
            try:
                op, inline_partner = _op_from_text(op_text if partner is None else f"{op_text}@{partner}")
            except (KeyError, ValueError):
                ok = False
                break
            steps.append((slot, ChainStep(op, inline_partner)))
        if ok:
            sequences.append(steps)
    return sequences


def _closest_entries(entries: Sequence[ReuseEntry], features: Sequence[float]) -> list[ReuseEntry]:
    def distance(entry: ReuseEntry) -> float:
        n = min(len(entry.feature_signature), len(features))
        return math.sqrt(
            sum((entry.feature_signature[i] - features[i]) ** 2 for i in range(n))
        )

    return sorted(entries, key=lambda e: (distance(e), e.sequence))


def apply_reuse(
    env: PairEnv,
    features: Sequence[float],
    cluster_id: int,
    cluster_map: dict[int, Iterable[tuple[str, str]]],
    library: ReuseLibrary,
    mode: str,
    cfg: ReuseConfig = ReuseConfig(),
) -> ReuseOutcome:
    """Try stored chains on a new pair before training.

    one_shot replays candidate chains wholesale and adopts the best one
    with strictly positive cumulative reward. sequential replays the
    closest chain step by step, keeping steps only while each one
    improves, and stops at the first non-improving step. A miss reports
    the closest entry's Q snapshot so training can warm-start.
    """
    if mode not in ("one_shot", "sequential"):
        raise ValueError(f"unknown reuse mode {mode!r}")
    candidates = library.in_cluster(cluster_id)
    if not candidates:
        warm = _closest_entries(library.entries, features)
        return ReuseOutcome(
            mode=mode,
            hit=False,
            accepted_chain=None,
            reward_delta=0.0,
            fell_back_to_training=True,
            warm_start_q=warm[0].q if warm else None,
            source_provenance=warm[0].provenance if warm else None,
        )
    ranked = _closest_entries(candidates, features)
    initial = env.initial_config()

    if mode == "one_shot":
        for entry in ranked:
            best: tuple[float, list[tuple[str, ChainStep]]] | None = None
            for swap in (False, True):
                for steps in _resolve_candidates(env, entry, swap, cluster_map, cfg):
                    if not steps:
                        continue
                    try:
                        _, _, final = env.evaluate_steps(initial, steps)
                    except (KeyError, ValueError):
                        continue
                    total = env.chain_reward(initial, final)
                    if total > 0 and (best is None or total > best[0]):
                        best = (total, steps)
            if best is not None:
                total, steps = best
                _, _, final = env.evaluate_steps(initial, steps)
                return ReuseOutcome(
                    mode=mode,
                    hit=True,
                    accepted_chain=(final.chain_a, final.chain_b),
                    reward_delta=total,
                    fell_back_to_training=False,
                    accepted_steps=final.steps,
                    source_provenance=entry.provenance,
                )
        return ReuseOutcome(
            mode=mode,
            hit=False,
            accepted_chain=None,
            reward_delta=0.0,
            fell_back_to_training=True,
            warm_start_q=ranked[0].q,
            source_provenance=ranked[0].provenance,
        )

    # sequential
    entry = ranked[0]
    resolved = _resolve_candidates(env, entry, swap=False, cluster_map=cluster_map, cfg=cfg)
    if not resolved:
        return ReuseOutcome(
            mode=mode,
            hit=False,
            accepted_chain=None,
            reward_delta=0.0,
            fell_back_to_training=True,
            warm_start_q=entry.q,
            source_provenance=entry.provenance,
        )
    steps = resolved[0]
    config = initial
    cumulative = 0.0
    accepted: list[tuple[str, ChainStep]] = []
    for slot, step in steps:
        try:
            total, _, candidate = env.evaluate_steps(config, [(slot, step)])
        except (KeyError, ValueError):
            break
        if total <= 0:
            break
        cumulative += total
        config = candidate
        accepted.append((slot, step))
    if accepted:
        return ReuseOutcome(
            mode=mode,
            hit=True,
            accepted_chain=(config.chain_a, config.chain_b),
            reward_delta=cumulative,
            fell_back_to_training=False,
            accepted_steps=tuple(accepted),
            source_provenance=entry.provenance,
        )
    return ReuseOutcome(
        mode=mode,
        hit=False,
        accepted_chain=None,
        reward_delta=0.0,
        fell_back_to_training=True,
        warm_start_q=entry.q,
        source_provenance=entry.provenance,
    )


def reverse_direction_ok(env: PairEnv, final_values_a, final_values_b) -> bool:
    """Cross-direction validation before a chain enters the library: the
    transformed pair must align at least as well when scored from the
    target side as the raw pair did."""
    before = alcs_matrix(env.values_b0, env.values_a0, env.alcs_cfg).mean_row_max
    after = alcs_matrix(final_values_b, final_values_a, env.alcs_cfg).mean_row_max
    return after >= before

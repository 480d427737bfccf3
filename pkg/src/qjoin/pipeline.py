"""Repository-scale orchestration: discovery, pruning, pre-scoring,
filtering, clustering, task ordering, folders, and join-task selection.

The stages form a funnel. Gram-level LSH surfaces candidate column pairs
cheaply; full-string LSH removes pairs that would equi-join as-is (no
transformation needed); pre-scores and the absolute/top-k filter shrink
the rest; hierarchical clustering groups pairs that likely share a
transformation; a maximum spanning forest picks one join task per table
pair so the repository is covered without redundant work.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from ._kmeans import kmeans_1d
from .corpus import Column, ColumnRef, Repository, column_stats, sample_column, stable_seed
from .operators import Operator, apply_operator, default_library
from .similarity import (
    AlcsConfig,
    DEFAULT_ALCS,
    MinHashSignature,
    alcs_matrix,
    estimated_jaccard,
    jaccard_qgram,
    lsh_index_and_query,
    minhash_signature,
)

logger = logging.getLogger(__name__)

__all__ = [
    "ClusterModel",
    "JoinTask",
    "PairDescriptor",
    "PipelineConfig",
    "build_folders",
    "cluster_downsample",
    "cluster_pairs",
    "discover_candidates",
    "filter_candidates",
    "mst_tasks",
    "order_tasks",
    "prescore_alcs",
    "prescore_jaccard",
    "prune_trivial",
]

DATE_TOKENS = ("date", "time", "year", "month")


@dataclass(frozen=True)
class PipelineConfig:
    lsh_threshold: float = 0.6
    prescore_threshold: float = 0.6
    top_k_pairs: int = 3
    cluster_cut: float = 0.5
    sample_proportion: float = 1.0
    prescore_q: int = 2
    minhash_perms: int = 128
    gram_qs: tuple[int, ...] = (1, 2, 3)
    include_numeric: bool = False
    order_percentile: float = 50.0
    quantile_prune: bool = False
    prune_quantile: float = 0.9


@dataclass(frozen=True)
class PairDescriptor:
    """Joinability profile of one column pair: pre-scores plus the fixed
    eight-dimensional feature vector used for clustering."""

    pair: tuple[ColumnRef, ColumnRef]
    s_j: float
    s_a: float
    s_a_prime: float
    delta_a: float
    features: tuple[float, ...]

    @property
    def best_prescore(self) -> float:
        return max(self.s_j, self.s_a)

    @property
    def key(self) -> tuple[str, str]:
        return (self.pair[0].key, self.pair[1].key)


@dataclass(frozen=True)
class ClusterModel:
    labels: dict[tuple[str, str], int]
    centroids: dict[int, tuple[float, ...]]
    linkage_threshold: float


@dataclass(frozen=True)
class JoinTask:
    t_a: str
    c_a: str
    t_b: str
    c_b: str
    j_hat: float
    folder: str

    @property
    def pair(self) -> tuple[ColumnRef, ColumnRef]:
        return (ColumnRef(self.t_a, self.c_a), ColumnRef(self.t_b, self.c_b))

    @property
    def key(self) -> tuple[str, str]:
        return (f"{self.t_a}.{self.c_a}", f"{self.t_b}.{self.c_b}")


def _is_date_name(name: str) -> bool:
    lowered = name.lower()
    return any(tok in lowered for tok in DATE_TOKENS)


def _eligible_columns(repo: Repository, cfg: PipelineConfig) -> list[Column]:
    cols = []
    for col in repo.iter_columns():
        if col.is_numeric and not cfg.include_numeric:
            continue
        if not any(col.values):
            continue
        cols.append(col)
    return cols


def _ordered_pair(a: ColumnRef, b: ColumnRef) -> tuple[ColumnRef, ColumnRef]:
    return (a, b) if a.key <= b.key else (b, a)


def discover_candidates(
    repo: Repository, theta: float, cfg: PipelineConfig = PipelineConfig(), seed: int = 0
) -> list[tuple[ColumnRef, ColumnRef, float]]:
    """Gram-level LSH discovery over non-numeric columns.

    Cross-table pairs whose estimated q-gram Jaccard clears ``theta``
    are returned, plus forced inclusions for pairs with matching names
    or date-flavored names on both sides (those join tasks are wanted
    even when value overlap is invisible to grams).
    """
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must be in (0, 1]")
    columns = _eligible_columns(repo, cfg)
    signatures: dict[tuple[str, str], MinHashSignature] = {}
    ordered: list[MinHashSignature] = []
    for col in columns:
        sample = sample_column(col, cfg.sample_proportion, stable_seed(seed, col.ref.key))
        if not sample.values:
            continue
        sig = minhash_signature(
            sample.values,
            perms=cfg.minhash_perms,
            gram_q=cfg.gram_qs,
            key=col.ref.key,
            table=col.table_id,
        )
        signatures[(col.table_id, col.name)] = sig
        ordered.append(sig)
    found = lsh_index_and_query(ordered, theta, containment=True)
    key_to_ref = {sig.key: ColumnRef(t, c) for (t, c), sig in signatures.items()}
    results: dict[tuple[str, str], float] = {}
    for key_a, key_b, jhat in found:
        ref_a, ref_b = key_to_ref[key_a], key_to_ref[key_b]
        results[(ref_a.key, ref_b.key)] = jhat
    # Name-driven force inclusion.
    refs = sorted(key_to_ref.values())
    for i, ref_a in enumerate(refs):
        for ref_b in refs[i + 1 :]:
            if ref_a.table == ref_b.table:
                continue
            same_name = ref_a.column.lower() == ref_b.column.lower()
            date_pair = _is_date_name(ref_a.column) and _is_date_name(ref_b.column)
            if not (same_name or date_pair):
                continue
            pair = _ordered_pair(ref_a, ref_b)
            key = (pair[0].key, pair[1].key)
            if key not in results:
                sig_a = signatures[(pair[0].table, pair[0].column)]
                sig_b = signatures[(pair[1].table, pair[1].column)]
                results[key] = estimated_jaccard(sig_a, sig_b)
    out = []
    for (key_a, key_b), jhat in results.items():
        out.append((key_to_ref[key_a], key_to_ref[key_b], jhat))
    out.sort(key=lambda item: (item[0].key, item[1].key))
    return out


def prune_trivial(
    candidates: Sequence[tuple[ColumnRef, ColumnRef, float]],
    repo: Repository,
    theta: float,
    cfg: PipelineConfig = PipelineConfig(),
    seed: int = 0,
) -> list[tuple[ColumnRef, ColumnRef, float]]:
    """Drop pairs whose full-string MinHash Jaccard clears ``theta``:
    those equi-join without any transformation and need no learning."""
    needed: set[ColumnRef] = set()
    for ref_a, ref_b, _ in candidates:
        needed.add(ref_a)
        needed.add(ref_b)
    signatures: dict[ColumnRef, MinHashSignature] = {}
    for ref in sorted(needed):
        col = repo.column(ref)
        sample = sample_column(col, cfg.sample_proportion, stable_seed(seed, ref.key, "full"))
        if not sample.values:
            continue
        signatures[ref] = minhash_signature(
            sample.values, perms=cfg.minhash_perms, gram_q=None, key=ref.key, table=ref.table
        )
    retained = []
    for ref_a, ref_b, jhat in candidates:
        sig_a, sig_b = signatures.get(ref_a), signatures.get(ref_b)
        if sig_a is not None and sig_b is not None:
            if estimated_jaccard(sig_a, sig_b) >= theta:
                continue
        retained.append((ref_a, ref_b, jhat))
    return retained


def prescore_jaccard(
    pair: tuple[ColumnRef, ColumnRef],
    repo: Repository,
    p: float,
    q: int,
    seed: int,
) -> float:
    """Mean over sampled source values of the best q-gram Jaccard against
    the target sample: a fast surface-level joinability proxy."""
    src = sample_column(repo.column(pair[0]), p, stable_seed(seed, pair[0].key, "sj"))
    tgt = sample_column(repo.column(pair[1]), p, stable_seed(seed, pair[1].key, "sj"))
    if not src.values or not tgt.values:
        return 0.0
    total = 0.0
    for s in src.values:
        total += max(jaccard_qgram(s, t, q) for t in tgt.values)
    return total / len(src.values)


def _direct_op_grid() -> list[Operator]:
    grid = []
    for op in default_library():
        if op.kind in ("identity", "lowercase", "uppercase", "trim", "remove_punct", "remove_whitespace"):
            grid.append(op)
    return grid


def prescore_alcs(
    pair: tuple[ColumnRef, ColumnRef],
    repo: Repository,
    p: float,
    direct_ops: Sequence[Operator] | None,
    seed: int,
    alcs_cfg: AlcsConfig = DEFAULT_ALCS,
) -> tuple[float, float, float]:
    """Mean-max ALCS before and after the best single unary operator on
    each side. The identity operator sits in the grid, so the
    improvement is never negative."""
    ops = list(direct_ops) if direct_ops is not None else _direct_op_grid()
    if any(op.clazz != "unary" for op in ops):
        raise ValueError("direct_ops must be unary operators")
    src = sample_column(repo.column(pair[0]), p, stable_seed(seed, pair[0].key, "sa"))
    tgt = sample_column(repo.column(pair[1]), p, stable_seed(seed, pair[1].key, "sa"))
    if not src.values or not tgt.values:
        return 0.0, 0.0, 0.0
    base = alcs_matrix(src.values, tgt.values, alcs_cfg).mean_row_max
    best = base
    src_variants = {op.id: tuple(apply_operator(op, src.values)) for op in ops}
    tgt_variants = {op.id: tuple(apply_operator(op, tgt.values)) for op in ops}
    for op_i in ops:
        for op_j in ops:
            s_vals = src_variants[op_i.id]
            t_vals = tgt_variants[op_j.id]
            score = alcs_matrix(s_vals, t_vals, alcs_cfg).mean_row_max
            if score > best:
                best = score
    return base, best, best - base


def build_descriptor(
    pair: tuple[ColumnRef, ColumnRef],
    repo: Repository,
    cfg: PipelineConfig,
    seed: int,
    alcs_cfg: AlcsConfig = DEFAULT_ALCS,
    skip_alcs: bool = False,
) -> PairDescriptor:
    s_j = prescore_jaccard(pair, repo, cfg.sample_proportion, cfg.prescore_q, seed)
    if skip_alcs:
        s_a = s_a_prime = delta = 0.0
    else:
        s_a, s_a_prime, delta = prescore_alcs(pair, repo, cfg.sample_proportion, None, seed, alcs_cfg)
    stats_a = column_stats(repo.column(pair[0]))
    stats_b = column_stats(repo.column(pair[1]))
    hi = max(stats_a.avg_len, stats_b.avg_len)
    length_ratio = (min(stats_a.avg_len, stats_b.avg_len) / hi) if hi else 0.0
    features = (
        s_j,
        s_a,
        delta,
        length_ratio,
        stats_a.token_entropy,
        stats_b.token_entropy,
        stats_a.distinct_ratio,
        stats_b.distinct_ratio,
    )
    return PairDescriptor(pair=pair, s_j=s_j, s_a=s_a, s_a_prime=s_a_prime, delta_a=delta, features=features)


def prescore_pairs(
    candidates: Sequence[tuple[ColumnRef, ColumnRef, float]],
    repo: Repository,
    cfg: PipelineConfig,
    seed: int,
    alcs_cfg: AlcsConfig = DEFAULT_ALCS,
) -> list[PairDescriptor]:
    """Descriptor per candidate. With quantile pruning on, the expensive
    ALCS pre-score only runs for pairs whose gram Jaccard reaches the
    configured quantile; the rest keep s_a = 0."""
    tau = None
    if cfg.quantile_prune and candidates:
        jhats = sorted(j for _, _, j in candidates)
        pos = min(len(jhats) - 1, max(0, math.ceil(cfg.prune_quantile * len(jhats)) - 1))
        tau = jhats[pos]
    descriptors = []
    for ref_a, ref_b, jhat in candidates:
        skip = tau is not None and jhat < tau
        descriptors.append(build_descriptor((ref_a, ref_b), repo, cfg, seed, alcs_cfg, skip_alcs=skip))
    return descriptors


def filter_candidates(
    descriptors: Sequence[PairDescriptor], delta: float, k: int
) -> list[PairDescriptor]:
    """Absolute threshold on the best pre-score, then top-k per table
    pair. Raising delta or lowering k can only shrink the result."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must be in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    passed = [d for d in descriptors if d.best_prescore >= delta]
    grouped: dict[tuple[str, str], list[PairDescriptor]] = {}
    for d in passed:
        grouped.setdefault((d.pair[0].table, d.pair[1].table), []).append(d)
    retained: list[PairDescriptor] = []
    for key in sorted(grouped):
        members = sorted(grouped[key], key=lambda d: (-d.best_prescore, d.key))
        retained.extend(members[:k])
    retained.sort(key=lambda d: d.key)
    return retained


def cluster_pairs(descriptors: Sequence[PairDescriptor], t: float) -> ClusterModel:
    """Average-linkage agglomerative clustering on z-scored features,
    cut at distance ``t``. Labels are zero-based."""
    if not descriptors:
        raise ValueError("need at least one descriptor to cluster")
    if len(descriptors) == 1:
        d = descriptors[0]
        return ClusterModel(labels={d.key: 0}, centroids={0: d.features}, linkage_threshold=t)
    X = np.array([d.features for d in descriptors], dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    Z = (X - mean) / std
    links = linkage(pdist(Z), method="average")
    raw = fcluster(links, t, criterion="distance")
    # Relabel to dense zero-based ids ordered by first appearance.
    remap: dict[int, int] = {}
    labels: dict[tuple[str, str], int] = {}
    for d, lab in zip(descriptors, raw):
        if lab not in remap:
            remap[lab] = len(remap)
        labels[d.key] = remap[lab]
    centroids: dict[int, tuple[float, ...]] = {}
    for cid in sorted(set(labels.values())):
        members = [d.features for d in descriptors if labels[d.key] == cid]
        centroids[cid] = tuple(float(v) for v in np.mean(members, axis=0))
    return ClusterModel(labels=labels, centroids=centroids, linkage_threshold=t)


def order_tasks(
    cluster_members: Sequence[PairDescriptor],
    descriptors: Sequence[PairDescriptor],
    transformed_columns: set[str] | None = None,
    percentile: float = 50.0,
) -> list[PairDescriptor]:
    """Processing order inside one cluster: pairs touching previously
    transformed columns come first, then pairs above the per-cluster
    ALCS percentile, then table-level similarity mass, best ALCS, and
    the pair key as the stable tiebreak."""
    transformed = transformed_columns or set()
    if not cluster_members:
        return []
    max_sim: dict[str, float] = {}
    for d in cluster_members:
        for ref in d.pair:
            max_sim[ref.key] = max(max_sim.get(ref.key, 0.0), d.best_prescore)
    table_columns: dict[str, list[str]] = {}
    for d in cluster_members:
        for ref in d.pair:
            cols = table_columns.setdefault(ref.table, [])
            if ref.key not in cols:
                cols.append(ref.key)
    s_a_values = sorted(d.s_a for d in cluster_members)
    pos = min(len(s_a_values) - 1, max(0, math.ceil(percentile / 100.0 * len(s_a_values)) - 1))
    bar = s_a_values[pos]

    def total_sim(d: PairDescriptor) -> float:
        left = d.pair[0].table
        return sum(max_sim[key] for key in table_columns.get(left, []))

    def sort_key(d: PairDescriptor):
        touched = any(ref.key in transformed for ref in d.pair)
        above = d.s_a > bar
        return (not touched, not above, -total_sim(d), -d.s_a, d.key)

    return sorted(cluster_members, key=sort_key)


def cluster_downsample(members: Sequence, seed: int = 0) -> list:
    """Cap a cluster at 20 members for reward evaluation; small clusters
    are used whole."""
    size = min(max(len(members), 10), 20)
    size = min(size, len(members))
    if size >= len(members):
        return list(members)
    import random as _random

    rng = _random.Random(seed)
    idx = sorted(rng.sample(range(len(members)), size))
    return [members[i] for i in idx]


def classify_folder(c_a: str, c_b: str) -> str:
    if c_a.lower() == c_b.lower():
        return "same_names"
    if _is_date_name(c_a) and _is_date_name(c_b):
        return "date_names"
    return "else_names"


def mst_tasks(
    candidates: Sequence[tuple[ColumnRef, ColumnRef, float]]
) -> list[JoinTask]:
    """One join task per table pair via a maximum spanning forest.

    Per table pair only the highest-Jaccard column pair competes, then
    Kruskal with union-find over tables keeps the forest edges in
    descending similarity order (key order breaks ties)."""
    best_per_tables: dict[tuple[str, str], tuple[ColumnRef, ColumnRef, float]] = {}
    for ref_a, ref_b, jhat in candidates:
        if ref_a.table > ref_b.table or (ref_a.table == ref_b.table and ref_a.key > ref_b.key):
            ref_a, ref_b = ref_b, ref_a
        key = (ref_a.table, ref_b.table)
        cur = best_per_tables.get(key)
        if cur is None or jhat > cur[2] or (jhat == cur[2] and (ref_a.key, ref_b.key) < (cur[0].key, cur[1].key)):
            best_per_tables[key] = (ref_a, ref_b, jhat)
    edges = sorted(
        best_per_tables.values(), key=lambda e: (-e[2], e[0].key, e[1].key)
    )
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tasks: list[JoinTask] = []
    for ref_a, ref_b, jhat in edges:
        root_a, root_b = find(ref_a.table), find(ref_b.table)
        if root_a == root_b:
            continue
        parent[root_a] = root_b
        tasks.append(
            JoinTask(
                t_a=ref_a.table,
                c_a=ref_a.column,
                t_b=ref_b.table,
                c_b=ref_b.column,
                j_hat=jhat,
                folder=classify_folder(ref_a.column, ref_b.column),
            )
        )
    tasks.sort(key=lambda t: t.key)
    return tasks


def build_folders(tasks: Sequence[JoinTask]) -> dict[str, list[JoinTask]]:
    """Group tasks into reuse folders and order them.

    First matching rule wins: identical column names, then date-flavored
    names, then everything else. Within a folder, tables seen in many
    tasks come first; the else folder is additionally grouped by k-means
    on the gram-similarity score so syntactically similar tasks sit
    together.
    """
    folders: dict[str, list[JoinTask]] = {"same_names": [], "date_names": [], "else_names": []}
    for task in tasks:
        folders[classify_folder(task.c_a, task.c_b)].append(task)
    freq: dict[str, int] = {}
    for task in tasks:
        freq[task.t_a] = freq.get(task.t_a, 0) + 1
        freq[task.t_b] = freq.get(task.t_b, 0) + 1

    def table_weight(task: JoinTask) -> int:
        return freq.get(task.t_a, 0) + freq.get(task.t_b, 0)

    for name in ("same_names", "date_names"):
        folders[name].sort(key=lambda t: (-table_weight(t), t.key))
    others = folders["else_names"]
    if others:
        labels, centroids = kmeans_1d([t.j_hat for t in others], k=min(3, len(others)))
        group_order = sorted(range(len(centroids)), key=lambda c: -centroids[c])
        rank = {c: i for i, c in enumerate(group_order)}
        keyed = sorted(
            zip(others, labels), key=lambda tl: (rank[tl[1]], -table_weight(tl[0]), tl[0].key)
        )
        folders["else_names"] = [t for t, _ in keyed]
    return folders

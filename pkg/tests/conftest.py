"""Shared fixtures and independent oracles for the test suite.

The oracles here are deliberately naive re-implementations (quadratic
DP, O(n^3) clustering, exhaustive forest enumeration) used to check the
production paths; they must stay independent of the package internals.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np
import pytest

from qjoin.corpus import ColumnRef, load_repository
from qjoin.operators import ExclusionDicts

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def dp_lcs(s1: str, s2: str) -> int:
    """Quadratic dynamic-programming longest-common-substring oracle."""
    if not s1 or not s2:
        return 0
    a = np.frombuffer(s1.encode("utf-32-le"), dtype=np.uint32)
    b = np.frombuffer(s2.encode("utf-32-le"), dtype=np.uint32)
    best = 0
    prev = np.zeros(len(b) + 1, dtype=np.int32)
    cur = np.zeros(len(b) + 1, dtype=np.int32)
    for ch in a:
        np.multiply(prev[:-1] + 1, (b == ch).astype(np.int32), out=cur[1:])
        m = cur.max()
        if m > best:
            best = int(m)
        prev, cur = cur, prev
    return best


def dp_lcs_pure(s1: str, s2: str) -> int:
    """Plain-Python DP variant, for small cross-checks of dp_lcs itself."""
    best = 0
    prev = [0] * (len(s2) + 1)
    for c1 in s1:
        row = [0]
        for j, c2 in enumerate(s2, 1):
            length = prev[j - 1] + 1 if c1 == c2 else 0
            row.append(length)
            if length > best:
                best = length
        prev = row
    return best


def naive_average_linkage(points: list[tuple[float, ...]], cut: float) -> list[int]:
    """O(n^3) agglomerative clustering with average linkage on Euclidean
    distance, merging until the closest pair of clusters exceeds the cut."""

    def dist(p, q) -> float:
        return sum((a - b) ** 2 for a, b in zip(p, q)) ** 0.5

    clusters: list[list[int]] = [[i] for i in range(len(points))]
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                d = sum(
                    dist(points[a], points[b]) for a in clusters[i] for b in clusters[j]
                ) / (len(clusters[i]) * len(clusters[j]))
                if best is None or d < best[0]:
                    best = (d, i, j)
        if best is None or best[0] > cut:
            break
        _, i, j = best
        clusters[i] = clusters[i] + clusters[j]
        del clusters[j]
    labels = [0] * len(points)
    for cid, members in enumerate(clusters):
        for m in members:
            labels[m] = cid
    return labels


def brute_force_max_forest(n_nodes: int, edges: list[tuple[int, int, float]]) -> float:
    """Maximum total weight over all spanning forests, by enumerating
    every acyclic edge subset. Exponential; keep edge counts small."""
    best = 0.0
    for r in range(len(edges) + 1):
        for subset in itertools.combinations(range(len(edges)), r):
            parent = list(range(n_nodes))

            def find(x: int) -> int:
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            acyclic = True
            weight = 0.0
            for idx in subset:
                u, v, w = edges[idx]
                ru, rv = find(u), find(v)
                if ru == rv:
                    acyclic = False
                    break
                parent[ru] = rv
                weight += w
            if acyclic and weight > best:
                best = weight
    return best


def enumerate_best_chain(env, max_depth: int = 3):
    """Exhaustive search over every chain of positive-reward steps up to
    ``max_depth``, scored by the whole-chain reward. Returns (reward,
    step ids). The engine can only ever traverse strictly positive
    steps, so this is the reachable-space optimum."""
    initial = env.initial_config()
    best = [0.0, ()]

    def rec(cfg, depth, steps):
        if depth == max_depth:
            return
        for action in env.legal_actions(cfg, ExclusionDicts()):
            breakdown, new_cfg = env.evaluate_action(cfg, action, cfg.depth)
            if breakdown.total <= 0:
                continue
            value = env.chain_reward(initial, new_cfg)
            if value > best[0] + 1e-12:
                best[0] = value
                best[1] = steps + (action.id,)
            rec(new_cfg, depth + 1, steps + (action.id,))

    rec(initial, 0, ())
    return best[0], best[1]


@pytest.fixture(scope="session")
def nyc_repo():
    repo = load_repository(FIXTURES / "nyc_names")
    repo.tables.pop("ground_truth", None)
    return repo


@pytest.fixture(scope="session")
def nyc_pair():
    return (
        ColumnRef("campaign_expenditures", "CANDLAST"),
        ColumnRef("funds_payments", "CANDNAME"),
    )


@pytest.fixture(scope="session")
def ids_repo():
    repo = load_repository(FIXTURES / "id_collapse")
    repo.tables.pop("ground_truth", None)
    return repo


@pytest.fixture(scope="session")
def ids_pair():
    return (ColumnRef("registrations", "id"), ColumnRef("renewals", "id_code"))

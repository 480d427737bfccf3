"""Tiny deterministic 1-D k-means used for similarity stratification."""

from __future__ import annotations

from typing import Sequence


def kmeans_1d(
    values: Sequence[float], k: int = 3, iters: int = 20
) -> tuple[list[int], list[float]]:
    """Lloyd's algorithm on scalars with min/mid/max initialization.

    Returns (labels, centroids) with centroids sorted ascending. Empty
    clusters keep their centroid. Fully deterministic: no RNG involved.
    """
    vals = list(values)
    if not vals:
        return [], []
    lo, hi = min(vals), max(vals)
    if k == 3:
        centroids = [lo, (lo + hi) / 2.0, hi]
    else:
        centroids = [lo + (hi - lo) * i / max(k - 1, 1) for i in range(k)]
    # Collapse duplicate centroids (all-equal input) into one stratum.
    centroids = sorted(set(centroids))
    labels = [0] * len(vals)
    for _ in range(iters):
        changed = False
        for i, v in enumerate(vals):
            best = min(range(len(centroids)), key=lambda c: (abs(v - centroids[c]), c))
            if best != labels[i]:
                labels[i] = best
                changed = True
        for c in range(len(centroids)):
            members = [vals[i] for i in range(len(vals)) if labels[i] == c]
            if members:
                centroids[c] = sum(members) / len(members)
        if not changed:
            break
    return labels, centroids

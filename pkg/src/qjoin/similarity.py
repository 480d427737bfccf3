"""String similarity kernels and MinHash/LSH indexing.

The core scoring primitive is the adjusted longest continuous substring
(ALCS): the length of the longest contiguous common substring divided by
the mean of the two string lengths, zeroed below a significance length.
ALCS rewards uninterrupted character runs, which is what join keys look
like after a good normalization, and it ignores peripheral noise that
trips up fixed-window q-gram measures.

All kernels are pure functions; everything here is safe to call from
concurrent workers.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "AlcsConfig",
    "AlcsMatrix",
    "MinHashSignature",
    "alcs",
    "alcs_matrix",
    "estimated_jaccard",
    "jaccard_qgram",
    "lcs_substring",
    "lsh_index_and_query",
    "minhash_signature",
    "qgrams",
]


@dataclass(frozen=True)
class AlcsConfig:
    """Significance cutoff for ALCS: substrings shorter than
    ``min_significant_len`` characters score zero."""

    min_significant_len: int = 3

    def __post_init__(self) -> None:
        if self.min_significant_len < 1:
            raise ValueError("min_significant_len must be >= 1")


DEFAULT_ALCS = AlcsConfig()


def _has_common_substring(shorter: str, longer: str, k: int) -> bool:
    grams = {shorter[i : i + k] for i in range(len(shorter) - k + 1)}
    return any(longer[j : j + k] in grams for j in range(len(longer) - k + 1))


@lru_cache(maxsize=262144)
def lcs_substring(s1: str, s2: str) -> int:
    """Length of the longest contiguous common substring of two strings.

    Binary search on the answer length: a common substring of length k
    exists iff the k-gram sets of the two strings intersect, and that
    predicate is monotone in k. Lengths count Unicode scalar values.
    """
    if not s1 or not s2:
        return 0
    if len(s1) > len(s2):
        s1, s2 = s2, s1
    lo, hi = 0, len(s1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _has_common_substring(s1, s2, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def alcs(s1: str, s2: str, cfg: AlcsConfig = DEFAULT_ALCS) -> float:
    """ALCS(s1, s2) = LCS(s1, s2) / ((|s1| + |s2|) / 2), or 0 when the
    longest common substring is below the significance length.

    Two empty strings score 0 (the 0/0 case is defined away).
    """
    total = len(s1) + len(s2)
    if total == 0:
        return 0.0
    length = lcs_substring(s1, s2)
    if length < cfg.min_significant_len:
        return 0.0
    return 2.0 * length / total


def qgrams(s: str, q: int) -> set[str]:
    """Deduplicated set of all contiguous length-q substrings of ``s``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return {s[i : i + q] for i in range(len(s) - q + 1)}


def jaccard_qgram(s1: str, s2: str, q: int) -> float:
    """Jaccard similarity of the q-gram sets of two strings."""
    g1 = qgrams(s1, q)
    g2 = qgrams(s2, q)
    if not g1 and not g2:
        return 0.0
    union = len(g1 | g2)
    if union == 0:
        return 0.0
    return len(g1 & g2) / union


def _values_of(sample) -> list[str]:
    values = getattr(sample, "values", sample)
    return list(values)


@dataclass(frozen=True)
class AlcsMatrix:
    """Full ALCS score matrix between a source and a target value list.

    ``row_max`` / ``row_argmax`` hold the per-source-row best target and
    its index; argmax ties break toward the longer raw common substring,
    then the lower target index.
    """

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    scores: tuple[tuple[float, ...], ...]
    lcs_lengths: tuple[tuple[int, ...], ...]
    row_max: tuple[float, ...]
    row_argmax: tuple[int, ...]

    @property
    def mean_row_max(self) -> float:
        return sum(self.row_max) / len(self.row_max)

    def best_match_values(self) -> list[str]:
        return [self.cols[j] for j in self.row_argmax]


def alcs_matrix(src, tgt, cfg: AlcsConfig = DEFAULT_ALCS) -> AlcsMatrix:
    """Score every source value against every target value.

    ``src`` and ``tgt`` may be value samples or plain string sequences.
    Raises ValueError on an empty side: a pair without values on both
    sides is unusable for alignment.
    """
    s_vals = _values_of(src)
    t_vals = _values_of(tgt)
    if not s_vals or not t_vals:
        raise ValueError("unusable pair: empty value sample")
    n = cfg.min_significant_len
    scores: list[tuple[float, ...]] = []
    lengths: list[tuple[int, ...]] = []
    row_max: list[float] = []
    row_argmax: list[int] = []
    for s in s_vals:
        best_score = -1.0
        best_len = -1
        best_j = 0
        row_s: list[float] = []
        row_l: list[int] = []
        for j, t in enumerate(t_vals):
            length = lcs_substring(s, t)
            total = len(s) + len(t)
            score = 2.0 * length / total if (total and length >= n) else 0.0
            row_s.append(score)
            row_l.append(length)
            if score > best_score or (score == best_score and length > best_len):
                best_score = score
                best_len = length
                best_j = j
        scores.append(tuple(row_s))
        lengths.append(tuple(row_l))
        row_max.append(best_score)
        row_argmax.append(best_j)
    return AlcsMatrix(
        rows=tuple(s_vals),
        cols=tuple(t_vals),
        scores=tuple(scores),
        lcs_lengths=tuple(lengths),
        row_max=tuple(row_max),
        row_argmax=tuple(row_argmax),
    )


# --- MinHash / LSH ---------------------------------------------------------

_MERSENNE = np.uint64((1 << 61) - 1)
_PARAM_SEED = 0x51AE5EED


@dataclass(frozen=True)
class MinHashSignature:
    """Fixed-length MinHash sketch of a string set.

    ``key`` is the owning column ("table.column"); ``table`` is kept
    separately so same-table pairs can be filtered without parsing the
    key. Same input set always produces the same signature.
    """

    key: str
    table: str
    perms: int
    hashes: tuple[int, ...]
    set_size: int


@lru_cache(maxsize=8)
def _hash_params(perms: int) -> tuple[np.ndarray, np.ndarray]:
    rng = random.Random(_PARAM_SEED)
    prime = int(_MERSENNE)
    a = np.array([rng.randrange(1, prime) | 1 for _ in range(perms)], dtype=np.uint64)
    b = np.array([rng.randrange(0, prime) for _ in range(perms)], dtype=np.uint64)
    return a, b


def _element_hash(element: str) -> int:
    digest = hashlib.blake2b(element.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def minhash_signature(
    values: Iterable[str],
    perms: int = 128,
    gram_q=(1, 2, 3),
    *,
    key: str = "",
    table: str = "",
) -> MinHashSignature:
    """MinHash signature of a value set.

    ``gram_q`` selects the hashed element universe: None hashes whole
    values (full-string mode); an int or sequence of ints hashes the
    union of q-grams over all values (gram mode). The default unions
    q in {1, 2, 3}.
    """
    if perms < 16:
        raise ValueError("perms must be >= 16")
    if gram_q is None:
        elements = set(values)
    else:
        qs = (gram_q,) if isinstance(gram_q, int) else tuple(gram_q)
        elements = set()
        for v in values:
            for q in qs:
                elements.update(qgrams(v, q))
    if not elements:
        raise ValueError("cannot sign an empty value set")
    hashed = np.fromiter(
        (_element_hash(e) for e in sorted(elements)), dtype=np.uint64, count=len(elements)
    )
    a, b = _hash_params(perms)
    # uint64 multiply wraps mod 2**64; with the Mersenne modulus on top this
    # stays a fixed deterministic hash family, which is all MinHash needs.
    sig = np.full(perms, int(_MERSENNE), dtype=np.uint64)
    chunk = 65536
    for start in range(0, len(hashed), chunk):
        block = hashed[start : start + chunk]
        phv = (a[:, None] * block[None, :] + b[:, None]) % _MERSENNE
        sig = np.minimum(sig, phv.min(axis=1))
    return MinHashSignature(
        key=key,
        table=table,
        perms=perms,
        hashes=tuple(int(h) for h in sig),
        set_size=len(elements),
    )


def estimated_jaccard(sig1: MinHashSignature, sig2: MinHashSignature) -> float:
    if sig1.perms != sig2.perms:
        raise ValueError("signatures have different permutation counts")
    equal = sum(1 for x, y in zip(sig1.hashes, sig2.hashes) if x == y)
    return equal / sig1.perms


def _pick_bands(perms: int, threshold: float) -> tuple[int, int]:
    """Band/row split whose S-curve midpoint (1/b)^(1/r) is closest to the
    target threshold; ties prefer more bands (higher recall)."""
    best: tuple[float, int, int] | None = None
    for rows in range(1, perms + 1):
        if perms % rows:
            continue
        bands = perms // rows
        midpoint = (1.0 / bands) ** (1.0 / rows)
        cand = (abs(midpoint - threshold), -bands)
        if best is None or cand < (best[0], -best[1]):
            best = (cand[0], bands, rows)
    assert best is not None
    return best[1], best[2]


def lsh_index_and_query(
    signatures: Sequence[MinHashSignature],
    threshold: float,
    containment: bool = False,
) -> list[tuple[str, str, float]]:
    """Banded-LSH candidate generation plus signature verification.

    Returns cross-table pairs with estimated Jaccard >= threshold, one
    entry per unordered pair with keys sorted, the whole list sorted.
    Containment mode lowers the banding threshold so that small-into-large
    overlaps survive candidate generation; the final Jaccard filter is
    unchanged.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    if not signatures:
        return []
    perms = signatures[0].perms
    banding_threshold = max(0.05, threshold / 2.0) if containment else threshold
    bands, rows = _pick_bands(perms, banding_threshold)
    buckets: dict[tuple[int, tuple[int, ...]], list[int]] = {}
    for idx, sig in enumerate(signatures):
        if sig.perms != perms:
            raise ValueError("mixed permutation counts in one index")
        for band in range(bands):
            slot = (band, sig.hashes[band * rows : (band + 1) * rows])
            buckets.setdefault(slot, []).append(idx)
    candidates: set[tuple[int, int]] = set()
    for members in buckets.values():
        if len(members) < 2:
            continue
        for i, first in enumerate(members):
            for second in members[i + 1 :]:
                candidates.add((min(first, second), max(first, second)))
    results: list[tuple[str, str, float]] = []
    for i, j in candidates:
        one, two = signatures[i], signatures[j]
        if one.table == two.table:
            continue
        jhat = estimated_jaccard(one, two)
        if jhat < threshold:
            continue
        pair = tuple(sorted((one.key, two.key)))
        results.append((pair[0], pair[1], jhat))
    results.sort()
    return results

"""Repository loading, column statistics, and deterministic sampling.

A repository is a directory of delimited text files with header rows.
Every cell is kept as a string; nulls and missing cells are normalized
to the empty string at load time and excluded from similarity sampling,
because empty strings poison ALCS denominators. Columns whose non-empty
values are almost all numeric are flagged so discovery can skip them.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

__all__ = [
    "Column",
    "ColumnRef",
    "ColumnStats",
    "LoadOptions",
    "Repository",
    "Table",
    "ValueSample",
    "column_stats",
    "load_repository",
    "sample_column",
    "stable_seed",
]

SAMPLE_FLOOR = 20


def stable_seed(base: int, *parts: str) -> int:
    """Derive a per-key seed from a base seed and string parts. Uses a
    keyed digest instead of hash() so results survive interpreter
    restarts."""
    h = hashlib.blake2b(digest_size=4)
    h.update(str(base).encode("utf-8"))
    for part in parts:
        h.update(b"\x00")
        h.update(part.encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


@dataclass(frozen=True, order=True)
class ColumnRef:
    table: str
    column: str

    @property
    def key(self) -> str:
        return f"{self.table}.{self.column}"


@dataclass
class Column:
    table_id: str
    name: str
    values: list[str]
    is_numeric: bool = False

    @property
    def ref(self) -> ColumnRef:
        return ColumnRef(self.table_id, self.name)


@dataclass
class Table:
    id: str
    columns: list[Column] = field(default_factory=list)

    @property
    def row_count(self) -> int:
        return len(self.columns[0].values) if self.columns else 0

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(f"no column {name!r} in table {self.id!r}")


@dataclass
class Repository:
    root: Path
    tables: dict[str, Table] = field(default_factory=dict)

    def column(self, ref: ColumnRef) -> Column:
        table = self.tables.get(ref.table)
        if table is None:
            raise KeyError(f"no table {ref.table!r} in repository")
        return table.column(ref.column)

    def iter_columns(self):
        for table_id in sorted(self.tables):
            for col in self.tables[table_id].columns:
                yield col


@dataclass(frozen=True)
class LoadOptions:
    delimiter: str = ","
    max_rows: int | None = None
    numeric_threshold: float = 0.95


@dataclass(frozen=True)
class ColumnStats:
    avg_len: float
    distinct_ratio: float
    token_entropy: float
    null_ratio: float


@dataclass(frozen=True)
class ValueSample:
    source: ColumnRef
    indices: tuple[int, ...]
    values: tuple[str, ...]
    proportion: float
    seed: int


def _looks_numeric(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True


def _unique_names(names: list[str], table_id: str) -> list[str]:
    seen: Counter[str] = Counter()
    out = []
    for name in names:
        seen[name] += 1
        if seen[name] == 1:
            out.append(name)
        else:
            renamed = f"{name}.{seen[name] - 1}"
            logger.warning("table %s: duplicate column %r renamed to %r", table_id, name, renamed)
            out.append(renamed)
    return out


def _load_table(path: Path, options: LoadOptions) -> Table | None:
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=options.delimiter)
            rows = list(reader)
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        logger.warning("skipping unreadable file %s: %s", path, exc)
        return None
    if not rows or not rows[0]:
        logger.warning("skipping %s: no header row", path)
        return None
    table_id = path.stem
    header = _unique_names([h.strip() for h in rows[0]], table_id)
    width = len(header)
    data = rows[1:]
    if options.max_rows is not None:
        data = data[: options.max_rows]
    columns: list[list[str]] = [[] for _ in header]
    for row_no, row in enumerate(data, start=2):
        if len(row) != width:
            logger.warning(
                "%s line %d: expected %d cells, got %d; padding/truncating",
                path.name, row_no, width, len(row),
            )
        for i in range(width):
            cell = row[i] if i < len(row) else ""
            columns[i].append(cell if cell is not None else "")
    table = Table(id=table_id)
    for name, values in zip(header, columns):
        non_empty = [v for v in values if v]
        numeric = bool(non_empty) and (
            sum(_looks_numeric(v) for v in non_empty) / len(non_empty)
            >= options.numeric_threshold
        )
        table.columns.append(Column(table_id, name, values, is_numeric=numeric))
    return table


def load_repository(root_path, options: LoadOptions = LoadOptions()) -> Repository:
    """Load every ``*.csv`` under ``root_path`` into a Repository.

    Unreadable files are skipped with a warning; an empty result is a
    hard error. Loading is deterministic: files are visited in sorted
    order and all values are kept as strings.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise FileNotFoundError(f"repository root {root} does not exist")
    repo = Repository(root=root)
    for path in sorted(root.glob("*.csv")):
        table = _load_table(path, options)
        if table is None:
            continue
        if not table.columns:
            logger.warning("skipping %s: no columns", path)
            continue
        repo.tables[table.id] = table
    if not repo.tables:
        raise ValueError(f"repository at {root} contains no loadable tables")
    return repo


def sample_column(
    col: Column, proportion: float, seed: int, floor: int = SAMPLE_FLOOR
) -> ValueSample:
    """Deterministic sample of a column's non-empty values, without
    replacement.

    The sample size is ceil(proportion * rows), raised to min(floor, rows)
    so tiny tables still yield a usable signal, and capped by the number
    of non-empty values. Same (proportion, seed) always returns the same
    sample; values are listed in row order.
    """
    if not 0.0 < proportion <= 1.0:
        raise ValueError("proportion must be in (0, 1]")
    rows = len(col.values)
    pool = [(i, v) for i, v in enumerate(col.values) if v]
    if not pool:
        return ValueSample(col.ref, (), (), proportion, seed)
    target = max(math.ceil(proportion * rows), min(floor, rows))
    k = min(target, len(pool))
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(pool)), k))
    indices = tuple(pool[i][0] for i in chosen)
    values = tuple(pool[i][1] for i in chosen)
    return ValueSample(col.ref, indices, values, proportion, seed)


def column_stats(col: Column) -> ColumnStats:
    """Summary statistics over the non-empty values of a column.

    Entropy is the Shannon entropy (bits) of the whitespace-token
    frequency distribution. An all-empty column yields all-zero stats.
    """
    non_empty = [v for v in col.values if v]
    total = len(col.values)
    if not non_empty:
        return ColumnStats(0.0, 0.0, 0.0, 1.0 if total else 0.0)
    avg_len = sum(len(v) for v in non_empty) / len(non_empty)
    distinct_ratio = len(set(non_empty)) / len(non_empty)
    tokens = Counter()
    for v in non_empty:
        tokens.update(v.split())
    entropy = 0.0
    token_total = sum(tokens.values())
    if token_total:
        for count in tokens.values():
            p = count / token_total
            entropy -= p * math.log2(p)
    null_ratio = (total - len(non_empty)) / total if total else 0.0
    return ColumnStats(avg_len, distinct_ratio, max(entropy, 0.0), null_ratio)

"""Transformation operators, operator chains, and action enumeration.

Operators come in two classes: unary ops rewrite a single column value
by value, concat ops merge a partner column into the working column.
Every operator is total over values: a value an operator cannot act on
(missing delimiter, empty partner cell) passes through unchanged, so
partial applicability never fails a whole column.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Sequence

from .corpus import ColumnRef, Table

__all__ = [
    "Action",
    "ChainStep",
    "ExclusionDicts",
    "Operator",
    "OperatorChain",
    "SlotState",
    "apply_operator",
    "chain_from_text",
    "compose_chain",
    "default_library",
    "enumerate_actions",
]

DEFAULT_MAX_CHAIN_LEN = 6

# Printable aliases keep operator ids free of quoting and whitespace.
_DELIM_NAMES = {" ": "space", ",": "comma", "-": "dash", "_": "underscore", "@": "at", "/": "slash"}
_SEP_NAMES = {"": "none", " ": "space", ", ": "comma_space"}
_NAME_DELIMS = {v: k for k, v in _DELIM_NAMES.items()}
_NAME_SEPS = {v: k for k, v in _SEP_NAMES.items()}

_PUNCT = set(string.punctuation)


@dataclass(frozen=True)
class Operator:
    id: str
    clazz: str  # "unary" | "concat"
    kind: str
    delimiter: str | None = None
    token: str | None = None  # "first" | "last"
    direction: str | None = None  # "prefix" | "suffix" | "front" | "back"
    k: int | None = None
    sep: str | None = None


def _unary(kind: str, **params) -> Operator:
    bits = []
    if params.get("delimiter") is not None:
        bits.append(_DELIM_NAMES[params["delimiter"]])
    if params.get("token") is not None:
        bits.append(params["token"])
    if params.get("direction") is not None:
        bits.append(params["direction"])
    if params.get("k") is not None:
        bits.append(str(params["k"]))
    op_id = kind if not bits else f"{kind}({','.join(bits)})"
    return Operator(id=op_id, clazz="unary", kind=kind, **params)


def _concat(direction: str, sep: str) -> Operator:
    op_id = f"concat_{direction}({_SEP_NAMES[sep]})"
    return Operator(id=op_id, clazz="concat", kind="concat", direction=direction, sep=sep)


def default_library() -> list[Operator]:
    """The expanded action library: 30 concrete operators.

    Identity is a real member so the pre-scoring grid and the policy
    table share one namespace; it never wins a reward but keeps the
    "no change" option explicit.
    """
    ops: list[Operator] = [
        _unary("identity"),
        _unary("lowercase"),
        _unary("uppercase"),
        _unary("trim"),
        _unary("remove_punct"),
        _unary("remove_whitespace"),
    ]
    for delim in _DELIM_NAMES:
        for token in ("first", "last"):
            ops.append(_unary("split_keep", delimiter=delim, token=token))
    for direction in ("prefix", "suffix"):
        for k in (1, 2, 3):
            ops.append(_unary("substring", direction=direction, k=k))
    for sep in _SEP_NAMES:
        ops.append(_concat("front", sep))
    for sep in _SEP_NAMES:
        ops.append(_concat("back", sep))
    return ops


def _apply_unary(op: Operator, value: str) -> str:
    kind = op.kind
    if kind == "identity":
        return value
    if kind == "lowercase":
        return value.lower()
    if kind == "uppercase":
        return value.upper()
    if kind == "trim":
        return value.strip()
    if kind == "remove_punct":
        return "".join(ch for ch in value if ch not in _PUNCT)
    if kind == "remove_whitespace":
        return "".join(value.split())
    if kind == "split_keep":
        if op.delimiter not in value:
            return value
        parts = value.split(op.delimiter)
        return parts[0] if op.token == "first" else parts[-1]
    if kind == "substring":
        k = op.k or 0
        return value[:k] if op.direction == "prefix" else value[-k:] if k else value
    raise ValueError(f"unknown operator kind {kind!r}")


def _apply_concat(op: Operator, value: str, partner_value: str) -> str:
    # Empty partner cells pass through: optional components (a middle
    # initial, say) must not leave dangling separators.
    if not partner_value:
        return value
    if not value:
        return partner_value
    if op.direction == "front":
        return partner_value + (op.sep or "") + value
    return value + (op.sep or "") + partner_value


def apply_operator(
    op: Operator, primary: Sequence[str], partner: Sequence[str] | None = None
) -> list[str]:
    """Apply an operator elementwise. Concat operators require a partner
    column of equal length."""
    if op.clazz == "concat":
        if partner is None:
            raise ValueError(f"{op.id} requires a partner column")
        if len(partner) != len(primary):
            raise ValueError(
                f"{op.id}: partner length {len(partner)} != primary length {len(primary)}"
            )
        return [_apply_concat(op, v, p) for v, p in zip(primary, partner)]
    return [_apply_unary(op, v) for v in primary]


# --- chains ----------------------------------------------------------------


@dataclass(frozen=True)
class ChainStep:
    op: Operator
    partner: str | None = None  # column name in the chain's own table

    @property
    def text(self) -> str:
        return self.op.id if self.partner is None else f"{self.op.id}@{self.partner}"


@dataclass(frozen=True)
class OperatorChain:
    """An ordered operator sequence anchored at one base column."""

    base: ColumnRef
    steps: tuple[ChainStep, ...] = ()
    max_len: int = DEFAULT_MAX_CHAIN_LEN

    def __post_init__(self) -> None:
        if len(self.steps) > self.max_len:
            raise ValueError(f"chain exceeds max length {self.max_len}")

    @property
    def base_columns(self) -> list[ColumnRef]:
        refs = [self.base]
        for step in self.steps:
            if step.partner is not None:
                refs.append(ColumnRef(self.base.table, step.partner))
        return refs

    def extended(self, step: ChainStep) -> "OperatorChain":
        return OperatorChain(self.base, self.steps + (step,), self.max_len)

    def to_text(self) -> str:
        return f"{self.base.column}::" + "|".join(s.text for s in self.steps)


def _op_from_text(text: str) -> tuple[Operator, str | None]:
    partner = None
    if "@" in text:
        text, partner = text.split("@", 1)
    if "(" in text:
        kind, raw = text[:-1].split("(", 1)
        bits = raw.split(",")
    else:
        kind, bits = text, []
    if kind == "split_keep":
        op = _unary("split_keep", delimiter=_NAME_DELIMS[bits[0]], token=bits[1])
    elif kind == "substring":
        op = _unary("substring", direction=bits[0], k=int(bits[1]))
    elif kind == "concat":
        raise ValueError(f"malformed operator text {text!r}")
    elif kind.startswith("concat_"):
        op = _concat(kind.split("_", 1)[1], _NAME_SEPS[bits[0]])
    else:
        op = _unary(kind)
    return op, partner


def chain_from_text(text: str, table: str, max_len: int = DEFAULT_MAX_CHAIN_LEN) -> OperatorChain:
    """Parse the canonical ``base::op|op@partner|...`` form back into a chain."""
    base_name, _, ops_text = text.partition("::")
    steps = []
    if ops_text:
        for part in ops_text.split("|"):
            op, partner = _op_from_text(part)
            steps.append(ChainStep(op, partner))
    return OperatorChain(ColumnRef(table, base_name), tuple(steps), max_len)


def compose_chain(chain: OperatorChain, table: Table) -> list[str]:
    """Apply a chain left-to-right against a table. The empty chain is the
    identity on the base column. Raises KeyError naming the missing
    column when the table does not satisfy the chain's bindings."""
    try:
        values = list(table.column(chain.base.column).values)
    except KeyError:
        raise KeyError(f"missing column {chain.base.key}") from None
    for step in chain.steps:
        partner_values = None
        if step.partner is not None:
            try:
                partner_values = table.column(step.partner).values
            except KeyError:
                raise KeyError(f"missing column {table.id}.{step.partner}") from None
        values = apply_operator(step.op, values, partner_values)
    return values


# --- action enumeration ----------------------------------------------------


@dataclass(frozen=True)
class SlotState:
    """Where a working column currently stands: which table it lives in,
    which base columns sit at its front and back, and which same-table
    columns are available as concat partners."""

    slot: str
    table_id: str
    front_column: str
    back_column: str
    partner_columns: tuple[str, ...]


@dataclass(frozen=True)
class Action:
    slot: str
    op: Operator
    partner: str | None = None

    @property
    def id(self) -> str:
        base = f"{self.slot}:{self.op.id}"
        return base if self.partner is None else f"{base}@{self.partner}"


@dataclass
class ExclusionDicts:
    """Mirror bookkeeping for concat actions.

    Appending partner Y behind a column whose back is X builds the same
    junction as prepending X in front of a column whose front is Y, so a
    negative verdict on one side rules out its mirror. A positive concat
    invalidates every recorded verdict that touches the changed slot.
    """

    front_excluded: dict[tuple[str, str], bool] = field(default_factory=dict)
    back_excluded: dict[tuple[str, str], bool] = field(default_factory=dict)

    def record_negative(self, action: Action, state: SlotState) -> None:
        if action.op.clazz != "concat" or action.partner is None:
            return
        if action.op.direction == "back":
            self.back_excluded[(state.back_column, action.partner)] = True
            self.front_excluded[(action.partner, state.back_column)] = True
        else:
            self.front_excluded[(state.front_column, action.partner)] = True
            self.back_excluded[(action.partner, state.front_column)] = True

    def record_positive(self, state: SlotState) -> None:
        touched = {state.front_column, state.back_column, *state.partner_columns}
        for table in (self.front_excluded, self.back_excluded):
            stale = [k for k in table if k[0] in touched or k[1] in touched]
            for k in stale:
                del table[k]

    def is_excluded(self, action: Action, state: SlotState) -> bool:
        if action.op.clazz != "concat" or action.partner is None:
            return False
        if action.op.direction == "back":
            return self.back_excluded.get((state.back_column, action.partner), False)
        return self.front_excluded.get((state.front_column, action.partner), False)


def enumerate_actions(
    slot_states: dict[str, SlotState],
    dicts: ExclusionDicts,
    library: Sequence[Operator],
) -> list[Action]:
    """All (operator, slot) actions, with concat expanded over partner
    columns and mirror-excluded entries removed."""
    actions: list[Action] = []
    for slot in sorted(slot_states):
        state = slot_states[slot]
        for op in library:
            if op.clazz == "unary":
                actions.append(Action(slot, op))
                continue
            for partner in state.partner_columns:
                action = Action(slot, op, partner)
                if not dicts.is_excluded(action, state):
                    actions.append(action)
    return actions

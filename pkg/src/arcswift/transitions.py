"""Parser states and transition semantics for arc-standard, arc-eager, arc-hybrid and arc-swift.

States are immutable; `apply` returns a new state. The stack is stored
bottom to top with the root (index 0) at the bottom, and the buffer is
represented by the index of its leftmost token since tokens leave the
buffer strictly left to right in all four systems.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .treebank import ArcSet


class System(str, enum.Enum):
    ARC_STANDARD = "arc_standard"
    ARC_EAGER = "arc_eager"
    ARC_HYBRID = "arc_hybrid"
    ARC_SWIFT = "arc_swift"

    @classmethod
    def parse(cls, name: str) -> "System":
        return _SYSTEM_ALIASES.get(name) or cls(name)

    @property
    def short(self) -> str:
        return {"arc_standard": "asd", "arc_eager": "ae", "arc_hybrid": "ah", "arc_swift": "asw"}[self.value]


_SYSTEM_ALIASES = {
    "asd": System.ARC_STANDARD,
    "ae": System.ARC_EAGER,
    "ah": System.ARC_HYBRID,
    "asw": System.ARC_SWIFT,
}


class Kind(enum.IntEnum):
    # declaration order is the tie-break order used by decoders
    SHIFT = 0
    REDUCE = 1
    LARC = 2
    LARC_K = 3
    RARC = 4
    RARC_K = 5


_ARC_KINDS = frozenset({Kind.LARC, Kind.RARC, Kind.LARC_K, Kind.RARC_K})
_KINDS_BY_SYSTEM = {
    System.ARC_STANDARD: frozenset({Kind.SHIFT, Kind.LARC, Kind.RARC}),
    System.ARC_HYBRID: frozenset({Kind.SHIFT, Kind.LARC, Kind.RARC}),
    System.ARC_EAGER: frozenset({Kind.SHIFT, Kind.REDUCE, Kind.LARC, Kind.RARC}),
    System.ARC_SWIFT: frozenset({Kind.SHIFT, Kind.LARC_K, Kind.RARC_K}),
}


@dataclass(frozen=True)
class Transition:
    kind: Kind
    k: int | None = None
    label: str | None = None

    def __post_init__(self):
        has_k = self.kind in (Kind.LARC_K, Kind.RARC_K)
        if has_k != (self.k is not None) or (has_k and self.k < 1):
            raise ValueError(f"{self.kind.name} requires k >= 1 iff it is LARC_K/RARC_K, got k={self.k}")
        if self.label is not None and self.kind not in _ARC_KINDS:
            raise ValueError(f"{self.kind.name} does not take a label")

    @property
    def is_arc(self) -> bool:
        return self.kind in _ARC_KINDS

    @property
    def is_left(self) -> bool:
        return self.kind in (Kind.LARC, Kind.LARC_K)

    def skeleton(self) -> "Transition":
        return Transition(self.kind, self.k) if self.label is not None else self

    def labeled(self, label: str) -> "Transition":
        return Transition(self.kind, self.k, label)

    def __str__(self) -> str:
        name = {Kind.SHIFT: "SHIFT", Kind.REDUCE: "REDUCE", Kind.LARC: "LARC", Kind.RARC: "RARC",
                Kind.LARC_K: f"LARC[{self.k}]", Kind.RARC_K: f"RARC[{self.k}]"}[self.kind]
        return f"{name}({self.label})" if self.label is not None else name

    @classmethod
    def parse(cls, text: str) -> "Transition":
        m = _TRANSITION_RE.fullmatch(text.strip())
        if not m:
            raise ValueError(f"cannot parse transition {text!r}")
        name, k, label = m.group(1), m.group(2), m.group(3)
        if name in ("SHIFT", "REDUCE"):
            if k or label is not None:
                raise ValueError(f"cannot parse transition {text!r}")
            return cls(Kind[name])
        if k:
            return cls(Kind.LARC_K if name == "LARC" else Kind.RARC_K, int(k), label)
        return cls(Kind[name], None, label)


_TRANSITION_RE = re.compile(r"(SHIFT|REDUCE|LARC|RARC)(?:\[(\d+)\])?(?:\((.*)\))?")

SHIFT = Transition(Kind.SHIFT)
REDUCE = Transition(Kind.REDUCE)


def left(label: str | None = None) -> Transition:
    return Transition(Kind.LARC, None, label)


def right(label: str | None = None) -> Transition:
    return Transition(Kind.RARC, None, label)


def left_k(k: int, label: str | None = None) -> Transition:
    return Transition(Kind.LARC_K, k, label)


def right_k(k: int, label: str | None = None) -> Transition:
    return Transition(Kind.RARC_K, k, label)


class InfeasibleTransition(ValueError):
    """Raised when a transition's preconditions do not hold in a state."""


@dataclass(frozen=True)
class ParserState:
    stack: tuple[int, ...]
    buffer_front: int
    n: int
    heads: tuple[int, ...]
    labels: tuple[str | None, ...]

    @property
    def buffer_empty(self) -> bool:
        return self.buffer_front > self.n

    @property
    def buffer(self) -> range:
        return range(self.buffer_front, self.n + 1)

    def attached(self, i: int) -> bool:
        return self.heads[i] >= 0

    @property
    def arcs(self) -> set[tuple[int, int, str | None]]:
        return {(h, d, self.labels[d]) for d, h in enumerate(self.heads) if h >= 0}

    def validate(self) -> None:
        """Assert the structural invariants of a reachable state."""
        assert self.stack and self.stack[0] == 0, "root must sit at the stack bottom"
        assert 0 not in self.stack[1:], "root appears twice"
        assert len(set(self.stack)) == len(self.stack), "duplicate stack item"
        assert all(0 < i < self.buffer_front for i in self.stack[1:]), "stack/buffer overlap"
        assert list(self.stack) == sorted(self.stack), "stack out of sentence order"
        assert self.heads[0] == -1, "root received a head"
        assert len(self.heads) == len(self.labels) == self.n + 1
        for d, h in enumerate(self.heads):
            assert (h >= 0) == (self.labels[d] is not None), f"token {d}: head/label mismatch"
            assert h < 0 or d not in self.buffer, f"buffer token {d} already attached"


def initial_state(n: int) -> ParserState:
    if n < 1:
        raise ValueError("sentence must contain at least one token")
    return ParserState((0,), 1, n, (-1,) * (n + 1), (None,) * (n + 1))


def _swift_depths(state: ParserState) -> tuple[int, int | None]:
    """Return (max feasible RArc[k] depth, feasible LArc[k] depth or None)."""
    stack = state.stack
    for k in range(1, len(stack) + 1):
        item = stack[-k]
        if not state.attached(item):
            return k, (k if item != 0 else None)
    return len(stack), None


def feasible(state: ParserState, system: System) -> list[Transition]:
    """Unlabeled transitions whose preconditions hold, in tie-break order."""
    out = []
    stack = state.stack
    has_buffer = not state.buffer_empty
    top = stack[-1]
    if has_buffer:
        out.append(SHIFT)
    if system is System.ARC_STANDARD:
        if len(stack) >= 3:
            out.append(left())
        if len(stack) >= 2:
            out.append(right())
    elif system is System.ARC_HYBRID:
        if has_buffer and top != 0:
            out.append(left())
        if len(stack) >= 2:
            out.append(right())
    elif system is System.ARC_EAGER:
        if state.attached(top):
            out.append(REDUCE)
        if has_buffer and top != 0 and not state.attached(top):
            out.append(left())
        if has_buffer:
            out.append(right())
    elif system is System.ARC_SWIFT:
        if has_buffer:
            kmax, kleft = _swift_depths(state)
            if kleft is not None:
                out.append(left_k(kleft))
            out.extend(right_k(k) for k in range(1, kmax + 1))
    else:
        raise ValueError(f"unknown system {system!r}")
    return out


def _precondition_failure(state: ParserState, t: Transition, system: System) -> str | None:
    if t.kind not in _KINDS_BY_SYSTEM[system]:
        return f"{t.kind.name} is not a {system.value} transition"
    if t.is_arc and t.label is None:
        return "arc transitions must carry a label"
    stack = state.stack
    has_buffer = not state.buffer_empty
    top = stack[-1]
    kind = t.kind
    if kind is Kind.SHIFT:
        return None if has_buffer else "Shift requires a nonempty buffer"
    if kind is Kind.REDUCE:
        return None if state.attached(top) else "Reduce requires the stack top to be attached"
    if system is System.ARC_STANDARD:
        if kind is Kind.LARC and len(stack) < 3:
            return "LArc requires two stack items above the root"
        if kind is Kind.RARC and len(stack) < 2:
            return "RArc requires two stack items"
        return None
    if system is System.ARC_HYBRID:
        if kind is Kind.LARC and (not has_buffer or top == 0):
            return "LArc requires a non-root stack top and a nonempty buffer"
        if kind is Kind.RARC and len(stack) < 2:
            return "RArc requires two stack items"
        return None
    if system is System.ARC_EAGER:
        if not has_buffer:
            return f"{kind.name} requires a nonempty buffer"
        if kind is Kind.LARC and (top == 0 or state.attached(top)):
            return "LArc requires an unattached non-root stack top"
        return None
    # arc-swift
    if not has_buffer:
        return f"{kind.name}[{t.k}] requires a nonempty buffer"
    if t.k > len(stack):
        return f"k={t.k} exceeds stack size {len(stack)}"
    if any(not state.attached(i) for i in stack[len(stack) - t.k + 1:]):
        return f"the top {t.k - 1} stack items must already be attached"
    if kind is Kind.LARC_K:
        target = stack[-t.k]
        if target == 0 or state.attached(target):
            return f"LArc[{t.k}] requires stack item {t.k} to be unattached and not the root"
    return None


def _attach(state: ParserState, head: int, dep: int, label: str) -> tuple[tuple[int, ...], tuple]:
    assert state.heads[dep] < 0, f"token {dep} would receive a second head"
    heads = list(state.heads)
    labels = list(state.labels)
    heads[dep] = head
    labels[dep] = label
    return tuple(heads), tuple(labels)


def apply(state: ParserState, t: Transition, system: System) -> ParserState:
    reason = _precondition_failure(state, t, system)
    if reason:
        raise InfeasibleTransition(f"{t} infeasible under {system.value}: {reason}")
    stack = state.stack
    b = state.buffer_front
    n = state.n
    kind = t.kind
    if kind is Kind.SHIFT:
        return ParserState(stack + (b,), b + 1, n, state.heads, state.labels)
    if kind is Kind.REDUCE:
        return ParserState(stack[:-1], b, n, state.heads, state.labels)
    if system is System.ARC_STANDARD:
        i, j = stack[-2], stack[-1]
        if kind is Kind.LARC:
            heads, labels = _attach(state, j, i, t.label)
            return ParserState(stack[:-2] + (j,), b, n, heads, labels)
        heads, labels = _attach(state, i, j, t.label)
        return ParserState(stack[:-1], b, n, heads, labels)
    if system is System.ARC_HYBRID:
        if kind is Kind.LARC:
            heads, labels = _attach(state, b, stack[-1], t.label)
            return ParserState(stack[:-1], b, n, heads, labels)
        heads, labels = _attach(state, stack[-2], stack[-1], t.label)
        return ParserState(stack[:-1], b, n, heads, labels)
    if system is System.ARC_EAGER:
        if kind is Kind.LARC:
            heads, labels = _attach(state, b, stack[-1], t.label)
            return ParserState(stack[:-1], b, n, heads, labels)
        heads, labels = _attach(state, stack[-1], b, t.label)
        return ParserState(stack + (b,), b + 1, n, heads, labels)
    # arc-swift
    k = t.k
    target = stack[-k]
    if kind is Kind.LARC_K:
        heads, labels = _attach(state, b, target, t.label)
        return ParserState(stack[:-k], b, n, heads, labels)
    heads, labels = _attach(state, target, b, t.label)
    return ParserState(stack[: len(stack) - k + 1] + (b,), b + 1, n, heads, labels)


def is_terminal(state: ParserState, system: System) -> bool:
    if system in (System.ARC_STANDARD, System.ARC_HYBRID):
        return state.buffer_empty and state.stack == (0,)
    return state.buffer_empty


class NotTerminal(ValueError):
    pass


def finalize(state: ParserState, system: System, fallback_label: str = "root") -> ArcSet:
    """Return one (head, label) per token, attaching leftovers to the root."""
    if not is_terminal(state, system):
        raise NotTerminal("finalize called on a non-terminal state")
    arcs: ArcSet = {}
    for d in range(1, state.n + 1):
        h = state.heads[d]
        arcs[d] = (h, state.labels[d]) if h >= 0 else (0, fallback_label)
    return arcs


def unattached_count(state: ParserState) -> int:
    return sum(1 for d in range(1, state.n + 1) if state.heads[d] < 0)


def replay(n: int, transitions: Iterable[Transition], system: System) -> ParserState:
    """Run a transition sequence from the initial state, returning the final state."""
    state = initial_state(n)
    for t in transitions:
        state = apply(state, t, system)
    return state


def count_kinds(seq: Sequence[Transition]) -> dict[str, int]:
    counts = {k.name: 0 for k in Kind}
    for t in seq:
        counts[t.kind.name] += 1
    return counts


def format_sequence(seq: Sequence[Transition]) -> str:
    return "\n".join(str(t) for t in seq)


def parse_sequences(text: str) -> list[list[Transition]]:
    blocks: list[list[Transition]] = []
    current: list[Transition] = []
    for line in text.split("\n"):
        if line.strip():
            current.append(Transition.parse(line))
        elif current:
            blocks.append(current)
            current = []
    if current:
        blocks.append(current)
    return blocks

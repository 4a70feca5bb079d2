"""Static oracles for the five training variants and the arc-swift to arc-eager expansion."""

from __future__ import annotations

import enum
from typing import Sequence

from .transitions import (
    REDUCE,
    SHIFT,
    Kind,
    ParserState,
    System,
    Transition,
    apply,
    initial_state,
    is_terminal,
    left,
    left_k,
    right,
    right_k,
)
from .treebank import Sentence, is_projective


class Variant(str, enum.Enum):
    ASD = "asd"
    AES = "aeS"
    AER = "aeR"
    AH = "ah"
    ASW = "asw"

    @property
    def system(self) -> System:
        return {
            "asd": System.ARC_STANDARD,
            "aeS": System.ARC_EAGER,
            "aeR": System.ARC_EAGER,
            "ah": System.ARC_HYBRID,
            "asw": System.ARC_SWIFT,
        }[self.value]

    @classmethod
    def for_system(cls, system: System, eager_preference: str = "static-s") -> "Variant":
        if system is System.ARC_EAGER:
            return cls.AES if eager_preference in ("static-s", "aeS", "s") else cls.AER
        return {System.ARC_STANDARD: cls.ASD, System.ARC_HYBRID: cls.AH, System.ARC_SWIFT: cls.ASW}[system]


class OracleError(RuntimeError):
    def __init__(self, message: str, state: ParserState | None = None):
        super().__init__(message if state is None else f"{message} (state: {state})")
        self.state = state


class _Gold:
    """Gold-tree lookups used while following an oracle."""

    def __init__(self, sentence: Sentence):
        self.heads = sentence.heads
        self.labels = sentence.labels
        self.n_deps = [0] * (sentence.n + 1)
        for d in range(1, sentence.n + 1):
            self.n_deps[self.heads[d]] += 1

    def complete(self, state: ParserState, i: int) -> bool:
        """All gold dependents of `i` already attached."""
        got = 0
        for d, h in enumerate(state.heads):
            if h == i:
                got += 1
        return got == self.n_deps[i]


def _eager_next(state: ParserState, gold: _Gold, prefer_shift: bool) -> Transition:
    stack = state.stack
    top = stack[-1]
    b = state.buffer_front
    heads = gold.heads
    if state.buffer_empty:
        return REDUCE
    if top != 0 and heads[top] == b and not state.attached(top):
        return left(gold.labels[top])
    if heads[b] == top:
        return right(gold.labels[b])
    if state.attached(top) and gold.complete(state, top):
        if not prefer_shift:
            return REDUCE
        below = stack[:-1]
        # reduce only when a pending arc for b must reach past the top
        if heads[b] in below or any(heads[i] == b for i in below if i != 0 and not state.attached(i)):
            return REDUCE
    return SHIFT


def oracle_next(state: ParserState, gold: Sentence | _Gold, variant: Variant) -> Transition:
    """Canonical next transition on the way to the gold tree."""
    g = gold if isinstance(gold, _Gold) else _Gold(gold)
    system = variant.system
    if is_terminal(state, system):
        raise OracleError("oracle queried on a terminal state", state)
    stack = state.stack
    heads = g.heads
    has_buffer = not state.buffer_empty
    b = state.buffer_front
    top = stack[-1]
    second = stack[-2] if len(stack) >= 2 else None

    if variant is Variant.ASD:
        if second is not None and second != 0 and heads[second] == top:
            return left(g.labels[second])
        if second is not None and heads[top] == second and g.complete(state, top):
            return right(g.labels[top])
        if has_buffer:
            return SHIFT
    elif variant is Variant.AH:
        if has_buffer and top != 0 and heads[top] == b:
            return left(g.labels[top])
        if second is not None and heads[top] == second and g.complete(state, top):
            return right(g.labels[top])
        if has_buffer:
            return SHIFT
    elif variant in (Variant.AES, Variant.AER):
        return _eager_next(state, g, prefer_shift=variant is Variant.AES)
    elif variant is Variant.ASW:
        if has_buffer:
            # reducible region: attached items from the top down to the first unattached one
            depth = 1
            while depth < len(stack) and state.attached(stack[-depth]):
                depth += 1
            target = stack[-depth]
            if target != 0 and not state.attached(target) and heads[target] == b:
                return left_k(depth, g.labels[target])
            for k in range(1, depth + 1):
                if heads[b] == stack[-k]:
                    return right_k(k, g.labels[b])
            return SHIFT
    raise OracleError(f"{variant.value} oracle is stuck", state)


def oracle_sequence(sentence: Sentence, variant: Variant | str) -> list[Transition]:
    """Labeled transition sequence deriving the gold tree of a projective sentence."""
    variant = Variant(variant)
    if not is_projective(sentence):
        raise OracleError(f"sentence {sentence.sent_id or ''} is not projective")
    system = variant.system
    gold = _Gold(sentence)
    state = initial_state(sentence.n)
    seq = []
    limit = 4 * sentence.n + 4
    while not is_terminal(state, system):
        t = oracle_next(state, gold, variant)
        try:
            state = apply(state, t, system)
        except ValueError as err:
            raise OracleError(f"{variant.value} oracle produced an infeasible {t}: {err}", state) from err
        seq.append(t)
        if len(seq) > limit:
            raise OracleError(f"{variant.value} oracle did not terminate", state)
    if list(state.heads[1:]) != sentence.heads[1:]:
        raise OracleError(f"{variant.value} oracle ended without reproducing the gold tree", state)
    return seq


def expand_swift_to_eager(seq: Sequence[Transition]) -> list[Transition]:
    """Rewrite LArc[k]/RArc[k] as k-1 Reduces followed by the arc-eager arc."""
    out = []
    for t in seq:
        if t.kind is Kind.SHIFT:
            out.append(SHIFT)
        elif t.kind is Kind.LARC_K:
            out.extend([REDUCE] * (t.k - 1))
            out.append(left(t.label))
        elif t.kind is Kind.RARC_K:
            out.extend([REDUCE] * (t.k - 1))
            out.append(right(t.label))
        else:
            raise ValueError(f"{t} is not an arc-swift transition")
    return out

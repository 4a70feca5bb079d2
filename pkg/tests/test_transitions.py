import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcswift.transitions import (
    REDUCE,
    SHIFT,
    InfeasibleTransition,
    Kind,
    NotTerminal,
    ParserState,
    System,
    Transition,
    apply,
    feasible,
    finalize,
    format_sequence,
    initial_state,
    is_terminal,
    left,
    left_k,
    parse_sequences,
    right,
    right_k,
)

ALL_KINDS = [SHIFT, REDUCE, left("x"), right("x")] + [left_k(k, "x") for k in range(1, 6)] + \
    [right_k(k, "x") for k in range(1, 6)]


def state(stack, front, n, attached=()):
    heads = [-1] * (n + 1)
    labels = [None] * (n + 1)
    for d, h in attached:
        heads[d] = h
        labels[d] = "x"
    return ParserState(tuple(stack), front, n, tuple(heads), tuple(labels))


def test_initial_state():
    s = initial_state(3)
    assert s.stack == (0,) and s.buffer_front == 1 and not s.arcs
    assert list(initial_state(1).buffer) == [1]
    for n in range(1, 51):
        initial_state(n).validate()
    with pytest.raises(ValueError):
        initial_state(0)


def test_transition_invariants():
    with pytest.raises(ValueError):
        Transition(Kind.LARC_K)
    with pytest.raises(ValueError):
        Transition(Kind.LARC, 2)
    with pytest.raises(ValueError):
        Transition(Kind.SHIFT, label="x")


def test_serialization_round_trip():
    seq = [SHIFT, REDUCE, left("nsubj"), right("obj"), left_k(3, "det"), right_k(2, "root")]
    text = format_sequence(seq)
    assert text.split("\n") == ["SHIFT", "REDUCE", "LARC(nsubj)", "RARC(obj)", "LARC[3](det)", "RARC[2](root)"]
    assert parse_sequences(text + "\n\n" + text) == [seq, seq]


# "I ate fish with chopsticks": ate=2, fish=3, with=4
def test_swift_feasible_unattached():
    s = state([0, 2, 3], 4, 5)
    assert feasible(s, System.ARC_SWIFT) == [SHIFT, left_k(1), right_k(1)]


def test_swift_feasible_attached():
    s = state([0, 2, 3], 4, 5, attached=[(2, 0), (3, 2)])
    assert feasible(s, System.ARC_SWIFT) == [SHIFT, right_k(1), right_k(2), right_k(3)]


def test_eager_buffer_empty_only_reduce():
    s = state([0, 5], 6, 5, attached=[(5, 0)])
    assert feasible(s, System.ARC_EAGER) == [REDUCE]
    assert is_terminal(s, System.ARC_EAGER)
    assert not is_terminal(s, System.ARC_STANDARD)


def test_arc_standard_left_arc():
    s = apply(state([0, 1, 2], 3, 3), left("x"), System.ARC_STANDARD)
    assert s.stack == (0, 2) and s.arcs == {(2, 1, "x")}


def test_swift_rarc2_hand_simulation():
    s = state([0, 2, 3], 4, 5, attached=[(3, 2)])
    out = apply(s, right_k(2, "prep"), System.ARC_SWIFT)
    assert out.stack == (0, 2, 4)
    assert out.buffer_front == 5
    assert out.heads[4] == 2 and out.attached(4)
    # input untouched
    assert s.stack == (0, 2, 3) and s.heads[4] == -1


def test_swift_larc_k():
    s = state([0, 1, 2, 3], 4, 4, attached=[(3, 2)])
    out = apply(s, left_k(2, "x"), System.ARC_SWIFT)
    assert out.stack == (0, 1) and out.heads[2] == 4


@pytest.mark.parametrize("stack, attached", [
    ([0, 1, 2], []),
    ([0, 1, 2, 3], [(3, 2)]),
    ([0, 1], [(1, 0)]),
])
def test_k1_matches_eager(stack, attached):
    s = state(stack, stack[-1] + 1, stack[-1] + 2, attached)
    a = apply(s, right_k(1, "x"), System.ARC_SWIFT)
    b = apply(s, right("x"), System.ARC_EAGER)
    assert a == b
    if s.stack[-1] != 0 and not s.attached(s.stack[-1]):
        assert apply(s, left_k(1, "x"), System.ARC_SWIFT) == apply(s, left("x"), System.ARC_EAGER)


def test_infeasible_names_precondition():
    s = state([0, 2, 3], 4, 5)
    with pytest.raises(InfeasibleTransition, match="must already be attached"):
        apply(s, right_k(2, "x"), System.ARC_SWIFT)
    with pytest.raises(InfeasibleTransition, match="not a arc_swift transition|is not a"):
        apply(s, REDUCE, System.ARC_SWIFT)
    with pytest.raises(InfeasibleTransition, match="label"):
        apply(s, right_k(1), System.ARC_SWIFT)


def test_finalize():
    s = state([0, 1, 2], 3, 2, attached=[(1, 0)])
    arcs = finalize(s, System.ARC_EAGER, "dep")
    assert arcs == {1: (0, "x"), 2: (0, "dep")}
    with pytest.raises(NotTerminal):
        finalize(initial_state(2), System.ARC_EAGER)


BOUNDS = {System.ARC_STANDARD: 3, System.ARC_HYBRID: 3, System.ARC_EAGER: 4}


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(list(System)), st.integers(1, 12), st.lists(st.integers(0, 10**6), max_size=40))
def test_random_walks_respect_invariants(system, n, choices):
    """Feasibility soundness/completeness and per-state bounds along random walks."""
    s = initial_state(n)
    for c in choices:
        if is_terminal(s, system):
            break
        cands = feasible(s, system)
        assert cands, "non-terminal state with no feasible transition"
        bound = BOUNDS.get(system, len(s.stack) + 2)
        assert len(cands) <= bound
        skeletons = {c.skeleton() for c in cands}
        for t in ALL_KINDS:
            feasible_here = t.skeleton() in skeletons
            if feasible_here:
                apply(s, t, system).validate()
            else:
                with pytest.raises(InfeasibleTransition):
                    apply(s, t, system)
        t = cands[c % len(cands)]
        s = apply(s, t.labeled("x") if t.is_arc else t, system)
        s.validate()

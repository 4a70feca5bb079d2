"""Property suites over random and exhaustively enumerated trees."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .oracles import OracleError, Variant, expand_swift_to_eager, oracle_sequence
from .stats import check_length_identities, sentence_row
from .transitions import System, apply, feasible, initial_state, is_terminal, replay
from .treebank import LabelVocab, Sentence, is_projective, random_projective_tree, tree_error

FUZZ_LABELS = ("root", "nsubj", "obj", "amod", "det", "case", "advmod", "punct")


def random_tree_corpus(count: int, max_n: int, seed: int, labels: Iterable[str] = FUZZ_LABELS) -> list[Sentence]:
    """`count` random projective trees with lengths uniform in [1, max_n]."""
    vocab = LabelVocab(list(labels))
    rng = np.random.default_rng(seed)
    lengths = rng.integers(1, max_n + 1, size=count)
    seeds = rng.integers(0, 2**31 - 1, size=count)
    return [random_projective_tree(int(n), vocab, int(s)) for n, s in zip(lengths, seeds)]


def _labeled_heads(state) -> list[tuple[int, str | None]]:
    return list(zip(state.heads[1:], state.labels[1:]))


def _gold_labeled(sentence: Sentence) -> list[tuple[int, str | None]]:
    return list(zip(sentence.heads[1:], sentence.labels[1:]))


def check_sentence(sentence: Sentence, variants: Iterable[Variant] = tuple(Variant)) -> list[str]:
    """Every property violation found on one projective sentence."""
    problems = []
    sid = sentence.sent_id or "?"
    seqs = {}
    for v in variants:
        try:
            seq = oracle_sequence(sentence, v)
        except OracleError as err:
            problems.append(f"{sid}: {v.value} oracle failed: {err}")
            continue
        seqs[v] = seq
        final = replay(sentence.n, seq, v.system)
        if _labeled_heads(final) != _gold_labeled(sentence):
            problems.append(f"{sid}: {v.value} replay does not reproduce the labeled gold tree")
    if Variant.ASW in seqs:
        expanded = expand_swift_to_eager(seqs[Variant.ASW])
        try:
            final = replay(sentence.n, expanded, System.ARC_EAGER)
            if _labeled_heads(final) != _gold_labeled(sentence):
                problems.append(f"{sid}: expanded arc-swift sequence derives a different tree under arc-eager")
        except ValueError as err:
            problems.append(f"{sid}: expanded arc-swift sequence is infeasible under arc-eager: {err}")
    if Variant.AES in seqs and Variant.AER in seqs:
        strip = lambda s: [t for t in s if t.kind.name != "REDUCE"]  # noqa: E731
        if strip(seqs[Variant.AES]) != strip(seqs[Variant.AER]):
            problems.append(f"{sid}: aeS and aeR differ in more than Reduce placement")
    if not problems:
        problems.extend(check_length_identities(sentence_row(0, sentence, list(seqs), 1)))
    return problems


def projective_head_vectors(n: int) -> set[tuple[int, ...]]:
    """Brute force: every head vector over {0..n} that is a projective tree (root may have several children)."""
    out = set()
    for heads in itertools.product(range(n + 1), repeat=n):
        full = [-1, *heads]
        if tree_error(full) is None and is_projective(full):
            out.add(tuple(heads))
    return out


def enumerate_derivations(n: int, system: System) -> Counter:
    """Count complete derivations per derived head vector, over all feasible unlabeled sequences."""
    found: Counter = Counter()

    def walk(state):
        if is_terminal(state, system):
            if all(h >= 0 for h in state.heads[1:]):
                found[tuple(state.heads[1:])] += 1
            return
        for t in feasible(state, system):
            walk(apply(state, t.labeled("dep") if t.is_arc else t, system))

    walk(initial_state(n))
    return found


@dataclass
class EnumerationResult:
    n: int
    system: str
    trees: int
    expected: int
    missing: int
    extra: int
    max_derivations: int

    @property
    def complete(self) -> bool:
        return self.missing == 0 and self.extra == 0


def exhaustive_check(max_n: int = 4, systems: Iterable[System] = tuple(System)) -> list[EnumerationResult]:
    results = []
    for n in range(1, max_n + 1):
        expected = projective_head_vectors(n)
        for system in systems:
            found = enumerate_derivations(n, system)
            got = set(found)
            results.append(EnumerationResult(n, system.short, len(got), len(expected), len(expected - got),
                                             len(got - expected), max(found.values(), default=0)))
    return results


def enumeration_problems(results: list[EnumerationResult]) -> list[str]:
    problems = []
    for r in results:
        if not r.complete:
            problems.append(f"n={r.n} {r.system}: {r.missing} projective trees not derivable, "
                            f"{r.extra} non-projective or invalid trees derived")
        if r.system == "asw" and r.max_derivations != 1:
            problems.append(f"n={r.n} asw: some tree has {r.max_derivations} derivations")
    eager = [r for r in results if r.system == "ae"]
    if eager and max(r.max_derivations for r in eager) < 2:
        problems.append("arc-eager enumeration shows no spurious ambiguity")
    return problems


@dataclass
class FuzzReport:
    trees: int
    max_n: int
    seed: int
    failures: list[tuple[Sentence, list[str]]] = field(default_factory=list)
    enumeration: list[EnumerationResult] = field(default_factory=list)
    enumeration_problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.enumeration_problems

    def minimal_failure(self) -> tuple[Sentence, list[str]] | None:
        if not self.failures:
            return None
        return min(self.failures, key=lambda f: f[0].n)


def _check_star(sentence: Sentence) -> list[str]:
    return check_sentence(sentence)


def run_fuzz(trees: int = 1000, max_n: int = 30, seed: int = 0, enumerate_n: int = 4, jobs: int = 1) -> FuzzReport:
    from .parallel import parallel_map

    corpus = random_tree_corpus(trees, max_n, seed)
    report = FuzzReport(trees, max_n, seed)
    for sent, problems in zip(corpus, parallel_map(_check_star, corpus, jobs)):
        if problems:
            report.failures.append((sent, problems))
    if enumerate_n > 0:
        report.enumeration = exhaustive_check(enumerate_n)
        report.enumeration_problems = enumeration_problems(report.enumeration)
    return report

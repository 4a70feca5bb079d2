"""Greedy and beam decoding with candidate-evaluation accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ScorerModel, SentenceScorer
from .transitions import ParserState, Transition, apply, finalize, initial_state, is_terminal, unattached_count
from .treebank import ArcSet, Sentence


@dataclass
class ParseResult:
    arcs: ArcSet
    transitions: list[Transition]
    logprob: float
    # per expanded state: number of feasible unlabeled skeletons / labeled candidates
    skeleton_counts: list[int] = field(default_factory=list)
    labeled_counts: list[int] = field(default_factory=list)
    fallback_attachments: int = 0

    @property
    def candidates_unlabeled(self) -> int:
        return sum(self.skeleton_counts)

    @property
    def candidates_labeled(self) -> int:
        return sum(self.labeled_counts)

    @property
    def root_count(self) -> int:
        return sum(1 for h, _ in self.arcs.values() if h == 0)


def greedy_parse(sentence: Sentence, model: ScorerModel, fallback_label: str = "root") -> ParseResult:
    system = model.system
    scorer = SentenceScorer(model, sentence)
    state = initial_state(sentence.n)
    history: list[Transition] = []
    logprob = 0.0
    skel_counts, lab_counts = [], []
    while not is_terminal(state, system):
        trans, logp, n_skel = scorer.candidates(state)
        best = int(np.argmax(logp))
        skel_counts.append(n_skel)
        lab_counts.append(len(trans))
        logprob += float(logp[best])
        history.append(trans[best])
        state = apply(state, trans[best], system)
    leftovers = unattached_count(state)
    return ParseResult(finalize(state, system, fallback_label), history, logprob,
                       skel_counts, lab_counts, leftovers)


@dataclass
class BeamItem:
    state: ParserState
    logprob: float
    history: list[Transition]
    terminal: bool


def _score(item_logprob: float, length: int, norm: str) -> float:
    if norm == "length":
        return item_logprob / max(length, 1)
    return item_logprob


def beam_parse(sentence: Sentence, model: ScorerModel, beam_size: int, norm: str = "length",
               fallback_label: str = "root") -> ParseResult:
    """Step-synchronous beam search; finished hypotheses are carried until all are done."""
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    if norm not in ("none", "length"):
        raise ValueError(f"unknown beam normalisation {norm!r}")
    system = model.system
    scorer = SentenceScorer(model, sentence)
    start = initial_state(sentence.n)
    beam = [BeamItem(start, 0.0, [], is_terminal(start, system))]
    skel_counts, lab_counts = [], []
    while not all(item.terminal for item in beam):
        pool: list[tuple[float, int, BeamItem, Transition | None, float]] = []
        for item in beam:
            if item.terminal:
                pool.append((_score(item.logprob, len(item.history), norm), len(pool), item, None, item.logprob))
                continue
            trans, logp, n_skel = scorer.candidates(item.state)
            skel_counts.append(n_skel)
            lab_counts.append(len(trans))
            for t, lp in zip(trans, logp.tolist()):
                total = item.logprob + lp
                pool.append((_score(total, len(item.history) + 1, norm), len(pool), item, t, total))
        pool.sort(key=lambda e: (-e[0], e[1]))
        new_beam = []
        for _, _, item, t, total in pool[:beam_size]:
            if t is None:
                new_beam.append(item)
            else:
                state = apply(item.state, t, system)
                new_beam.append(BeamItem(state, total, item.history + [t], is_terminal(state, system)))
        beam = new_beam
    best = max(beam, key=lambda it: _score(it.logprob, len(it.history), norm))
    leftovers = unattached_count(best.state)
    return ParseResult(finalize(best.state, system, fallback_label), best.history, best.logprob,
                       skel_counts, lab_counts, leftovers)


def parse(sentence: Sentence, model: ScorerModel, beam_size: int = 1, norm: str = "length") -> ParseResult:
    if beam_size == 1:
        return greedy_parse(sentence, model)
    return beam_parse(sentence, model, beam_size, norm)

"""CoNLL-U treebank reading, writing, validation and synthetic tree generation."""

from __future__ import annotations

import gzip
import logging
import pathlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

logger = logging.getLogger(__name__)

ROOT_LABEL = "root"
PTB_PUNCT_TAGS = frozenset({"``", "''", ":", ",", "."})

# dependent -> (head, label)
ArcSet = dict[int, tuple[int, str]]


class ConlluError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Token:
    id: int
    form: str
    lemma: str
    upos: str
    xpos: str
    head: int
    deprel: str
    feats: str = "_"
    deps: str = "_"
    misc: str = "_"

    def columns(self, head: int | None = None, deprel: str | None = None) -> list[str]:
        return [
            str(self.id), self.form, self.lemma, self.upos, self.xpos, self.feats,
            str(self.head if head is None else head),
            self.deprel if deprel is None else deprel,
            self.deps, self.misc,
        ]


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.tokens)

    @property
    def sent_id(self) -> str | None:
        for c in self.comments:
            key, sep, value = c.lstrip("#").partition("=")
            if sep and key.strip() == "sent_id":
                return value.strip()
        return None

    @property
    def heads(self) -> list[int]:
        """Gold heads indexed by token id; slot 0 (root) holds -1."""
        return [-1] + [t.head for t in self.tokens]

    @property
    def labels(self) -> list[str | None]:
        return [None] + [t.deprel for t in self.tokens]

    @property
    def words(self) -> list[str]:
        return [t.form for t in self.tokens]

    def gold_arcs(self) -> ArcSet:
        return {t.id: (t.head, t.deprel) for t in self.tokens}

    def with_arcs(self, arcs: Mapping[int, tuple[int, str]]) -> "Sentence":
        toks = tuple(
            Token(t.id, t.form, t.lemma, t.upos, t.xpos, arcs[t.id][0], arcs[t.id][1],
                  t.feats, t.deps, t.misc)
            for t in self.tokens
        )
        return Sentence(toks, self.comments)


@dataclass
class LabelVocab:
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self._index: dict[str, int] = {}
        for lbl in self.labels:
            if lbl in self._index:
                raise ValueError(f"duplicate label {lbl!r}")
            self._index[lbl] = len(self._index)

    @classmethod
    def from_sentences(cls, sentences: Iterable[Sentence]) -> "LabelVocab":
        seen = sorted({t.deprel for s in sentences for t in s.tokens})
        return cls(seen)

    def add(self, label: str) -> int:
        if label not in self._index:
            self._index[label] = len(self.labels)
            self.labels.append(label)
        return self._index[label]

    def index(self, label: str) -> int:
        return self._index[label]

    def __getitem__(self, i: int) -> str:
        return self.labels[i]

    def __contains__(self, label: str) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)


def tree_error(heads: Sequence[int]) -> str | None:
    """Return why `heads` (index 0 = root slot) is not a tree, or None."""
    n = len(heads) - 1
    for d in range(1, n + 1):
        h = heads[d]
        if not 0 <= h <= n:
            return f"token {d} has head {h} outside [0, {n}]"
        if h == d:
            return f"token {d} is its own head"
    # every token must reach the root without revisiting a node
    state = [0] * (n + 1)  # 0 unseen, 1 on path, 2 reaches root
    state[0] = 2
    for d in range(1, n + 1):
        path = []
        x = d
        while state[x] == 0:
            state[x] = 1
            path.append(x)
            x = heads[x]
        if state[x] == 1:
            return f"cycle through token {x}"
        for p in path:
            state[p] = 2
    return None


def _parse_block(lines: list[tuple[int, str]]) -> Sentence:
    comments = []
    rows = []
    for lineno, line in lines:
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"expected 10 tab-separated columns, got {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid or "." in tid:
            continue
        try:
            idx = int(tid)
        except ValueError:
            raise ConlluError(f"non-integer ID {tid!r}", lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"non-integer HEAD {cols[6]!r}", lineno) from None
        rows.append((lineno, Token(idx, cols[1], cols[2], cols[3], cols[4], head, cols[7],
                                   cols[5], cols[8], cols[9])))
    n = len(rows)
    for expect, (lineno, tok) in enumerate(rows, 1):
        if tok.id != expect:
            raise ConlluError(f"token ids not contiguous: expected {expect}, got {tok.id}", lineno)
        if not 0 <= tok.head <= n:
            raise ConlluError(f"HEAD {tok.head} out of range [0, {n}]", lineno)
    tokens = tuple(t for _, t in rows)
    sent = Sentence(tokens, tuple(comments))
    if n:
        err = tree_error(sent.heads)
        if err:
            raise ConlluError(f"not a tree: {err}", rows[0][0])
        roots = sum(1 for t in tokens if t.head == 0)
        if roots != 1:
            logger.warning("sentence at line %d has %d root attachments", rows[0][0], roots)
    return sent


def parse_conllu(text: str) -> list[Sentence]:
    sentences = []
    block: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.split("\n"), 1):
        line = line.rstrip("\r")
        if line.strip():
            block.append((lineno, line))
        elif block:
            sent = _parse_block(block)
            if sent.n:
                sentences.append(sent)
            block = []
    if block:
        sent = _parse_block(block)
        if sent.n:
            sentences.append(sent)
    return sentences


def read_conllu(path: str | pathlib.Path) -> list[Sentence]:
    path = pathlib.Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            return parse_conllu(fh.read())
    return parse_conllu(path.read_text(encoding="utf-8"))


def write_conllu(
    sentences: Sequence[Sentence],
    predicted: Sequence[Mapping[int, tuple[int, str]]] | None = None,
) -> str:
    if predicted is not None and len(predicted) != len(sentences):
        raise ValueError(f"{len(predicted)} predictions for {len(sentences)} sentences")
    out = []
    for si, sent in enumerate(sentences):
        out.extend(sent.comments)
        arcs = predicted[si] if predicted is not None else None
        for tok in sent.tokens:
            if arcs is None:
                out.append("\t".join(tok.columns()))
                continue
            if tok.id not in arcs:
                raise ValueError(f"sentence {si}: token {tok.id} has no predicted head")
            head, label = arcs[tok.id]
            out.append("\t".join(tok.columns(head, label)))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def _arc_spans(heads: Sequence[int]) -> list[tuple[int, int]]:
    return [(min(h, d), max(h, d)) for d, h in enumerate(heads) if d > 0]


def is_projective(sentence: Sentence | Sequence[int]) -> bool:
    """True iff no two gold arcs cross (root at position 0 counts as an endpoint)."""
    heads = sentence.heads if isinstance(sentence, Sentence) else sentence
    spans = _arc_spans(heads)
    for i, (a, b) in enumerate(spans):
        for c, d in spans[i + 1:]:
            if a < c < b < d or c < a < d < b:
                return False
    return True


def punctuation_mask(sentence: Sentence, policy: str = "label") -> list[bool]:
    """Per-token exclusion flags: True means the token is left out of evaluation."""
    if policy == "label":
        return [t.deprel == "punct" for t in sentence.tokens]
    if policy == "xpos":
        return [t.xpos in PTB_PUNCT_TAGS for t in sentence.tokens]
    raise ValueError(f"unknown punctuation policy {policy!r}")


_SYNTH_TAGS = ("NOUN", "VERB", "ADJ", "ADP", "DET", "PRON", "ADV", "PUNCT")


def random_projective_tree(n: int, vocab: LabelVocab, seed: int) -> Sentence:
    """Sample a single-rooted projective tree with synthetic forms and uniform labels."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    labels = [lbl for lbl in vocab if lbl != ROOT_LABEL] or ["dep"]
    heads = [-1] * (n + 1)

    def attach(lo: int, hi: int, head: int):
        # split [lo, hi] into consecutive blocks, one subtree per block, all headed by `head`
        while lo <= hi:
            end = int(rng.integers(lo, hi + 1))
            sub = int(rng.integers(lo, end + 1))
            heads[sub] = head
            attach(lo, sub - 1, sub)
            attach(sub + 1, end, sub)
            lo = end + 1

    top = int(rng.integers(1, n + 1))
    heads[top] = 0
    attach(1, top - 1, top)
    attach(top + 1, n, top)
    tokens = []
    for i in range(1, n + 1):
        form = f"w{int(rng.integers(0, 40))}"
        tag = _SYNTH_TAGS[int(rng.integers(0, len(_SYNTH_TAGS)))]
        label = ROOT_LABEL if heads[i] == 0 else labels[int(rng.integers(0, len(labels)))]
        tokens.append(Token(i, form, form, tag, tag, heads[i], label))
    return Sentence(tuple(tokens), (f"# sent_id = synth-{seed}-{n}",))


def projective_only(sentences: Iterable[Sentence]) -> list[Sentence]:
    """Drop non-projective sentences (oracles cannot derive them), logging each one."""
    kept = []
    for i, s in enumerate(sentences):
        if is_projective(s):
            kept.append(s)
        else:
            logger.warning("skipping non-projective sentence %s", s.sent_id or i)
    return kept

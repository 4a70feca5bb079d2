"""Build a silver-standard English UD corpus for offline statistics checks.

Not part of the package. Runs under a separate interpreter that has
spaCy 2.x and the ``en_ud_model_sm`` model (trained on UD_English-EWT,
UD v1 label set) installed:

    python tools/make_silver_corpus.py --out tests/data/silver

Text comes from docstrings of the Python standard library and of a few
scientific packages, plus the pydoc topic index. Sentences are parsed by
the spaCy model; the resulting trees are written as CoNLL-U. The corpus is
a stand-in for EN-UD when the real treebank is not available.
"""

import argparse
import ast
import gzip
import pathlib
import random
import re
import sys
import sysconfig

import spacy

_PROSE = re.compile(r"^[A-Z][A-Za-z ,;'\-()]+[a-z][.]$")
_BAD = re.compile(r"(>>>|::|\.\.|[=_`*<>{}\[\]|\\/#@%$~^]|\d\.\d|e\.g|i\.e|etc\.)")


def docstrings(root):
    for path in sorted(pathlib.Path(root).rglob("*.py")):
        if any(p in {"tests", "test", "idlelib", "lib2to3"} for p in path.parts):
            continue
        try:
            tree = ast.parse(path.read_text(encoding="utf-8", errors="ignore"))
        except (SyntaxError, ValueError):
            continue
        for node in ast.walk(tree):
            if isinstance(node, (ast.Module, ast.ClassDef, ast.FunctionDef, ast.AsyncFunctionDef)):
                doc = ast.get_docstring(node)
                if doc:
                    yield doc


def paragraphs(text):
    for block in re.split(r"\n\s*\n", text):
        lines = [ln.strip() for ln in block.splitlines()]
        if not lines or any(_BAD.search(ln) for ln in lines):
            continue
        yield " ".join(lines)


def candidate_sentences(texts):
    seen = set()
    for text in texts:
        for para in paragraphs(text):
            for sent in re.split(r"(?<=[a-z][.])\s+(?=[A-Z])", para):
                sent = re.sub(r"\s+", " ", sent).strip()
                if not sent.isascii() or not _PROSE.match(sent):
                    continue
                words = sent.split()
                if not 4 <= len(words) <= 45 or sent in seen:
                    continue
                seen.add(sent)
                yield sent


def to_conllu(doc, sent_id):
    lines = [f"# sent_id = {sent_id}", f"# text = {doc.text}"]
    for tok in doc:
        head = 0 if tok.head.i == tok.i else tok.head.i + 1
        label = "root" if head == 0 else tok.dep_
        lemma = tok.lemma_ if tok.lemma_ and not tok.lemma_.startswith("-") else tok.text.lower()
        lines.append("\t".join([
            str(tok.i + 1), tok.text, lemma, tok.pos_ or "X", tok.tag_ or "_",
            "_", str(head), label or "dep", "_", "_",
        ]))
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=pathlib.Path, required=True)
    ap.add_argument("--dev", type=int, default=2000)
    ap.add_argument("--train", type=int, default=8000)
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--sources", nargs="*", default=[])
    args = ap.parse_args()

    import pydoc_data.topics

    texts = list(pydoc_data.topics.topics.values())
    roots = [sysconfig.get_paths()["stdlib"], *args.sources]
    for root in roots:
        texts.extend(docstrings(root))
    sents = sorted(candidate_sentences(texts))
    random.Random(args.seed).shuffle(sents)
    print(f"{len(sents)} candidate sentences", file=sys.stderr)

    nlp = spacy.load("en_ud_model_sm", disable=["ner"])
    blocks = []
    for doc in nlp.pipe(sents, batch_size=256):
        # the model may split a candidate into several sentences; keep single-sentence parses only
        if sum(1 for t in doc if t.head.i == t.i) != 1:
            continue
        blocks.append(doc)
        if len(blocks) >= args.dev + args.train:
            break
    dev, train = blocks[: args.dev], blocks[args.dev:]
    args.out.mkdir(parents=True, exist_ok=True)
    for name, part in (("dev", dev), ("train", train)):
        path = args.out / f"en-silver-{name}.conllu.gz"
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            for i, doc in enumerate(part, 1):
                fh.write(to_conllu(doc, f"{name}-{i}"))
                fh.write("\n")
        print(f"{path}: {len(part)} sentences", file=sys.stderr)


if __name__ == "__main__":
    main()

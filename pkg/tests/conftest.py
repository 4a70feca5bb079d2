import pathlib

import pytest

DATA = pathlib.Path(__file__).parent / "data"
SILVER = DATA / "silver"


def pytest_addoption(parser):
    parser.addoption("--en-ud-dir", default=None,
                     help="directory holding en-ud-train.conllu and en-ud-dev.conllu; "
                          "without it the corpus-level checks run on the bundled silver corpus")


def _corpus_paths(config):
    root = config.getoption("--en-ud-dir")
    if root:
        root = pathlib.Path(root)
        return {"train": root / "en-ud-train.conllu", "dev": root / "en-ud-dev.conllu", "proxy": False}
    return {"train": SILVER / "en-silver-train.conllu.gz", "dev": SILVER / "en-silver-dev.conllu.gz", "proxy": True}


@pytest.fixture(scope="session")
def corpus_paths(request):
    return _corpus_paths(request.config)


@pytest.fixture(scope="session")
def dev_corpus(corpus_paths):
    from arcswift.treebank import read_conllu

    return read_conllu(corpus_paths["dev"])


@pytest.fixture(scope="session")
def train_corpus(corpus_paths):
    from arcswift.treebank import read_conllu

    return read_conllu(corpus_paths["train"])


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(corpus_paths):
    """Record one PASS/FAIL line per acceptance criterion; corpus-level lines are tagged on the proxy corpus."""

    def record(number: int, ok: bool, detail: str, corpus: bool = False) -> bool:
        tag = " [proxy]" if corpus and corpus_paths["proxy"] else ""
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}{tag}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

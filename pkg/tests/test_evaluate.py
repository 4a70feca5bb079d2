import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcswift.evaluate import BINS, bin_errors_by_length, evaluate, evaluate_corpus, length_bin
from arcswift.significance import holm_adjust, paired_bootstrap, stars
from arcswift.treebank import LabelVocab, Sentence, Token, random_projective_tree

VOCAB = LabelVocab(["root", "nsubj", "obj", "amod", "punct"])


def sent(heads, labels, sid=None):
    toks = tuple(Token(i, f"w{i}", "_", "X", "X", h, lbl) for i, (h, lbl) in enumerate(zip(heads, labels), 1))
    return Sentence(toks, (f"# sent_id = {sid}",) if sid else ())


GOLD = sent([2, 0, 2, 2, 2], ["nsubj", "root", "obj", "amod", "punct"])


def test_perfect_prediction():
    r = evaluate(GOLD.gold_arcs(), GOLD)
    assert r.uas == r.las == 100.0 and r.total == 4


def test_arithmetic_example():
    pred = {1: (2, "nsubj"), 2: (0, "root"), 3: (2, "amod"), 4: (1, "amod"), 5: (2, "punct")}
    r = evaluate(pred, GOLD)
    assert (r.uas, r.las) == (75.0, 50.0)


def test_punct_with_wrong_head_ignored():
    pred = dict(GOLD.gold_arcs())
    pred[5] = (1, "punct")
    assert evaluate(pred, GOLD).uas == 100.0


def test_token_count_mismatch():
    with pytest.raises(ValueError):
        evaluate({1: (0, "root")}, GOLD)


def test_multi_root_counted():
    pred = dict(GOLD.gold_arcs())
    pred[1] = (0, "root")
    assert evaluate(pred, GOLD).multi_root_sentences == 1


def test_length_bins():
    assert length_bin(abs(5 - 6)) == "1"
    assert length_bin(abs(2 - 14)) == "11-15"
    assert [length_bin(x) for x in (2, 3, 5, 6, 10, 11, 16, 20, 21)] == \
        ["2", "3-5", "3-5", "6-10", "6-10", "11-15", "16-20", "16-20", ">20"]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 40), st.integers(0, 10**6), st.integers(0, 10**6))
def test_bins_aggregate_to_uas(n, seed_gold, seed_pred):
    gold = random_projective_tree(n, VOCAB, seed_gold)
    rng = np.random.default_rng(seed_pred)
    pred = {d: (int(rng.integers(0, n + 1)), "obj") for d in range(1, n + 1)}
    r = evaluate(pred, gold)
    bins = bin_errors_by_length(pred, gold, [t.deprel == "punct" for t in gold.tokens])
    errors = sum(e for e, _ in bins.values())
    total = sum(t for _, t in bins.values())
    assert total == r.total
    if total:
        assert 100.0 * errors / total == pytest.approx(100.0 - r.uas)
    assert r.las <= r.uas


def test_corpus_micro_average():
    a = sent([0], ["root"])
    b = sent([0, 1, 1], ["root", "obj", "obj"])
    rep = evaluate_corpus([{1: (0, "root")}, {1: (0, "root"), 2: (3, "obj"), 3: (1, "obj")}], [a, b])
    assert rep.total == 4 and rep.correct_head == 3 and rep.uas == 75.0
    assert set(rep.to_dict()["length_bins"]) == set(BINS)


def _synthetic(n=100):
    gold = [sent([0, 1, 1], ["root", "obj", "amod"], sid=f"s{i:03d}") for i in range(n)]
    right = [g.gold_arcs() for g in gold]
    wrong = [{1: (2, "obj"), 2: (0, "root"), 3: (2, "obj")} for _ in gold]
    return gold, right, wrong


def test_bootstrap_clear_winner():
    gold, right, wrong = _synthetic()
    p = paired_bootstrap(right, wrong, gold, n_samples=10000, seed=0)
    assert p["uas"] <= 0.001 and p["las"] <= 0.001
    q = paired_bootstrap(wrong, right, gold, n_samples=10000, seed=0)
    assert q["uas"] == 1.0


def test_bootstrap_identical_systems():
    gold, right, _ = _synthetic(30)
    assert paired_bootstrap(right, right, gold, 500, seed=1)["uas"] == 1.0


def test_bootstrap_antisymmetry_and_order_invariance():
    rng = np.random.default_rng(0)
    gold = [random_projective_tree(int(rng.integers(3, 15)), VOCAB, i) for i in range(60)]
    gold = [Sentence(g.tokens, (f"# sent_id = g{i:02d}",)) for i, g in enumerate(gold)]

    def noisy(g, p):
        return {d: ((h if rng.random() > p else 0), lbl) for d, (h, lbl) in g.gold_arcs().items()}

    a = [noisy(g, 0.2) for g in gold]
    b = [noisy(g, 0.25) for g in gold]
    pab = paired_bootstrap(a, b, gold, 4000, seed=3)["uas"]
    pba = paired_bootstrap(b, a, gold, 4000, seed=3)["uas"]
    assert pab + pba >= 1.0 - 1e-9
    assert pab + pba <= 1.0 + 0.05  # ties make both tails include equality
    perm = rng.permutation(len(gold))
    shuffled = paired_bootstrap([a[i] for i in perm], [b[i] for i in perm], [gold[i] for i in perm], 4000, seed=3)
    assert shuffled["uas"] == pab


def test_bootstrap_mismatch():
    gold, right, _ = _synthetic(5)
    with pytest.raises(ValueError):
        paired_bootstrap(right[:4], right, gold)


def test_holm_examples():
    assert holm_adjust([0.3]).adjusted == [0.3]
    assert holm_adjust([0.004] * 10).adjusted == pytest.approx([0.04] * 10)
    res = holm_adjust([0.01, 0.04])
    assert res.adjusted == pytest.approx([0.02, 0.04], abs=0)
    assert res.reject[0.05] == [True, True] and res.reject[0.01] == [False, False]
    assert holm_adjust([0.04, 0.01]).adjusted == pytest.approx([0.04, 0.02], abs=0)
    assert holm_adjust([0.6, 0.5]).adjusted == [1.0, 1.0]
    with pytest.raises(ValueError):
        holm_adjust([1.2])
    with pytest.raises(ValueError):
        holm_adjust([])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
def test_holm_properties(ps):
    adj = holm_adjust(ps).adjusted
    order = np.argsort(ps, kind="stable")
    sorted_adj = [adj[i] for i in order]
    assert all(x <= y + 1e-15 for x, y in zip(sorted_adj, sorted_adj[1:]))
    assert all(a >= p - 1e-15 and a <= 1.0 for a, p in zip(adj, ps))


def test_stars():
    assert [stars(p) for p in (0.0005, 0.005, 0.03, 0.2)] == ["***", "**", "*", "-"]

import numpy as np
import pytest

from arcswift.decode import beam_parse, greedy_parse, parse
from arcswift.model import ModelConfig, build_model
from arcswift.optim import TrainerConfig
from arcswift.train import train
from arcswift.transitions import SHIFT, Kind, System, apply, feasible, initial_state
from arcswift.treebank import LabelVocab, projective_only, random_projective_tree

VOCAB = LabelVocab(["root", "nsubj", "obj", "amod"])
SMALL = ModelConfig(word_dim=8, pos_dim=4, repr_dim=8, hidden_dim=16)


@pytest.fixture(scope="module")
def random_models():
    corpus = [random_projective_tree(n, VOCAB, n) for n in range(1, 25)]
    return corpus, {s: build_model(corpus, s, SMALL, seed=7, labels=VOCAB) for s in System}


@pytest.mark.parametrize("system", list(System))
def test_random_model_gives_well_formed_trees(random_models, system):
    corpus, models = random_models
    for s in corpus:
        res = greedy_parse(s, models[system])
        assert sorted(res.arcs) == list(range(1, s.n + 1))
        assert all(0 <= h <= s.n and h != d for d, (h, _) in res.arcs.items())


@pytest.mark.parametrize("system", list(System))
def test_beam_one_equals_greedy(random_models, system):
    corpus, models = random_models
    for s in corpus:
        g = greedy_parse(s, models[system])
        for norm in ("none", "length"):
            b = beam_parse(s, models[system], 1, norm)
            assert b.transitions == g.transitions and b.arcs == g.arcs
            assert b.skeleton_counts == g.skeleton_counts
    assert parse(corpus[3], models[system]).transitions == greedy_parse(corpus[3], models[system]).transitions


def test_swift_trace_identity_and_counts(random_models):
    corpus, models = random_models
    for s in corpus:
        res = greedy_parse(s, models[System.ARC_SWIFT])
        n_rarc = sum(t.kind is Kind.RARC_K for t in res.transitions)
        # tokens left unattached by the model are attached by finalize, not by a transition
        assert len(res.transitions) == 2 * s.n - n_rarc - res.fallback_attachments
        state = initial_state(s.n)
        for t, count, lab in zip(res.transitions, res.skeleton_counts, res.labeled_counts):
            skels = feasible(state, System.ARC_SWIFT)
            assert count == len(skels)
            assert lab == sum(len(VOCAB) if k.is_arc else 1 for k in skels)
            state = apply(state, t, System.ARC_SWIFT)


def test_ties_follow_transition_order():
    s = random_projective_tree(6, VOCAB, 1)
    model = build_model([s], System.ARC_SWIFT, SMALL, labels=VOCAB)
    for k in model.params:
        model.params[k][:] = 0
    res = greedy_parse(s, model)
    assert res.transitions == [SHIFT] * 6
    assert res.fallback_attachments == 6 and res.root_count == 6
    model = build_model([s], System.ARC_EAGER, SMALL, labels=VOCAB)
    for k in model.params:
        model.params[k][:] = 0
    assert greedy_parse(s, model).transitions[0] is SHIFT


def test_beam_rejects_bad_arguments(random_models):
    corpus, models = random_models
    with pytest.raises(ValueError):
        beam_parse(corpus[0], models[System.ARC_EAGER], 0)
    with pytest.raises(ValueError):
        beam_parse(corpus[0], models[System.ARC_EAGER], 2, "sum")


def test_beam_search_usually_dominates_greedy(train_corpus, dev_corpus):
    model = train(projective_only(train_corpus[:300]), System.ARC_EAGER, None, TrainerConfig(epochs=2)).model
    wins, gains = 0, []
    sample = dev_corpus[:150]
    for s in sample:
        g, b = greedy_parse(s, model), beam_parse(s, model, 2)
        gs, bs = g.logprob / len(g.transitions), b.logprob / len(b.transitions)
        wins += bs >= gs - 1e-12
        gains.append(bs - gs)
        assert b.logprob <= 0
    assert wins >= 0.9 * len(sample)
    assert np.mean(gains) >= 0

"""Shared test utilities."""

import numpy as np

from arcswift.model import ModelConfig, build_model, loss_and_gradient
from arcswift.oracles import oracle_sequence
from arcswift.treebank import LabelVocab, random_projective_tree

SMALL = ModelConfig(window=1, word_dim=4, pos_dim=3, repr_dim=6, hidden_dim=5)
LABELS = ["root", "nsubj", "obj", "amod"]


def relative_error(fd: float, an: float, floor: float = 1e-6) -> float:
    return abs(fd - an) / max(abs(fd), abs(an), floor)


def roundoff_floor(loss: float, h: float, tol: float = 1e-4) -> float:
    """Gradient magnitude below which central-difference roundoff alone can exceed `tol` relative error."""
    return max(1e-6, np.finfo(np.float64).eps * max(abs(loss), 1.0) / (h * tol))


def gradient_check(variant, n=6, seed=0, config=SMALL, h=1e-5, coords=None, floor=1e-6):
    """Worst relative error between analytic and central-difference gradients.

    `coords=None` checks every coordinate; an int samples that many per parameter.
    `floor="roundoff"` scales the denominator floor with the loss via `roundoff_floor`.
    """
    vocab = LabelVocab(list(LABELS))
    sent = random_projective_tree(n, vocab, seed)
    model = build_model([sent], variant.system, config, seed=seed + 100, labels=vocab)
    seq = oracle_sequence(sent, variant)
    loss, grads = loss_and_gradient(sent, seq, model)
    if floor == "roundoff":
        floor = roundoff_floor(loss, h)
    rng = np.random.default_rng(seed)
    worst = 0.0
    checked = 0
    for name, P in model.params.items():
        idx = list(np.ndindex(P.shape))
        if coords is not None and len(idx) > coords:
            idx = [idx[i] for i in rng.choice(len(idx), coords, replace=False)]
        for i in idx:
            old = P[i]
            P[i] = old + h
            up, _ = loss_and_gradient(sent, seq, model)
            P[i] = old - h
            down, _ = loss_and_gradient(sent, seq, model)
            P[i] = old
            worst = max(worst, relative_error((up - down) / (2 * h), grads[name][i], floor))
            checked += 1
    return worst, checked

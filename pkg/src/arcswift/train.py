"""Minibatch maximum-likelihood training of the transition scorer."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import ModelConfig, ScorerModel, Trajectory, batch_loss, build_model, compile_trajectory, unk_replace
from .optim import AdamState, TrainerConfig, adam_step, learning_rate
from .oracles import OracleError, Variant, oracle_sequence
from .transitions import System
from .treebank import LabelVocab, Sentence

logger = logging.getLogger(__name__)


@dataclass
class EpochStats:
    epoch: int
    lr: float
    nll: float  # mean per sentence
    nll_per_step: float


@dataclass
class TrainResult:
    model: ScorerModel
    trace: list[EpochStats] = field(default_factory=list)


def compile_corpus(model: ScorerModel, corpus: Sequence[Sentence], variant: Variant) -> list[Trajectory]:
    trajs = []
    for i, sent in enumerate(corpus):
        try:
            seq = oracle_sequence(sent, variant)
        except OracleError as err:
            raise OracleError(f"sentence {sent.sent_id or i}: {err}") from err
        trajs.append(compile_trajectory(sent, seq, model))
    return trajs


def train(
    corpus: Sequence[Sentence],
    system: System | str,
    variant: Variant | str | None,
    cfg: TrainerConfig,
    model_config: ModelConfig | None = None,
    labels: LabelVocab | None = None,
    model: ScorerModel | None = None,
    on_epoch: Callable[[EpochStats, ScorerModel], None] | None = None,
) -> TrainResult:
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    system = System.parse(system) if isinstance(system, str) else system
    variant = Variant(variant) if variant is not None else Variant.for_system(system)
    if variant.system is not system:
        raise ValueError(f"oracle {variant.value} does not belong to {system.value}")
    if model is None:
        model = build_model(corpus, system, model_config, seed=cfg.seed, labels=labels)
    trajs = compile_corpus(model, corpus, variant)
    n_steps = sum(t.n_steps for t in trajs)
    rng = np.random.default_rng(cfg.seed)
    adam = AdamState.zeros_like(model.params)
    result = TrainResult(model)
    for epoch in range(1, cfg.epochs + 1):
        lr = learning_rate(cfg, epoch)
        order = rng.permutation(len(trajs))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = []
            for i in order[start:start + cfg.batch_size]:
                t = trajs[i]
                batch.append(dataclasses.replace(t, word_ids=unk_replace(t.word_ids, rng, cfg.unk_replace_prob)))
            nll, grads = batch_loss(model, batch, rng, cfg.dropout_prob)
            total += nll
            adam_step(model.params, grads, adam, cfg, lr)
        stats = EpochStats(epoch, lr, total / len(trajs), total / max(n_steps, 1))
        result.trace.append(stats)
        logger.info("epoch %d lr %.6f nll/sent %.4f nll/step %.4f", epoch, lr, stats.nll, stats.nll_per_step)
        if on_epoch is not None:
            on_epoch(stats, model)
    return result

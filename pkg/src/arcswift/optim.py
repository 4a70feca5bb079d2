"""Adam with bias correction, trainer configuration and learning-rate annealing."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrainerConfig:
    lr0: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.9
    epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 10
    anneal_factor: float = 0.5
    # annealing kicks in after `anneal_start` passes, once every `anneal_every` passes
    anneal_start: int = 5
    anneal_every: int = 1
    dropout_prob: float = 0.05
    unk_replace_prob: float = 0.10
    seed: int = 0

    def __post_init__(self):
        for name in ("dropout_prob", "unk_replace_prob", "anneal_factor", "beta1", "beta2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if self.batch_size < 1 or self.epochs < 0 or self.anneal_every < 1:
            raise ValueError("batch_size and anneal_every must be >= 1, epochs >= 0")

    @classmethod
    def ptb(cls, **kw) -> "TrainerConfig":
        return cls(**{"epochs": 10, "anneal_start": 5, "anneal_every": 1, **kw})

    @classmethod
    def ud(cls, **kw) -> "TrainerConfig":
        return cls(**{"epochs": 30, "anneal_start": 15, "anneal_every": 3, **kw})

    @classmethod
    def field_types(cls) -> dict[str, type]:
        return {f.name: type(f.default) for f in dataclasses.fields(cls)}


def learning_rate(cfg: TrainerConfig, epoch: int) -> float:
    """Rate used during 1-based `epoch`."""
    over = max(0, epoch - cfg.anneal_start)
    halvings = -(-over // cfg.anneal_every)
    return cfg.lr0 * cfg.anneal_factor ** halvings


@dataclass
class AdamState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls({k: np.zeros_like(p) for k, p in params.items()},
                   {k: np.zeros_like(p) for k, p in params.items()}, 0)


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], st: AdamState,
              cfg: TrainerConfig, lr: float) -> tuple[dict[str, np.ndarray], AdamState]:
    """One in-place Adam update; returns the (same) params and state for convenience."""
    for name, g in grads.items():
        if params[name].shape != g.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, parameter {params[name].shape}")
        if not np.all(np.isfinite(g)):
            bad = int(np.size(g) - np.count_nonzero(np.isfinite(g)))
            raise FloatingPointError(f"non-finite gradient for {name}: {bad} bad entries at step {st.t + 1}")
    if not st.m:
        st.m = {k: np.zeros_like(p) for k, p in params.items()}
        st.v = {k: np.zeros_like(p) for k, p in params.items()}
    st.t += 1
    b1, b2 = cfg.beta1, cfg.beta2
    c1 = 1.0 - b1 ** st.t
    c2 = 1.0 - b2 ** st.t
    for name, g in grads.items():
        m = st.m[name]
        v = st.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        params[name] -= lr * (m / c1) / (np.sqrt(v / c2) + cfg.epsilon)
    return params, st

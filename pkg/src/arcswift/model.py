"""Transition scorer: windowed token encoder, biaffine feature combination, softmax over feasible moves.

Each token gets a "head" and a "dependent" vector from its embedding window.
The two are merged by a biaffine layer

    f(h, d)_i = ReLU(h^T W_i d + b_i . h + c_i . d + d_i)

For arc-swift every candidate arc is scored from f(head token, dependent
token) through a per-direction label layer, and Shift from f(b, b) of the
buffer front. For the other systems f(t, t) of the top three stack tokens
and the buffer front are concatenated and fed to a small classifier.

Training runs teacher-forced: the states along an oracle sequence do not
depend on the parameters, so a sentence is compiled once into index arrays
(`Trajectory`) and whole minibatches are scored with a handful of array ops.
Gradients are derived by hand and checked against finite differences in the
test suite.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .transitions import (
    Kind,
    ParserState,
    System,
    Transition,
    apply,
    feasible,
    initial_state,
    is_terminal,
)
from .treebank import LabelVocab, Sentence

FORMAT = "arcswift-model"
VERSION = 1

PAD, ROOT, UNK = 0, 1, 2
SPECIALS = ("<pad>", "<root>", "<unk>")

SHIFT_T = 0
LEFT_T = 1
RIGHT_T = 2


@dataclass
class ModelConfig:
    window: int = 2
    word_dim: int = 50
    pos_dim: int = 16
    repr_dim: int = 32
    hidden_dim: int = 100
    lowercase: bool = True


class TokenRepr(NamedTuple):
    head: np.ndarray
    dep: np.ndarray


@dataclass
class BiaffineParams:
    W: np.ndarray  # (out, head, dep)
    b: np.ndarray  # (out, head)
    c: np.ndarray  # (out, dep)
    d: np.ndarray  # (out,)


class Vocab:
    def __init__(self, items: Sequence[str] = ()):
        self.items = list(SPECIALS) + [x for x in items if x not in SPECIALS]
        self.index = {x: i for i, x in enumerate(self.items)}
        if len(self.index) != len(self.items):
            raise ValueError("duplicate vocabulary entries")

    def __len__(self) -> int:
        return len(self.items)

    def get(self, x: str) -> int:
        return self.index.get(x, UNK)


def _relu(x):
    return np.maximum(x, 0.0)


def biaffine_combine(v_head: np.ndarray, v_dep: np.ndarray, p: BiaffineParams) -> np.ndarray:
    """Single-pair biaffine feature; see `_biaffine_forward` for the batched version."""
    v_head = np.asarray(v_head, dtype=np.float64)
    v_dep = np.asarray(v_dep, dtype=np.float64)
    out, dh, dd = p.W.shape
    if v_head.shape != (dh,) or v_dep.shape != (dd,) or p.b.shape != (out, dh) or p.c.shape != (out, dd) \
            or p.d.shape != (out,):
        raise ValueError(
            f"shape mismatch: head {v_head.shape}, dep {v_dep.shape}, W {p.W.shape}, "
            f"b {p.b.shape}, c {p.c.shape}, d {p.d.shape}"
        )
    pre = np.einsum("a,iab,b->i", v_head, p.W, v_dep) + p.b @ v_head + p.c @ v_dep + p.d
    return _relu(pre)


def _biaffine_forward(H, D, W, b, c, d):
    R = W.shape[0]
    T = (H @ W.transpose(1, 0, 2).reshape(W.shape[1], R * W.shape[2])).reshape(len(H), R, W.shape[2])
    pre = np.einsum("pib,pb->pi", T, D) + H @ b.T + D @ c.T + d
    return pre, T


def _biaffine_backward(dpre, H, D, T, W, b, c):
    R, A, B = W.shape
    M = dpre[:, :, None] * D[:, None, :]  # (P, i, b)
    dW = (H.T @ M.reshape(len(H), R * B)).reshape(A, R, B).transpose(1, 0, 2)
    dH = M.reshape(len(H), R * B) @ W.transpose(0, 2, 1).reshape(R * B, A) + dpre @ b
    dD = np.einsum("pi,pib->pb", dpre, T) + dpre @ c
    return dW, dpre.T @ H, dpre.T @ D, dpre.sum(0), dH, dD


@dataclass
class Trajectory:
    """Parameter-independent record of the states visited by a transition sequence."""

    n: int
    word_ids: np.ndarray
    pos_ids: np.ndarray
    n_steps: int
    # arc-swift
    pair_h: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    pair_d: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    skel_pair: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    skel_type: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    skel_step: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    gold_skel: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    gold_label: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    # traditional systems
    slots: np.ndarray = field(default_factory=lambda: np.zeros((0, 4), np.int64))
    mask: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), bool))
    gold_class: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))


class ScorerModel:
    def __init__(
        self,
        system: System,
        words: Sequence[str],
        tags: Sequence[str],
        labels: LabelVocab | Sequence[str],
        config: ModelConfig | None = None,
        params: dict[str, np.ndarray] | None = None,
        seed: int = 0,
    ):
        self.system = System(system)
        self.config = config or ModelConfig()
        self.words = Vocab(words)
        self.tags = Vocab(tags)
        self.labels = labels if isinstance(labels, LabelVocab) else LabelVocab(list(labels))
        shapes = self.param_shapes()
        if params is None:
            params = self._init_params(np.random.default_rng(seed))
        for name, shape in shapes.items():
            if name not in params:
                raise ValueError(f"missing parameter {name}")
            if params[name].shape != shape:
                raise ValueError(f"parameter {name} has shape {params[name].shape}, expected {shape}")
        extra = set(params) - set(shapes)
        if extra:
            raise ValueError(f"unexpected parameters {sorted(extra)}")
        self.params = {k: np.asarray(params[k], dtype=np.float64) for k in shapes}

    # ---- structure -------------------------------------------------------

    @property
    def is_swift(self) -> bool:
        return self.system is System.ARC_SWIFT

    @property
    def n_classes(self) -> int:
        return (2 if self.system is System.ARC_EAGER else 1) + 2 * len(self.labels)

    def class_of(self, t: Transition) -> int:
        L = len(self.labels)
        base = 2 if self.system is System.ARC_EAGER else 1
        if t.kind is Kind.SHIFT:
            return 0
        if t.kind is Kind.REDUCE:
            return 1
        li = self.labels.index(t.label)
        return base + li if t.kind is Kind.LARC else base + L + li

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        c = self.config
        R = c.repr_dim
        d_in = (2 * c.window + 1) * (c.word_dim + c.pos_dim)
        L = len(self.labels)
        shapes = {
            "word_emb": (len(self.words), c.word_dim),
            "pos_emb": (len(self.tags), c.pos_dim),
            "head_w": (R, d_in), "head_b": (R,),
            "dep_w": (R, d_in), "dep_b": (R,),
            "bi_W": (R, R, R), "bi_b": (R, R), "bi_c": (R, R), "bi_d": (R,),
        }
        if self.is_swift:
            shapes.update({"left_w": (L, R), "left_b": (L,), "right_w": (L, R), "right_b": (L,),
                           "shift_w": (R,)})
        else:
            shapes.update({"null_feat": (R,), "hid_w": (c.hidden_dim, 4 * R), "hid_b": (c.hidden_dim,),
                           "out_w": (self.n_classes, c.hidden_dim), "out_b": (self.n_classes,)})
        return shapes

    def _init_params(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        out = {}
        for name, shape in self.param_shapes().items():
            if name.endswith("_emb"):
                out[name] = rng.normal(0.0, 0.5, shape)
            elif name == "bi_W":
                out[name] = rng.normal(0.0, 1.0 / shape[1], shape)
            elif name in ("bi_b", "bi_c"):
                out[name] = rng.normal(0.0, 1.0 / np.sqrt(shape[1]), shape)
            elif name in ("head_b", "dep_b", "bi_d", "hid_b"):
                out[name] = np.full(shape, 0.1)
            elif len(shape) == 1:
                out[name] = rng.normal(0.0, 0.1, shape) if name in ("shift_w", "null_feat") else np.zeros(shape)
            else:
                bound = np.sqrt(6.0 / (shape[0] + shape[1]))
                out[name] = rng.uniform(-bound, bound, shape)
        return out

    def biaffine_params(self) -> BiaffineParams:
        p = self.params
        return BiaffineParams(p["bi_W"], p["bi_b"], p["bi_c"], p["bi_d"])

    # ---- input encoding --------------------------------------------------

    def _norm(self, form: str) -> str:
        return form.lower() if self.config.lowercase else form

    def encode(self, sentence: Sentence) -> tuple[np.ndarray, np.ndarray]:
        w = np.array([ROOT] + [self.words.get(self._norm(t.form)) for t in sentence.tokens], dtype=np.int64)
        p = np.array([ROOT] + [self.tags.get(t.upos) for t in sentence.tokens], dtype=np.int64)
        return w, p

    def _windows(self, ids: np.ndarray) -> np.ndarray:
        w = self.config.window
        padded = np.concatenate([np.full(w, PAD), ids, np.full(w, PAD)])
        return padded[np.arange(len(ids))[:, None] + np.arange(2 * w + 1)[None, :]]

    def token_features(self, word_ids: np.ndarray, pos_ids: np.ndarray):
        WI, PI = self._windows(word_ids), self._windows(pos_ids)
        X = np.concatenate([self.params["word_emb"][WI], self.params["pos_emb"][PI]], axis=2)
        return X.reshape(len(word_ids), -1), WI, PI

    def token_reprs(self, word_ids: np.ndarray, pos_ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X, _, _ = self.token_features(word_ids, pos_ids)
        p = self.params
        return _relu(X @ p["head_w"].T + p["head_b"]), _relu(X @ p["dep_w"].T + p["dep_b"])

    # ---- persistence -----------------------------------------------------

    def save(self, path: str | pathlib.Path) -> None:
        meta = {
            "format": FORMAT, "version": VERSION, "system": self.system.value,
            "config": asdict(self.config), "words": self.words.items[len(SPECIALS):],
            "tags": self.tags.items[len(SPECIALS):], "labels": list(self.labels),
            "shapes": {k: list(v.shape) for k, v in self.params.items()},
        }
        arrays = {f"param/{k}": np.ascontiguousarray(v) for k, v in self.params.items()}
        with open(path, "wb") as fh:
            np.savez(fh, meta=np.array(json.dumps(meta)), **arrays)

    @classmethod
    def load(cls, path: str | pathlib.Path) -> "ScorerModel":
        with np.load(path, allow_pickle=False) as z:
            if "meta" not in z.files:
                raise ValueError(f"{path}: not a model file (no header)")
            meta = json.loads(str(z["meta"]))
            if meta.get("format") != FORMAT or meta.get("version") != VERSION:
                raise ValueError(f"{path}: unsupported model format {meta.get('format')} v{meta.get('version')}")
            params = {k[len("param/"):]: z[k] for k in z.files if k.startswith("param/")}
        for name, shape in meta["shapes"].items():
            if name not in params or list(params[name].shape) != shape:
                raise ValueError(f"{path}: parameter {name} does not match declared shape {shape}")
        return cls(System(meta["system"]), meta["words"], meta["tags"], meta["labels"],
                   ModelConfig(**meta["config"]), params)

    def copy(self) -> "ScorerModel":
        return ScorerModel(self.system, self.words.items[len(SPECIALS):], self.tags.items[len(SPECIALS):],
                           list(self.labels), self.config, {k: v.copy() for k, v in self.params.items()})


def build_model(sentences: Sequence[Sentence], system: System, config: ModelConfig | None = None,
                seed: int = 0, labels: LabelVocab | None = None) -> ScorerModel:
    config = config or ModelConfig()
    norm = (lambda f: f.lower()) if config.lowercase else (lambda f: f)
    words = sorted({norm(t.form) for s in sentences for t in s.tokens})
    tags = sorted({t.upos for s in sentences for t in s.tokens})
    return ScorerModel(system, words, tags, labels or LabelVocab.from_sentences(sentences), config, seed=seed)


def token_repr(sentence: Sentence, index: int, model: ScorerModel) -> TokenRepr:
    if not 0 <= index <= sentence.n:
        raise IndexError(f"token index {index} outside [0, {sentence.n}]")
    vh, vd = model.token_reprs(*model.encode(sentence))
    return TokenRepr(vh[index], vd[index])


# ---- compiling oracle trajectories -------------------------------------------


def _stack_slots(state: ParserState) -> list[int]:
    s = state.stack
    return [s[-3] if len(s) >= 3 else -1, s[-2] if len(s) >= 2 else -1, s[-1],
            -1 if state.buffer_empty else state.buffer_front]


def compile_trajectory(sentence: Sentence, seq: Sequence[Transition], model: ScorerModel,
                       word_ids: np.ndarray | None = None) -> Trajectory:
    system = model.system
    if word_ids is None:
        word_ids, pos_ids = model.encode(sentence)
    else:
        pos_ids = model.encode(sentence)[1]
    state = initial_state(sentence.n)
    traj = Trajectory(sentence.n, word_ids, pos_ids, len(seq))
    if model.is_swift:
        pairs: dict[tuple[int, int], int] = {}
        skel_pair, skel_type, skel_step, gold_skel, gold_label = [], [], [], [], []
    else:
        slots, masks, gold_class = [], [], []
    for step, t in enumerate(seq):
        cands = feasible(state, system)
        if t.skeleton() not in cands:
            raise ValueError(f"step {step}: oracle transition {t} is infeasible")
        if model.is_swift:
            b = state.buffer_front
            for cand in cands:
                if cand.kind is Kind.SHIFT:
                    key, typ = (b, b), SHIFT_T
                elif cand.kind is Kind.LARC_K:
                    key, typ = (b, state.stack[-cand.k]), LEFT_T
                else:
                    key, typ = (state.stack[-cand.k], b), RIGHT_T
                pi = pairs.setdefault(key, len(pairs))
                if cand == t.skeleton():
                    gold_skel.append(len(skel_pair))
                    gold_label.append(-1 if typ == SHIFT_T else model.labels.index(t.label))
                skel_pair.append(pi)
                skel_type.append(typ)
                skel_step.append(step)
        else:
            slots.append(_stack_slots(state))
            m = np.zeros(model.n_classes, bool)
            L = len(model.labels)
            for cand in cands:
                if cand.is_arc:
                    c0 = model.class_of(cand.labeled(model.labels[0]))
                    m[c0:c0 + L] = True
                else:
                    m[model.class_of(cand)] = True
            masks.append(m)
            gold_class.append(model.class_of(t))
        state = apply(state, t, system)
    if model.is_swift:
        keys = sorted(pairs, key=pairs.get)
        traj.pair_h = np.array([k[0] for k in keys], dtype=np.int64)
        traj.pair_d = np.array([k[1] for k in keys], dtype=np.int64)
        traj.skel_pair = np.array(skel_pair, dtype=np.int64)
        traj.skel_type = np.array(skel_type, dtype=np.int64)
        traj.skel_step = np.array(skel_step, dtype=np.int64)
        traj.gold_skel = np.array(gold_skel, dtype=np.int64)
        traj.gold_label = np.array(gold_label, dtype=np.int64)
    else:
        traj.slots = np.array(slots, dtype=np.int64).reshape(-1, 4)
        traj.mask = np.array(masks, dtype=bool).reshape(-1, model.n_classes)
        traj.gold_class = np.array(gold_class, dtype=np.int64)
    return traj


# ---- batched loss and gradients ------------------------------------------------


def _dropout_mask(rng, shape, p):
    if rng is None or p <= 0.0:
        return None
    return (rng.random(shape) >= p) / (1.0 - p)


def _segment_lse(vals: np.ndarray, starts: np.ndarray, seg_of: np.ndarray) -> np.ndarray:
    m = np.maximum.reduceat(vals, starts)
    s = np.add.reduceat(np.exp(vals - m[seg_of]), starts)
    return m + np.log(s)


def batch_loss(model: ScorerModel, trajs: Sequence[Trajectory], rng: np.random.Generator | None = None,
               dropout: float = 0.0, want_grad: bool = True) -> tuple[float, dict[str, np.ndarray] | None]:
    """Summed negative log-likelihood of the compiled trajectories and its gradient.

    `rng` enables dropout with probability `dropout`; pass None for a
    deterministic evaluation.
    """
    p = model.params
    R = model.config.repr_dim
    offsets = np.cumsum([0] + [t.n + 1 for t in trajs])
    word_ids = np.concatenate([t.word_ids for t in trajs])
    pos_ids = np.concatenate([t.pos_ids for t in trajs])
    WI = np.concatenate([model._windows(t.word_ids) for t in trajs])
    PI = np.concatenate([model._windows(t.pos_ids) for t in trajs])
    del word_ids, pos_ids
    X = np.concatenate([p["word_emb"][WI], p["pos_emb"][PI]], axis=2).reshape(len(WI), -1)
    Zh = X @ p["head_w"].T + p["head_b"]
    Zd = X @ p["dep_w"].T + p["dep_b"]
    mh = _dropout_mask(rng, Zh.shape, dropout)
    md = _dropout_mask(rng, Zd.shape, dropout)
    Vh = _relu(Zh) if mh is None else _relu(Zh) * mh
    Vd = _relu(Zd) if md is None else _relu(Zd) * md

    if model.is_swift:
        pair_off = np.cumsum([0] + [len(t.pair_h) for t in trajs])
        skel_off = np.cumsum([0] + [len(t.skel_pair) for t in trajs])
        step_off = np.cumsum([0] + [t.n_steps for t in trajs])
        ph = np.concatenate([t.pair_h + o for t, o in zip(trajs, offsets)])
        pd = np.concatenate([t.pair_d + o for t, o in zip(trajs, offsets)])
        sp = np.concatenate([t.skel_pair + o for t, o in zip(trajs, pair_off)])
        st = np.concatenate([t.skel_type for t in trajs])
        ss = np.concatenate([t.skel_step + o for t, o in zip(trajs, step_off)])
        gs = np.concatenate([t.gold_skel + o for t, o in zip(trajs, skel_off)])
        gl = np.concatenate([t.gold_label for t in trajs])
    else:
        ph = pd = np.arange(offsets[-1])

    H, D = Vh[ph], Vd[pd]
    pre, T = _biaffine_forward(H, D, p["bi_W"], p["bi_b"], p["bi_c"], p["bi_d"])
    mf = _dropout_mask(rng, pre.shape, dropout)
    F = _relu(pre) if mf is None else _relu(pre) * mf
    grads = {k: np.zeros_like(v) for k, v in p.items()} if want_grad else None

    if model.is_swift:
        GL = F @ p["left_w"].T + p["left_b"]
        GR = F @ p["right_w"].T + p["right_b"]
        GS = F @ p["shift_w"]
        is_shift = st == SHIFT_T
        A = np.where((st == LEFT_T)[:, None], GL[sp], GR[sp])
        rmax = A.max(1)
        row_lse = rmax + np.log(np.exp(A - rmax[:, None]).sum(1))
        vals = np.where(is_shift, GS[sp], row_lse)
        starts = np.flatnonzero(np.r_[True, ss[1:] != ss[:-1]])
        step_lse = _segment_lse(vals, starts, ss)
        gold_is_shift = gl < 0
        gold_scores = np.where(gold_is_shift, GS[sp[gs]], A[gs, np.maximum(gl, 0)])
        nll = float(np.sum(step_lse - gold_scores))
        if not want_grad:
            return nll, None
        dA = np.exp(A - step_lse[ss][:, None])
        dA[is_shift] = 0.0
        dS = np.where(is_shift, np.exp(GS[sp] - step_lse[ss]), 0.0)
        arc_gold = ~gold_is_shift
        np.add.at(dA, (gs[arc_gold], gl[arc_gold]), -1.0)
        np.add.at(dS, gs[gold_is_shift], -1.0)
        dGL = np.zeros_like(GL)
        dGR = np.zeros_like(GR)
        dGS = np.zeros_like(GS)
        left_rows = st == LEFT_T
        right_rows = st == RIGHT_T
        np.add.at(dGL, sp[left_rows], dA[left_rows])
        np.add.at(dGR, sp[right_rows], dA[right_rows])
        np.add.at(dGS, sp, dS)
        grads["left_w"] = dGL.T @ F
        grads["left_b"] = dGL.sum(0)
        grads["right_w"] = dGR.T @ F
        grads["right_b"] = dGR.sum(0)
        grads["shift_w"] = F.T @ dGS
        dF = dGL @ p["left_w"] + dGR @ p["right_w"] + np.outer(dGS, p["shift_w"])
    else:
        slots = np.concatenate([np.where(t.slots >= 0, t.slots + o, -1) for t, o in zip(trajs, offsets)])
        null_row = len(F)
        slots = np.where(slots >= 0, slots, null_row)
        table = np.vstack([F, p["null_feat"][None, :]])
        Xc = table[slots].reshape(len(slots), 4 * R)
        Hpre = Xc @ p["hid_w"].T + p["hid_b"]
        mhid = _dropout_mask(rng, Hpre.shape, dropout)
        Hh = _relu(Hpre) if mhid is None else _relu(Hpre) * mhid
        logits = Hh @ p["out_w"].T + p["out_b"]
        mask = np.concatenate([t.mask for t in trajs])
        gold = np.concatenate([t.gold_class for t in trajs])
        masked = np.where(mask, logits, -np.inf)
        lmax = masked.max(1)
        lse = lmax + np.log(np.exp(masked - lmax[:, None]).sum(1))
        rows = np.arange(len(gold))
        nll = float(np.sum(lse - logits[rows, gold]))
        if not want_grad:
            return nll, None
        dlog = np.exp(masked - lse[:, None])
        dlog[rows, gold] -= 1.0
        grads["out_w"] = dlog.T @ Hh
        grads["out_b"] = dlog.sum(0)
        dHh = dlog @ p["out_w"]
        dHpre = dHh * (Hpre > 0)
        if mhid is not None:
            dHpre *= mhid
        grads["hid_w"] = dHpre.T @ Xc
        grads["hid_b"] = dHpre.sum(0)
        dX = (dHpre @ p["hid_w"]).reshape(len(slots), 4, R)
        dtable = np.zeros_like(table)
        np.add.at(dtable, slots, dX)
        dF = dtable[:null_row]
        grads["null_feat"] = dtable[null_row]

    dpre = dF * (pre > 0)
    if mf is not None:
        dpre *= mf
    dW, db, dc, dd, dH, dD = _biaffine_backward(dpre, H, D, T, p["bi_W"], p["bi_b"], p["bi_c"])
    grads["bi_W"], grads["bi_b"], grads["bi_c"], grads["bi_d"] = dW, db, dc, dd
    dVh = np.zeros_like(Vh)
    dVd = np.zeros_like(Vd)
    np.add.at(dVh, ph, dH)
    np.add.at(dVd, pd, dD)
    dZh = dVh * (Zh > 0)
    dZd = dVd * (Zd > 0)
    if mh is not None:
        dZh *= mh
        dZd *= md
    grads["head_w"] = dZh.T @ X
    grads["head_b"] = dZh.sum(0)
    grads["dep_w"] = dZd.T @ X
    grads["dep_b"] = dZd.sum(0)
    dX3 = (dZh @ p["head_w"] + dZd @ p["dep_w"]).reshape(WI.shape + (-1,))
    wd = model.config.word_dim
    np.add.at(grads["word_emb"], WI, dX3[..., :wd])
    np.add.at(grads["pos_emb"], PI, dX3[..., wd:])
    return nll, grads


def unk_replace(word_ids: np.ndarray, rng: np.random.Generator, prob: float) -> np.ndarray:
    """Replace each real word (not the root slot) by UNK with probability `prob`."""
    if prob <= 0.0:
        return word_ids
    hit = rng.random(len(word_ids)) < prob
    hit[0] = False
    return np.where(hit, UNK, word_ids)


def loss_and_gradient(
    sentence: Sentence,
    oracle_seq: Sequence[Transition],
    model: ScorerModel,
    system: System | None = None,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    dropout: float = 0.05,
    unk_prob: float = 0.10,
) -> tuple[float, dict[str, np.ndarray]]:
    if system is not None and System(system) is not model.system:
        raise ValueError(f"model was built for {model.system.value}, not {System(system).value}")
    if train_mode and rng is None:
        rng = np.random.default_rng(0)
    word_ids = model.encode(sentence)[0]
    if train_mode:
        word_ids = unk_replace(word_ids, rng, unk_prob)
    traj = compile_trajectory(sentence, oracle_seq, model, word_ids=word_ids)
    return batch_loss(model, [traj], rng if train_mode else None, dropout if train_mode else 0.0)


# ---- scoring single states for decoding ----------------------------------------


class SentenceScorer:
    """Caches per-sentence token representations and scores states one at a time."""

    def __init__(self, model: ScorerModel, sentence: Sentence):
        self.model = model
        self.sentence = sentence
        p = model.params
        self.Vh, self.Vd = model.token_reprs(*model.encode(sentence))
        self._pair_cache: dict[tuple[int, int], np.ndarray] = {}
        if not model.is_swift:
            idx = np.arange(sentence.n + 1)
            pre, _ = _biaffine_forward(self.Vh[idx], self.Vd[idx], p["bi_W"], p["bi_b"], p["bi_c"], p["bi_d"])
            self.table = np.vstack([_relu(pre), p["null_feat"][None, :]])

    def _pair_features(self, keys: list[tuple[int, int]]) -> np.ndarray:
        missing = [k for k in keys if k not in self._pair_cache]
        if missing:
            p = self.model.params
            h = np.array([k[0] for k in missing])
            d = np.array([k[1] for k in missing])
            pre, _ = _biaffine_forward(self.Vh[h], self.Vd[d], p["bi_W"], p["bi_b"], p["bi_c"], p["bi_d"])
            for k, row in zip(missing, _relu(pre)):
                self._pair_cache[k] = row
        return np.array([self._pair_cache[k] for k in keys])

    def candidates(self, state: ParserState) -> tuple[list[Transition], np.ndarray, int]:
        """Feasible labeled transitions in tie-break order, their log-probabilities, and
        the number of unlabeled skeletons they came from."""
        model = self.model
        system = model.system
        if is_terminal(state, system):
            raise ValueError("cannot score a terminal state")
        skels = feasible(state, system)
        labels = list(model.labels)
        L = len(labels)
        p = model.params
        trans: list[Transition] = []
        if model.is_swift:
            b = state.buffer_front
            keys = []
            for s in skels:
                if s.kind is Kind.SHIFT:
                    keys.append((b, b))
                elif s.kind is Kind.LARC_K:
                    keys.append((b, state.stack[-s.k]))
                else:
                    keys.append((state.stack[-s.k], b))
            F = self._pair_features(keys)
            parts = []
            for s, f in zip(skels, F):
                if s.kind is Kind.SHIFT:
                    parts.append(np.array([f @ p["shift_w"]]))
                    trans.append(s)
                else:
                    w, bias = (p["left_w"], p["left_b"]) if s.kind is Kind.LARC_K else (p["right_w"], p["right_b"])
                    parts.append(w @ f + bias)
                    trans.extend(s.labeled(lbl) for lbl in labels)
            scores = np.concatenate(parts)
        else:
            slots = [x if x >= 0 else len(self.table) - 1 for x in _stack_slots(state)]
            x = self.table[slots].reshape(-1)
            logits = p["out_w"] @ _relu(p["hid_w"] @ x + p["hid_b"]) + p["out_b"]
            classes = []
            for s in skels:
                if s.is_arc:
                    c0 = model.class_of(s.labeled(labels[0]))
                    classes.extend(range(c0, c0 + L))
                    trans.extend(s.labeled(lbl) for lbl in labels)
                else:
                    classes.append(model.class_of(s))
                    trans.append(s)
            scores = logits[classes]
        m = scores.max()
        logp = scores - (m + np.log(np.exp(scores - m).sum()))
        return trans, logp, len(skels)


def score_transitions(state: ParserState, sentence: Sentence, system: System,
                      model: ScorerModel) -> list[tuple[Transition, float]]:
    """Probability of every feasible labeled transition in `state`."""
    if System(system) is not model.system:
        raise ValueError(f"model was built for {model.system.value}, not {System(system).value}")
    trans, logp, _ = SentenceScorer(model, sentence).candidates(state)
    return list(zip(trans, np.exp(logp).tolist()))

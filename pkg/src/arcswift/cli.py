"""Command-line entry point: oracle, train, parse, eval, stats and fuzz subcommands."""

from __future__ import annotations

import argparse
import functools
import json
import logging
import pathlib
import sys
from typing import Sequence

from . import __version__
from .config import ConfigError, RunConfig, read_key_values
from .decode import parse as decode_sentence
from .evaluate import evaluate, evaluate_corpus
from .fuzz import run_fuzz
from .model import ModelConfig, ScorerModel
from .optim import TrainerConfig
from .oracles import OracleError, Variant, oracle_sequence
from .parallel import parallel_map
from .significance import holm_adjust, paired_bootstrap, stars
from .stats import efficiency_report, runtime_scaling_report
from .train import train
from .transitions import System, count_kinds, format_sequence
from .treebank import ConlluError, Sentence, is_projective, read_conllu, write_conllu

log = logging.getLogger("arcswift")

SYSTEM_CHOICES = ("asd", "ae", "ah", "asw", "aeS", "aeR")


class CliError(Exception):
    pass


# ---- argument plumbing ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, system=False, oracle=False, seed=True, jobs=False,
                punct=False, beam=False, model=False, output=True, inp=True) -> None:
    p.add_argument("--config", metavar="PATH", help="flat key=value file; flags override its values")
    if inp:
        p.add_argument("--input", metavar="PATH", help="input CoNLL-U file (.gz accepted)")
    if output:
        p.add_argument("--output", metavar="PATH", help="output file (default: stdout)")
    if system:
        p.add_argument("--system", choices=SYSTEM_CHOICES,
                       help="transition system: asd, ae, ah, asw (aeS/aeR also pick the arc-eager oracle)")
    if oracle:
        p.add_argument("--oracle", choices=("static-s", "static-r"),
                       help="arc-eager oracle: prefer Shift (static-s) or Reduce (static-r) on ties")
    if seed:
        p.add_argument("--seed", type=int, metavar="N", help="random seed (default 0)")
    if jobs:
        p.add_argument("--jobs", type=int, metavar="N", help="worker processes for per-sentence work (default 1)")
    if punct:
        p.add_argument("--punct", choices=("label", "xpos"),
                       help="punctuation excluded from scoring by deprel 'punct' or by PTB XPOS tags")
    if beam:
        p.add_argument("--beam", type=int, metavar="N", help="beam size; 1 is greedy (default 1)")
        p.add_argument("--beam-norm", choices=("none", "length"),
                       help="compare beam items by total or length-normalised logprob (default length)")
    if model:
        p.add_argument("--model", metavar="PATH", help="model file")


def _add_trainer_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("trainer", "optimisation settings (also readable from --config)")
    g.add_argument("--schedule", choices=("ptb", "ud"),
                   help="preset annealing schedule: ptb (10 epochs, halve from epoch 6) or "
                        "ud (30 epochs, halve every 3 from epoch 16)")
    defaults = TrainerConfig()
    for name, kind in TrainerConfig.field_types().items():
        if name == "seed":
            continue
        g.add_argument(f"--{name.replace('_', '-')}", type=kind, metavar=kind.__name__.upper(),
                       help=f"default {getattr(defaults, name)}")
    m = p.add_argument_group("model", "scorer sizes (also readable from --config)")
    mdefaults = ModelConfig()
    for name, value in mdefaults.__dict__.items():
        if isinstance(value, bool):
            continue
        m.add_argument(f"--{name.replace('_', '-')}", type=type(value), metavar="N", help=f"default {value}")


_NOT_RUN_FIELDS = {"config", "command", "func", "input", "output", "gold", "compare", "bootstrap",
                   "trees", "max_n", "enumerate", "per_sentence", "schedule", "summary", "skip_report",
                   "scaling", "verbose"}


def run_config(args: argparse.Namespace, command_defaults: dict | None = None) -> RunConfig:
    file_values = read_key_values(args.config) if getattr(args, "config", None) else {}
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_RUN_FIELDS}
    system = overrides.get("system")
    if system in ("aeS", "aeR"):
        if overrides.get("oracle") is not None and overrides["oracle"] != ("static-s" if system == "aeS" else "static-r"):
            raise ConfigError(f"--system {system} contradicts --oracle {overrides['oracle']}")
        overrides["system"] = "ae"
        overrides["oracle"] = "static-s" if system == "aeS" else "static-r"
    schedule = getattr(args, "schedule", None) or file_values.pop("schedule", None)
    base: dict = dict(command_defaults or {})
    if schedule:
        preset = TrainerConfig.ptb() if schedule == "ptb" else TrainerConfig.ud()
        base.update(epochs=preset.epochs, anneal_start=preset.anneal_start, anneal_every=preset.anneal_every)
    base.update(file_values)
    cfg = RunConfig.build(base, overrides)
    if cfg.oracle == "static-r" and cfg.system_id is not System.ARC_EAGER:
        raise ConfigError("--oracle static-r only applies to arc-eager")
    return cfg


def _read(path: str | None, what: str = "--input") -> list[Sentence]:
    if not path:
        raise CliError(f"{what} is required")
    if not pathlib.Path(path).exists():
        raise CliError(f"{what}: no such file {path}")
    return read_conllu(path)


def _write(path: str | None, text: str) -> None:
    if path:
        pathlib.Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_model(path: str | None) -> ScorerModel:
    if not path:
        raise CliError("--model is required")
    if not pathlib.Path(path).exists():
        raise CliError(f"--model: no such file {path}")
    return ScorerModel.load(path)


# ---- oracle ----------------------------------------------------------------------


def _oracle_row(item: tuple[int, Sentence], variant: Variant):
    i, sent = item
    sid = sent.sent_id or str(i + 1)
    if not is_projective(sent):
        return sid, sent.n, None, "non-projective"
    try:
        return sid, sent.n, oracle_sequence(sent, variant), None
    except OracleError as err:
        return sid, sent.n, None, str(err)


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    corpus = _read(args.input)
    variant = cfg.variant
    rows = parallel_map(functools.partial(_oracle_row, variant=variant), list(enumerate(corpus)), cfg.jobs)
    blocks, summary, skipped = [], [], []
    kinds = ["SHIFT", "REDUCE", "LARC", "RARC", "LARC_K", "RARC_K"]
    summary.append("\t".join(["sent_id", "n", "length", *kinds]))
    for sid, n, seq, why in rows:
        if seq is None:
            skipped.append(f"{sid}\t{n}\t{why}")
            continue
        blocks.append(f"# sent_id = {sid}\n{format_sequence(seq)}\n")
        counts = count_kinds(seq)
        summary.append("\t".join([sid, str(n), str(len(seq)), *(str(counts[k]) for k in kinds)]))
    _write(args.output, "\n".join(blocks))
    summary_text = "\n".join(summary) + "\n"
    skip_text = "sent_id\tn\treason\n" + "".join(s + "\n" for s in skipped)
    summary_path = args.summary or (args.output + ".summary.tsv" if args.output else None)
    skip_path = args.skip_report or (args.output + ".skipped.tsv" if args.output else None)
    for path, text in ((summary_path, summary_text), (skip_path, skip_text)):
        if path:
            pathlib.Path(path).write_text(text, encoding="utf-8")
        else:
            sys.stderr.write(text)
    log.info("%s: %d sequences, %d skipped", variant.value, len(blocks), len(skipped))
    return 0


# ---- train -----------------------------------------------------------------------


def cmd_train(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    train_path = args.input or cfg.train
    corpus = _read(train_path, "--input/train")
    if not cfg.model:
        raise CliError("--model (output path) is required")
    kept = [s for s in corpus if is_projective(s) and s.n > 0]
    if len(kept) < len(corpus):
        log.warning("training on %d of %d sentences (non-projective ones dropped)", len(kept), len(corpus))
    dev = read_conllu(cfg.dev) if cfg.dev else None
    trace = []

    def on_epoch(stats, model):
        row = {"epoch": stats.epoch, "lr": stats.lr, "nll": stats.nll, "nll_per_step": stats.nll_per_step}
        if dev is not None:
            preds = [decode_sentence(s, model).arcs for s in dev]
            rep = evaluate_corpus(preds, dev, punct=cfg.punct)
            row.update(dev_uas=rep.uas, dev_las=rep.las)
        trace.append(row)
        log.info("epoch %s", json.dumps(row))

    result = train(kept, cfg.system_id, cfg.variant, cfg.trainer, cfg.model_config, on_epoch=on_epoch)
    result.model.save(cfg.model)
    _write(args.output, json.dumps({"config": cfg.to_dict(), "trace": trace}, indent=2) + "\n")
    return 0


# ---- parse -----------------------------------------------------------------------


def _parse_one(sent: Sentence, model: ScorerModel, beam: int, norm: str):
    res = decode_sentence(sent, model, beam, norm)
    return res.arcs, res.candidates_unlabeled, res.candidates_labeled, len(res.transitions), res.fallback_attachments


def cmd_parse(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    model = _load_model(cfg.model)
    if args.system is not None and cfg.system_id is not model.system:
        raise ConfigError(f"--system {cfg.system} but the model was trained for {model.system.short}")
    corpus = _read(args.input)
    results = parallel_map(functools.partial(_parse_one, model=model, beam=cfg.beam, norm=cfg.beam_norm),
                           corpus, cfg.jobs)
    _write(args.output, write_conllu(corpus, [r[0] for r in results]))
    if args.per_sentence:
        lines = ["sent_id\tn\tsteps\tcandidates\tlabeled_candidates\tfallback_attachments"]
        for i, (sent, (_, unl, lab, steps, fb)) in enumerate(zip(corpus, results)):
            lines.append(f"{sent.sent_id or i + 1}\t{sent.n}\t{steps}\t{unl}\t{lab}\t{fb}")
        pathlib.Path(args.per_sentence).write_text("\n".join(lines) + "\n", encoding="utf-8")
    log.info("parsed %d sentences, %d candidate evaluations", len(corpus), sum(r[1] for r in results))
    return 0


# ---- eval ------------------------------------------------------------------------


def _predictions(path: str, gold: Sequence[Sentence]) -> list[dict]:
    # decoded trees may legitimately carry several root attachments
    tb_log = logging.getLogger("arcswift.treebank")
    level = tb_log.level
    tb_log.setLevel(logging.ERROR)
    try:
        pred = _read(path, path)
    finally:
        tb_log.setLevel(level)
    if len(pred) != len(gold):
        raise CliError(f"{path}: {len(pred)} sentences, gold has {len(gold)}")
    for i, (p, g) in enumerate(zip(pred, gold)):
        if [t.form for t in p.tokens] != [t.form for t in g.tokens]:
            raise CliError(f"{path}: sentence {i + 1} tokens differ from gold")
    return [p.gold_arcs() for p in pred]


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    gold = _read(args.gold, "--gold")
    systems = list(args.compare or ([args.input] if args.input else []))
    if not systems:
        raise CliError("give --input PRED or --compare A B [...]")
    preds = {name: _predictions(name, gold) for name in systems}
    summary: dict = {"punct": cfg.punct, "resampling": "sentences", "systems": {}}
    tsv = ["system\tsent_id\tn\tscored\tcorrect_head\tcorrect_labeled"]
    for name, pr in preds.items():
        summary["systems"][name] = evaluate_corpus(pr, gold, punct=cfg.punct).to_dict()
        for i, (p, g) in enumerate(zip(pr, gold)):
            r = evaluate(p, g, punct=cfg.punct)
            tsv.append(f"{name}\t{g.sent_id or i + 1}\t{g.n}\t{r.total}\t{r.correct_head}\t{r.correct_labeled}")
    if len(systems) > 1:
        n_samples = args.bootstrap or 10000
        pairs = [(a, b) for a in systems for b in systems if a != b]
        grid = []
        for a, b in pairs:
            p = paired_bootstrap(preds[a], preds[b], gold, n_samples=n_samples, seed=cfg.seed, punct=cfg.punct)
            grid.append({"better": a, "than": b, "p_uas": p["uas"], "p_las": p["las"]})
        for metric in ("uas", "las"):
            holm = holm_adjust([g[f"p_{metric}"] for g in grid])
            for g, adj in zip(grid, holm.adjusted):
                g[f"holm_{metric}"] = adj
                g[f"stars_{metric}"] = stars(adj)
        summary["significance"] = {"samples": n_samples, "seed": cfg.seed, "test": "one-sided paired bootstrap",
                                   "adjustment": "holm", "grid": grid}
    _write(args.output, json.dumps(summary, indent=2) + "\n")
    if args.per_sentence:
        pathlib.Path(args.per_sentence).write_text("\n".join(tsv) + "\n", encoding="utf-8")
    return 0


# ---- stats -----------------------------------------------------------------------


def cmd_stats(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    corpus = _read(args.input)
    kept = [s for s in corpus if is_projective(s) and s.n > 0]
    labels = {t.deprel for s in kept for t in s.tokens}
    rep, rows = efficiency_report(kept, tuple(Variant), n_labels=len(labels), jobs=cfg.jobs)
    summary = {"sentences": len(corpus), "projective": len(kept), "n_labels": len(labels),
               "efficiency": rep.to_dict()}
    try:
        fit = runtime_scaling_report(kept)
        summary["scaling"] = {"exponent": fit.exponent, "coefficient": fit.coefficient}
    except ValueError as err:
        summary["scaling"] = {"error": str(err)}
    if cfg.model:
        model = _load_model(cfg.model)
        greedy = parallel_map(functools.partial(_parse_one, model=model, beam=1, norm=cfg.beam_norm), kept, cfg.jobs)
        decoded = {"system": model.system.short, "greedy_candidates": sum(r[1] for r in greedy),
                   "greedy_labeled_candidates": sum(r[2] for r in greedy), "greedy_steps": sum(r[3] for r in greedy)}
        if cfg.beam > 1:
            beam = parallel_map(functools.partial(_parse_one, model=model, beam=cfg.beam, norm=cfg.beam_norm),
                                kept, cfg.jobs)
            decoded.update(beam=cfg.beam, beam_candidates=sum(r[1] for r in beam),
                           beam_labeled_candidates=sum(r[2] for r in beam),
                           beam_to_greedy=sum(r[1] for r in beam) / max(decoded["greedy_candidates"], 1))
        summary["decoded"] = decoded
    _write(args.output, json.dumps(summary, indent=2) + "\n")
    if args.per_sentence:
        names = rep.variants
        head = ["sent_id", "n"] + [f"len_{v}" for v in names] + [f"cand_{v}" for v in names] + ["asw_expansion_reduces"]
        lines = ["\t".join(head)]
        for r in rows:
            lines.append("\t".join([r.sent_id, str(r.n), *(str(r.lengths[v]) for v in names),
                                    *(str(r.candidates[v]) for v in names), str(r.expansion_reduces)]))
        pathlib.Path(args.per_sentence).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


# ---- fuzz ------------------------------------------------------------------------


def cmd_fuzz(args: argparse.Namespace) -> int:
    cfg = run_config(args)
    report = run_fuzz(args.trees, args.max_n, cfg.seed, args.enumerate, cfg.jobs)
    print(f"random trees: {report.trees} (n <= {report.max_n}, seed {report.seed}), failing: {len(report.failures)}")
    for r in report.enumeration:
        print(f"enumerate n={r.n} {r.system}: {r.trees}/{r.expected} trees, "
              f"max derivations per tree {r.max_derivations}")
    for msg in report.enumeration_problems:
        print(f"VIOLATION {msg}")
    worst = report.minimal_failure()
    if worst is not None:
        sent, problems = worst
        print("VIOLATION minimal failing sentence:")
        for msg in problems:
            print(f"  {msg}")
        sys.stdout.write(write_conllu([sent]))
    return 0 if report.ok else 1


# ---- parser construction -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arcswift", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="dump static-oracle transition sequences",
                       description="Write one block of transitions per projective sentence. A TSV summary "
                                   "(sent_id, n, length, per-kind counts) and a skip report of non-projective "
                                   "sentences go next to --output, or to stderr.")
    _add_common(p, system=True, oracle=True, jobs=True)
    p.add_argument("--summary", metavar="PATH", help="summary TSV (default: OUTPUT.summary.tsv)")
    p.add_argument("--skip-report", metavar="PATH", help="skipped sentences TSV (default: OUTPUT.skipped.tsv)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("train", help="train a scorer on a CoNLL-U file",
                       description="Train on --input (or train=... in the config) and save to --model. "
                                   "--output receives the per-epoch trace as JSON; with dev=... in the "
                                   "config each epoch also reports dev UAS/LAS.")
    _add_common(p, system=True, oracle=True, punct=True, model=True)
    _add_trainer_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("parse", help="parse a CoNLL-U file with a trained model",
                       description="Overwrite HEAD and DEPREL of --input with predictions.")
    _add_common(p, system=True, jobs=True, beam=True, model=True)
    p.add_argument("--per-sentence", metavar="PATH",
                   help="TSV: sent_id, n, steps, candidates, labeled_candidates, fallback_attachments")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("eval", help="score predictions; compare systems with a paired bootstrap",
                       description="JSON summary with UAS/LAS, length-binned errors and, for --compare, "
                                   "a grid of one-sided bootstrap p-values with Holm adjustment.")
    _add_common(p, punct=True)
    p.add_argument("--gold", metavar="PATH", help="gold CoNLL-U file")
    p.add_argument("--compare", nargs="+", metavar="PRED", help="two or more prediction files")
    p.add_argument("--bootstrap", type=int, metavar="N", help="bootstrap samples (default 10000)")
    p.add_argument("--per-sentence", metavar="PATH",
                   help="TSV: system, sent_id, n, scored, correct_head, correct_labeled")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="sequence-length, candidate-count and scaling statistics",
                       description="Oracle statistics for all five oracle variants; with --model also "
                                   "decoded candidate counts (greedy, and --beam N when N > 1).")
    _add_common(p, jobs=True, beam=True, model=True)
    p.add_argument("--per-sentence", metavar="PATH",
                   help="TSV: sent_id, n, len_<variant>..., cand_<variant>..., asw_expansion_reduces")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fuzz", help="run the property suites; exit 1 on any violation",
                       description="Oracle round trips, arc-swift to arc-eager expansion and length "
                                   "identities on random trees, plus exhaustive enumeration for small n.")
    _add_common(p, jobs=True, output=False, inp=False)
    p.add_argument("--trees", type=int, default=1000, metavar="N", help="random trees (default 1000)")
    p.add_argument("--max-n", type=int, default=30, metavar="N", help="maximum tree size (default 30)")
    p.add_argument("--enumerate", type=int, default=4, metavar="N",
                   help="exhaustively enumerate all sequences up to this length; 0 disables (default 4)")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, ConfigError, ConlluError, OracleError, OSError, ValueError) as err:
        print(f"arcswift {args.command}: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Transition-based dependency parsing with arc-standard, arc-eager, arc-hybrid and arc-swift."""

__version__ = "0.1.0"

from .decode import beam_parse, greedy_parse
from .evaluate import evaluate, evaluate_corpus
from .model import ModelConfig, ScorerModel, build_model
from .optim import TrainerConfig
from .oracles import Variant, expand_swift_to_eager, oracle_sequence
from .train import train
from .transitions import System, Transition, apply, feasible, initial_state
from .treebank import Sentence, Token, parse_conllu, read_conllu, write_conllu

__all__ = [
    "Sentence", "Token", "parse_conllu", "read_conllu", "write_conllu",
    "System", "Transition", "apply", "feasible", "initial_state",
    "Variant", "oracle_sequence", "expand_swift_to_eager",
    "ModelConfig", "ScorerModel", "build_model", "TrainerConfig", "train",
    "greedy_parse", "beam_parse", "evaluate", "evaluate_corpus",
]

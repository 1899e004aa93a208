"""Transition-based semantic role labeling with stack-LSTM state features."""

from .conll import read_conll09, read_corpus, read_json_corpus, write_conll09, write_json_corpus
from .data import Sentence, SrlGraph, Token, Vocab, Vocabs, build_vocabs
from .decoder import decode, decode_beam, decode_greedy
from .errors import (ConfigurationError, ContractViolation, InputError, ParseError, TransitionError,
                     TransrlError)
from .evaluator import evaluate, role_violations, score_predicates, score_triplets
from .oracle import derive_actions, replay
from .scorer import ModelConfig, TransitionSrlModel
from .trainer import TrainConfig, sentence_loss, train
from .transition import Action, ActionStep, ParsingOrder, TransitionState, apply, initial_state, legal_actions

__version__ = "0.1.0"

__all__ = [
    "Action", "ActionStep", "ConfigurationError", "ContractViolation", "InputError", "ModelConfig", "ParseError",
    "ParsingOrder", "Sentence", "SrlGraph", "Token", "TrainConfig", "TransitionError", "TransitionSrlModel",
    "TransitionState", "TransrlError", "Vocab", "Vocabs", "apply", "build_vocabs", "decode", "decode_beam",
    "decode_greedy", "derive_actions", "evaluate", "initial_state", "legal_actions", "read_conll09", "read_corpus",
    "read_json_corpus", "replay", "role_violations", "score_predicates", "score_triplets", "sentence_loss", "train",
    "write_conll09", "write_json_corpus",
]

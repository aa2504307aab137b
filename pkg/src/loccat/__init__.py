"""Probabilistic (BM11) retrieval with location, category and detail weighting."""

from loccat.analysis import Lexicon, Tokenizer
from loccat.config import ScoringConfig, load_config, preset
from loccat.corpus import Document, JudgmentSet, Topic, parse_collection, parse_qrels, parse_topics
from loccat.evaluation import average_precision, evaluate, r_precision
from loccat.index import InvertedIndex, build_index, load_index, save_index
from loccat.scoring import RankedRun, retrieve, retrieve_baseline

__all__ = [
    "Document", "InvertedIndex", "JudgmentSet", "Lexicon", "RankedRun", "ScoringConfig",
    "Tokenizer", "Topic", "average_precision", "build_index", "evaluate", "load_config",
    "load_index", "parse_collection", "parse_qrels", "parse_topics", "preset", "r_precision",
    "retrieve", "retrieve_baseline", "save_index",
]

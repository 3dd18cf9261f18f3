# trafficsim/training.py

"""Labeled transaction sets drawn from the surrogate classifier, and the rulebook mined from them."""

import functools
import logging
from typing import Iterable, Optional

import numpy as np

from agents.evidence import Cause
from agents.rule_mining import Dataset, RuleBook, mine_supervised, transaction_from_vector
from data_ingestion.scenario_loader import ClassifierConfig, MethodConfig
from trafficsim.classifier import classify_surrogate

logger = logging.getLogger(__name__)


def generate_transactions(
    cfg: ClassifierConfig,
    per_cause: int,
    seed: int = 0,
    causes: Optional[Iterable[Cause]] = None,
) -> Dataset:
    """per_cause labeled transactions for each cause, in cause order."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7919]))
    transactions = []
    for cause in (list(causes) if causes is not None else list(Cause)):
        for _ in range(per_cause):
            vector = classify_surrogate(None, cause, cfg, rng)
            transactions.append(transaction_from_vector(vector, cause))
    return Dataset(tuple(transactions))


@functools.lru_cache(maxsize=32)
def _cached_rulebook(classifier_json: str, method_json: str) -> RuleBook:
    classifier = ClassifierConfig.model_validate_json(classifier_json)
    method = MethodConfig.model_validate_json(method_json)
    dataset = generate_transactions(classifier, method.training_size, method.training_seed)
    book = mine_supervised(dataset, method.mining)
    logger.info(
        "Training: mined %d rules (%d corrections) from %d labeled transactions",
        len(book), len(book.supervised_rules), dataset.N,
    )
    return RuleBook(book.rules, provenance=f"trained seed={method.training_seed} N={dataset.N}", config=book.config)


def training_rulebook(classifier: ClassifierConfig, method: MethodConfig) -> RuleBook:
    """Rulebook for DAT vehicles, mined once per (classifier, method) configuration."""
    return _cached_rulebook(classifier.model_dump_json(), method.model_dump_json())

# agents/rule_mining.py

"""
Association-rule mining over top-two cause transactions.

Transactions are ordered (first guess, second guess) pairs, optionally labeled
with the scenario's true cause. Itemsets are cause masks from agents.evidence,
so support counting is a vectorized subset test over the dataset's item masks.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from agents.evidence import Cause, CauseVector, format_mask, members

logger = logging.getLogger(__name__)


class MiningError(ValueError):
    """Raised for empty datasets, malformed rules and undefined confidences."""


# --- Data model ---

@dataclass(frozen=True)
class Transaction:
    first: Cause
    second: Cause
    label: Optional[Cause] = None

    def __post_init__(self):
        if self.first == self.second:
            raise MiningError(f"transaction repeats {self.first.code} as first and second guess")

    @property
    def items(self) -> int:
        return self.first.bit | self.second.bit

    @property
    def mispredicted(self) -> bool:
        return self.label is not None and self.first != self.label


@dataclass(frozen=True)
class Dataset:
    transactions: Tuple[Transaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "transactions", tuple(self.transactions))

    @property
    def N(self) -> int:
        return len(self.transactions)

    @property
    def labeled(self) -> bool:
        return all(t.label is not None for t in self.transactions)

    def __iter__(self) -> Iterator[Transaction]:
        return iter(self.transactions)

    def __len__(self) -> int:
        return self.N

    def item_masks(self, with_label: bool = False) -> np.ndarray:
        masks = [t.items | (t.label.bit if with_label and t.label is not None else 0) for t in self.transactions]
        return np.array(masks, dtype=np.int64)

    def first_guesses(self) -> np.ndarray:
        return np.array([int(t.first) for t in self.transactions], dtype=np.int64)


@dataclass(frozen=True)
class AssociationRule:
    """
    antecedent -> consequent with support and confidence.

    A supervised correction rule {g, l} -> {l} is stored with antecedent {g}
    and consequent {l}; display_antecedent restores the {g, l} form.
    """

    antecedent: int
    consequent: int
    support: float
    confidence: float
    supervised: bool = False

    def __post_init__(self):
        if not self.antecedent or not self.consequent:
            raise MiningError("rule sides must be non-empty")
        if self.antecedent & self.consequent:
            raise MiningError(
                f"antecedent {format_mask(self.antecedent)} overlaps consequent {format_mask(self.consequent)}"
            )
        for name in ("support", "confidence"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0 + 1e-12:
                raise MiningError(f"rule {name} out of [0,1]: {value}")

    @property
    def display_antecedent(self) -> int:
        return self.antecedent | self.consequent if self.supervised else self.antecedent

    def sort_key(self):
        return (-self.confidence, -self.support, self.antecedent, self.consequent, self.supervised)

    def __str__(self) -> str:
        return f"{{{format_mask(self.display_antecedent)}}} -> {{{format_mask(self.consequent)}}}"


class MiningConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    minsup: float = Field(0.25, gt=0.0, le=1.0)
    mincon: float = Field(0.8, gt=0.0, le=1.0)


@dataclass(frozen=True)
class RuleBook:
    """Mined rules in application order: confidence, then support, then antecedent mask."""

    rules: Tuple[AssociationRule, ...] = ()
    provenance: str = ""
    config: Optional[MiningConfig] = field(default=None, compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.rules, key=AssociationRule.sort_key))
        object.__setattr__(self, "rules", ordered)
        if self.config is not None:
            for rule in ordered:
                if rule.support < self.config.minsup - 1e-12 or rule.confidence < self.config.mincon - 1e-12:
                    raise MiningError(f"rule {rule} does not meet the rulebook thresholds")

    def __iter__(self) -> Iterator[AssociationRule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    @property
    def supervised_rules(self) -> List[AssociationRule]:
        return [r for r in self.rules if r.supervised]


# --- Counting ---

def min_count(n: int, minsup: float) -> int:
    """Smallest integer support count satisfying count >= n * minsup."""
    return max(0, math.ceil(n * minsup - 1e-9))


def transaction_from_vector(c: CauseVector, label: Optional[Cause] = None) -> Transaction:
    first, second = c.ranked()[:2]
    return Transaction(first, second, label)


def itemset_support(d: Dataset, x: int, supervised: bool = False) -> int:
    """Number of transactions whose items contain x; supervised also counts the label as an item."""
    if not x:
        raise MiningError("itemset must be non-empty")
    if d.N == 0:
        return 0
    masks = d.item_masks(with_label=supervised)
    return int(np.count_nonzero((masks & x) == x))


def _check_rule_sides(x: int, y: int) -> None:
    if not x or not y:
        raise MiningError("rule sides must be non-empty")
    if x & y:
        raise MiningError(f"antecedent {format_mask(x)} overlaps consequent {format_mask(y)}")


def rule_support(d: Dataset, x: int, y: int) -> float:
    _check_rule_sides(x, y)
    if d.N == 0:
        raise MiningError("empty dataset")
    return itemset_support(d, x | y) / d.N


def rule_confidence(d: Dataset, x: int, y: int) -> float:
    _check_rule_sides(x, y)
    sigma_x = itemset_support(d, x) if d.N else 0
    if sigma_x == 0:
        raise MiningError(f"undefined confidence: {format_mask(x)} never occurs")
    return itemset_support(d, x | y) / sigma_x


# --- Apriori ---

def apriori_frequent(d: Dataset, minsup: float) -> List[Dict[int, int]]:
    """
    Frequent 1- and 2-itemsets as [F1, F2], each mapping itemset mask to support count.

    Candidates for F2 are pairs of F1 members only.
    """
    if d.N == 0:
        raise MiningError("empty dataset")
    if not 0.0 < minsup <= 1.0:
        raise MiningError(f"minsup must lie in (0,1], got {minsup}")
    threshold = min_count(d.N, minsup)
    masks = d.item_masks()

    f1: Dict[int, int] = {}
    for cause in Cause:
        count = int(np.count_nonzero(masks & cause.bit))
        if count and count >= threshold:
            f1[cause.bit] = count

    f2: Dict[int, int] = {}
    singles = sorted(f1)
    for i, a in enumerate(singles):
        for b in singles[i + 1:]:
            pair = a | b
            count = int(np.count_nonzero((masks & pair) == pair))
            if count and count >= threshold:
                f2[pair] = count

    logger.debug("RuleMining: %d frequent 1-itemsets, %d frequent 2-itemsets at minsup %.3f", len(f1), len(f2), minsup)
    return [f1, f2]


def max_one_itemset(d: Dataset) -> int:
    """Singleton with the most first-guess votes; ties go to the lowest cause index."""
    if d.N == 0:
        raise MiningError("empty dataset")
    counts = np.bincount(d.first_guesses(), minlength=len(Cause))
    return Cause(int(np.argmax(counts))).bit


def generate_rules(frequent: Sequence[Dict[int, int]], d: Dataset, mincon: float) -> RuleBook:
    rules = []
    pairs = frequent[1] if len(frequent) > 1 else {}
    for pair in sorted(pairs):
        a, b = (c.bit for c in members(pair))
        for x, y in ((a, b), (b, a)):
            confidence = rule_confidence(d, x, y)
            if confidence >= mincon - 1e-12:
                rules.append(AssociationRule(x, y, rule_support(d, x, y), confidence))
    return RuleBook(tuple(rules), provenance=f"apriori N={d.N} mincon={mincon}")


def _supervised_rules(d: Dataset, cfg: MiningConfig) -> List[AssociationRule]:
    wrong = [t for t in d if t.mispredicted]
    if not wrong:
        return []
    n_wrong = len(wrong)
    threshold = min_count(n_wrong, cfg.minsup)
    pair_counts: Dict[Tuple[Cause, Cause], int] = {}
    first_counts: Dict[Cause, int] = {}
    for t in wrong:
        pair_counts[(t.first, t.label)] = pair_counts.get((t.first, t.label), 0) + 1
        first_counts[t.first] = first_counts.get(t.first, 0) + 1

    rules = []
    for (guess, label), count in sorted(pair_counts.items()):
        if count < threshold:
            continue
        confidence = count / first_counts[guess]
        if confidence >= cfg.mincon - 1e-12:
            rules.append(AssociationRule(guess.bit, label.bit, count / n_wrong, confidence, supervised=True))
    return rules


def mine_supervised(d: Dataset, cfg: MiningConfig) -> RuleBook:
    """
    Plain rules over the guesses merged with correction rules {first, label} -> {label}.

    Correction rules are mined only from transactions whose first guess missed the
    label. Their support is taken over those transactions, and their confidence is
    the share of a given wrong first guess that carried this label.
    """
    for i, t in enumerate(d, start=1):
        if t.label is None:
            raise MiningError(f"transaction {i} is unlabeled; supervised mining needs labels")
    plain = generate_rules(apriori_frequent(d, cfg.minsup), d, cfg.mincon)
    corrections = _supervised_rules(d, cfg)
    logger.info(
        "RuleMining: mined %d plain and %d correction rules from %d transactions",
        len(plain), len(corrections), d.N,
    )
    return RuleBook(plain.rules + tuple(corrections), provenance=f"supervised N={d.N}", config=cfg)


def mine(d: Dataset, cfg: MiningConfig) -> RuleBook:
    """Unsupervised mining with one config: Apriori then confidence pruning."""
    book = generate_rules(apriori_frequent(d, cfg.minsup), d, cfg.mincon)
    return RuleBook(book.rules, provenance=f"apriori N={d.N}", config=cfg)


def dataset_from_vectors(vectors: Iterable[CauseVector], label: Optional[Cause] = None) -> Dataset:
    return Dataset(tuple(transaction_from_vector(c, label) for c in vectors))

# test_rule_mining.py

from itertools import combinations

import numpy as np
import pytest

from agents.evidence import Cause, mask_of, parse_mask
from agents.rule_mining import (
    AssociationRule,
    Dataset,
    MiningConfig,
    MiningError,
    RuleBook,
    Transaction,
    apriori_frequent,
    generate_rules,
    itemset_support,
    max_one_itemset,
    min_count,
    mine,
    mine_supervised,
    rule_confidence,
    rule_support,
)
from data_ingestion.scenario_loader import ClassifierConfig
from trafficsim.training import generate_transactions

I, Wo, We, SE, Re = Cause


def dataset(*pairs) -> Dataset:
    return Dataset(tuple(Transaction(*p) for p in pairs))


def random_dataset(rng: np.random.Generator) -> Dataset:
    n = int(rng.integers(5, 101))
    rows = []
    for _ in range(n):
        first, second = rng.choice(len(Cause), size=2, replace=False)
        rows.append(Transaction(Cause(int(first)), Cause(int(second))))
    return Dataset(tuple(rows))


def brute_force_frequent(d: Dataset, minsup: float):
    threshold = min_count(d.N, minsup)
    masks = [t.items for t in d]
    levels = []
    for size in (1, 2):
        level = {}
        for combo in combinations(Cause, size):
            x = mask_of(combo)
            count = sum(1 for m in masks if m & x == x)
            if count and count >= threshold:
                level[x] = count
        levels.append(level)
    return levels


def test_transaction_rules():
    print("\n" + "=" * 80)
    print("Testing Rule Mining: transactions and counting")
    print("=" * 80)
    with pytest.raises(MiningError, match="repeats"):
        Transaction(We, We)
    assert Transaction(Re, We, We).mispredicted
    assert not Transaction(We, Re, We).mispredicted
    assert not Transaction(We, Re).mispredicted
    assert min_count(10, 0.25) == 3
    assert min_count(8, 0.25) == 2


def test_support_and_confidence():
    d = dataset((I, SE), (I, SE), (I, Wo), (We, Re))
    assert itemset_support(d, I.bit) == 3
    assert itemset_support(d, I.bit | SE.bit) == 2
    assert rule_support(d, I.bit, SE.bit) == pytest.approx(0.5)
    assert rule_confidence(d, I.bit, SE.bit) == pytest.approx(2 / 3)
    assert rule_confidence(d, SE.bit, I.bit) == pytest.approx(1.0)
    with pytest.raises(MiningError, match="undefined confidence"):
        rule_confidence(d, Re.bit | I.bit, SE.bit)
    with pytest.raises(MiningError, match="overlaps"):
        rule_support(d, I.bit | SE.bit, SE.bit)


def test_apriori_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        d = random_dataset(rng)
        minsup = float(rng.uniform(0.05, 0.6))
        assert apriori_frequent(d, minsup) == brute_force_frequent(d, minsup)


def test_generated_rules_respect_thresholds():
    rng = np.random.default_rng(11)
    for _ in range(200):
        d = random_dataset(rng)
        mincon = float(rng.uniform(0.3, 0.95))
        book = generate_rules(apriori_frequent(d, 0.1), d, mincon)
        for rule in book:
            assert rule.confidence >= mincon - 1e-12
            assert rule.confidence == pytest.approx(rule_confidence(d, rule.antecedent, rule.consequent))


def test_empty_and_strict_thresholds():
    with pytest.raises(MiningError, match="empty dataset"):
        apriori_frequent(Dataset(()), 0.25)
    diverse = dataset((I, Wo), (We, Re), (SE, Re), (Wo, We))
    assert len(mine(diverse, MiningConfig(minsup=1.0, mincon=0.8))) == 0


def test_max_one_itemset_breaks_ties_by_index():
    d = dataset((We, Re), (Re, We), (I, SE), (Wo, SE))
    assert max_one_itemset(d) == I.bit
    d = dataset((We, Re), (We, I), (Re, We))
    assert max_one_itemset(d) == We.bit


def test_rulebook_order_and_thresholds():
    weak = AssociationRule(I.bit, SE.bit, 0.3, 0.81)
    strong = AssociationRule(Wo.bit, SE.bit, 0.2, 0.95)
    book = RuleBook((weak, strong))
    assert book.rules == (strong, weak)
    with pytest.raises(MiningError, match="thresholds"):
        RuleBook((weak,), config=MiningConfig(minsup=0.25, mincon=0.9))
    with pytest.raises(MiningError, match="overlaps"):
        AssociationRule(I.bit | SE.bit, SE.bit, 0.3, 0.9)


def test_incident_and_workzone_rules_are_rediscovered():
    print("\n" + "=" * 80)
    print("Testing Rule Mining: rediscovery from surrogate classifier transactions")
    print("=" * 80)
    d = generate_transactions(ClassifierConfig(), 250, seed=5, causes=[I, Wo])
    book = mine(d, MiningConfig(minsup=0.25, mincon=0.8))
    found = {(r.antecedent, r.consequent) for r in book}
    for rule in book:
        print(f"  {rule}  support={rule.support:.3f} confidence={rule.confidence:.3f}")
    assert d.N == 500
    assert (I.bit, SE.bit) in found
    assert (Wo.bit, SE.bit) in found


def test_supervised_correction_rules():
    correct = [(We, Re, We)] * 70
    wrong = [(Re, We, We)] * 30
    d = dataset(*(correct + wrong))
    book = mine_supervised(d, MiningConfig(minsup=0.25, mincon=0.8))
    corrections = book.supervised_rules
    assert len(corrections) == 1
    rule = corrections[0]
    assert (rule.antecedent, rule.consequent) == (Re.bit, We.bit)
    assert rule.display_antecedent == parse_mask("We,Re")
    assert rule.support == pytest.approx(1.0)
    assert rule.confidence == pytest.approx(1.0)
    assert str(rule) == "{We,Re} -> {We}"


def test_supervised_confidence_uses_mispredicted_first_guesses():
    wrong = [(Re, We, We)] * 6 + [(Re, SE, SE)] * 2 + [(I, SE, SE)] * 2
    d = dataset(*(wrong + [(SE, I, SE)] * 10))
    corrections = mine_supervised(d, MiningConfig(minsup=0.2, mincon=0.7)).supervised_rules
    by_sides = {(r.antecedent, r.consequent): r for r in corrections}
    rule = by_sides[(Re.bit, We.bit)]
    assert rule.support == pytest.approx(0.6)
    assert rule.confidence == pytest.approx(0.75)
    assert (Re.bit, SE.bit) not in by_sides


def test_supervised_mining_needs_labels():
    with pytest.raises(MiningError, match="transaction 2 is unlabeled"):
        mine_supervised(dataset((We, Re, We), (Re, We)), MiningConfig())

# test_decision_agent.py

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agents.decision_agent import (
    BeaconStats,
    BetaGateConfig,
    BpPhase,
    BpState,
    DecisionError,
    Method,
    Report,
    RpMsg,
    RqMsg,
    beta_gate,
    bf_decide,
    bp_step,
    dat_decide,
    fuse_reports,
    vp_decide,
)
from agents.evidence import Cause, CauseVector
from agents.rule_mining import AssociationRule, RuleBook, dataset_from_vectors, max_one_itemset

I, Wo, We, SE, Re = Cause


def report(sender, p, segment=4, t=100.0) -> Report:
    return Report.from_vector(sender, segment, t, CauseVector(tuple(p)))


RE_FIRST = (0.05, 0.0, 0.3, 0.05, 0.6)
WE_FIRST = (0.05, 0.0, 0.6, 0.05, 0.3)
CORRECTION = RuleBook((AssociationRule(Re.bit, We.bit, 0.4, 0.9, supervised=True),))


def test_method_names():
    assert Method.from_name("beta-dat") is Method.BETA_DAT
    assert Method.from_name("βDAT") is Method.BETA_DAT
    assert Method.from_name("bf") is Method.BF
    assert Method.BETA_DAT.uses_rules and not Method.BF.uses_rules
    assert not Method.BP.cooperative
    with pytest.raises(DecisionError, match="unknown method 'XY'"):
        Method.from_name("XY")


def test_vp_counts_votes_and_breaks_ties_by_index():
    print("\n" + "=" * 80)
    print("Testing Decision Agent: voting")
    print("=" * 80)
    reports = [report(1, RE_FIRST), report(2, RE_FIRST, t=105.0), report(3, WE_FIRST)]
    decision = vp_decide(reports)
    assert decision.cause is Re
    assert decision.confidence == pytest.approx(2 / 3)
    assert decision.decided_at == 105.0
    assert decision.method is Method.VP

    tie = vp_decide([report(1, RE_FIRST), report(2, WE_FIRST)])
    assert tie.cause is We


def test_decisions_need_reports_from_one_segment():
    with pytest.raises(DecisionError, match="no votes"):
        vp_decide([])
    with pytest.raises(DecisionError, match="several segments"):
        bf_decide([report(1, RE_FIRST, segment=1), report(2, RE_FIRST, segment=2)])


def test_bf_fusion_is_permutation_invariant():
    reports = [report(1, RE_FIRST), report(2, RE_FIRST), report(3, WE_FIRST), report(4, (0.1, 0.6, 0.2, 0.05, 0.05))]
    reference = fuse_reports(reports)
    for perm in itertools.permutations(reports):
        assert fuse_reports(list(perm)).p == reference.p
    decision = bf_decide(reports)
    assert decision.cause is reference.top
    assert decision.confidence == pytest.approx(reference[reference.top])


def test_bf_total_conflict_names_reports():
    sure_incident = Report.from_vector(1, 0, 5.0, CauseVector((0.7, 0.3, 0.0, 0.0, 0.0)), ignorance=0.0)
    sure_weather = Report.from_vector(2, 0, 6.0, CauseVector((0.0, 0.0, 0.7, 0.3, 0.0)), ignorance=0.0)
    with pytest.raises(DecisionError, match=r"total conflict among reports \[1@5, 2@6\]"):
        bf_decide([sure_incident, sure_weather], rule="dempster")


def test_dat_applies_correction_when_target_is_reported():
    reports = [report(1, RE_FIRST), report(2, RE_FIRST), report(3, WE_FIRST)]
    betp = fuse_reports(reports)
    assert betp.top is Re
    decision = dat_decide(reports, CORRECTION)
    assert decision.cause is We
    assert decision.confidence == pytest.approx(betp[We])
    assert decision.method is Method.DAT
    assert dat_decide(reports, CORRECTION, method=Method.BETA_DAT).method is Method.BETA_DAT


def test_dat_keeps_bf_winner_without_supporting_report():
    reports = [report(1, RE_FIRST), report(2, RE_FIRST)]
    assert dat_decide(reports, CORRECTION).cause is Re
    assert dat_decide(reports, RuleBook()).cause == bf_decide(reports).cause


def test_vp_winner_matches_max_one_itemset():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        n = int(rng.integers(1, 12))
        vectors = [CauseVector(tuple(rng.dirichlet(np.ones(5)))) for _ in range(n)]
        reports = [Report.from_vector(i, 0, 1.0, v) for i, v in enumerate(vectors)]
        assert vp_decide(reports).cause.bit == max_one_itemset(dataset_from_vectors(vectors))


def test_duplicate_report_keeps_a_clear_vp_winner():
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(2000):
        n = int(rng.integers(2, 10))
        reports = [
            Report.from_vector(i, 0, 1.0, CauseVector(tuple(rng.dirichlet(np.ones(5))))) for i in range(n)
        ]
        counts = sorted(np.bincount([int(r.top) for r in reports], minlength=5), reverse=True)
        if counts[0] - counts[1] < 2:
            continue
        winner = vp_decide(reports).cause
        for duplicate in reports:
            assert vp_decide(reports + [duplicate]).cause is winner
        checked += 1
    assert checked > 100


def test_beta_gate():
    fixed = BetaGateConfig(beta=240.0)
    assert not beta_gate(839.0, 600.0, fixed)
    assert beta_gate(840.0, 600.0, fixed)
    adaptive = BetaGateConfig(adaptive=True)
    assert beta_gate(660.0, 600.0, adaptive, journey_time=30.0)
    assert not beta_gate(659.0, 600.0, adaptive, journey_time=30.0)
    with pytest.raises(DecisionError, match="journey time"):
        beta_gate(700.0, 600.0, adaptive)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=7200.0), st.floats(min_value=0.0, max_value=600.0),
       st.lists(st.floats(min_value=0.0, max_value=3600.0), min_size=2, max_size=10))
def test_beta_gate_stays_open_once_open(onset, beta, offsets):
    cfg = BetaGateConfig(beta=beta)
    opened = False
    for now in sorted(onset + d for d in offsets):
        participate = beta_gate(now, onset, cfg)
        assert participate or not opened
        opened = opened or participate


# --- Back-propagation automaton ---

def stats(travel_time, fft=20.0):
    return BeaconStats(travel_time=travel_time, speed=3.0, demand=4, gap=8.0, free_flow_time=fft)


def test_bp_origin_retains_then_replies():
    state = BpState(vehicle=7, segment=3, retention=480.0)
    state, out = bp_step(state, [stats(30.0)], 100.0, classify=lambda: I)
    assert out == [] and state.phase is BpPhase.IDLE

    state, out = bp_step(state, [stats(41.0)], 101.0, classify=lambda: I)
    assert state.phase is BpPhase.RQ_RETAINED
    assert out == [RqMsg("7:101", 7, 3, I, 101.0)]

    state = state.entered(4)
    state, out = bp_step(state, [stats(5.0)], 580.0, classify=lambda: We)
    assert out == [] and state.phase is BpPhase.RQ_RETAINED

    state, out = bp_step(state, [], 581.0)
    assert out == [RpMsg("7:101", 7, 3, I, 581.0)]
    assert state.phase is BpPhase.RP_PROPAGATED


def test_bp_relays_foreign_requests_once():
    rq = RqMsg("1:50", origin=1, segment=6, cause=Wo, created_at=50.0)
    state = BpState(vehicle=9, segment=5)
    state, out = bp_step(state, [rq], 60.0)
    assert out == [RqMsg("1:50", 1, 6, Wo, 50.0, hops=1)]
    assert state.phase is BpPhase.RQ_RETAINED and state.rq_segment == 6

    state, out = bp_step(state, [rq], 61.0)
    assert out == []
    state, out = bp_step(state, [], 530.0)
    assert out == [RpMsg("1:50", 9, 6, Wo, 530.0)]


def test_bp_spurious_trigger_and_malformed_input():
    state = BpState(vehicle=2, segment=0)
    state, out = bp_step(state, [stats(1.0)], 10.0, classify=lambda: SE, triggered=True)
    assert [m.cause for m in out] == [SE]

    state = BpState(vehicle=3, segment=0)
    bad = BeaconStats(travel_time=math.nan, speed=1.0, demand=0, gap=1.0, free_flow_time=20.0)
    state, out = bp_step(state, [bad, "noise"], 10.0)
    assert state.ignored == 2 and out == []


def test_bp_reply_follows_threshold_crossing_by_retention():
    state = BpState(vehicle=1, segment=6, retention=480.0)
    state, out = bp_step(state, [stats(41.0)], 4440.0, classify=lambda: Wo)
    assert [type(m) for m in out] == [RqMsg]
    for now in (4500.0, 4800.0, 4919.0):
        state, out = bp_step(state, [], now)
        assert out == [] and state.phase is BpPhase.RQ_RETAINED
    state, out = bp_step(state, [], 4920.0)
    assert out == [RpMsg("1:4440", 1, 6, Wo, 4920.0)]

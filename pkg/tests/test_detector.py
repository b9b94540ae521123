import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from topoanomaly.detector import (
    DetectorConfig,
    DetectorState,
    HistoryEntry,
    Label,
    TauMode,
    classify,
    compute_tau,
    make_eta,
    normal_domain,
    run_stream,
    run_stream_with_state,
)
from topoanomaly.metrics import SnapshotMetrics


def stream_of(rs, start=0):
    return [SnapshotMetrics(start + i, 10, 9, 1.0, 4.0, 3.0, 2.0, r) for i, r in enumerate(rs)]


def one_entry_state(r=0.50, eta=(0.46, 0.54)):
    return DetectorState(history=(HistoryEntry(0, r, eta),), total_ticks_seen=1, last_tick=0)


def test_tau_literal():
    assert compute_tau([0.50, 0.52, 0.48], 1.96, TauMode.LITERAL) == pytest.approx(0.5392)


def test_tau_deviation():
    assert compute_tau([0.50, 0.52, 0.48], 1.96) == pytest.approx(0.0392)


def test_tau_single_sample():
    assert compute_tau([0.5], 1.96, "literal") == 0.5
    assert compute_tau([0.5], 1.96, "deviation") == 0.0


def test_tau_empty():
    with pytest.raises(ValueError):
        compute_tau([], 1.96)


def test_make_eta():
    lo, hi = make_eta(0.50, 0.04)
    assert (lo, hi) == pytest.approx((0.46, 0.54))
    assert make_eta(0.50, 0.0) == (0.50, 0.50)
    assert make_eta(0.02, 0.05) == pytest.approx((-0.03, 0.07))
    with pytest.raises(ValueError):
        make_eta(0.5, -0.01)


def test_normal_domain_merges():
    assert normal_domain([(0.46, 0.54), (0.50, 0.58)]) == ((0.46, 0.58),)
    assert normal_domain([(0.4, 0.5), (0.1, 0.2)]) == ((0.1, 0.2), (0.4, 0.5))
    assert normal_domain(DetectorState()) == ()


def test_normal_domain_touching_and_nested():
    assert normal_domain([(0.1, 0.2), (0.2, 0.3), (0.12, 0.15)]) == ((0.1, 0.3),)


CFG = DetectorConfig(k=36, lam=1.96, warmup=1)


def test_classify_in_domain_appends():
    v, state = classify(one_entry_state(), 1, 0.52, CFG)
    assert v.label is Label.NORMAL
    assert [e.r for e in state.history] == [0.50, 0.52]
    assert v.domain == ((0.46, 0.54),)


def test_classify_out_of_domain_keeps_window():
    before = one_entry_state()
    v, state = classify(before, 1, 0.30, CFG)
    assert v.label is Label.ABNORMAL
    assert state.history == before.history
    assert state.total_ticks_seen == 2


def test_classify_first_tick_is_normal():
    v, state = classify(DetectorState(), 0, 0.7, CFG)
    assert v.label is Label.NORMAL
    assert [e.r for e in state.history] == [0.7]
    assert state.history[0].eta == (0.7, 0.7)


def test_classify_degenerate_skipped():
    before = one_entry_state()
    v, state = classify(before, 1, None, CFG)
    assert v.label is Label.SKIPPED
    assert state.history == before.history
    v, _ = classify(before, 1, float("nan"), CFG)
    assert v.label is Label.SKIPPED


def test_classify_rejects_non_increasing_tick():
    with pytest.raises(ValueError):
        classify(one_entry_state(), 0, 0.5, CFG)


def test_appended_range_uses_window_spread():
    state = DetectorState()
    cfg = DetectorConfig(k=5, lam=2.0)
    for t, r in enumerate([0.50, 0.52, 0.48]):
        _, state = classify(state, t, r, cfg)
    # third entry: tau from the two values already in the window
    assert state.history[2].eta == pytest.approx(make_eta(0.48, 2.0 * math.sqrt(0.0002)))


def test_eviction_oldest_first():
    cfg = DetectorConfig(k=3)
    _, state = run_stream_with_state(stream_of([0.5] * 5), cfg)
    assert [e.tick for e in state.history] == [2, 3, 4]


def test_k1_compares_with_previous_normal_only():
    cfg = DetectorConfig(k=1, lam=1.96, tau_mode="literal")
    verdicts, state = run_stream_with_state(stream_of([0.5, 0.9, 1.6]), cfg)
    # eta(0.5) = [0, 1] admits 0.9, whose range [0.9 - 0.5, 0.9 + 0.5] rejects 1.6
    assert [v.label for v in verdicts] == [Label.NORMAL, Label.NORMAL, Label.ABNORMAL]
    assert [e.r for e in state.history] == [0.9]


def test_constant_stream_all_normal():
    for cfg in (DetectorConfig(), DetectorConfig(k=1), DetectorConfig(tau_mode="literal")):
        assert all(v.label is Label.NORMAL for v in run_stream(stream_of([0.5] * 100), cfg))


def test_single_displaced_tick_flagged():
    sigma = 0.01
    rs = [0.5 + (sigma if i % 2 else -sigma) for i in range(100)]
    rs[60] = 0.5 + 10 * sigma
    verdicts = run_stream(stream_of(rs), DetectorConfig(k=36, lam=1.96))
    flagged = [v.tick for v in verdicts if v.label is Label.ABNORMAL]
    assert flagged == [60]


def test_all_degenerate_skipped():
    verdicts = run_stream(stream_of([None] * 20), DetectorConfig())
    assert all(v.label is Label.SKIPPED for v in verdicts)


def test_warmup_defaults_to_k():
    assert DetectorConfig(k=12).warmup_entries == 12
    assert DetectorConfig(k=12, warmup=50).warmup_entries == 12
    assert DetectorConfig(k=12, warmup=3).warmup_entries == 3


def test_single_value_window_locks_deviation_mode():
    # with one entry there is no spread: anything else is rejected for good
    verdicts = run_stream(stream_of([0.5, 0.51, 0.5, 0.49]), DetectorConfig(k=1))
    assert [v.label for v in verdicts] == [Label.NORMAL, Label.ABNORMAL, Label.NORMAL,
                                           Label.ABNORMAL]


def test_unsorted_stream_rejected():
    with pytest.raises(ValueError):
        run_stream(stream_of([0.5, 0.5])[::-1], DetectorConfig())


@pytest.mark.parametrize("kwargs", [{"k": 0}, {"lam": 0}, {"lam": -1}, {"warmup": 0}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        DetectorConfig(**kwargs)


def test_checkpoint_roundtrip_resumes_identically():
    rs = [0.5 + 0.01 * math.sin(i) for i in range(80)]
    rs[50] = 0.9
    cfg = DetectorConfig(k=10, lam=1.5)
    full = run_stream(stream_of(rs), cfg)
    first, state = run_stream_with_state(stream_of(rs[:40]), cfg)
    restored, cfg2 = DetectorState.from_json(state.to_json(cfg))
    assert cfg2 == cfg and restored == state
    rest = run_stream(stream_of(rs[40:], start=40), cfg2, restored)
    assert first + rest == full


def test_checkpoint_version_checked():
    text = DetectorState().to_json(DetectorConfig()).replace('"version": 1', '"version": 99')
    with pytest.raises(ValueError):
        DetectorState.from_json(text)


r_values = st.one_of(st.none(), st.floats(0, 1), st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))


@given(st.lists(r_values, max_size=40), st.integers(1, 6), st.floats(0.1, 3),
       st.floats(1.01, 4), st.sampled_from(["deviation", "literal"]))
@settings(max_examples=300, deadline=None)
def test_first_divergence_under_larger_lambda_is_more_lenient(rs, k, lam, factor, mode):
    """Up to the first tick where two runs disagree their windows hold the same
    ticks, each range under the larger lambda containing its counterpart, so
    that first disagreement can only be an extra NORMAL under the larger lambda."""
    small = run_stream(stream_of(rs), DetectorConfig(k=k, lam=lam, tau_mode=mode))
    large = run_stream(stream_of(rs), DetectorConfig(k=k, lam=lam * factor, tau_mode=mode))
    for a, b in zip(small, large):
        if a.label is not b.label:
            assert (a.label, b.label) == (Label.ABNORMAL, Label.NORMAL)
            break


def test_known_lambda_non_monotone_stream():
    # a larger lambda admits 0.75, which evicts the range around the first 0
    rs = [0, 0.25, 0.5, 0.75, 0]
    small = run_stream(stream_of(rs), DetectorConfig(k=3, lam=1.0))
    large = run_stream(stream_of(rs), DetectorConfig(k=3, lam=2.0))
    assert [v.label.value[0] for v in small] == list("NNNAN")
    assert [v.label.value[0] for v in large] == list("NNNNA")


def test_replace_keeps_validation():
    with pytest.raises(ValueError):
        replace(DetectorConfig(), k=0)

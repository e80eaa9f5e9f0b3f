from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from dyckfold.bitstream import BernoulliGen, CountedBitSource
from dyckfold.core_paths import Path, is_mdyck_path, is_mdyck_prefix, is_mluka, reduced_form
from dyckfold.enumeration import enumerate_all
from dyckfold.sampler import (
    branch_probability,
    run_cost_experiment,
    sample_mdyck,
    sample_mluka,
    sample_paths,
    sample_prefix,
)
from dyckfold.stats import RunningStats


def row_counts(rows):
    return Counter(bytes(r) for r in rows)


def key(p: Path) -> bytes:
    return p.steps.tobytes()


def test_length_one_is_always_down():
    src = CountedBitSource(7)
    for _ in range(20):
        assert str(sample_mluka(1, 1, src).path) == "D"


def test_empty_dyck_path():
    assert len(sample_mdyck(1, 0, CountedBitSource(0)).path) == 0


def test_rejects_bad_lengths():
    with pytest.raises(ValueError):
        sample_mluka(2, 9, CountedBitSource(0))
    with pytest.raises(ValueError):
        sample_mdyck(2, 7, CountedBitSource(0))
    with pytest.raises(ValueError):
        sample_mluka(2, 5, CountedBitSource(0), BernoulliGen(3))


@pytest.mark.parametrize("m,n,runs", [(2, 8, 35_000), (1, 5, 20_000), (3, 9, 60_000)])
def test_mluka_uniform(m, n, runs):
    rows = sample_paths(m, n, runs, CountedBitSource(100 + n))
    counts = row_counts(rows)
    support = [key(p) for p in enumerate_all(m, n, "mluka")]
    assert set(counts) == set(support)
    assert stats.chisquare([counts[s] for s in support]).pvalue > 1e-3


def test_mdyck_uniform():
    src = CountedBitSource(44)
    counts = Counter(str(sample_mdyck(1, 4, src).path) for _ in range(6000))
    assert set(counts) == {"UUDD", "UDUD"}
    assert stats.chisquare(list(counts.values())).pvalue > 1e-3


@pytest.mark.parametrize("m,i", [(2, 4), (2, 7), (3, 6), (1, 6)])
def test_loop_invariant_distribution(m, i):
    # after i iterations the prefix has probability proportional to m**h_bar
    runs = 40_000
    rows = sample_paths(m, i, runs, CountedBitSource(7 * i + m), fold=False)
    counts = row_counts(rows)
    prefixes = enumerate_all(m, i, "mdyck_prefix")
    weights = np.array([m ** reduced_form(p).h_bar for p in prefixes], dtype=float)
    assert set(counts) <= {key(p) for p in prefixes}
    observed = [counts[key(p)] for p in prefixes]
    assert stats.chisquare(observed, weights / weights.sum() * runs).pvalue > 1e-3


def test_samples_lie_in_their_families():
    src = CountedBitSource(3)
    for n in (1, 2, 4, 5, 101, 1000):
        assert is_mluka(sample_mluka(2, n, src).path)
        assert is_mdyck_prefix(sample_prefix(2, n, src).path)
    for t in range(1, 30):
        assert is_mdyck_path(sample_mdyck(3, 4 * t, src).path)


@given(st.integers(1, 4), st.integers(1, 400), st.integers(0, 2**40))
def test_access_accounting(m, n, seed):
    rep = sample_prefix(m, n, CountedBitSource(seed))
    unfolds = sum(i - pt + 1 for i, pt in rep.unfold_events)
    assert rep.memory_accesses == n + unfolds
    assert rep.height_final == rep.path.height and rep.point == 0
    if n % (m + 1):
        rep = sample_mluka(m, n, CountedBitSource(seed))
        unfolds = sum(i - pt + 1 for i, pt in rep.unfold_events)
        assert rep.memory_accesses == n + unfolds + (n - rep.point + 1)


@given(st.integers(1, 3), st.integers(1, 300), st.integers(0, 2**40))
def test_deterministic_for_fixed_seed(m, n, seed):
    if n % (m + 1) == 0:
        n += 1
    a = sample_mluka(m, n, CountedBitSource(seed), BernoulliGen(m, 3))
    b = sample_mluka(m, n, CountedBitSource(seed), BernoulliGen(m, 3))
    assert (a.path, a.bits_consumed, a.memory_accesses, a.unfold_events) == (
        b.path,
        b.bits_consumed,
        b.memory_accesses,
        b.unfold_events,
    )


def test_unfold_events_only_when_height_negative():
    rep = sample_prefix(2, 500, CountedBitSource(12))
    for i, pt in rep.unfold_events:
        assert 1 <= pt <= i and i % 3 != 0


def test_m1_bits_are_steps_plus_small_overhead():
    t = run_cost_experiment(1, 10_001, 200, CountedBitSource(2))
    assert np.all(t.bits >= 10_001)
    assert t.bits.mean() - 10_001 < 200


def test_branch_law_small():
    m, n, runs = 2, 40, 30_000
    t = run_cost_experiment(m, n, runs, CountedBitSource(77), fold=False)
    for i in range(1, n + 1):
        p = branch_probability(m, i)
        hits = t.branch_counts[i]
        if p == 0:
            assert hits == 0
        else:
            assert abs(hits - runs * p) < 4 * np.sqrt(runs * p * (1 - p))


def test_branch_probability_values():
    assert branch_probability(2, 3) == 0
    assert branch_probability(2, 1) == pytest.approx(1 / 3)
    assert branch_probability(1, 5) == pytest.approx(1 / 6)


def test_cost_table_merge():
    a = run_cost_experiment(2, 101, 30, CountedBitSource(1))
    b = run_cost_experiment(2, 101, 20, CountedBitSource(2))
    c = a.merge(b)
    assert c.samples == 50
    assert c.access_stats.mean == pytest.approx(np.concatenate([a.accesses, b.accesses]).mean() / 101)
    assert c.bits_stats.variance == pytest.approx(np.var(np.concatenate([a.bits, b.bits]) / 101, ddof=1))
    with pytest.raises(ValueError):
        a.merge(run_cost_experiment(2, 100, 2, CountedBitSource(1)))


def test_cost_experiment_is_chunk_invariant():
    a = run_cost_experiment(3, 1001, 25, CountedBitSource(9), chunk=4)
    b = run_cost_experiment(3, 1001, 25, CountedBitSource(9), chunk=1000)
    assert np.array_equal(a.accesses, b.accesses) and np.array_equal(a.bits, b.bits)


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200), st.integers(0, 200))
def test_running_stats(xs, cut):
    cut = min(cut, len(xs))
    s = RunningStats()
    for x in xs[:cut]:
        s.push(x)
    s.extend(xs[cut:])
    assert s.count == len(xs)
    assert s.mean == pytest.approx(np.mean(xs), rel=1e-9, abs=1e-6)
    assert s.variance == pytest.approx(np.var(xs, ddof=1), rel=1e-7, abs=1e-3)

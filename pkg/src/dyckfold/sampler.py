"""Uniform m-Lukasiewicz and m-Dyck path sampling by anticipated unfolding.

Each iteration appends a random step; whenever the height goes negative the
current path is pointed uniformly at random and unfolded, which keeps it an
m-Dyck prefix distributed proportionally to ``m**h_bar``. At the end a
uniform decoration is drawn and the path is folded.

Memory accesses are tallied as: one per step written, plus one per cell in
the suffix touched by each unfold and by the final fold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .bijection import fold_inplace, unfold_inplace
from .bitstream import (
    BernoulliGen,
    CountedBitSource,
    draw_decoration_k,
    draw_step_k,
    draw_uniform_k,
)
from .core_paths import Path
from .stats import RunningStats


@njit(cache=True, _nrt=False)
def _sample_core(m, n, st, gen, steps, dec, ev_i, ev_pt, branch, do_fold, record):
    meta, mult, binom, col_leaves, digit_table, rem, digits, rem_tail = gen
    bits0 = st[6]
    acc = 0
    h = 0
    nev = 0
    for i in range(1, n + 1):
        s = draw_step_k(st, meta, mult, binom, col_leaves, digit_table, rem, digits, rem_tail)
        steps[i - 1] = s
        acc += 1
        if s == 1:
            h += 1
        else:
            h -= m
        if h < 0:
            pt = draw_uniform_k(st, i)
            a, k = unfold_inplace(steps, i, m, pt - 1, dec, False)
            acc += a
            h += k * (m + 1)
            if record:
                ev_i[nev] = i
                ev_pt[nev] = pt
            nev += 1
            if i < branch.size:
                branch[i] += 1
    h_pre = h
    point = 0
    if do_fold:
        r = n % (m + 1)
        h_bar = (h - r) // (m + 1)
        draw_decoration_k(st, m, h_bar, r, dec)
        a, start = fold_inplace(steps, n, m, dec, h_bar)
        acc += a
        point = start + 1
    bits = np.int64(st[6] - bits0)
    return bits, acc, nev, h_pre, point


@njit(cache=True, _nrt=False)
def _cost_batch(m, n, samples, st, gen, steps, dec, branch, out_r, out_m, out_h, dummy, do_fold):
    for s in range(samples):
        b, a, _, hp, _ = _sample_core(m, n, st, gen, steps, dec, dummy, dummy, branch, do_fold, False)
        out_r[s] = b
        out_m[s] = a
        out_h[s] = hp


@njit(cache=True, _nrt=False)
def _paths_batch(m, n, st, gen, dec, out, dummy, do_fold):
    for s in range(out.shape[0]):
        _sample_core(m, n, st, gen, out[s], dec, dummy, dummy, dummy, do_fold, False)


@dataclass
class SampleReport:
    path: Path
    bits_consumed: int
    memory_accesses: int
    unfold_events: list[tuple[int, int]]
    height_final: int  # height of the prefix just before the final fold
    point: int = 0  # pointed step after the final fold, 0 if no fold ran


def _check_mluka_length(m: int, n: int) -> None:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % (m + 1) == 0:
        raise ValueError(f"no m-Lukasiewicz path has length {n} divisible by m+1={m + 1}")


def _gen_for(m: int, gen: BernoulliGen | None) -> BernoulliGen:
    if gen is None:
        return BernoulliGen(m)
    if gen.m != m:
        raise ValueError(f"generator built for m={gen.m}, sampling with m={m}")
    return gen


def _run(m: int, n: int, src: CountedBitSource, gen: BernoulliGen, do_fold: bool) -> SampleReport:
    steps = np.zeros(n, dtype=np.uint8)
    dec = np.zeros(n + 1, dtype=np.int64)
    ev_i = np.zeros(max(n, 1), dtype=np.int64)
    ev_pt = np.zeros(max(n, 1), dtype=np.int64)
    bits, acc, nev, h_pre, point = _sample_core(
        m, n, src.state, gen.arrays, steps, dec, ev_i, ev_pt, np.zeros(1, np.int64), do_fold, True
    )
    events = list(zip(ev_i[:nev].tolist(), ev_pt[:nev].tolist()))
    return SampleReport(Path._from_array(steps, m), int(bits), int(acc), events, int(h_pre), int(point))


def sample_mluka(m: int, n: int, src: CountedBitSource, gen: BernoulliGen | None = None) -> SampleReport:
    """Uniformly random m-Lukasiewicz path of length n."""
    _check_mluka_length(m, n)
    return _run(m, n, src, _gen_for(m, gen), True)


def sample_mdyck(m: int, n: int, src: CountedBitSource, gen: BernoulliGen | None = None) -> SampleReport:
    """Uniformly random m-Dyck path of length n (sampled at n+1, final D dropped)."""
    if n < 0 or n % (m + 1) != 0:
        raise ValueError(f"m-Dyck paths need length divisible by m+1={m + 1}, got {n}")
    rep = sample_mluka(m, n + 1, src, gen)
    if rep.path.steps[-1] != 0:
        raise AssertionError("last step of an m-Lukasiewicz path must be D")
    rep.path = rep.path[:-1]
    return rep


def sample_prefix(m: int, n: int, src: CountedBitSource, gen: BernoulliGen | None = None) -> SampleReport:
    """Run only the main loop: an m-Dyck prefix with probability proportional to m**h_bar."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return _run(m, n, src, _gen_for(m, gen), False)


def sample_paths(
    m: int, n: int, count: int, src: CountedBitSource, gen: BernoulliGen | None = None, *, fold: bool = True
) -> np.ndarray:
    """``count`` independent samples as rows of a uint8 array (1 = U).

    With ``fold=False`` rows are loop-only prefixes, as in ``sample_prefix``.
    """
    if fold:
        _check_mluka_length(m, n)
    out = np.zeros((int(count), n), dtype=np.uint8)
    dec = np.zeros(n + 1, dtype=np.int64)
    _paths_batch(m, n, src.state, _gen_for(m, gen).arrays, dec, out, np.zeros(1, np.int64), fold)
    return out


@dataclass
class CostTable:
    m: int
    n: int
    bits: np.ndarray
    accesses: np.ndarray
    heights: np.ndarray  # pre-fold heights
    branch_counts: np.ndarray  # branch_counts[i] = runs where the unfold branch fired at step i
    bits_stats: RunningStats = field(default_factory=RunningStats)
    access_stats: RunningStats = field(default_factory=RunningStats)

    @property
    def samples(self) -> int:
        return int(self.bits.size)

    @property
    def branch_frequency(self) -> np.ndarray:
        return self.branch_counts / self.samples

    def merge(self, other: "CostTable") -> "CostTable":
        if (self.m, self.n) != (other.m, other.n):
            raise ValueError("cannot merge cost tables for different (m, n)")
        return CostTable(
            self.m,
            self.n,
            np.concatenate([self.bits, other.bits]),
            np.concatenate([self.accesses, other.accesses]),
            np.concatenate([self.heights, other.heights]),
            self.branch_counts + other.branch_counts,
            RunningStats(**vars(self.bits_stats)).merge(other.bits_stats),
            RunningStats(**vars(self.access_stats)).merge(other.access_stats),
        )


def branch_probability(m: int, i: int) -> float:
    """Probability that the unfold branch fires at iteration i: r / (m i + r)."""
    r = i % (m + 1)
    return r / (m * i + r)


def run_cost_experiment(
    m: int,
    n: int,
    samples: int,
    src: CountedBitSource,
    gen: BernoulliGen | None = None,
    *,
    fold: bool = True,
    chunk: int = 1000,
) -> CostTable:
    """Per-run bit and memory-access costs over ``samples`` independent runs."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if fold:
        _check_mluka_length(m, n)
    gen = _gen_for(m, gen)
    steps = np.zeros(n, dtype=np.uint8)
    dec = np.zeros(n + 1, dtype=np.int64)
    branch = np.zeros(n + 1, dtype=np.int64)
    bits = np.zeros(samples, dtype=np.int64)
    acc = np.zeros(samples, dtype=np.int64)
    hts = np.zeros(samples, dtype=np.int64)
    dummy = np.zeros(1, dtype=np.int64)
    table = CostTable(m, n, bits, acc, hts, branch)
    for lo in range(0, samples, chunk):
        hi = min(samples, lo + chunk)
        _cost_batch(
            m, n, hi - lo, src.state, gen.arrays, steps, dec, branch, bits[lo:hi], acc[lo:hi], hts[lo:hi], dummy, fold
        )
        table.bits_stats.extend(bits[lo:hi] / n)
        table.access_stats.extend(acc[lo:hi] / n)
    return table

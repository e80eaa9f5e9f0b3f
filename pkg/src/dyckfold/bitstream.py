"""Counted unbiased bits and exact discrete generators driven by them.

The source is xoshiro256** served one bit at a time; every bit handed out
increments ``bits_consumed``. The generators never touch floating point:

* steps are drawn with a Knuth-Yao walk over the binary expansions of the
  rationals ``m**c / (m+1)**g`` (``g`` steps drawn jointly, ``c`` of them U);
* uniform integers use Lumbroso's Fast Dice Roller.

Both walks are written as single-bit transition functions (``fdr_update``,
and ``ddg_table_resolve`` over precomputed columns with ``ddg_resolve`` past
them) so their leaf masses can be enumerated exactly in tests.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import comb

import numpy as np
from numba import njit

from .core_paths import StepKind

MAX_GROUPING = 16
DDG_TABLE_DEPTH = 64

_ZERO = np.uint64(0)
_ONE = np.uint64(1)
_SIXTYFOUR = np.uint64(64)
_S17 = np.uint64(17)
_S7 = np.uint64(7)
_S57 = np.uint64(57)
_S45 = np.uint64(45)
_S19 = np.uint64(19)
_FIVE = np.uint64(5)
_NINE = np.uint64(9)

# state layout: s0..s3, bit buffer, bits left in buffer, bits consumed
_STATE_SIZE = 7


def _splitmix64(x: int) -> tuple[int, int]:
    mask = (1 << 64) - 1
    x = (x + 0x9E3779B97F4A7C15) & mask
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return x, z ^ (z >> 31)


def seed_state(seed: int) -> np.ndarray:
    st = np.zeros(_STATE_SIZE, dtype=np.uint64)
    x = int(seed) & ((1 << 64) - 1)
    for i in range(4):
        x, st[i] = _splitmix64(x)
    return st


@njit(cache=True, _nrt=False)
def next64(st):
    s0 = st[0]
    s1 = st[1]
    s2 = st[2]
    s3 = st[3]
    x = s1 * _FIVE
    result = ((x << _S7) | (x >> _S57)) * _NINE
    t = s1 << _S17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << _S45) | (s3 >> _S19)
    st[0] = s0
    st[1] = s1
    st[2] = s2
    st[3] = s3
    return result


@njit(cache=True, _nrt=False)
def next_bit_k(st):
    if st[5] == _ZERO:
        st[4] = next64(st)
        st[5] = _SIXTYFOUR
    b = st[4] & _ONE
    st[4] = st[4] >> _ONE
    st[5] = st[5] - _ONE
    st[6] = st[6] + _ONE
    return np.int64(b)


@njit(cache=True, _nrt=False)
def fill_bits_k(st, out):
    for i in range(out.size):
        out[i] = next_bit_k(st)


class CountedBitSource:
    """Seedable stream of fair bits with an exact consumption counter.

    Single owner: do not share one instance between threads.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.state = seed_state(self.seed)

    @property
    def bits_consumed(self) -> int:
        return int(self.state[6])

    def next_bit(self) -> int:
        return int(next_bit_k(self.state))

    def bits(self, k: int) -> np.ndarray:
        out = np.empty(int(k), dtype=np.int64)
        fill_bits_k(self.state, out)
        return out

    def spawn(self, key: int) -> "CountedBitSource":
        """Independent source derived from this one's seed and ``key``."""
        _, z = _splitmix64(self.seed ^ _splitmix64(int(key))[1])
        return CountedBitSource(z)


# -- Knuth-Yao ---------------------------------------------------------------


@njit(cache=True, _nrt=False)
def ddg_digits(rem, denom, digits):
    """Advance every row one binary digit: digit = floor(2*rem / denom)."""
    for c in range(rem.size):
        r = rem[c] * 2
        if r >= denom:
            digits[c] = 1
            rem[c] = r - denom
        else:
            digits[c] = 0
            rem[c] = r


@njit(cache=True, _nrt=False)
def ddg_resolve(mult, digits, d):
    """Place walker ``d`` (already shifted by the new bit) in the current column.

    Row class ``c`` contributes ``mult[c] * digits[c]`` leaves. Returns
    ``(c, index_within_class, d)`` on a leaf, ``(-1, 0, d_internal)`` otherwise.
    """
    for c in range(mult.size):
        if digits[c] != 0:
            if d < mult[c]:
                return c, d, d
            d -= mult[c]
    return -1, 0, d


@njit(cache=True, _nrt=False)
def ddg_table_resolve(col, d, col_leaves, digit_table, mult):
    """Like ``ddg_resolve`` for a precomputed column ``col``."""
    if d >= col_leaves[col]:
        return -1, 0, d - col_leaves[col]
    for c in range(mult.size):
        if digit_table[col, c] != 0:
            if d < mult[c]:
                return c, d, d
            d -= mult[c]
    return -1, 0, d  # unreachable: col_leaves == digit_table @ mult


@njit(cache=True, _nrt=False)
def ddg_table_walk(st, mult, col_leaves, digit_table):
    """Walk the precomputed columns. Returns ``(c, j)`` or ``(-1, d)`` if the table ran out."""
    d = 0
    for col in range(col_leaves.size):
        c, j, d = ddg_table_resolve(col, 2 * d + next_bit_k(st), col_leaves, digit_table, mult)
        if c >= 0:
            return c, j
    return -1, d


@njit(cache=True, _nrt=False)
def ddg_tail_walk(st, d, mult, denom, rem, digits, rem_tail):
    """Continue past the table with exact remainder arithmetic (probability < 2**-50)."""
    for c in range(rem.size):
        rem[c] = rem_tail[c]
    while True:
        ddg_digits(rem, denom, digits)
        d = 2 * d + next_bit_k(st)
        c, j, d = ddg_resolve(mult, digits, d)
        if c >= 0:
            return c, j


@njit(cache=True, _nrt=False)
def unrank_group(g, c, j, binom):
    """j-th (lexicographic) g-step word with exactly c U steps, as a bitmask."""
    bits = 0
    for t in range(g):
        rest = g - t - 1
        z = binom[rest, c]
        if j >= z:
            j -= z
            bits |= 1 << t
            c -= 1
    return bits


@njit(cache=True, _nrt=False)
def draw_step_k(st, meta, mult, binom, col_leaves, digit_table, rem, digits, rem_tail):
    """Next step (1 = U, 0 = D); ``meta`` is [denom, g, buffered word, buffered count]."""
    if meta[3] == 0:
        c, j = ddg_table_walk(st, mult, col_leaves, digit_table)
        if c < 0:
            c, j = ddg_tail_walk(st, j, mult, meta[0], rem, digits, rem_tail)
        meta[2] = unrank_group(meta[1], c, j, binom)
        meta[3] = meta[1]
    s = meta[2] & 1
    meta[2] >>= 1
    meta[3] -= 1
    return s


@njit(cache=True, _nrt=False)
def draw_steps_k(st, meta, mult, binom, col_leaves, digit_table, rem, digits, rem_tail, out):
    for i in range(out.size):
        out[i] = draw_step_k(st, meta, mult, binom, col_leaves, digit_table, rem, digits, rem_tail)


class BernoulliGen:
    """Exact generator of steps: D with probability 1/(m+1), U otherwise.

    With ``grouping=g`` the g-fold product distribution is sampled in one
    Knuth-Yao walk and the resulting steps are served from a buffer.
    """

    def __init__(self, m: int, grouping: int = 1, table_depth: int = DDG_TABLE_DEPTH):
        m, g = int(m), int(grouping)
        if m < 1:
            raise ValueError("m must be >= 1")
        if not 1 <= g <= MAX_GROUPING:
            raise ValueError(f"grouping must be in [1, {MAX_GROUPING}]")
        denom = (m + 1) ** g
        if 2 * denom >= 2**63:
            raise ValueError("(m+1)**grouping too large for exact 64-bit walk")
        self.m = m
        self.grouping = g
        self.denom = denom
        numer = np.array([m**c for c in range(g + 1)], dtype=np.int64)
        mult = np.array([comb(g, c) for c in range(g + 1)], dtype=np.int64)
        binom = np.array([[comb(a, b) for b in range(g + 1)] for a in range(g + 1)], dtype=np.int64)
        rem = np.zeros(g + 1, dtype=np.int64)
        digits = np.zeros(g + 1, dtype=np.int64)
        meta = np.array([denom, g, 0, 0], dtype=np.int64)
        # first ``table_depth`` columns of the tree, and the remainders after them
        depth = max(int(table_depth), 1)
        digit_table = np.zeros((depth, g + 1), dtype=np.int64)
        rem_tail = numer.copy()
        for col in range(depth):
            ddg_digits(rem_tail, denom, digits)
            digit_table[col] = digits
        col_leaves = digit_table @ mult
        self.table_depth = depth
        self.numer = numer
        # argument order of draw_step_k after the bit state
        self.arrays = (meta, mult, binom, col_leaves, digit_table, rem, digits, rem_tail)

    def reset(self) -> None:
        """Drop buffered steps."""
        self.arrays[0][2:] = 0

    def class_probability(self, c: int) -> Fraction:
        """Probability of one specific g-step word with c U steps."""
        return Fraction(self.m**c, self.denom)

    def group_entropy(self) -> float:
        return self.grouping * step_entropy(self.m)


def step_entropy(m: int) -> float:
    p = 1.0 / (m + 1)
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def draw_step(gen: BernoulliGen, src: CountedBitSource) -> StepKind:
    return StepKind(int(draw_step_k(src.state, *gen.arrays)))


def draw_steps(gen: BernoulliGen, src: CountedBitSource, k: int) -> np.ndarray:
    out = np.empty(int(k), dtype=np.int64)
    draw_steps_k(src.state, *gen.arrays, out)
    return out


def ddg_leaf_mass(gen: BernoulliGen, depth: int) -> tuple[dict[tuple[int, int], Fraction], Fraction, Fraction]:
    """Exact leaf masses of the step-group DDG tree down to ``depth`` bits.

    Pushes every bit string through the same column functions the sampler
    uses (table columns, then remainder arithmetic). Returns
    ``(mass[(c, j)], unresolved_mass, expected_bits_truncated)``.
    """
    meta, mult, _, col_leaves, digit_table, _, _, rem_tail = gen.arrays
    rem = rem_tail.copy()
    digits = np.zeros_like(mult)
    frontier = {0: Fraction(1)}
    mass: dict[tuple[int, int], Fraction] = {}
    expected = Fraction(0)
    for col in range(depth):
        if col >= col_leaves.size:
            ddg_digits(rem, meta[0], digits)
        nxt: dict[int, Fraction] = {}
        for d, w in frontier.items():
            half = w / 2
            for bit in (0, 1):
                if col < col_leaves.size:
                    c, j, d2 = ddg_table_resolve(col, 2 * d + bit, col_leaves, digit_table, mult)
                else:
                    c, j, d2 = ddg_resolve(mult, digits, 2 * d + bit)
                if c >= 0:
                    mass[(c, j)] = mass.get((c, j), Fraction(0)) + half
                    expected += (col + 1) * half
                else:
                    nxt[d2] = nxt.get(d2, Fraction(0)) + half
        frontier = nxt
    return mass, sum(frontier.values(), Fraction(0)), expected


# -- uniform integers ---------------------------------------------------------


@njit(cache=True, _nrt=False)
def fdr_update(v, c, k, bit):
    """One Fast Dice Roller step; returns (v, c, outcome) with outcome 0 = continue."""
    v = 2 * v
    c = 2 * c + bit
    if v >= k:
        if c < k:
            return v, c, c + 1
        v -= k
        c -= k
    return v, c, 0


@njit(cache=True, _nrt=False)
def draw_uniform_k(st, k):
    if k == 1:
        return 1
    v = 1
    c = 0
    while True:
        v, c, res = fdr_update(v, c, k, next_bit_k(st))
        if res != 0:
            return res


@njit(cache=True, _nrt=False)
def draw_decoration_k(st, m, h_bar, r, out):
    for i in range(h_bar):
        out[i] = draw_uniform_k(st, m)
    out[h_bar] = draw_uniform_k(st, r)


def draw_uniform(src: CountedBitSource, k: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    return int(draw_uniform_k(src.state, int(k)))


def draw_decoration(src: CountedBitSource, m: int, h_bar: int, r: int) -> tuple[int, ...]:
    if r < 1 or h_bar < 0:
        raise ValueError("need r >= 1 and h_bar >= 0")
    out = np.empty(h_bar + 1, dtype=np.int64)
    draw_decoration_k(src.state, m, h_bar, r, out)
    return tuple(int(a) for a in out)


def fdr_leaf_mass(k: int, depth: int) -> tuple[dict[int, Fraction], Fraction]:
    """Exact outcome masses of the dice roller for ``k`` after ``depth`` bits."""
    if k == 1:
        return {1: Fraction(1)}, Fraction(0)
    frontier = {(1, 0): Fraction(1)}
    mass: dict[int, Fraction] = {}
    for _ in range(depth):
        nxt: dict[tuple[int, int], Fraction] = {}
        for (v, c), w in frontier.items():
            for bit in (0, 1):
                v2, c2, res = fdr_update(v, c, k, bit)
                if res:
                    mass[res] = mass.get(res, Fraction(0)) + w / 2
                else:
                    nxt[(v2, c2)] = nxt.get((v2, c2), Fraction(0)) + w / 2
        frontier = nxt
    return mass, sum(frontier.values(), Fraction(0))

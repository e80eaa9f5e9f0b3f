"""Exact counts of m-Lukasiewicz paths and m-Dyck prefixes, plus generators.

Everything here is exact integer arithmetic; these functions are the ground
truth the sampler and the bijection are checked against.
"""

from __future__ import annotations

from math import comb
from typing import Literal

import numpy as np

from .core_paths import Path

Family = Literal["mdyck_prefix", "mluka", "mdyck_path"]
FAMILIES = ("mdyck_prefix", "mluka", "mdyck_path")

MAX_EXHAUSTIVE_N = 24


def _nbar_r(m: int, n: int) -> tuple[int, int]:
    return divmod(n, m + 1)


def luka_count(m: int, n: int) -> int:
    """Number of m-Lukasiewicz paths of length n: (r/n) * C(n, n_bar)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    n_bar, r = _nbar_r(m, n)
    if r == 0:
        return 0
    num = r * comb(n, n_bar)
    q, rem = divmod(num, n)
    assert rem == 0, (m, n)
    return q


def prefix_weighted_count(m: int, n: int) -> int:
    """Sum of m**h_bar over m-Dyck prefixes of length n, i.e. C(n, n_bar)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return comb(n, _nbar_r(m, n)[0])


def fuss_catalan(m: int, t: int) -> int:
    """Number of m-Dyck paths of length (m+1)t."""
    q, rem = divmod(comb((m + 1) * t, t), m * t + 1)
    assert rem == 0
    return q


def prefix_polynomial(m: int, n: int) -> list[int]:
    """Coefficients of P_n(u) = sum over prefixes of u**h_bar, lowest degree first.

    Dynamic programming over (length, height).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    counts = [1]  # counts[h] = prefixes of current length with height h
    for _ in range(n):
        nxt = [0] * (len(counts) + 1)
        for h, c in enumerate(counts):
            if c:
                nxt[h + 1] += c
                if h >= m:
                    nxt[h - m] += c
        counts = nxt
    r = n % (m + 1)
    poly = [0] * ((n - r) // (m + 1) + 1)
    for h, c in enumerate(counts):
        if c:
            poly[(h - r) // (m + 1)] += c
    return poly


def poly_eval(poly: list[int], u: int) -> int:
    acc = 0
    for c in reversed(poly):
        acc = acc * u + c
    return acc


def dyck_path_count(m: int, n: int) -> int:
    t, r = _nbar_r(m, n)
    return fuss_catalan(m, t) if r == 0 else 0


def enumerate_all(m: int, n: int, family: Family, max_n: int = MAX_EXHAUSTIVE_N) -> list[Path]:
    """All paths of length n in ``family``, lexicographic in the U/D alphabet (D < U)."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if n > max_n:
        raise ValueError(f"n={n} exceeds exhaustive bound {max_n}")
    out: list[Path] = []
    buf = np.zeros(n, dtype=np.uint8)

    def rec(i: int, h: int) -> None:
        if i == n:
            out.append(Path(buf, m))
            return
        left = n - i - 1  # steps remaining after this one
        for s in (0, 1):
            nh = h + 1 if s else h - m
            if family == "mluka":
                if left == 0:
                    if nh >= 0:
                        continue
                elif nh < 0 or nh >= m * left:
                    continue
            elif nh < 0 or (family == "mdyck_path" and nh > m * left):
                continue
            buf[i] = s
            rec(i + 1, nh)

    if n == 0:
        return [Path([], m)] if family != "mluka" else []
    rec(0, 0)
    return out


def brute_force_counts(m: int, n: int) -> dict[str, int]:
    """Classify all 2**n step words directly from the definitions.

    Returns counts of m-Dyck prefixes, m-Lukasiewicz paths, m-Dyck paths and
    the weighted prefix sum of m**h_bar. Independent of ``enumerate_all``.
    """
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"n={n} exceeds exhaustive bound {MAX_EXHAUSTIVE_N}")
    if n == 0:
        return {"mdyck_prefix": 1, "mluka": 0, "mdyck_path": 1, "weighted_prefix": 1}
    words = np.arange(1 << n, dtype=np.int64)
    bits = (words[:, None] >> np.arange(n, dtype=np.int64)) & 1
    inc = np.where(bits == 1, 1, -m).astype(np.int64)
    heights = np.cumsum(inc, axis=1)
    final = heights[:, -1]
    prefix = heights.min(axis=1) >= 0
    proper_ok = heights[:, :-1].min(axis=1) >= 0 if n > 1 else np.ones(len(words), bool)
    luka = proper_ok & (final < 0)
    dyck = prefix & (final == 0)
    r = n % (m + 1)
    h_bars = (final[prefix] - r) // (m + 1)
    weighted = sum(m ** int(hb) * int(c) for hb, c in zip(*np.unique(h_bars, return_counts=True)))
    return {
        "mdyck_prefix": int(prefix.sum()),
        "mluka": int(luka.sum()),
        "mdyck_path": int(dyck.sum()),
        "weighted_prefix": weighted,
    }

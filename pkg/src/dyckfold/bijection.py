"""Folding between decorated m-Dyck prefixes and pointed m-Lukasiewicz paths.

Writing a decorated prefix as ``w = p U q_0 U q_1 ... U q_k`` (each ``U q_i``
of height ``a_i``), folding yields ``p q_0 D q_1 D ... q_k D`` pointed at
index ``|p| + 1``. Unfolding inverts it by peeling off the shortest
m-Lukasiewicz prefixes of the suffix that starts at the point.

Both directions are in-place rotations of that suffix by one cell, with the
factor boundary steps flipped, so each touches exactly ``n - |p|`` cells.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core_paths import DecoratedPrefix, Path, PathError, PointedLuka, reduced_form


@njit(cache=True, _nrt=False)
def unfold_inplace(steps, length, m, start, dec_out, record):
    """Unfold ``steps[:length]`` cut before ``start`` (0-based).

    Returns ``(accesses, n_factors)``. Factor heights ``a_i`` are written to
    ``dec_out`` when ``record`` is set. Only cells ``start..length-1`` are read
    or written, once each.
    """
    carry = 1
    h = 0
    k = 0
    for j in range(start, length):
        s = steps[j]
        steps[j] = carry
        if s == 1:
            h += 1
            carry = 1
        else:
            h -= m
            if h < 0:
                # s closes a factor q_i D: it becomes the U opening the next one
                if record:
                    dec_out[k] = h + m + 1
                k += 1
                h = 0
                carry = 1
            else:
                carry = 0
    if h != 0 or carry != 1:
        raise ValueError("suffix is not a product of m-Lukasiewicz factors")
    return length - start, k


@njit(cache=True, _nrt=False)
def fold_inplace(steps, length, m, dec, k):
    """Fold ``steps[:length]`` with decoration ``dec[0..k]``.

    Returns ``(accesses, start)`` where ``start`` is the 0-based index of the
    pointed step. Scans right to left, touching cells ``start..length-1`` once.
    """
    i = k
    target = dec[i]
    h = 0
    carry = 0
    j = length - 1
    while j >= 0:
        s = steps[j]
        steps[j] = carry
        if s == 1:
            h += 1
            if h == target:
                # s opens U q_i; it turns into the D closing the previous factor
                carry = 0
                i -= 1
                if i < 0:
                    return length - j, j
                target = dec[i]
                h = 0
            else:
                carry = 1
        else:
            h -= m
            carry = 0
        j -= 1
    raise ValueError("decoration inconsistent with path")


def factorize_prefix(w: DecoratedPrefix) -> tuple[Path, list[Path]]:
    """Split ``w = p U q_0 ... U q_k`` with ``height(U q_i) = a_i``.

    Single right-to-left scan: ``U q_k`` is the shortest suffix of height
    ``a_k``, then repeat on what is left.
    """
    steps = w.path.steps
    m = w.path.m
    cuts = []
    end = len(steps)
    h = 0
    j = end - 1
    for a in reversed(w.decoration):
        while True:
            if j < 0:
                raise PathError("decoration inconsistent with path")
            h += 1 if steps[j] else -m
            if steps[j] and h == a:
                break
            j -= 1
        cuts.append((j, end))
        end = j
        h = 0
        j -= 1
    cuts.reverse()
    p = Path._from_array(steps[: cuts[0][0]].copy(), m)
    qs = [Path._from_array(steps[s + 1 : e].copy(), m) for s, e in cuts]
    return p, qs


def fold(w: DecoratedPrefix) -> PointedLuka:
    arr = w.path.steps.copy()
    dec = np.asarray(w.decoration, dtype=np.int64)
    _, start = fold_inplace(arr, arr.size, w.path.m, dec, dec.size - 1)
    return PointedLuka(Path._from_array(arr, w.path.m), int(start) + 1)


def unfold(v: PointedLuka) -> DecoratedPrefix:
    arr = v.path.steps.copy()
    m = v.path.m
    dec = np.empty(arr.size, dtype=np.int64)
    _, k = unfold_inplace(arr, arr.size, m, v.point - 1, dec, True)
    path = Path._from_array(arr, m)
    assert reduced_form(path).h_bar == k - 1
    return DecoratedPrefix(path, tuple(int(a) for a in dec[:k]))


def fold_access_count(w: DecoratedPrefix) -> int:
    arr = w.path.steps.copy()
    dec = np.asarray(w.decoration, dtype=np.int64)
    acc, _ = fold_inplace(arr, arr.size, w.path.m, dec, dec.size - 1)
    return int(acc)

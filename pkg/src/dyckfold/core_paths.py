"""Paths with steps U (+1) and D (-m), and the classification predicates.

A path is stored as a ``uint8`` array with one cell per step (U=1, D=0)
and the step geometry ``m`` kept once per path.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np


class PathError(ValueError):
    pass


class StepKind(IntEnum):
    D = 0
    U = 1

    def height(self, m: int) -> int:
        return 1 if self is StepKind.U else -m


_CHARS = {"U": 1, "D": 0}


def _check_m(m: int) -> int:
    m = int(m)
    if m < 1:
        raise PathError(f"m must be >= 1, got {m}")
    return m


class Path:
    """Immutable step sequence with cached up/down counts."""

    __slots__ = ("_steps", "m", "n_up", "n_down")

    def __init__(self, steps: Iterable[int] | np.ndarray, m: int = 1):
        arr = np.array(steps, dtype=np.uint8).reshape(-1)
        if arr.size and arr.max() > 1:
            raise PathError("steps must be 0 (D) or 1 (U)")
        arr.setflags(write=False)
        self._steps = arr
        self.m = _check_m(m)
        self.n_up = int(arr.sum(dtype=np.int64))
        self.n_down = arr.size - self.n_up

    @classmethod
    def parse(cls, text: str, m: int = 1) -> "Path":
        text = text.strip()
        bad = set(text) - set(_CHARS)
        if bad:
            raise PathError(f"invalid step characters: {''.join(sorted(bad))!r}")
        raw = np.frombuffer(text.encode("ascii"), dtype=np.uint8)
        return cls(raw == ord("U"), m)

    @classmethod
    def _from_array(cls, arr: np.ndarray, m: int) -> "Path":
        # trusted constructor; takes ownership of ``arr``
        self = cls.__new__(cls)
        arr.setflags(write=False)
        self._steps = arr
        self.m = m
        self.n_up = int(arr.sum(dtype=np.int64))
        self.n_down = arr.size - self.n_up
        return self

    @property
    def steps(self) -> np.ndarray:
        return self._steps

    @property
    def height(self) -> int:
        return self.n_up - self.m * self.n_down

    def __len__(self) -> int:
        return self._steps.size

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Path._from_array(self._steps[idx].copy(), self.m)
        return StepKind(int(self._steps[idx]))

    def __iter__(self):
        return (StepKind(int(s)) for s in self._steps)

    def __add__(self, other: "Path") -> "Path":
        if not isinstance(other, Path):
            return NotImplemented
        if other.m != self.m:
            raise PathError("cannot concatenate paths with different m")
        return Path._from_array(np.concatenate([self._steps, other._steps]), self.m)

    def append(self, step: StepKind | int) -> "Path":
        arr = np.empty(len(self) + 1, dtype=np.uint8)
        arr[:-1] = self._steps
        arr[-1] = int(step)
        return Path._from_array(arr, self.m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Path):
            return NotImplemented
        return self.m == other.m and np.array_equal(self._steps, other._steps)

    def __hash__(self) -> int:
        return hash((self.m, self._steps.tobytes()))

    def __str__(self) -> str:
        return np.where(self._steps == 1, ord("U"), ord("D")).astype(np.uint8).tobytes().decode()

    def __repr__(self) -> str:
        return f"Path({str(self)!r}, m={self.m})"

    def running_heights(self) -> np.ndarray:
        """Heights after each step (length n, excludes the empty prefix)."""
        inc = np.where(self._steps == 1, 1, -self.m).astype(np.int64)
        return np.cumsum(inc)


@dataclass(frozen=True)
class ReducedForm:
    n_bar: int
    h_bar: int
    r: int


def height(p: Path) -> int:
    return p.height


def reduced_form(p: Path) -> ReducedForm:
    """Euclidean division of length and height by m+1, sharing remainder r.

    ``h_bar`` is a floor quotient, so m-Lukasiewicz paths get ``h_bar == -1``.
    """
    q = p.m + 1
    n_bar, r = divmod(len(p), q)
    h_bar, r_h = divmod(p.height, q)
    assert r_h == r
    return ReducedForm(n_bar, h_bar, r)


def is_mdyck_prefix(p: Path) -> bool:
    if len(p) == 0:
        return True
    return bool(p.running_heights().min() >= 0)


def is_mluka(p: Path) -> bool:
    if len(p) == 0:
        return False
    hs = p.running_heights()
    return bool(hs[-1] < 0 and (len(p) == 1 or hs[:-1].min() >= 0))


def is_mdyck_path(p: Path) -> bool:
    return p.height == 0 and is_mdyck_prefix(p)


def num_decorations(p: Path) -> int:
    rf = reduced_form(p)
    if rf.r == 0 or rf.h_bar < 0:
        return 0
    return rf.r * p.m**rf.h_bar


@dataclass(frozen=True)
class DecoratedPrefix:
    path: Path
    decoration: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "decoration", tuple(int(a) for a in self.decoration))
        p = self.path
        if not is_mdyck_prefix(p):
            raise PathError(f"{p} is not an m-Dyck prefix")
        rf = reduced_form(p)
        if rf.r == 0:
            raise PathError("paths with length divisible by m+1 carry no decoration")
        dec = self.decoration
        if len(dec) != rf.h_bar + 1:
            raise PathError(f"decoration needs {rf.h_bar + 1} entries, got {len(dec)}")
        if any(not 1 <= a <= p.m for a in dec[:-1]) or not 1 <= dec[-1] <= rf.r:
            raise PathError(f"decoration {dec} out of range for m={p.m}, r={rf.r}")


@dataclass(frozen=True)
class PointedLuka:
    path: Path
    point: int  # 1-based step index

    def __post_init__(self):
        if not is_mluka(self.path):
            raise PathError(f"{self.path} is not an m-Lukasiewicz path")
        if not 1 <= self.point <= len(self.path):
            raise PathError(f"point {self.point} outside [1, {len(self.path)}]")


def parse_decoration(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)


def as_path(obj: str | Sequence[int] | Path, m: int) -> Path:
    if isinstance(obj, Path):
        return obj
    if isinstance(obj, str):
        return Path.parse(obj, m)
    return Path(obj, m)

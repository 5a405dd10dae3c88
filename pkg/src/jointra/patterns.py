"""Contiguous resource patterns over a band of ``F`` resource blocks.

A pattern is a run of adjacent RBs.  There are ``(F**2 + F) / 2`` of them and
they are indexed length-major, start-minor: all single-RB patterns first
(start 1..F), then all two-RB patterns (start 1..F-1), and so on up to the
single full-band pattern.  Indices and RB numbers are 1-based at this
module's surface.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidDimensionError


@dataclass(frozen=True, order=True)
class Pattern:
    """A contiguous run of ``length`` RBs starting at RB ``start`` (1-based)."""

    start: int
    length: int

    @property
    def stop(self) -> int:
        """Last RB of the run (inclusive, 1-based)."""
        return self.start + self.length - 1

    def rbs(self) -> range:
        return range(self.start, self.start + self.length)

    def dense(self, rb_count: int) -> np.ndarray:
        col = np.zeros(rb_count, dtype=np.int8)
        col[self.start - 1:self.stop] = 1
        return col


def _check_rb_count(rb_count: int) -> None:
    if int(rb_count) != rb_count or rb_count < 1:
        raise InvalidDimensionError(f"RB count must be a positive integer, got {rb_count!r}")


def pattern_count(rb_count: int) -> int:
    """Number of contiguous patterns on ``rb_count`` RBs."""
    _check_rb_count(rb_count)
    return (rb_count * rb_count + rb_count) // 2


def pattern_of(rb_count: int, index: int) -> Pattern:
    """Decode the 1-based column ``index`` into its (start, length).

    Walks the length blocks: block ``L`` holds ``F - L + 1`` patterns, so the
    start is the offset of ``index`` inside its block.
    """
    total = pattern_count(rb_count)
    if not 1 <= index <= total:
        raise IndexError(f"pattern index {index} outside 1..{total}")
    offset = index
    length = 1
    while offset > rb_count - length + 1:
        offset -= rb_count - length + 1
        length += 1
    return Pattern(start=offset, length=length)


class PatternMatrix:
    """The ``F x J`` binary matrix of contiguous patterns, stored sparsely.

    Parameters
    ----------
    rb_count : int
        Number of resource blocks ``F``.
    """

    def __init__(self, rb_count: int):
        _check_rb_count(rb_count)
        self.rb_count = int(rb_count)
        cols = []
        for length in range(1, rb_count + 1):
            for start in range(1, rb_count - length + 2):
                cols.append(Pattern(start, length))
        self.columns: tuple[Pattern, ...] = tuple(cols)
        # 0-based arrays for vectorised consumers
        self.starts = np.array([p.start - 1 for p in cols], dtype=np.intp)
        self.lengths = np.array([p.length for p in cols], dtype=np.intp)

    def __len__(self) -> int:
        return len(self.columns)

    def __getitem__(self, index: int) -> Pattern:
        """1-based column access, matching :func:`pattern_of`."""
        if not 1 <= index <= len(self.columns):
            raise IndexError(f"pattern index {index} outside 1..{len(self.columns)}")
        return self.columns[index - 1]

    @property
    def count(self) -> int:
        return len(self.columns)

    @cached_property
    def dense(self) -> np.ndarray:
        mat = np.zeros((self.rb_count, self.count), dtype=np.int8)
        for k, p in enumerate(self.columns):
            mat[p.start - 1:p.stop, k] = 1
        mat.setflags(write=False)
        return mat

    def index_of(self, pattern: Pattern) -> int:
        """Inverse of :meth:`__getitem__`."""
        f, length, start = self.rb_count, pattern.length, pattern.start
        if length < 1 or start < 1 or start + length - 1 > f:
            raise IndexError(f"{pattern} does not fit in {f} RBs")
        before = sum(f - m + 1 for m in range(1, length))
        return before + start

    def to_text(self) -> str:
        """Rows of 0/1 characters, one line per RB."""
        return "\n".join("".join(str(int(v)) for v in row) for row in self.dense)


def build_pattern_matrix(rb_count: int) -> PatternMatrix:
    return PatternMatrix(rb_count)

"""Inter-cell user pairs: one user per cooperating cell.

Pairs are indexed in mixed radix with cell 1 varying slowest, which is the
column order of the Kronecker construction

    block_u = 1_{K_1...K_{u-1}} (x) E_{K_u} (x) 1_{K_{u+1}...K_U}

stacked over ``u``.  Users are 1-based inside their cell at this surface.
"""
from __future__ import annotations

from functools import cached_property
from math import prod
from typing import Sequence

import numpy as np

from .errors import EmptyCellError


class CellSizes(tuple):
    """Per-cell user counts ``(K_1, ..., K_U)``."""

    def __new__(cls, sizes: Sequence[int]):
        sizes = tuple(int(k) for k in sizes)
        if not sizes:
            raise EmptyCellError("at least one cell is required")
        for u, k in enumerate(sizes, start=1):
            if k < 1:
                raise EmptyCellError(f"cell {u} has {k} users")
        return super().__new__(cls, sizes)

    @property
    def cells(self) -> int:
        return len(self)

    @property
    def total_users(self) -> int:
        return sum(self)

    @property
    def offsets(self) -> tuple[int, ...]:
        """0-based global index of each cell's first user (cell-major order)."""
        out, acc = [], 0
        for k in self:
            out.append(acc)
            acc += k
        return tuple(out)


def pair_count(sizes: Sequence[int]) -> int:
    return prod(CellSizes(sizes))


def decode_pair(sizes: Sequence[int], index: int) -> tuple[int, ...]:
    """User tuple (1-based per cell) of the 1-based pair ``index``."""
    sizes = CellSizes(sizes)
    n_all = prod(sizes)
    if not 1 <= index <= n_all:
        raise IndexError(f"pair index {index} outside 1..{n_all}")
    rem = index - 1
    users = []
    for k in reversed(sizes):
        rem, r = divmod(rem, k)
        users.append(r + 1)
    return tuple(reversed(users))


def encode_pair(sizes: Sequence[int], users: Sequence[int]) -> int:
    sizes = CellSizes(sizes)
    if len(users) != len(sizes):
        raise ValueError(f"expected {len(sizes)} users, got {len(users)}")
    index = 0
    for k, i in zip(sizes, users):
        if not 1 <= i <= k:
            raise IndexError(f"user {i} outside 1..{k}")
        index = index * k + (i - 1)
    return index + 1


class PairMatrix:
    """The ``(sum K_u) x N_all`` one-hot pair matrix.

    Only the decode table is kept eagerly; the dense rows are built on first
    access.
    """

    def __init__(self, sizes: Sequence[int]):
        self.sizes = CellSizes(sizes)
        self.column_count = prod(self.sizes)

    @cached_property
    def members(self) -> np.ndarray:
        """``(N_all, U)`` array of 0-based within-cell user indices."""
        grids = np.indices(self.sizes).reshape(len(self.sizes), -1)
        out = np.ascontiguousarray(grids.T, dtype=np.intp)
        out.setflags(write=False)
        return out

    @cached_property
    def global_members(self) -> np.ndarray:
        """``(N_all, U)`` array of 0-based global user indices."""
        out = self.members + np.asarray(self.sizes.offsets, dtype=np.intp)
        out.setflags(write=False)
        return out

    @cached_property
    def dense(self) -> np.ndarray:
        blocks = []
        for u, k in enumerate(self.sizes):
            left = prod(self.sizes[:u])
            right = prod(self.sizes[u + 1:])
            blocks.append(np.kron(np.ones((1, left), dtype=np.int8),
                                  np.kron(np.eye(k, dtype=np.int8),
                                          np.ones((1, right), dtype=np.int8))))
        mat = np.vstack(blocks).astype(np.int8)
        mat.setflags(write=False)
        return mat

    def decode(self, index: int) -> tuple[int, ...]:
        return decode_pair(self.sizes, index)

    def to_text(self) -> str:
        return "\n".join("".join(str(int(v)) for v in row) for row in self.dense)


def build_pair_matrix(sizes: Sequence[int]) -> PairMatrix:
    return PairMatrix(sizes)

"""The joint allocation BIP and its exact solvers.

Variables are indexed pair-major, pattern-minor: variable ``k`` selects pair
``k // J`` on pattern ``k % J`` (both 0-based here).  Constraint rows are the
``F`` RB rows (each RB used exactly once, ``A x = 1``) followed by one row
per user, cell-major (each user in at most one selected variable,
``B x <= 1``).
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InstanceTooLargeError, IntegrityError, ShapeError
from .pairing import CellSizes, PairMatrix
from .patterns import Pattern, PatternMatrix
from .simplex import solve_lp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NODE_LIMIT = "node-limit"


class BipProblem:
    """``max C.x  s.t.  A x = 1, B x <= 1, x binary``.

    ``A = 1_{N_all} (x) T`` and ``B = D (x) 1_J`` are never needed in dense
    form by the solvers; :attr:`incidence` stacks their rows as int8 for the
    node bookkeeping and :attr:`equality_matrix` / :attr:`packing_matrix`
    exist for inspection.
    """

    def __init__(self, patterns: PatternMatrix, pairs: PairMatrix, objective):
        objective = np.asarray(objective, dtype=float)
        n = pairs.column_count * patterns.count
        if objective.shape != (n,):
            raise ShapeError(f"reward vector has shape {objective.shape}, expected ({n},)")
        if not np.all(np.isfinite(objective)):
            raise ValueError("reward vector must be finite")
        self.patterns = patterns
        self.pairs = pairs
        self.objective = objective
        self.objective.setflags(write=False)

    @property
    def sizes(self) -> CellSizes:
        return self.pairs.sizes

    @property
    def rb_count(self) -> int:
        return self.patterns.rb_count

    @property
    def variable_count(self) -> int:
        return self.objective.size

    @property
    def row_count(self) -> int:
        return self.rb_count + self.sizes.total_users

    def decode(self, k: int) -> tuple[int, int]:
        """0-based (pair, pattern) of variable ``k``."""
        return divmod(int(k), self.patterns.count)

    def column_rows(self, k: int) -> np.ndarray:
        """Row indices touched by variable ``k``."""
        p, l = self.decode(k)
        start, length = self.patterns.starts[l], self.patterns.lengths[l]
        return np.concatenate([np.arange(start, start + length),
                               self.rb_count + self.pairs.global_members[p]])

    @cached_property
    def incidence(self) -> np.ndarray:
        f, j = self.rb_count, self.patterns.count
        n_all = self.pairs.column_count
        out = np.zeros((self.row_count, self.variable_count), dtype=np.int8)
        rb = np.arange(f)[:, None]
        starts, lengths = self.patterns.starts, self.patterns.lengths
        pattern_block = ((rb >= starts) & (rb < starts + lengths)).astype(np.int8)
        out[:f] = np.tile(pattern_block, n_all)
        cols = np.arange(self.variable_count)
        for u in range(self.sizes.cells):
            out[f + self.pairs.global_members[cols // j, u], cols] = 1
        out.setflags(write=False)
        return out

    @property
    def equality_matrix(self) -> np.ndarray:
        return self.incidence[:self.rb_count]

    @property
    def packing_matrix(self) -> np.ndarray:
        return self.incidence[self.rb_count:]

    def value(self, selected: Sequence[int]) -> float:
        """Exactly rounded objective of a set of selected variables."""
        return math.fsum(self.objective[list(selected)])

    def is_feasible(self, x) -> bool:
        x = np.asarray(x)
        if x.shape != (self.variable_count,) or not np.all((x == 0) | (x == 1)):
            return False
        sel = np.flatnonzero(x)
        used = self.incidence[:, sel].sum(axis=1)
        return bool(np.all(used[:self.rb_count] == 1) and np.all(used[self.rb_count:] <= 1))


def assemble(patterns: PatternMatrix, pairs: PairMatrix, rewards) -> BipProblem:
    return BipProblem(patterns, pairs, rewards)


@dataclass
class BipSolution:
    x: np.ndarray
    objective_value: float
    node_count: int
    status: str

    @property
    def selected(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.x))


def _lex_less(a: tuple, b: tuple) -> bool:
    """Whether the binary vector with ones at ``a`` precedes the one at ``b``."""
    diff = set(a).symmetric_difference(b)
    return bool(diff) and min(diff) in b


def _better(val, sel, best_val, best_sel) -> bool:
    return val > best_val or (val == best_val and _lex_less(sel, best_sel))


@dataclass(order=True)
class _Node:
    key: tuple
    fixed_one: tuple = field(compare=False)
    fixed_zero: frozenset = field(compare=False)
    floor: int = field(compare=False, default=0)
    depth: int = field(compare=False, default=0)


class _Search:
    """Shared machinery of the main search and the tie-breaking passes."""

    def __init__(self, problem: BipProblem, tol: float, node_limit: int, open_cap: int,
                 backend=None):
        self.p = problem
        self.tol = tol
        self.node_limit = node_limit
        self.open_cap = open_cap
        self.backend = backend
        self.nodes = 0
        self.limited = False
        inc = problem.incidence
        self.inc_bool = inc.astype(bool)
        self.inc_float = inc.astype(float)

    def node_lp(self, fixed_one, fixed_zero, floor):
        p = self.p
        n = p.variable_count
        alive = np.ones(n, dtype=bool)
        alive[:floor] = False
        if fixed_zero:
            alive[list(fixed_zero)] = False
        covered = np.zeros(p.row_count, dtype=bool)
        if fixed_one:
            alive[list(fixed_one)] = False
            covered = self.inc_bool[:, list(fixed_one)].any(axis=1)
            alive &= ~self.inc_bool[covered].any(axis=0)
        cols = np.flatnonzero(alive)
        eq_rows = np.flatnonzero(~covered[:p.rb_count])
        le_rows = p.rb_count + np.flatnonzero(~covered[p.rb_count:])
        if eq_rows.size == 0:
            return cols, 0.0, np.zeros(cols.size)
        if cols.size == 0:
            return cols, None, None
        sub = self.inc_float[:, cols]
        if not np.all(sub[eq_rows].any(axis=1)):
            return cols, None, None
        res = solve_lp(p.objective[cols], sub[eq_rows], sub[le_rows], tol=self.tol,
                       backend=self.backend)
        if res.status != "optimal":
            return cols, None, None
        return cols, res.value, res.x

    def run(self, root: _Node, best_val: float, best_sel: tuple, target: float | None = None):
        """Best-bound-first search below ``root``.

        Without ``target`` this improves (``best_val``, ``best_sel``) to the
        optimum.  With ``target`` it returns the first integer solution whose
        value reaches ``target``, or ``None``.
        """
        heap = [root]
        stack: list[_Node] = []
        seq = itertools.count()
        threshold = best_val if target is None else target
        while heap or stack:
            node = stack.pop() if stack else heapq.heappop(heap)
            slack = self.tol * max(1.0, abs(threshold))
            if -node.key[0] < threshold - slack:
                continue
            if self.nodes >= self.node_limit:
                self.limited = True
                break
            self.nodes += 1
            cols, lp_val, lp_x = self.node_lp(node.fixed_one, node.fixed_zero, node.floor)
            if lp_val is None:
                continue
            bound = self.p.value(node.fixed_one) + lp_val
            if bound < threshold - slack:
                continue
            frac = np.abs(lp_x - 0.5)
            if np.all(frac >= 0.5 - 1e-9):
                sel = tuple(sorted(node.fixed_one + tuple(int(c) for c in cols[lp_x > 0.5])))
                val = self.p.value(sel)
                if target is not None:
                    if val >= target:
                        return val, sel
                elif _better(val, sel, best_val, best_sel):
                    best_val, best_sel = val, sel
                    threshold = best_val
                continue
            k = int(cols[int(np.argmin(frac))])
            children = (
                _Node((-bound, next(seq)), tuple(sorted(node.fixed_one + (k,))), node.fixed_zero,
                      node.floor, node.depth + 1),
                _Node((-bound, next(seq)), node.fixed_one, node.fixed_zero | {k}, node.floor,
                      node.depth + 1),
            )
            if stack or len(heap) >= self.open_cap:
                # depth-first fallback keeps the open set bounded
                stack.extend(reversed(children))
            else:
                for child in children:
                    heapq.heappush(heap, child)
        if target is not None:
            return None
        return best_val, best_sel


def _greedy_incumbent(problem: BipProblem) -> tuple[float, tuple]:
    j = problem.patterns.count
    full = np.arange(problem.pairs.column_count) * j + (j - 1)
    k = int(full[int(np.argmax(problem.objective[full]))])
    return problem.value((k,)), (k,)


def solve_branch_and_bound(problem: BipProblem, node_limit: int = 200_000, tol: float = 1e-9,
                           open_cap: int = 50_000, backend=None) -> BipSolution:
    """Exact maximiser of the BIP by LP-bounded branch and bound.

    Branches on the most fractional variable, explores best bound first and
    falls back to depth first when more than ``open_cap`` nodes are open.
    Among equal-valued optima the lexicographically smallest ``x`` is
    returned; objective values are compared as exactly rounded sums.
    """
    search = _Search(problem, tol, node_limit, open_cap, backend)
    best_val, best_sel = _greedy_incumbent(problem)
    root = _Node((-math.inf, -1), (), frozenset())
    best_val, best_sel = search.run(root, best_val, best_sel)
    status = NODE_LIMIT if search.limited else OPTIMAL

    if status == OPTIMAL:
        # Walk the incumbent's ones in index order and ask whether an equally
        # good solution exists with that variable switched off.
        fixed: list[int] = []
        pos = 0
        while not search.limited:
            later = [k for k in best_sel if k >= pos]
            if not later:
                break
            s = later[0]
            root = _Node((-math.inf, -1), tuple(fixed), frozenset(), floor=s + 1)
            found = search.run(root, best_val, best_sel, target=best_val)
            if found is not None:
                best_val, best_sel = found
            else:
                fixed.append(s)
            pos = s + 1

    x = np.zeros(problem.variable_count, dtype=np.int8)
    x[list(best_sel)] = 1
    return BipSolution(x, best_val, search.nodes, status)


def lp_relaxation_bound(problem: BipProblem, fixed_one: Sequence[int] = (),
                        fixed_zero: Sequence[int] = (), tol: float = 1e-9) -> float:
    """Optimum of the continuous relaxation, ``-inf`` when it is infeasible."""
    search = _Search(problem, tol, 1, 1)
    fixed_one = tuple(sorted(int(k) for k in fixed_one))
    if fixed_one:
        used = search.inc_float[:, list(fixed_one)].sum(axis=1)
        if np.any(used > 1):
            return -math.inf
    _, val, _ = search.node_lp(fixed_one, frozenset(int(k) for k in fixed_zero), 0)
    if val is None:
        return -math.inf
    return problem.value(fixed_one) + val


def _segmentations(rb_count: int):
    """All ways to cut RBs ``0..F-1`` into contiguous runs, as (start, length) lists."""
    for cuts in itertools.product((False, True), repeat=rb_count - 1):
        segs, start = [], 0
        for pos, cut in enumerate(cuts, start=1):
            if cut:
                segs.append((start, pos - start))
                start = pos
        segs.append((start, rb_count - start))
        yield segs


def exhaustive_size(sizes, rb_count: int) -> int:
    """Number of complete assignments :func:`solve_exhaustive` would score."""
    total = 0
    for s in range(1, rb_count + 1):
        ways = math.comb(rb_count - 1, s - 1)
        for k in sizes:
            ways *= math.perm(k, s)
        total += ways
    return total


def solve_exhaustive(problem: BipProblem, max_rb: int = 8,
                     max_assignments: int = 2_000_000) -> BipSolution:
    """Score every feasible assignment; the validation oracle for small instances."""
    f = problem.rb_count
    sizes = problem.sizes
    count = exhaustive_size(sizes, f)
    if f > max_rb or count > max_assignments:
        raise InstanceTooLargeError(
            f"exhaustive search over F={f}, sizes={tuple(sizes)} needs {count} assignments")
    pm = problem.patterns
    j = pm.count
    best_val, best_sel = -math.inf, ()
    explored = 0
    for segs in _segmentations(f):
        s = len(segs)
        if s > min(sizes):
            continue
        cols = [pm.index_of(Pattern(a + 1, length)) - 1 for a, length in segs]
        per_cell = [list(itertools.permutations(range(k), s)) for k in sizes]
        for choice in itertools.product(*per_cell):
            sel = []
            for seg in range(s):
                p = 0
                for k, users in zip(sizes, choice):
                    p = p * k + users[seg]
                sel.append(p * j + cols[seg])
            sel = tuple(sorted(sel))
            explored += 1
            val = problem.value(sel)
            if _better(val, sel, best_val, best_sel):
                best_val, best_sel = val, sel
    x = np.zeros(problem.variable_count, dtype=np.int8)
    x[list(best_sel)] = 1
    return BipSolution(x, best_val, explored, OPTIMAL)


@dataclass(frozen=True)
class Allocation:
    """Per cell, per user (0-based), the assigned pattern or ``None``."""

    rb_count: int
    assignments: tuple[tuple[Pattern | None, ...], ...]

    @property
    def sizes(self) -> CellSizes:
        return CellSizes(len(a) for a in self.assignments)

    def rbs(self, cell: int, user: int) -> tuple[int, ...]:
        pat = self.assignments[cell][user]
        return () if pat is None else tuple(pat.rbs())

    def user_of_rb(self) -> np.ndarray:
        """``(U, F)`` array of the 0-based user on each RB, -1 when unused."""
        out = np.full((len(self.assignments), self.rb_count), -1, dtype=np.intp)
        for u, cell in enumerate(self.assignments):
            for i, pat in enumerate(cell):
                if pat is not None:
                    if np.any(out[u, pat.start - 1:pat.stop] >= 0):
                        raise IntegrityError(f"cell {u + 1}: overlapping patterns")
                    out[u, pat.start - 1:pat.stop] = i
        return out

    def rb_counts(self) -> np.ndarray:
        """Assigned RB count per global user."""
        return np.array([0 if p is None else p.length for cell in self.assignments for p in cell],
                        dtype=np.intp)

    def segments(self, cell: int) -> list[Pattern]:
        return sorted(p for p in self.assignments[cell] if p is not None)

    def is_complete(self) -> bool:
        return bool(np.all(self.user_of_rb() >= 0))

    def is_aligned(self) -> bool:
        segs = [self.segments(u) for u in range(len(self.assignments))]
        return all(s == segs[0] for s in segs)


def solution_to_allocation(x, sizes, patterns: PatternMatrix) -> Allocation:
    sizes = CellSizes(sizes)
    pairs = PairMatrix(sizes)
    problem = BipProblem(patterns, pairs, np.zeros(pairs.column_count * patterns.count))
    if not problem.is_feasible(x):
        raise IntegrityError("x violates A x = 1, B x <= 1 or is not binary")
    cells = [[None] * k for k in sizes]
    for k in np.flatnonzero(x):
        p, l = problem.decode(k)
        for u, i in enumerate(pairs.members[p]):
            cells[u][i] = patterns.columns[l]
    return Allocation(patterns.rb_count, tuple(tuple(c) for c in cells))


def allocation_to_solution(allocation: Allocation, patterns: PatternMatrix) -> np.ndarray:
    """Re-encode an aligned, complete allocation as a binary vector."""
    if not (allocation.is_complete() and allocation.is_aligned()):
        raise IntegrityError("only complete, aligned allocations have a BIP encoding")
    sizes = allocation.sizes
    pairs = PairMatrix(sizes)
    x = np.zeros(pairs.column_count * patterns.count, dtype=np.int8)
    for seg in allocation.segments(0):
        users = []
        for cell in allocation.assignments:
            users.append(next(i for i, p in enumerate(cell) if p == seg))
        p = 0
        for k, i in zip(sizes, users):
            p = p * k + i
        x[p * patterns.count + patterns.index_of(seg) - 1] = 1
    return x


def dump_instance(problem: BipProblem) -> str:
    """Plain-text instance: ``F U K_1..K_U`` then one reward per line."""
    head = " ".join(str(v) for v in (problem.rb_count, problem.sizes.cells, *problem.sizes))
    return "\n".join([head, *(repr(float(c)) for c in problem.objective)]) + "\n"


def load_instance(text: str) -> BipProblem:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty instance")
    head = [int(v) for v in lines[0].split()]
    if len(head) < 3 or head[1] != len(head) - 2:
        raise ValueError(f"malformed header {lines[0]!r}")
    f, sizes = head[0], head[2:]
    rewards = np.array([float(v) for v in lines[1:]])
    return BipProblem(PatternMatrix(f), PairMatrix(sizes), rewards)

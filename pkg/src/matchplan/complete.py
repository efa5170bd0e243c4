"""Constructive schedulers and classifiers for complete tournaments.

Covers the parallel-class construction that schedules K_n within n+1 rounds
under single pre-fixed absences, the closed-form round classifier for single
absences, symmetric (partial) Latin squares with a prescribed diagonal, and
plain round-robin schedules.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .model import AbsenceAssignment, ModelError, Multigraph, Schedule, complete_graph, verify_schedule
from .solvers import SearchBudgetExceeded


class ConstructionError(RuntimeError):
    """A constructive scheduler produced an invalid result (a bug, surfaced
    loudly instead of returning a wrong schedule)."""


# ---------- parallel classes ----------

@dataclass(frozen=True)
class ParallelClassLayout:
    """Positions 1..n on a circle; the edges split into n classes of parallel
    chords, one class per endpoint sum modulo n.  Each class is a matching."""

    n: int
    classes: Tuple[Tuple[Tuple[int, int], ...], ...]

    @staticmethod
    def build(n: int) -> "ParallelClassLayout":
        classes: List[List[Tuple[int, int]]] = [[] for _ in range(n)]
        for a in range(1, n + 1):
            for b in range(a + 1, n + 1):
                classes[(a + b) % n].append((a, b))
        return ParallelClassLayout(n, tuple(tuple(c) for c in classes))

    def class_of(self, a: int, b: int) -> int:
        return (a + b) % self.n

    def check(self) -> None:
        if len(self.classes) != self.n:
            raise ConstructionError("expected exactly n parallel classes")
        seen = set()
        for cls in self.classes:
            touched = set()
            for a, b in cls:
                if a in touched or b in touched:
                    raise ConstructionError("parallel class is not a matching")
                touched.update((a, b))
                seen.add((a, b))
        if len(seen) != self.n * (self.n - 1) // 2:
            raise ConstructionError("parallel classes do not partition the edges")


# ---------- the (n+1)-round construction for single absences ----------

def _single_labels(n: int, c) -> Dict[int, int]:
    """Normalize input to one positive label per position 1..n; unlabeled
    positions get n+1 (an unconstrained round for any <= n+1 round plan)."""
    labels: Dict[int, int] = {}
    if isinstance(c, AbsenceAssignment):
        for p in range(1, n + 1):
            rounds = c.forbidden(str(p))
            if len(rounds) > 1:
                raise ModelError("construction handles at most one absence per player")
            labels[p] = next(iter(rounds)) if rounds else n + 1
    else:
        mapping = dict(c)
        for p in range(1, n + 1):
            label = int(mapping.get(p, mapping.get(str(p), n + 1)))
            if label < 1:
                raise ModelError("absence rounds must be >= 1")
            labels[p] = label
    return labels


def construct_kn_t1(n: int, c) -> Schedule:
    """Schedule K_n within n+1 rounds avoiding one pre-fixed absence per
    player.

    ``c`` maps positions 1..n (ints or their string names) to forbidden
    rounds, or is an AbsenceAssignment with at most one round per player.
    The result is machine-verified before being returned.
    """
    if n < 2:
        raise ModelError("construct_kn_t1 needs n >= 2")
    g = complete_graph(n)
    original = _single_labels(n, c)
    # rounds above n+1 can never collide with a <= n+1 round plan
    labels = {p: min(v, n + 1) for p, v in original.items()}

    order = sorted(range(1, n + 1), key=lambda p: (labels[p], p))
    position_of = {orig: pos + 1 for pos, orig in enumerate(order)}
    values: List[int] = []
    group_sizes: List[int] = []
    for orig in order:
        v = labels[orig]
        if not values or values[-1] != v:
            values.append(v)
            group_sizes.append(1)
        else:
            group_sizes[-1] += 1
    s = len(values)
    prefix = []
    acc = 0
    for size in group_sizes:
        acc += size
        prefix.append(acc)  # m_1..m_s

    layout = ParallelClassLayout.build(n)
    layout.check()
    color_of_class: Dict[int, Optional[int]] = {}
    edge_color: Dict[Tuple[int, int], int] = {}

    if s > 1:
        for j in range(1, s):
            m_j = prefix[j - 1]
            sigma = layout.class_of(2, n) if m_j == 1 else layout.class_of(1, m_j)
            color_of_class[sigma] = None  # bichromatic, handled per edge
            for a, b in layout.classes[sigma]:
                if min(a, b) > m_j:
                    edge_color[(a, b)] = values[j - 1]
                else:
                    edge_color[(a, b)] = values[j]
    used = set(values) if s > 1 else {values[0]}
    spare = [col for col in range(1, n + 2) if col not in used]
    for sigma in range(n):
        if sigma in color_of_class:
            continue
        color = spare.pop(0)
        for a, b in layout.classes[sigma]:
            edge_color[(a, b)] = color

    colors: List[int] = []
    for u, v in g.edges:
        pu, pv = position_of[int(u)], position_of[int(v)]
        colors.append(edge_color[(min(pu, pv), max(pu, pv))])

    assignment = AbsenceAssignment({str(p): {r} for p, r in original.items()})
    schedule = Schedule.from_coloring(g, colors, absences=assignment)
    if schedule.num_rounds() > n + 1:
        raise ConstructionError("construction exceeded n+1 rounds")
    problems = verify_schedule(g, assignment, schedule)
    if problems:
        raise ConstructionError("construction produced an invalid schedule: "
                                + "; ".join(str(p) for p in problems[:5]))
    return schedule


# ---------- round classifier for single absences ----------

def classify_chi_c_kn(n: int, labels: Sequence[int]) -> int:
    """Exact number of rounds needed for K_n under the given single absences
    (one label per position 1..n).

    Parity is counted over all n round symbols, unused symbols having
    frequency zero.  The narrower attained-values reading disagrees with
    exhaustive search for odd n (see classify_chi_c_kn_literal).
    """
    if n < 2:
        raise ModelError("classify_chi_c_kn needs n >= 2")
    if len(labels) != n or any(l < 1 for l in labels):
        raise ModelError("expected one positive label per position 1..n")
    if n % 2 == 0 and all(l >= n for l in labels):
        return n - 1
    freq = Counter(l for l in labels if l <= n)
    n_plus = sum(1 for l in labels if l > n)
    wrong = sum(1 for k in range(1, n + 1) if freq[k] % 2 != n % 2)
    return n if wrong <= n_plus else n + 1


def classify_chi_c_kn_literal(n: int, labels: Sequence[int]) -> int:
    """The attained-values reading of the case formula: parity is checked only
    for the label values that actually occur within 1..n.  Kept for comparison
    logging; disagrees with brute force on odd n with unused symbols."""
    if n < 2:
        raise ModelError("classify_chi_c_kn_literal needs n >= 2")
    if n % 2 == 0 and all(l >= n for l in labels):
        return n - 1
    freq = Counter(l for l in labels if l <= n)
    s = len(freq)
    n_plus = n - sum(freq.values())
    good = sum(1 for k in freq if freq[k] % 2 == n % 2)
    return n if good >= s - n_plus else n + 1


# ---------- symmetric Latin squares with prescribed diagonal ----------

@dataclass(frozen=True)
class DiagonalSpec:
    """A prescribed diagonal for an n-by-n symmetric square."""

    n: int
    diagonal: Tuple[int, ...]

    def __post_init__(self):
        if len(self.diagonal) != self.n:
            raise ModelError("diagonal length must equal n")
        if any(d < 1 for d in self.diagonal):
            raise ModelError("diagonal symbols must be positive")

    def frequencies(self) -> Counter:
        return Counter(d for d in self.diagonal if d <= self.n)

    def overflow(self) -> int:
        return sum(1 for d in self.diagonal if d > self.n)


@dataclass(frozen=True)
class SymmetricSquare:
    """Symmetric matrix without row or column repeats; ``partial`` marks
    squares whose symbols may exceed n."""

    cells: Tuple[Tuple[int, ...], ...]
    partial: bool = False

    @property
    def n(self) -> int:
        return len(self.cells)

    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self.cells[i][i] for i in range(self.n))

    def check(self) -> None:
        n = self.n
        for row in self.cells:
            if len(row) != n:
                raise ConstructionError("square is not n-by-n")
        for i in range(n):
            for j in range(n):
                if self.cells[i][j] != self.cells[j][i]:
                    raise ConstructionError("square is not symmetric")
            if len(set(self.cells[i])) != n:
                raise ConstructionError(f"row {i} repeats a symbol")
        if not self.partial:
            symbols = {x for row in self.cells for x in row}
            if not symbols <= set(range(1, n + 1)):
                raise ConstructionError("full Latin square uses symbols outside 1..n")

    def to_lists(self) -> List[List[int]]:
        return [list(row) for row in self.cells]


def symmetric_latin_decision(spec: DiagonalSpec) -> bool:
    """Whether a symmetric Latin square on symbols 1..n with the given
    diagonal exists: every symbol's diagonal frequency (unused symbols count
    zero) must agree with n in parity."""
    if any(d > spec.n for d in spec.diagonal):
        raise ModelError("decision requires diagonal symbols within 1..n")
    freq = spec.frequencies()
    return all(freq[k] % 2 == spec.n % 2 for k in range(1, spec.n + 1))


def symmetric_latin_construct(spec: DiagonalSpec,
                              node_budget: Optional[int] = None) -> Optional[SymmetricSquare]:
    """Backtracking constructor for a symmetric Latin square with the given
    diagonal; None certifies nonexistence by exhaustion.  Fills the upper
    triangle only (symmetry forces the rest), most-constrained cell first."""
    if any(d > spec.n for d in spec.diagonal):
        raise ModelError("construction requires diagonal symbols within 1..n")
    n = spec.n
    grid = [[0] * n for _ in range(n)]
    row_used = [set() for _ in range(n)]
    for i, d in enumerate(spec.diagonal):
        if d in row_used[i]:
            return None
        grid[i][i] = d
        row_used[i].add(d)
    cells = [(i, j) for i in range(n) for j in range(i + 1, n)]
    nodes = 0

    def candidates(i: int, j: int) -> List[int]:
        return [x for x in range(1, n + 1) if x not in row_used[i] and x not in row_used[j]]

    def rec(remaining: List[Tuple[int, int]]) -> bool:
        nonlocal nodes
        if not remaining:
            return True
        best_idx = min(range(len(remaining)),
                       key=lambda k: len(candidates(*remaining[k])))
        i, j = remaining[best_idx]
        rest = remaining[:best_idx] + remaining[best_idx + 1:]
        for x in candidates(i, j):
            nodes += 1
            if node_budget is not None and nodes > node_budget:
                raise SearchBudgetExceeded(nodes)
            grid[i][j] = grid[j][i] = x
            row_used[i].add(x)
            row_used[j].add(x)
            if rec(rest):
                return True
            grid[i][j] = grid[j][i] = 0
            row_used[i].remove(x)
            row_used[j].remove(x)
        return False

    if not rec(cells):
        return None
    square = SymmetricSquare(tuple(tuple(row) for row in grid), partial=False)
    square.check()
    if square.diagonal() != spec.diagonal:
        raise ConstructionError("constructed square has the wrong diagonal")
    return square


def symmetric_partial_latin(n: int, diagonal: Sequence[int]) -> SymmetricSquare:
    """A symmetric partial Latin square over symbols 1..n+1 with the given
    diagonal, derived from the (n+1)-round avoiding schedule of K_n: the cell
    (i, j) holds the round in which i and j play."""
    if len(diagonal) != n:
        raise ModelError("diagonal length must equal n")
    if any(d < 1 or d > n + 1 for d in diagonal):
        raise ModelError("diagonal symbols must lie within 1..n+1")
    schedule = construct_kn_t1(n, {p: diagonal[p - 1] for p in range(1, n + 1)})
    grid = [[0] * n for _ in range(n)]
    for i in range(n):
        grid[i][i] = diagonal[i]
    for round_no, rnd in enumerate(schedule.rounds, start=1):
        for u, v in rnd.matches:
            i, j = int(u) - 1, int(v) - 1
            grid[i][j] = grid[j][i] = round_no
    square = SymmetricSquare(tuple(tuple(row) for row in grid), partial=True)
    square.check()
    if square.diagonal() != tuple(diagonal):
        raise ConstructionError("partial square has the wrong diagonal")
    return square


# ---------- round robin without absences ----------

def round_robin(n: int) -> Schedule:
    """Circle-method schedule of K_n with no absences: n-1 rounds when n is
    even, n rounds of near-perfect matchings when n is odd."""
    if n < 2:
        raise ModelError("round_robin needs n >= 2")
    g = complete_graph(n)
    rounds: List[Tuple[Tuple[str, ...], List[Tuple[str, str]]]] = []
    if n % 2 == 0:
        hub = n - 1  # 0-based index of the fixed player
        for r in range(n - 1):
            matches = [(str(hub + 1), str(r + 1))]
            for k in range(1, n // 2):
                a = (r + k) % (n - 1)
                b = (r - k) % (n - 1)
                matches.append((str(a + 1), str(b + 1)))
            rounds.append(((), matches))
    else:
        layout = ParallelClassLayout.build(n)
        for cls in layout.classes:
            rounds.append(((), [(str(a), str(b)) for a, b in cls]))
    schedule = Schedule.from_rounds(rounds, graph=g)
    problems = verify_schedule(g, AbsenceAssignment({}), schedule)
    if problems:
        raise ConstructionError("round robin construction failed: "
                                + "; ".join(str(p) for p in problems[:5]))
    return schedule

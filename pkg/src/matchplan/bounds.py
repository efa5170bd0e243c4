"""Closed-form lower and upper bounds on the scheduling indices.

These are used for solver pruning, declared round limits and reports.  They
never certify optimality on their own; certification goes through a solver or
a constructive scheduler.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .model import BudgetMap, Multigraph


class VacuousBoundError(ValueError):
    """The requested bound is undefined for edgeless graphs."""


def _require_edges(g: Multigraph) -> None:
    if g.num_edges() == 0:
        raise VacuousBoundError("bounds are undefined for edgeless graphs")


def _min_edge_budget_sum(g: Multigraph, t: BudgetMap) -> int:
    return min(t.get(u) + t.get(v) for u, v in g.edges)


def lb_prefixed(g: Multigraph, t: BudgetMap) -> int:
    """Degree lower bound for pre-fixed absences: max degree plus the smallest
    combined budget over a single match."""
    _require_edges(g)
    return g.max_degree() + _min_edge_budget_sum(g, t)


def lb_online(g: Multigraph, t: BudgetMap, chi_prime_value: int) -> int:
    """Lower bound for unannounced absences.  The chromatic index is injected
    by the caller (computed by the exact solvers) to keep this module free of
    solver dependencies."""
    _require_edges(g)
    return chi_prime_value + _min_edge_budget_sum(g, t)


def ub_shannon(g: Multigraph, t: BudgetMap) -> int:
    """General upper bound for multigraphs: per match, the busier endpoint's
    degree plus half the other's, plus both budgets; maximized over matches."""
    _require_edges(g)
    best = 0
    for u, v in g.edges:
        du, dv = g.degree(u), g.degree(v)
        val = max(du, dv) + min(du, dv) // 2 + t.get(u) + t.get(v)
        best = max(best, val)
    return best


def ub_bipartite(g: Multigraph, blocks: Tuple[frozenset, frozenset], t: BudgetMap) -> int:
    """Bipartite upper bound: per match, the busier endpoint's degree plus
    both budgets; maximized over matches.  Requires a valid bipartition."""
    _require_edges(g)
    left, right = blocks
    if left & right:
        raise ValueError("bipartition blocks overlap")
    if set(g.vertices) != set(left) | set(right):
        raise ValueError("bipartition does not cover the vertex set")
    for u, v in g.edges:
        if (u in left) == (v in left):
            raise ValueError(f"edge {u}-{v} does not cross the bipartition")
    best = 0
    for u, v in g.edges:
        best = max(best, max(g.degree(u), g.degree(v)) + t.get(u) + t.get(v))
    return best


@dataclass
class BoundReport:
    """Named bound values for one instance, for the CLI and sanity checks."""

    graph_summary: str
    lower: Dict[str, int] = field(default_factory=dict)
    upper: Dict[str, int] = field(default_factory=dict)
    notes: Dict[str, str] = field(default_factory=dict)

    def check_consistent(self) -> None:
        for ln, lv in self.lower.items():
            for un, uv in self.upper.items():
                if lv > uv:
                    raise AssertionError(f"lower bound {ln}={lv} exceeds upper bound {un}={uv}")

    def to_json_dict(self) -> dict:
        return {"graph": self.graph_summary, "lower": self.lower,
                "upper": self.upper, "notes": self.notes}

    def to_text(self) -> str:
        lines = [self.graph_summary]
        for name, value in sorted(self.lower.items()):
            lines.append(f"  lower {name:<24} {value}")
        for name, value in sorted(self.upper.items()):
            lines.append(f"  upper {name:<24} {value}")
        for name, note in sorted(self.notes.items()):
            lines.append(f"  note  {name:<24} {note}")
        return "\n".join(lines)


def bound_report(g: Multigraph, t: BudgetMap,
                 chi_prime_value: Optional[int] = None,
                 blocks: Optional[Tuple[frozenset, frozenset]] = None) -> BoundReport:
    summary = f"{len(g.vertices)} players, {g.num_edges()} matches, max degree {g.max_degree()}"
    report = BoundReport(graph_summary=summary)
    report.lower["degree"] = lb_prefixed(g, t)
    if chi_prime_value is not None:
        report.lower["online"] = lb_online(g, t, chi_prime_value)
        report.notes["chromatic-index"] = str(chi_prime_value)
    report.upper["shannon"] = ub_shannon(g, t)
    if blocks is not None:
        report.upper["bipartite"] = ub_bipartite(g, blocks, t)
    report.check_consistent()
    return report

"""Tournament scheduling with allowed absences.

Exact solvers for the avoidance indices, constructive schedulers meeting the
proven bounds, adversary simulations, and a live round-by-round scheduling
service.
"""

from .model import (
    AbsenceAssignment,
    BudgetMap,
    Multigraph,
    Schedule,
    absence_log_to_assignment,
    build_graph,
    complete_bipartite,
    complete_graph,
    thick_triangle,
    verify_schedule,
)
from .solvers import chi_prime, chi_prime_c, chi_t_exact, chi_total
from .game import chi_ol_exact, organizer_wins

__version__ = "0.1.0"

__all__ = [
    "AbsenceAssignment",
    "BudgetMap",
    "Multigraph",
    "Schedule",
    "absence_log_to_assignment",
    "build_graph",
    "complete_bipartite",
    "complete_graph",
    "thick_triangle",
    "verify_schedule",
    "chi_prime",
    "chi_prime_c",
    "chi_t_exact",
    "chi_total",
    "chi_ol_exact",
    "organizer_wins",
    "__version__",
]

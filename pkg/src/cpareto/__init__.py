"""Coalition games over Pareto fronts of constrained injection problems."""

__version__ = "0.1.0"

from .coalitions import (  # noqa: F401
    AgentSet,
    Coalition,
    CoalitionStructure,
    CSGraph,
    aggregation_map,
    build_graph,
    coarsenings_of,
    enumerate_structures,
    is_refinement,
)
from .pareto import (  # noqa: F401
    FavorAgent,
    ObjectivePoint,
    ParetoArchive,
    UtopiaWeighted,
    dominates,
    hypervolume,
    non_dominated_filter,
    restrict_archive,
    select_favor_agent,
    select_utopia,
    utopia_point,
)
from .physics import Evaluator, Scenario, load_scenario  # noqa: F401

"""Exact solutions of variable-coefficient reaction-diffusion and Burgers equations."""
from .catalog import ProblemInstance, get_family, instantiate_family, list_families
from .expr import CoefficientSet, eval_expr, parse_expr
from .kernel import kernel_functions, kernel_functions_burgers, solve_characteristic, solve_characteristic_burgers
from .riccati import (
    InitialData,
    combine_burgers,
    combine_ermakov,
    combine_riccati,
    find_singularity,
    residual_riccati_system,
    solve_alternative,
)
from .seeds import BurgersSeed, FisherSeed
from .transform import build_gbe_solution, build_gnlh_solution, burgers_symmetry
from .verify import GridSpec, ResidualReport, convergence_order, residual

__version__ = "0.1.0"

__all__ = [
    "BurgersSeed",
    "CoefficientSet",
    "FisherSeed",
    "GridSpec",
    "InitialData",
    "ProblemInstance",
    "ResidualReport",
    "build_gbe_solution",
    "build_gnlh_solution",
    "burgers_symmetry",
    "combine_burgers",
    "combine_ermakov",
    "combine_riccati",
    "convergence_order",
    "eval_expr",
    "find_singularity",
    "get_family",
    "instantiate_family",
    "kernel_functions",
    "kernel_functions_burgers",
    "list_families",
    "parse_expr",
    "residual",
    "residual_riccati_system",
    "solve_alternative",
    "solve_characteristic",
    "solve_characteristic_burgers",
]

from .solver import (
    ConeProgram,
    ConeSolution,
    SdpProblem,
    SdpSolution,
    STATUS_INFEASIBLE,
    STATUS_MAX_ITER,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    require_optimal,
    solve,
    solve_cone,
)
from .programs import (
    diamond_norm,
    diamond_norm_blocks,
    optimal_constant_simulator,
    optimal_decoder_fidelity,
    optimal_discrimination,
)

__all__ = [
    "ConeProgram",
    "ConeSolution",
    "SdpProblem",
    "SdpSolution",
    "STATUS_INFEASIBLE",
    "STATUS_MAX_ITER",
    "STATUS_OPTIMAL",
    "STATUS_UNBOUNDED",
    "require_optimal",
    "solve",
    "solve_cone",
    "diamond_norm",
    "diamond_norm_blocks",
    "optimal_constant_simulator",
    "optimal_decoder_fidelity",
    "optimal_discrimination",
]

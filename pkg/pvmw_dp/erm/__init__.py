from pvmw_dp.erm.hard_instances import (
    HardInstance,
    hard_instance_convex,
    hard_instance_strongly_convex,
    replicate_examples,
)
from pvmw_dp.erm.problem import ErmProblem, ExactGradientOracle, PvmwGradientOracle, project_ball, pvmw_gradient_oracle
from pvmw_dp.erm.solvers import (
    ErmReport,
    proof_q_convex,
    proof_q_strongly_convex,
    solve_convex,
    solve_strongly_convex,
)

__all__ = [
    'ErmProblem',
    'ErmReport',
    'ExactGradientOracle',
    'HardInstance',
    'PvmwGradientOracle',
    'hard_instance_convex',
    'hard_instance_strongly_convex',
    'proof_q_convex',
    'proof_q_strongly_convex',
    'project_ball',
    'pvmw_gradient_oracle',
    'replicate_examples',
    'solve_convex',
    'solve_strongly_convex',
]

"""
Concrete problems: matrix completion, policy evaluation and synthetic testbeds.
"""

from .matrix_completion import (
    MatrixCompletionLeastSquares,
    MatrixCompletionOracle,
    MatrixCompletionProblem,
    matcomp_bilevel_oracle,
    matcomp_from_ratings,
    matcomp_synthetic,
)
from .metrics import normalized_error
from .policy_evaluation import (
    PolicyEvalProblem,
    PolicyEvaluationOracle,
    policy_eval_oracle,
    policy_eval_problem,
    reference_w_star,
)
from .testbeds import (
    BilevelQuadratic,
    CompositionalQuadratic,
    LinearObjective,
    NonconvexCompositionalToy,
    SyntheticKind,
    SyntheticSpec,
)

__all__ = [
    'MatrixCompletionLeastSquares', 'MatrixCompletionOracle', 'MatrixCompletionProblem',
    'matcomp_bilevel_oracle', 'matcomp_from_ratings', 'matcomp_synthetic',
    'normalized_error',
    'PolicyEvalProblem', 'PolicyEvaluationOracle', 'policy_eval_oracle',
    'policy_eval_problem', 'reference_w_star',
    'BilevelQuadratic', 'CompositionalQuadratic', 'LinearObjective',
    'NonconvexCompositionalToy', 'SyntheticKind', 'SyntheticSpec',
]

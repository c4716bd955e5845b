"""
Solver drivers, run records and projections.
"""

from .frank_wolfe import run_sbfw, run_scfw, run_sfw_baseline
from .projected import run_projected_baseline
from .projections import l1_ball_projection, nuclear_ball_projection, project, simplex_projection
from .records import Algorithm, OutputRule, RecordCallback, RunRecord, RunResult, SolverConfig

__all__ = [
    'run_sbfw', 'run_scfw', 'run_sfw_baseline', 'run_projected_baseline',
    'project', 'simplex_projection', 'l1_ball_projection', 'nuclear_ball_projection',
    'Algorithm', 'OutputRule', 'RecordCallback', 'RunRecord', 'RunResult', 'SolverConfig',
]

"""
Noise sweep on synthetic matrix completion.

For every noise factor the same instance seed is solved by SBFW (with
denoising) and by SFW (plain least squares). err0 is the final error of the
same algorithm on the noise-free instance drawn from that seed, so the
columns err - err0 show how fast each method degrades with noise.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd

from core import BifrankError, ConfigurationError

from .config import ExperimentConfig, ProblemKind, load_config
from .runner import EXIT_OK, exit_code_for, solve

logger = logging.getLogger(__name__)

DEFAULT_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
SWEEP_HEADER = ["noise", "err_sbfw", "err_sfw", "err0_sbfw", "err0_sfw"]
SWEEP_ALGORITHMS = ("sbfw", "sfw")


@dataclass(frozen=True)
class SweepRow:
    noise: float
    err_sbfw: float
    err_sfw: float
    err0_sbfw: float
    err0_sfw: float

    def as_row(self) -> List[str]:
        return [repr(float(getattr(self, column))) for column in SWEEP_HEADER]


def final_error(config: ExperimentConfig, noise: float, algorithm: str) -> float:
    """Normalized error of the returned iterate for one noise level and algorithm."""
    horizon = config.solver["horizon"]
    run_config = config.with_overrides([
        f"problem.noise_factor={noise!r}",
        f"solver.algorithm={algorithm}",
        f"output.record_every={horizon}",
    ])
    result, _ = solve(run_config)
    return result.final.normalized_error


def sweep_noise(config: ExperimentConfig, grid: Iterable[float] = DEFAULT_GRID) -> List[SweepRow]:
    """
    Run both algorithms over the noise grid.

    Raises:
        ConfigurationError: Unless the config describes synthetic matrix completion
    """
    if config.kind is not ProblemKind.MATCOMP_SYNTHETIC:
        raise ConfigurationError("sweep-noise needs problem.kind = matcomp_synthetic")
    baseline: Dict[str, float] = {name: final_error(config, 0.0, name) for name in SWEEP_ALGORITHMS}
    rows = []
    for noise in grid:
        if noise == 0.0:
            errors = dict(baseline)
        else:
            errors = {name: final_error(config, noise, name) for name in SWEEP_ALGORITHMS}
        row = SweepRow(noise=float(noise), err_sbfw=errors["sbfw"], err_sfw=errors["sfw"],
                       err0_sbfw=baseline["sbfw"], err0_sfw=baseline["sfw"])
        logger.info("noise %.2f: sbfw %.4f (+%.4f), sfw %.4f (+%.4f)", noise,
                    row.err_sbfw, row.err_sbfw - row.err0_sbfw,
                    row.err_sfw, row.err_sfw - row.err0_sfw)
        rows.append(row)
    return rows


def write_sweep_csv(rows: List[SweepRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame([row.as_row() for row in rows], columns=SWEEP_HEADER).to_csv(path, index=False)
    return path


def cmd_sweep_noise(config_path: Optional[Union[str, Path]], grid: Sequence[float] = DEFAULT_GRID,
                    overrides: Sequence[str] = (), output: Optional[Union[str, Path]] = None) -> int:
    """The `sweep-noise` subcommand; writes sweep.csv. Returns an exit code."""
    try:
        config = load_config(config_path, overrides)
        rows = sweep_noise(config, grid)
    except BifrankError as exc:
        logger.error("%s", exc)
        return exit_code_for(exc)
    target = output if output is not None else Path(config.output["directory"]) / "sweep.csv"
    logger.info("wrote %s", write_sweep_csv(rows, target))
    return EXIT_OK

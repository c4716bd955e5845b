"""
Run orchestration for the `run` subcommand.

cmd_run builds the problem named by the config, pairs it with the requested
driver, streams records to metrics.csv and writes summary.json next to it.
"""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from core import (
    BifrankError,
    ConfigurationError,
    ConstraintSet,
    IngestError,
    NumericError,
    RngStream,
    SolverAborted,
)
from ingest import RatingsDataset, parse_movielens
from oracles import CompositionalBilevelOracle
from problems import (
    MatrixCompletionLeastSquares,
    MatrixCompletionOracle,
    PolicyEvaluationOracle,
    SyntheticKind,
    SyntheticSpec,
    matcomp_from_ratings,
    matcomp_synthetic,
    policy_eval_problem,
    reference_w_star,
)
from solvers import (
    Algorithm,
    RecordCallback,
    RunResult,
    run_projected_baseline,
    run_sbfw,
    run_scfw,
    run_sfw_baseline,
)

from .config import ExperimentConfig, ProblemKind, load_config
from .sinks import ConsoleRecordSink, CsvRecordSink, RecordSinkChain

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INGEST = 4

METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"
ID_MAP_FILE = "id_map.json"

DRIVERS: Dict[Algorithm, Callable[..., RunResult]] = {
    Algorithm.SBFW: run_sbfw,
    Algorithm.SCFW: run_scfw,
    Algorithm.SFW: run_sfw_baseline,
    Algorithm.PROJECTED: run_projected_baseline,
}


@dataclass
class ProblemSetup:
    """
    A problem instance ready for its driver.

    Attributes:
        oracle: Oracle of the kind the driver expects
        constraint (ConstraintSet): Feasible region
        dataset (Optional[RatingsDataset]): Parsed ratings for MovieLens problems
    """
    oracle: object
    constraint: ConstraintSet
    dataset: Optional[RatingsDataset] = None


def thread_budget() -> int:
    """Worker cap from BIFRANK_THREADS, or the CPU count when unset."""
    value = os.getenv("BIFRANK_THREADS", "").strip()
    if not value:
        return os.cpu_count() or 1
    try:
        threads = int(value)
    except ValueError:
        raise ConfigurationError(f"BIFRANK_THREADS must be an integer, got {value!r}") from None
    if threads < 1:
        raise ConfigurationError("BIFRANK_THREADS must be at least 1")
    return threads


def _matcomp_options(config: ExperimentConfig) -> dict:
    p = config.problem
    return {
        "lambda1": p["lambda1"],
        "lambda2": p["lambda2"],
        "epsilon_l1": p["epsilon_l1"],
        "smoothing": p["smoothing"],
        "b1": config.data["b1"],
        "b2": config.data["b2"],
    }


def _policy_options(config: ExperimentConfig) -> Tuple:
    p = config.problem
    return (p["n_states"], p["n_actions"], p["n_features"], p["gamma"],
            0.1 if p["alpha"] is None else p["alpha"], p["favored_prob"])


def _policy_problem(data_seed: int, options: Tuple, deterministic: bool):
    n_states, n_actions, n_features, gamma, alpha, favored_prob = options
    return policy_eval_problem(
        n_states=n_states, n_actions=n_actions, n_features=n_features, gamma=gamma, alpha=alpha,
        favored_prob=favored_prob, rng=RngStream(data_seed, "problem"), deterministic_mode=deterministic)


@lru_cache(maxsize=32)
def cached_w_star(data_seed: int, options: Tuple, budget: int):
    """
    Reference solution of one policy evaluation instance, computed once per
    (data_seed, problem options, budget) and shared read-only between runs.
    """
    w_star = reference_w_star(_policy_problem(data_seed, options, True), budget)
    w_star.setflags(write=False)
    return w_star


def build_problem(config: ExperimentConfig) -> ProblemSetup:
    """
    Build the oracle and feasible region for the configured problem and algorithm.

    Compositional problems run by SBFW or the projected baseline are wrapped
    in CompositionalBilevelOracle; matrix completion under SFW uses the plain
    least-squares oracle.

    Raises:
        ConfigurationError: On invalid problem parameters
        IngestError: When a ratings file cannot be used
    """
    kind = config.kind
    algorithm = config.algorithm
    p = config.problem
    rng = RngStream(config.data_seed, "problem")

    if kind.matrix_completion:
        dataset = None
        if kind is ProblemKind.MATCOMP_SYNTHETIC:
            problem, _ = matcomp_synthetic(p["n"], p["r"], p["noise_factor"], p["observe_prob"],
                                           rng, **_matcomp_options(config))
            if p["alpha"] is not None:
                problem = replace(problem, alpha=p["alpha"])
        else:
            dataset = parse_movielens(config.data["path"], config.data["format"])
            problem = matcomp_from_ratings(dataset, alpha=p["alpha"], **_matcomp_options(config))
        if algorithm is Algorithm.SFW:
            oracle = MatrixCompletionLeastSquares(problem)
        else:
            oracle = MatrixCompletionOracle(problem)
        return ProblemSetup(oracle=oracle, constraint=problem.constraint(), dataset=dataset)

    if kind is ProblemKind.POLICY_EVAL:
        options = _policy_options(config)
        problem = _policy_problem(config.data_seed, options, p["deterministic"])
        budget = p["reference_budget"]
        w_star = cached_w_star(config.data_seed, options, budget) if budget > 0 else None
        oracle = PolicyEvaluationOracle(problem, w_star)
        constraint = problem.constraint()
    else:
        spec = SyntheticSpec(kind=SyntheticKind(kind.value), dim=p["dim"], mu_g=p["mu_g"],
                             L_g=p["L_g"], p=p["p"], q=p["q"], sigma_f=p["sigma_f"],
                             sigma_g=p["sigma_g"],
                             radius=p["radius"] if p["alpha"] is None else p["alpha"])
        oracle, constraint = spec.build(rng)

    if kind.compositional and algorithm is not Algorithm.SCFW:
        oracle = CompositionalBilevelOracle(oracle)
    return ProblemSetup(oracle=oracle, constraint=constraint)


def solve(config: ExperimentConfig,
          on_record: Optional[RecordCallback] = None) -> Tuple[RunResult, ProblemSetup]:
    """Build the configured problem and run its driver."""
    setup = build_problem(config)
    driver = DRIVERS[config.algorithm]
    result = driver(setup.oracle, setup.constraint, config.solver_config(), on_record=on_record)
    return result, setup


def _write_json(path: Path, payload: dict) -> None:
    with path.open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _summary(config: ExperimentConfig, status: str, **fields) -> dict:
    payload = {
        "status": status,
        "problem": config.kind.value,
        "algorithm": config.algorithm.value,
        "seed": config.seed,
        "data_seed": config.data_seed,
    }
    payload.update(fields)
    payload["config"] = config.echo()
    return payload


def run_experiment(config: ExperimentConfig, directory: Union[str, Path]) -> int:
    """
    Run one configured experiment into directory.

    Writes metrics.csv as records arrive and summary.json at the end. A
    numeric abort keeps the rows already written and is reported in the
    summary.

    Returns:
        int: Exit code
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    chain = RecordSinkChain()
    csv_sink = CsvRecordSink(directory / METRICS_FILE)
    chain.add_to_chain(csv_sink)
    if config.output["verbose"]:
        chain.add_to_chain(ConsoleRecordSink(label=f"seed {config.seed}"))
    try:
        result, setup = solve(config, on_record=chain)
    except SolverAborted as exc:
        logger.error("seed %d aborted at iteration %d: %s", config.seed, exc.iteration, exc)
        _write_json(directory / SUMMARY_FILE, _summary(
            config, "aborted", aborted_at=exc.iteration, message=str(exc),
            records=len(exc.records)))
        return EXIT_NUMERIC
    finally:
        chain.close()

    if setup.dataset is not None:
        setup.dataset.write_id_maps(directory / ID_MAP_FILE)
    final = result.final.as_row()
    _write_json(directory / SUMMARY_FILE, _summary(
        config, "ok", output_index=result.output_index, records=len(result.records), final=final))
    logger.info("seed %d finished: iterate %d objective=%s error=%s fw_gap=%s -> %s",
                config.seed, result.output_index, final["objective"],
                final["normalized_error"], final["fw_gap"], directory)
    return EXIT_OK


def exit_code_for(exc: BifrankError) -> int:
    """Exit code of a failure: 4 ingest, 3 numeric, 2 anything else the user can fix."""
    if isinstance(exc, IngestError):
        return EXIT_INGEST
    if isinstance(exc, NumericError):
        return EXIT_NUMERIC
    return EXIT_CONFIG


def _guarded(config: ExperimentConfig, directory: Path) -> int:
    try:
        return run_experiment(config, directory)
    except BifrankError as exc:
        logger.error("seed %d failed: %s", config.seed, exc)
        return exit_code_for(exc)


def cmd_run(config_path: Optional[Union[str, Path]], overrides: Sequence[str] = (),
            parallel_seeds: int = 1, output_dir: Optional[Union[str, Path]] = None) -> int:
    """
    The `run` subcommand.

    Args:
        config_path: Experiment config file
        overrides: section.key=value strings applied after the file
        parallel_seeds (int): Number of consecutive seeds, starting at solver.seed,
            run concurrently; each writes into its own seed_<s> directory
        output_dir: Replaces output.directory when given

    Returns:
        int: 0 on success, 2 for configuration errors, 3 for numeric aborts,
            4 for ingest errors; the largest code over all seeds
    """
    try:
        config = load_config(config_path, overrides)
        if parallel_seeds < 1:
            raise ConfigurationError("--parallel-seeds must be at least 1")
        workers = min(parallel_seeds, thread_budget())
    except ConfigurationError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG

    root = Path(output_dir if output_dir is not None else config.output["directory"])
    if parallel_seeds == 1:
        return _guarded(config, root)

    runs: List[Tuple[ExperimentConfig, Path]] = []
    for offset in range(parallel_seeds):
        seed = config.seed + offset
        runs.append((config.with_overrides([f"solver.seed={seed}"]), root / f"seed_{seed}"))
    logger.info("running %d seeds on %d workers", parallel_seeds, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        codes = list(pool.map(lambda run: _guarded(*run), runs))
    return max(codes)

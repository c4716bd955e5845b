"""
Experiment configuration.

An experiment is described by an INI file with four sections. Every key has a
default listed in SCHEMA; a file only needs the keys it changes.

    [problem]   kind and parameters of the problem instance
    [solver]    SolverConfig fields
    [data]      ratings file and minibatch sizes
    [output]    output directory and record cadence

Values given with --set section.key=value are applied after the file and
validated the same way. An empty value means "unset" for optional keys.
"""

import configparser
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple, Union

from core import ConfigurationError
from solvers import Algorithm, OutputRule, SolverConfig

logger = logging.getLogger(__name__)


class ProblemKind(Enum):
    MATCOMP_SYNTHETIC = "matcomp_synthetic"
    MATCOMP_MOVIELENS = "matcomp_movielens"
    POLICY_EVAL = "policy_eval"
    BILEVEL_QUADRATIC = "bilevel_quadratic"
    COMPOSITIONAL_QUADRATIC = "compositional_quadratic"
    NONCONVEX_COMPOSITIONAL_TOY = "nonconvex_compositional_toy"

    @property
    def matrix_completion(self) -> bool:
        return self in (ProblemKind.MATCOMP_SYNTHETIC, ProblemKind.MATCOMP_MOVIELENS)

    @property
    def compositional(self) -> bool:
        return self in (ProblemKind.POLICY_EVAL, ProblemKind.COMPOSITIONAL_QUADRATIC,
                        ProblemKind.NONCONVEX_COMPOSITIONAL_TOY)


def _boolean(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(convert: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str):
        return None if text.strip() == "" else convert(text)
    parse.__name__ = f"optional {convert.__name__}"
    return parse


def _choice(enum_type) -> Callable[[str], str]:
    allowed = [member.value for member in enum_type]

    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return value
    parse.__name__ = enum_type.__name__
    return parse


def _one_of(*allowed: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        value = text.strip().lower()
        if value not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return value
    parse.__name__ = "choice"
    return parse


def _optional_one_of(*allowed: str) -> Callable[[str], Optional[str]]:
    return _optional(_one_of(*allowed))


# section -> key -> (converter, default text)
SCHEMA: Dict[str, Dict[str, Tuple[Callable[[str], Any], str]]] = {
    "problem": {
        "kind": (_choice(ProblemKind), "matcomp_synthetic"),
        "data_seed": (_optional(int), ""),
        # matrix completion
        "n": (int, "50"),
        "r": (int, "5"),
        "noise_factor": (float, "0.5"),
        "observe_prob": (float, "0.8"),
        "lambda1": (float, "0.05"),
        "lambda2": (float, "0.05"),
        "epsilon_l1": (float, "0.001"),
        "smoothing": (_one_of("pseudo_huber", "subgradient"), "pseudo_huber"),
        "alpha": (_optional(float), ""),
        # policy evaluation
        "n_states": (int, "100"),
        "n_actions": (int, "3"),
        "n_features": (int, "100"),
        "gamma": (float, "0.9"),
        "favored_prob": (float, "0.9"),
        "deterministic": (_boolean, "false"),
        "reference_budget": (int, "100000"),
        # synthetic testbeds
        "dim": (int, "10"),
        "mu_g": (float, "1.0"),
        "L_g": (float, "2.0"),
        "p": (float, "1.0"),
        "q": (float, "1.0"),
        "sigma_f": (float, "0.1"),
        "sigma_g": (float, "0.1"),
        "radius": (float, "1.0"),
    },
    "solver": {
        "algorithm": (_choice(Algorithm), "sbfw"),
        "regime": (_one_of("convex", "nonconvex"), "convex"),
        "horizon": (int, "1000"),
        "seed": (int, "0"),
        "delta": (_optional(float), ""),
        "rho": (_optional(float), ""),
        "eta": (_optional(float), ""),
        "k": (_optional(int), ""),
        "k_max": (_optional(int), ""),
        "output_rule": (_optional_one_of("last", "uniform"), ""),
        "alpha0": (float, "0.1"),
    },
    "data": {
        "path": (str, ""),
        "format": (_one_of("tab100k", "doublecolon1m", "csv"), "tab100k"),
        "b1": (int, "50"),
        "b2": (int, "50"),
    },
    "output": {
        "directory": (str, "runs"),
        "record_every": (int, "1"),
        "verbose": (_boolean, "false"),
    },
}

# algorithms each problem family can be run with
_PAIRINGS = {
    "matrix_completion": {Algorithm.SBFW, Algorithm.SFW, Algorithm.PROJECTED},
    "compositional": {Algorithm.SBFW, Algorithm.SCFW, Algorithm.PROJECTED},
    "bilevel": {Algorithm.SBFW, Algorithm.PROJECTED},
}


def _family(kind: ProblemKind) -> str:
    if kind.matrix_completion:
        return "matrix_completion"
    if kind.compositional:
        return "compositional"
    return "bilevel"


@dataclass
class ExperimentConfig:
    """
    Validated experiment description.

    Attributes:
        raw (Dict[str, Dict[str, str]]): Text value of every key, defaults included
        values (Dict[str, Dict[str, Any]]): Converted values
        source (Optional[Path]): File the config was read from
    """
    raw: Dict[str, Dict[str, str]]
    values: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    source: Optional[Path] = None

    def __post_init__(self):
        self.values = _convert(self.raw)
        self._check_combination()

    @property
    def problem(self) -> Dict[str, Any]:
        return self.values["problem"]

    @property
    def solver(self) -> Dict[str, Any]:
        return self.values["solver"]

    @property
    def data(self) -> Dict[str, Any]:
        return self.values["data"]

    @property
    def output(self) -> Dict[str, Any]:
        return self.values["output"]

    @property
    def kind(self) -> ProblemKind:
        return ProblemKind(self.problem["kind"])

    @property
    def algorithm(self) -> Algorithm:
        return Algorithm(self.solver["algorithm"])

    @property
    def seed(self) -> int:
        return self.solver["seed"]

    @property
    def data_seed(self) -> int:
        """Seed of the problem instance; follows the solver seed unless pinned."""
        pinned = self.problem["data_seed"]
        return self.seed if pinned is None else pinned

    def _check_combination(self) -> None:
        self.solver_config()
        family = _family(self.kind)
        if self.algorithm not in _PAIRINGS[family]:
            raise ConfigurationError(
                f"algorithm {self.algorithm.value} cannot run problem kind {self.kind.value}")
        if self.kind is ProblemKind.MATCOMP_MOVIELENS and not self.data["path"]:
            raise ConfigurationError("data.path is required for matcomp_movielens")
        for key in ("b1", "b2"):
            if self.data[key] < 1:
                raise ConfigurationError(f"data.{key} must be at least 1")

    def solver_config(self, seed: Optional[int] = None) -> SolverConfig:
        """SolverConfig of this experiment, optionally with another seed."""
        s = self.solver
        rule = s["output_rule"]
        return SolverConfig(
            algorithm=Algorithm(s["algorithm"]),
            regime=s["regime"],
            horizon_T=s["horizon"],
            seed=self.seed if seed is None else seed,
            record_every=self.output["record_every"],
            output_rule=None if rule is None else OutputRule(rule),
            delta=s["delta"], rho=s["rho"], eta=s["eta"],
            k=s["k"], k_max=s["k_max"],
            alpha0=s["alpha0"],
        )

    def with_overrides(self, overrides: Iterable[str]) -> "ExperimentConfig":
        """A copy with dotted-path overrides applied."""
        raw = {section: dict(keys) for section, keys in self.raw.items()}
        for override in overrides:
            section, key, value = _split_override(override)
            raw[section][key] = value
        return ExperimentConfig(raw=raw, source=self.source)

    def echo(self) -> Dict[str, Dict[str, str]]:
        """Every key's text value; from_mapping(echo()) rebuilds this config."""
        return {section: dict(keys) for section, keys in self.raw.items()}

    @classmethod
    def from_mapping(cls, mapping: Dict[str, Dict[str, Any]],
                     source: Optional[Path] = None) -> "ExperimentConfig":
        raw = _defaults()
        for section, keys in mapping.items():
            if section not in SCHEMA:
                raise ConfigurationError(f"unknown config section [{section}]")
            for key, value in keys.items():
                if key not in SCHEMA[section]:
                    raise ConfigurationError(f"unknown config key {section}.{key}")
                raw[section][key] = "" if value is None else str(value)
        return cls(raw=raw, source=source)


def _defaults() -> Dict[str, Dict[str, str]]:
    return {section: {key: default for key, (_, default) in keys.items()}
            for section, keys in SCHEMA.items()}


def _convert(raw: Dict[str, Dict[str, str]]) -> Dict[str, Dict[str, Any]]:
    values: Dict[str, Dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (convert, _) in keys.items():
            text = raw[section][key]
            try:
                values[section][key] = convert(text)
            except ValueError as exc:
                raise ConfigurationError(f"invalid value for {section}.{key}: {text!r} ({exc})") from None
    return values


def _split_override(override: str) -> Tuple[str, str, str]:
    path, sep, value = override.partition("=")
    section, dot, key = path.strip().partition(".")
    if not sep or not dot:
        raise ConfigurationError(f"override must look like section.key=value, got {override!r}")
    if section not in SCHEMA:
        raise ConfigurationError(f"unknown config section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigurationError(f"unknown config key {section}.{key}")
    return section, key, value.strip()


def load_config(path: Optional[Union[str, Path]] = None,
                overrides: Iterable[str] = ()) -> ExperimentConfig:
    """
    Read and validate an experiment config.

    Args:
        path: INI file; the defaults alone when None
        overrides: section.key=value strings applied after the file

    Returns:
        ExperimentConfig: The validated configuration

    Raises:
        ConfigurationError: On a missing or unparsable file, unknown sections
            or keys, or invalid values
    """
    mapping: Dict[str, Dict[str, str]] = {}
    source = None
    if path is not None:
        source = Path(path)
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            with source.open(encoding="utf-8") as handle:
                parser.read_file(handle)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {source}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse config {source}: {exc}") from exc
        mapping = {section: dict(parser.items(section)) for section in parser.sections()}
        logger.debug("loaded config %s with sections %s", source, ", ".join(mapping))
    config = ExperimentConfig.from_mapping(mapping, source=source)
    overrides = list(overrides)
    return config.with_overrides(overrides) if overrides else config

"""
Stochastic first-order oracle accounting.
"""

from dataclasses import dataclass, fields
from enum import Enum


class CallKind(Enum):
    OUTER = "outer"       # outer gradient samples (grad_x f, grad_y f, grad f)
    INNER = "inner"       # inner gradient samples (grad_y g)
    HESSIAN = "hessian"   # Hessian-vector and cross-Hessian samples
    MAP = "map"           # inner-map samples and their Jacobian products


@dataclass
class OracleCallCounter:
    """Exact, monotone count of oracle calls per kind."""
    outer: int = 0
    inner: int = 0
    hessian: int = 0
    map: int = 0

    def increment(self, kind: CallKind, amount: int = 1) -> None:
        setattr(self, kind.value, getattr(self, kind.value) + amount)

    def snapshot(self) -> "OracleCallCounter":
        return OracleCallCounter(self.outer, self.inner, self.hessian, self.map)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __sub__(self, other: "OracleCallCounter") -> "OracleCallCounter":
        return OracleCallCounter(self.outer - other.outer, self.inner - other.inner,
                                 self.hessian - other.hessian, self.map - other.map)

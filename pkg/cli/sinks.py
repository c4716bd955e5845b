"""
Record sinks.

A solver hands every RunRecord to one callback. The CLI plugs a
RecordSinkChain in there and fans each record out to the sinks it holds:
the per-run metrics CSV and, when verbose, a console progress line.
"""

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from solvers import RunRecord

logger = logging.getLogger(__name__)

METRICS_HEADER = [
    "iter", "wall_clock_ms", "objective", "normalized_error", "fw_gap", "inner_gap",
    "sfo_outer", "sfo_inner", "sfo_hessian", "sfo_map",
]


def format_cell(value) -> str:
    """CSV text of a metric; empty for undefined values."""
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class BaseRecordSink(ABC):
    """Destination for run records."""

    @abstractmethod
    def handle_record(self, record: RunRecord) -> None:
        pass

    def close(self) -> None:
        pass


class CsvRecordSink(BaseRecordSink):
    """
    Writes metrics.csv, one row per record.

    Rows are flushed as they are written so an aborted run leaves every
    recorded iteration on disk.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("w", newline="", encoding="utf-8")
        self._append(pd.DataFrame(columns=METRICS_HEADER), header=True)
        self.rows = 0

    def _append(self, frame: pd.DataFrame, header: bool = False) -> None:
        frame.to_csv(self._handle, header=header, index=False, lineterminator="\n")
        self._handle.flush()

    def handle_record(self, record: RunRecord) -> None:
        row = record.as_row()
        self._append(pd.DataFrame([[format_cell(row[column]) for column in METRICS_HEADER]],
                                  columns=METRICS_HEADER))
        self.rows += 1

    def close(self) -> None:
        if not self._handle.closed:
            self._handle.close()


class ConsoleRecordSink(BaseRecordSink):
    """Logs a progress line per record."""

    def __init__(self, label: str = ""):
        self.label = label

    def handle_record(self, record: RunRecord) -> None:
        prefix = f"{self.label} " if self.label else ""
        logger.info("%siter %d  objective=%s  error=%s  fw_gap=%s",
                    prefix, record.iteration, _short(record.objective),
                    _short(record.normalized_error), _short(record.fw_gap))


def _short(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4g}"


class RecordSinkChain(BaseRecordSink):
    """Forwards each record to every sink in the chain, in insertion order."""

    def __init__(self):
        self._sink_chain: List[BaseRecordSink] = []

    def add_to_chain(self, sink: BaseRecordSink) -> None:
        """
        Add a sink to the chain.

        Raises:
            TypeError: If sink does not inherit from BaseRecordSink
        """
        if not isinstance(sink, BaseRecordSink):
            raise TypeError("Sink must inherit from BaseRecordSink")
        self._sink_chain.append(sink)

    def remove_sink(self, sink: BaseRecordSink) -> None:
        if sink in self._sink_chain:
            self._sink_chain.remove(sink)

    def clear_sinks(self) -> None:
        self._sink_chain.clear()

    def __len__(self) -> int:
        return len(self._sink_chain)

    def handle_record(self, record: RunRecord) -> None:
        for sink in self._sink_chain:
            sink.handle_record(record)

    def __call__(self, record: RunRecord) -> None:
        self.handle_record(record)

    def close(self) -> None:
        for sink in self._sink_chain:
            sink.close()

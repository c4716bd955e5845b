"""
Deterministic randomness.

Every random draw in bifrank comes from an RngStream identified by
(seed, stream_id). Streams are PCG64 generators seeded through a
SeedSequence, so equal (seed, stream_id, draw index) triples give equal draws
on every platform. A run owns one SampleStreams bundle; trackers mark and
rewind it to evaluate two points under a common sample.
"""

import copy
import zlib
from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Union

import numpy as np


class StreamId(Enum):
    """Independent sample streams of a run."""
    THETA = "theta"       # outer samples
    XI = "xi"             # inner samples
    HESSIAN = "hessian"   # Neumann chain and cross-Hessian samples
    DATA = "data"         # problem generation, output-index selection
    LMO = "lmo"           # power-iteration start vectors


def _stream_code(stream_id: Union[StreamId, str]) -> int:
    label = stream_id.value if isinstance(stream_id, StreamId) else str(stream_id)
    return zlib.crc32(label.encode("utf-8"))


class RngStream:
    """
    A named, reproducible random stream.

    Attributes:
        seed (int): Run seed
        stream_id: Label separating this stream from the others of the run
        generator (np.random.Generator): The underlying PCG64 generator
    """

    def __init__(self, seed: int, stream_id: Union[StreamId, str]):
        self.seed = int(seed)
        self.stream_id = stream_id
        sequence = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, _stream_code(stream_id)])
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def mark(self) -> Dict:
        """Snapshot the stream position."""
        return copy.deepcopy(self.generator.bit_generator.state)

    def rewind(self, mark: Dict) -> None:
        """Return the stream to a position taken with mark()."""
        self.generator.bit_generator.state = copy.deepcopy(mark)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def random(self, size=None):
        return self.generator.random(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id!r})"


@dataclass
class StreamMark:
    states: Dict[StreamId, Dict]


class SampleStreams:
    """
    The set of independent streams owned by one run.

    Args:
        seed (int): Run seed shared by every stream in the bundle
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.theta = RngStream(seed, StreamId.THETA)
        self.xi = RngStream(seed, StreamId.XI)
        self.hessian = RngStream(seed, StreamId.HESSIAN)
        self.data = RngStream(seed, StreamId.DATA)
        self.lmo = RngStream(seed, StreamId.LMO)

    def _streams(self) -> Dict[StreamId, RngStream]:
        return {StreamId.THETA: self.theta, StreamId.XI: self.xi,
                StreamId.HESSIAN: self.hessian, StreamId.DATA: self.data,
                StreamId.LMO: self.lmo}

    def mark(self) -> StreamMark:
        return StreamMark({key: stream.mark() for key, stream in self._streams().items()})

    def rewind(self, mark: StreamMark) -> None:
        streams = self._streams()
        for key, state in mark.states.items():
            streams[key].rewind(state)

    @contextmanager
    def replay(self):
        """Run the body, then put every stream back where it was."""
        mark = self.mark()
        try:
            yield mark
        finally:
            self.rewind(mark)

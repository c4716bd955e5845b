"""
MovieLens rating files.

Three text layouts are understood:

    tab100k        user<TAB>item<TAB>rating<TAB>timestamp          (ml-100k u.data)
    doublecolon1m  user::item::rating::timestamp                   (ml-1m ratings.dat)
    csv            userId,movieId,rating,timestamp with a header   (ml-latest ratings.csv)

Raw ids are reindexed to dense 0-based ids in order of first appearance.
Repeated (user, item) pairs keep the position of their first occurrence and
the rating of their last.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from core import IngestError

logger = logging.getLogger(__name__)

MALFORMED_THRESHOLD = 0.001
RATING_MIN = 0.5
RATING_MAX = 5.0
CSV_HEADER = ["userId", "movieId", "rating", "timestamp"]
COLUMNS = ["user", "item", "rating", "timestamp"]


class RatingsFormat(Enum):
    TAB_100K = "tab100k"
    DOUBLE_COLON_1M = "doublecolon1m"
    CSV_LATEST = "csv"


@dataclass(frozen=True, eq=False)
class RatingsDataset:
    """
    Parsed ratings with dense ids.

    Attributes:
        n_users (int): Number of distinct users
        n_items (int): Number of distinct items
        users (np.ndarray): Dense user index per entry
        items (np.ndarray): Dense item index per entry
        ratings (np.ndarray): Rating per entry
        source_format (RatingsFormat): Layout of the source file
        user_ids (List[int]): Raw user id of each dense index
        item_ids (List[int]): Raw item id of each dense index
        duplicates (int): Repeated (user, item) pairs overwritten while parsing
        malformed_lines (List[int]): 1-based line numbers that were skipped
    """
    n_users: int
    n_items: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    source_format: RatingsFormat
    user_ids: List[int] = field(default_factory=list)
    item_ids: List[int] = field(default_factory=list)
    duplicates: int = 0
    malformed_lines: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.ratings.size)

    def entries(self) -> List[Tuple[int, int, float]]:
        return list(zip(self.users.tolist(), self.items.tolist(), self.ratings.tolist()))

    def to_matrix(self) -> np.ndarray:
        """Dense n_users x n_items matrix with zeros at unobserved entries."""
        matrix = np.zeros((self.n_users, self.n_items))
        matrix[self.users, self.items] = self.ratings
        return matrix

    def write_canonical(self, path: Union[str, Path]) -> Path:
        """Write the entries in csv layout with raw ids, in entry order."""
        path = Path(path)
        frame = pd.DataFrame({
            "userId": np.asarray(self.user_ids, dtype=np.int64)[self.users],
            "movieId": np.asarray(self.item_ids, dtype=np.int64)[self.items],
            "rating": self.ratings,
            "timestamp": 0,
        }, columns=CSV_HEADER)
        frame.to_csv(path, index=False)
        return path

    def write_id_maps(self, path: Union[str, Path]) -> Path:
        """Persist the raw-to-dense id maps as JSON."""
        path = Path(path)
        payload = {
            "users": {str(raw): dense for dense, raw in enumerate(self.user_ids)},
            "items": {str(raw): dense for dense, raw in enumerate(self.item_ids)},
        }
        with path.open("w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
        return path


# stands in for every field of a line with too many fields, so the line stays malformed
_BAD_FIELD = "malformed"

_SEPARATORS = {
    RatingsFormat.TAB_100K: "\t",
    RatingsFormat.DOUBLE_COLON_1M: "::",
    RatingsFormat.CSV_LATEST: ",",
}


def _read_frame(path: Path, source_format: RatingsFormat) -> pd.DataFrame:
    """One string row per physical line; blank lines are all-NaN rows."""
    try:
        return pd.read_csv(path, sep=_SEPARATORS[source_format], header=None, names=COLUMNS,
                           dtype=str, engine="python", skip_blank_lines=False,
                           encoding="utf-8", encoding_errors="replace",
                           on_bad_lines=lambda fields: [_BAD_FIELD] * len(COLUMNS))
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=COLUMNS, dtype=str)
    except pd.errors.ParserError as exc:
        raise IngestError(f"cannot parse {path}: {exc}") from exc
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def _valid_rows(frame: pd.DataFrame) -> Tuple[pd.Series, pd.DataFrame]:
    numbers = frame.apply(lambda column: pd.to_numeric(column.map(str.strip, na_action="ignore"),
                                                       errors="coerce"))
    whole = numbers[["user", "item", "timestamp"]]
    valid = (numbers.notna().all(axis=1)
             & (whole % 1 == 0).all(axis=1)
             & (numbers["timestamp"] >= 0)
             & numbers["rating"].between(RATING_MIN, RATING_MAX))
    return valid, numbers


def parse_movielens(path: Union[str, Path], source_format: Union[RatingsFormat, str]) -> RatingsDataset:
    """
    Parse a MovieLens ratings file.

    Args:
        path: File to read
        source_format: One of RatingsFormat or its string value

    Returns:
        RatingsDataset: Entries with dense ids

    Raises:
        IngestError: If the file cannot be read, holds no ratings, or more than
            0.1% of its data lines are malformed
    """
    try:
        source_format = RatingsFormat(source_format)
    except ValueError:
        raise IngestError(f"unknown ratings format {source_format!r}") from None
    path = Path(path)
    frame = _read_frame(path, source_format)
    # row i of the frame is line i + 1 of the file
    frame.index = pd.RangeIndex(1, len(frame) + 1)

    if source_format is RatingsFormat.CSV_LATEST and len(frame):
        header = [str(cell).strip() for cell in frame.iloc[0].tolist()]
        if header != CSV_HEADER:
            raise IngestError(f"{path}: expected header {','.join(CSV_HEADER)}")
        frame = frame.iloc[1:]

    frame = frame[frame.notna().any(axis=1)]
    valid, numbers = _valid_rows(frame)
    malformed = frame.index[~valid].tolist()
    data_lines = len(frame)
    if data_lines == 0 or not valid.any():
        raise IngestError(f"{path}: no ratings found")
    if len(malformed) > MALFORMED_THRESHOLD * data_lines:
        shown = ", ".join(str(n) for n in malformed[:10])
        raise IngestError(f"{path}: {len(malformed)} of {data_lines} lines malformed (lines {shown})")
    if malformed:
        logger.warning("%s: skipped %d malformed lines", path, len(malformed))

    good = numbers[valid]
    user_codes, user_ids = pd.factorize(good["user"].astype(np.int64))
    item_codes, item_ids = pd.factorize(good["item"].astype(np.int64))
    pairs = pd.DataFrame({"user": user_codes, "item": item_codes, "rating": good["rating"].to_numpy()})
    # groups come out in order of first appearance, each with its last rating
    ratings = pairs.groupby(["user", "item"], sort=False)["rating"].last()
    duplicates = len(pairs) - len(ratings)
    if duplicates:
        logger.warning("%s: %d repeated (user, item) pairs, kept the last rating", path, duplicates)

    dataset = RatingsDataset(
        n_users=len(user_ids),
        n_items=len(item_ids),
        users=ratings.index.get_level_values("user").to_numpy(dtype=np.int64),
        items=ratings.index.get_level_values("item").to_numpy(dtype=np.int64),
        ratings=ratings.to_numpy(dtype=np.float64),
        source_format=source_format,
        user_ids=user_ids.tolist(),
        item_ids=item_ids.tolist(),
        duplicates=int(duplicates),
        malformed_lines=malformed,
    )
    logger.info("parsed %s: %d users, %d items, %d ratings",
                path.name, dataset.n_users, dataset.n_items, len(dataset))
    return dataset

import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal
from scipy import stats

from core import IngestError, RngStream, SamplingError
from ingest import RatingsFormat, minibatch, parse_movielens, sample_positions

TAB_LINES = [
    "196\t242\t3\t881250949",
    "186\t302\t3\t891717742",
    "196\t377\t1\t878887116",
    "244\t51\t2\t880606923",
]


def write_lines(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestParseMovielens:

    def test_tab_layout(self, tmp_path):
        dataset = parse_movielens(write_lines(tmp_path, "u.data", TAB_LINES), "tab100k")
        assert (dataset.n_users, dataset.n_items, len(dataset)) == (3, 4, 4)
        assert dataset.user_ids == [196, 186, 244]
        assert dataset.item_ids == [242, 302, 377, 51]
        assert dataset.entries()[2] == (0, 2, 1.0)
        assert dataset.source_format is RatingsFormat.TAB_100K

    def test_layouts_agree(self, tmp_path):
        double_colon = [line.replace("\t", "::") for line in TAB_LINES]
        csv_lines = ["userId,movieId,rating,timestamp"] + [line.replace("\t", ",") for line in TAB_LINES]
        reference = parse_movielens(write_lines(tmp_path, "u.data", TAB_LINES), RatingsFormat.TAB_100K)
        for name, lines, layout in (("ratings.dat", double_colon, "doublecolon1m"),
                                    ("ratings.csv", csv_lines, "csv")):
            dataset = parse_movielens(write_lines(tmp_path, name, lines), layout)
            assert dataset.entries() == reference.entries()
            assert dataset.user_ids == reference.user_ids

    def test_half_star_ratings(self, tmp_path):
        lines = ["userId,movieId,rating,timestamp", "1,10,4.5,0", "2,10,0.5,0"]
        dataset = parse_movielens(write_lines(tmp_path, "ratings.csv", lines), "csv")
        assert dataset.ratings.tolist() == [4.5, 0.5]

    def test_duplicates_keep_last_rating(self, tmp_path):
        lines = TAB_LINES + ["196\t242\t5\t881250950"]
        dataset = parse_movielens(write_lines(tmp_path, "u.data", lines), "tab100k")
        assert len(dataset) == 4
        assert dataset.duplicates == 1
        assert dataset.entries()[0] == (0, 0, 5.0)

    def test_tolerates_rare_malformed_lines(self, tmp_path):
        good = [f"{u}\t{i}\t3\t0" for u in range(1, 41) for i in range(1, 51)]
        lines = good[:1000] + ["garbage"] + good[1000:]
        dataset = parse_movielens(write_lines(tmp_path, "u.data", lines), "tab100k")
        assert len(dataset) == 2000
        assert dataset.malformed_lines == [1001]

    def test_line_numbers_count_blank_and_overlong_lines(self, tmp_path):
        good = [f"{u}\t{i}\t4\t0" for u in range(1, 41) for i in range(1, 51)]
        lines = good[:1000] + ["", "1\t2\t3\t4\t5"] + good[1000:]
        dataset = parse_movielens(write_lines(tmp_path, "u.data", lines), "tab100k")
        assert len(dataset) == 2000
        assert dataset.malformed_lines == [1002]
        assert dataset.ratings.tolist() == [4.0] * 2000

    def test_ratings_dat_layout(self, tmp_path):
        lines = ["1::1193::5::978300760", "1::661::3::978302109", "2::1193::4::978298413"]
        dataset = parse_movielens(write_lines(tmp_path, "ratings.dat", lines), "doublecolon1m")
        assert dataset.entries() == [(0, 0, 5.0), (0, 1, 3.0), (1, 0, 4.0)]
        assert dataset.item_ids == [1193, 661]

    def test_rejects_many_malformed_lines(self, tmp_path):
        lines = TAB_LINES + ["1\t2\t9\t0"]
        with pytest.raises(IngestError, match="malformed"):
            parse_movielens(write_lines(tmp_path, "u.data", lines), "tab100k")

    @pytest.mark.parametrize("line", ["1\t2\t3", "x\t2\t3\t0", "1\t2\t0.2\t0", "1\t2\t3\t-5"])
    def test_malformed_kinds(self, tmp_path, line):
        with pytest.raises(IngestError):
            parse_movielens(write_lines(tmp_path, "u.data", [TAB_LINES[0], line]), "tab100k")

    def test_missing_file_and_bad_inputs(self, tmp_path):
        with pytest.raises(IngestError, match="cannot read"):
            parse_movielens(tmp_path / "absent.data", "tab100k")
        with pytest.raises(IngestError, match="unknown ratings format"):
            parse_movielens(write_lines(tmp_path, "u.data", TAB_LINES), "xml")
        with pytest.raises(IngestError, match="header"):
            parse_movielens(write_lines(tmp_path, "r.csv", ["user,item,rating,ts", "1,2,3,0"]), "csv")
        with pytest.raises(IngestError, match="no ratings"):
            parse_movielens(write_lines(tmp_path, "empty.data", [""]), "tab100k")


class TestDatasetOutputs:

    def test_to_matrix(self, tmp_path):
        dataset = parse_movielens(write_lines(tmp_path, "u.data", TAB_LINES), "tab100k")
        matrix = dataset.to_matrix()
        assert matrix.shape == (3, 4)
        assert matrix[0, 2] == 1.0
        assert np.count_nonzero(matrix) == 4

    def test_canonical_file_parses_back(self, tmp_path):
        dataset = parse_movielens(write_lines(tmp_path, "u.data", TAB_LINES), "tab100k")
        again = parse_movielens(dataset.write_canonical(tmp_path / "canonical.csv"), "csv")
        assert again.entries() == dataset.entries()
        assert again.item_ids == dataset.item_ids

    def test_id_maps(self, tmp_path):
        dataset = parse_movielens(write_lines(tmp_path, "u.data", TAB_LINES), "tab100k")
        payload = json.loads(dataset.write_id_maps(tmp_path / "id_map.json").read_text())
        assert payload["users"] == {"196": 0, "186": 1, "244": 2}
        assert payload["items"]["51"] == 3


class TestMinibatch:

    def test_seeded_and_in_range(self):
        pairs = np.array([[0, 1], [2, 3], [4, 5]])
        first = minibatch(pairs, 50, RngStream(7, "theta"))
        second = minibatch(pairs, 50, RngStream(7, "theta"))
        assert_array_equal(first, second)
        assert first.shape == (50, 2)
        assert {tuple(row) for row in first} <= {(0, 1), (2, 3), (4, 5)}

    def test_draws_with_replacement(self):
        positions = sample_positions(2, 100, RngStream(0, "theta"))
        assert set(positions.tolist()) == {0, 1}

    def test_from_dataset(self, tmp_path):
        dataset = parse_movielens(write_lines(tmp_path, "u.data", TAB_LINES), "tab100k")
        batch = minibatch(dataset, 10, RngStream(0, "theta"))
        observed = set(zip(dataset.users.tolist(), dataset.items.tolist()))
        assert {tuple(row) for row in batch.tolist()} <= observed

    @pytest.mark.parametrize("count, b", [(0, 1), (3, 0)])
    def test_rejects_empty_requests(self, count, b):
        with pytest.raises(SamplingError):
            sample_positions(count, b, RngStream(0, "theta"))

    def test_batches_cover_entries_uniformly(self):
        pairs = np.array([(i, (3 * i) % 7) for i in range(7)])
        stream = RngStream(5, "xi")
        batches = np.concatenate([minibatch(pairs, 16, stream) for _ in range(4000)])
        counts = np.bincount(batches[:, 0], minlength=7)
        assert counts.sum() == 64_000
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_positions_are_uniform(self):
        positions = sample_positions(10, 100_000, RngStream(3, "theta"))
        counts = np.bincount(positions, minlength=10)
        assert stats.chisquare(counts).pvalue > 1e-3

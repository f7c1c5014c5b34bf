import numpy as np
import pytest

from conftest import yeast_available, yeast_paths
from tailrank.data import (
    MultiLabelDataset,
    concat_datasets,
    load_arff,
    load_label_xml,
    load_model,
    make_rng,
    planted_instance,
    save_model,
    stats,
    synth_low_rank,
    write_arff,
)
from tailrank.errors import ArffParseError, DataFormatError, ModelFormatError, UsageError
from tailrank.matrix import numerical_rank

ARFF_HEADER = "@relation t\n@attribute a numeric\n@attribute b numeric\n@attribute y {0,1}\n@data\n"


def write(tmp_path, text, name="data.arff"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadArff:
    def test_three_row_dense(self, fixtures_dir):
        ds = load_arff(fixtures_dir / "three_rows.arff", 1)
        assert ds.features.shape == (3, 2)
        assert ds.labels.shape == (3, 1)
        assert ds.labels[:, 0].tolist() == [1.0, 0.0, 1.0]
        assert ds.feature_names == ("x1", "x2")

    def test_sparse_row(self, fixtures_dir):
        ds = load_arff(fixtures_dir / "tiny_sparse.arff", 1)
        assert ds.features[0].tolist() == [1.5, 0.0, 0.0]
        assert ds.labels[0].tolist() == [1.0]

    def test_sparse_and_dense_agree(self, fixtures_dir):
        dense = load_arff(fixtures_dir / "tiny_dense.arff", 1)
        sparse = load_arff(fixtures_dir / "tiny_sparse.arff", 1)
        assert np.array_equal(dense.features, sparse.features)
        assert np.array_equal(dense.labels, sparse.labels)

    def test_mixed_rows_and_quoted_names(self, fixtures_dir):
        ds = load_arff(fixtures_dir / "emotions20.arff", 4)
        assert (ds.n, ds.d, ds.l) == (20, 3, 4)
        assert ds.feature_names == ("tempo", "spectral flux", "loudness")
        assert ds.label_names == ("amazed", "happy", "relaxing", "sad")
        assert ds.features[7].tolist() == [0.5, 0.0, 0.0]
        assert ds.labels[7].tolist() == [0.0, 0.0, 0.0, 1.0]

    def test_labels_first(self, tmp_path):
        path = write(tmp_path, "@relation t\n@attribute y {0,1}\n@attribute a numeric\n@data\n1,0.5\n0,2\n")
        ds = load_arff(path, 1, labels_at_end=False)
        assert ds.label_names == ("y",)
        assert ds.features[:, 0].tolist() == [0.5, 2.0]

    def test_label_xml_selects_by_name(self, fixtures_dir):
        names = load_label_xml(fixtures_dir / "emotions20.xml")
        assert names == ["amazed", "happy", "relaxing", "sad"]
        reordered = load_arff(fixtures_dir / "emotions20.arff", 4, labels_at_end=False, label_names=names)
        assert reordered.label_names == tuple(names)
        assert reordered.d == 3

    def test_label_xml_unknown_name(self, fixtures_dir, tmp_path):
        xml = write(tmp_path, '<labels><label name="angry"/></labels>', "labels.xml")
        with pytest.raises(DataFormatError):
            load_arff(fixtures_dir / "emotions20.arff", 1, label_names=load_label_xml(xml))

    @pytest.mark.parametrize("body, line", [
        ("1,2,3\n", 6),
        ("1,abc,0\n", 6),
        ("0,0,1\n1,1,2\n", 7),
        ("{0 1, 9 1}\n", 6),
    ])
    def test_row_errors_carry_line_number(self, tmp_path, body, line):
        path = write(tmp_path, ARFF_HEADER + body)
        with pytest.raises(ArffParseError) as excinfo:
            load_arff(path, 1)
        assert excinfo.value.line == line
        assert f":{line}:" in str(excinfo.value)

    def test_nominal_attribute_rejected(self, tmp_path):
        path = write(tmp_path, "@relation t\n@attribute c {red,blue}\n@attribute y {0,1}\n@data\nred,1\n")
        with pytest.raises(ArffParseError) as excinfo:
            load_arff(path, 1)
        assert excinfo.value.line == 2

    def test_missing_data_section(self, tmp_path):
        path = write(tmp_path, "@relation t\n@attribute a numeric\n@attribute y {0,1}\n")
        with pytest.raises(ArffParseError, match="@data"):
            load_arff(path, 1)

    def test_invalid_utf8_carries_line_number(self, tmp_path):
        path = tmp_path / "latin.arff"
        path.write_bytes(ARFF_HEADER.encode("utf-8") + b"0,1,1\n1,\xe9,0\n")
        with pytest.raises(ArffParseError) as excinfo:
            load_arff(path, 1)
        assert excinfo.value.line == 7
        assert "UTF-8" in str(excinfo.value)

    def test_missing_value_rejected(self, tmp_path):
        path = write(tmp_path, ARFF_HEADER + "1,?,0\n")
        with pytest.raises(ArffParseError) as excinfo:
            load_arff(path, 1)
        assert excinfo.value.line == 6

    def test_too_many_labels(self, fixtures_dir):
        with pytest.raises(UsageError):
            load_arff(fixtures_dir / "three_rows.arff", 3)

    def test_dense_round_trip(self, fixtures_dir, tmp_path):
        original = load_arff(fixtures_dir / "emotions20.arff", 4)
        write_arff(original, tmp_path / "copy.arff")
        reloaded = load_arff(tmp_path / "copy.arff", 4)
        assert np.array_equal(original.features, reloaded.features)
        assert np.array_equal(original.labels, reloaded.labels)
        assert reloaded.feature_names == original.feature_names

    def test_sparse_writer_round_trip(self, tmp_path):
        ds, _ = synth_low_rank(15, 4, 3, 2, 0.1, seed=5)
        write_arff(ds, tmp_path / "dense.arff")
        write_arff(ds, tmp_path / "sparse.arff", sparse=True)
        dense = load_arff(tmp_path / "dense.arff", 3)
        sparse = load_arff(tmp_path / "sparse.arff", 3)
        assert np.array_equal(dense.features, ds.features)
        assert np.array_equal(sparse.features, ds.features)
        assert np.array_equal(sparse.labels, ds.labels)


class TestDataset:
    def test_rejects_row_mismatch(self):
        with pytest.raises(UsageError):
            MultiLabelDataset(np.zeros((2, 1)), np.zeros((3, 1)), ("a",), ("y",))

    def test_rejects_duplicate_names(self):
        with pytest.raises(UsageError):
            MultiLabelDataset(np.zeros((2, 1)), np.zeros((2, 1)), ("a",), ("a",))

    def test_concat_requires_same_attributes(self, fixtures_dir):
        a = load_arff(fixtures_dir / "tiny_dense.arff", 1)
        b = load_arff(fixtures_dir / "three_rows.arff", 1)
        assert concat_datasets([a, a]).n == 6
        with pytest.raises(UsageError):
            concat_datasets([a, b])


class TestStats:
    def test_fixture_by_hand(self, fixtures_dir):
        s = stats(load_arff(fixtures_dir / "emotions20.arff", 4))
        assert (s.n, s.d, s.l) == (20, 3, 4)
        assert s.cardinality == pytest.approx(1.9, abs=1e-12)
        assert s.density == pytest.approx(0.475, abs=1e-12)
        assert s.distinct == 9

    def test_all_zero_labels(self):
        ds = MultiLabelDataset(np.ones((3, 2)), np.zeros((3, 2)), ("a", "b"), ("y1", "y2"))
        s = stats(ds)
        assert s.cardinality == 0.0
        assert s.distinct == 1

    def test_identical_rows(self):
        ds = MultiLabelDataset(np.ones((2, 1)), np.array([[1.0, 0.0], [1.0, 0.0]]), ("a",), ("y1", "y2"))
        assert stats(ds).distinct == 1

    def test_invariants(self, fixtures_dir):
        s = stats(load_arff(fixtures_dir / "emotions20.arff", 4))
        assert s.density == pytest.approx(s.cardinality / s.l, abs=1e-9)
        assert s.distinct <= min(s.n, 2 ** s.l)

    @pytest.mark.skipif(not yeast_available(), reason="yeast ARFF files not found in TAILRANK_DATA_DIR")
    def test_yeast_table(self):
        ds = concat_datasets([load_arff(path, 14) for path in yeast_paths()])
        s = stats(ds)
        assert (s.n, s.d, s.l, s.distinct) == (2417, 103, 14, 198)
        assert s.cardinality == pytest.approx(4.237, abs=1e-3)
        assert s.density == pytest.approx(0.303, abs=1e-3)


class TestSynth:
    def test_full_rank_planted(self):
        _, w_star = synth_low_rank(30, 5, 4, 4, 0.0, seed=1)
        assert numerical_rank(w_star) == 4

    def test_planted_rank_three(self):
        _, w_star = synth_low_rank(200, 20, 8, 3, 0.0, seed=7)
        sigma = np.linalg.svd(w_star, compute_uv=False)
        assert sigma[3] < 1e-9 * sigma[0]
        assert numerical_rank(w_star) == 3

    def test_deterministic(self):
        a, wa = synth_low_rank(25, 6, 5, 2, 0.3, seed=11)
        b, wb = synth_low_rank(25, 6, 5, 2, 0.3, seed=11)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)
        assert np.array_equal(wa, wb)

    def test_labels_at_or_above_row_median(self):
        ds, _ = synth_low_rank(10, 3, 5, 2, 0.0, seed=2)
        assert np.all(ds.labels.sum(axis=1) >= 3)

    @pytest.mark.parametrize("rank", [0, 5])
    def test_rank_out_of_range(self, rank):
        with pytest.raises(UsageError):
            planted_instance(10, 4, 3, rank, 0.0, make_rng(0))

    def test_negative_noise(self):
        with pytest.raises(UsageError):
            planted_instance(10, 4, 3, 1, -0.1, make_rng(0))


class TestModelFiles:
    def test_round_trip_bitwise(self, rng, tmp_path):
        w = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-8, 8, size=(4, 3))
        save_model(w, tmp_path / "w.model", {"reg": "tail", "theta": 2})
        assert np.array_equal(load_model(tmp_path / "w.model"), w)

    def test_identity_layout(self, tmp_path):
        save_model(np.eye(2), tmp_path / "eye.model")
        lines = (tmp_path / "eye.model").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "2 2"
        assert sum(len(line.split()) for line in lines[1:]) == 4

    def test_header_lines_ignored(self, tmp_path):
        path = write(tmp_path, "# c=1.0\n1 2\n# note\n0.5 -1.5\n", "w.model")
        assert load_model(path).tolist() == [[0.5, -1.5]]

    @pytest.mark.parametrize("text, line", [
        ("2 2\n1 0\n", None),
        ("2 2\n1 0 0\n0 1\n", 2),
        ("1 x\n", 1),
        ("1 1\nnan\n", 2),
        ("1 1\n1\n2\n", 3),
    ])
    def test_format_errors(self, tmp_path, text, line):
        path = write(tmp_path, text, "bad.model")
        with pytest.raises(ModelFormatError) as excinfo:
            load_model(path)
        assert excinfo.value.line == line

    def test_invalid_utf8_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.model"
        path.write_bytes(b"# note\n1 2\n0.5 \xff\n")
        with pytest.raises(ModelFormatError) as excinfo:
            load_model(path)
        assert excinfo.value.line == 3

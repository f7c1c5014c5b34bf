import csv

import pytest

from conftest import yeast_available, yeast_paths
from tailrank.cli import parse_args, run
from tailrank.data import load_arff, load_model
from tailrank.errors import UsageError
from tailrank.solver import lipschitz_step
from tailrank.utils import parse_key_values

METRIC_KEYS = ("top1_accuracy", "top3_accuracy", "top5_accuracy", "hamming_loss", "average_auc", "average_precision")


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.reader(f))


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    status = run([
        "synth", "--n", "80", "--d", "5", "--l", "6", "--rank", "2",
        "--seed", "3", "--test-frac", "0.25", "--out-dir", str(out),
    ])
    assert status == 0
    return out


@pytest.fixture(scope="module")
def trained(synth_dir):
    model = synth_dir / "w.model"
    status = run([
        "train", "--data", str(synth_dir / "train.arff"), "--labels", "6",
        "--reg", "tail", "--theta-frac", "0.4", "--c", "1.0",
        "--out", str(model), "--trace", str(synth_dir / "conv.csv"),
        "--report", str(synth_dir / "train.txt"),
    ])
    assert status == 0
    return model


class TestParseArgs:
    def test_defaults(self, fixtures_dir):
        config = parse_args(["train", "--data", str(fixtures_dir / "three_rows.arff"), "--labels", "1",
                             "--theta", "1", "--out", "w.model"])
        assert config.command == "train"
        assert config.options["gamma"] == 1.1
        assert config.options["max_iters"] == 500
        assert config.options["reg"] == "tail"

    def test_theta_options_exclusive(self, fixtures_dir):
        with pytest.raises(UsageError, match="theta"):
            parse_args(["train", "--data", str(fixtures_dir / "three_rows.arff"), "--labels", "1",
                        "--theta", "3", "--theta-frac", "0.4", "--out", "w.model"])

    def test_gamma_must_exceed_one(self, fixtures_dir):
        with pytest.raises(UsageError, match="gamma"):
            parse_args(["train", "--data", str(fixtures_dir / "three_rows.arff"), "--labels", "1",
                        "--theta", "1", "--gamma", "1.0", "--out", "w.model"])

    def test_unknown_flag(self):
        with pytest.raises(UsageError, match="--colour"):
            parse_args(["demo-completion", "--out", "c.csv", "--colour", "red"])

    def test_missing_required(self):
        with pytest.raises(UsageError, match="--out"):
            parse_args(["demo-completion"])

    def test_missing_input_file(self, tmp_path):
        with pytest.raises(UsageError, match="no such file"):
            parse_args(["stats", "--data", str(tmp_path / "absent.arff"), "--labels", "1"])

    def test_bad_k_list(self, fixtures_dir, tmp_path):
        with pytest.raises(UsageError):
            parse_args(["eval", "--model", str(fixtures_dir / "three_rows.arff"),
                        "--data", str(fixtures_dir / "three_rows.arff"), "--labels", "1", "--k", "1,x"])


class TestExitCodes:
    def test_help(self, capsys):
        assert run(["--help"]) == 0
        assert "demo-completion" in capsys.readouterr().out

    def test_usage_error(self, capsys):
        assert run(["train", "--bogus"]) == 2
        assert "usage error" in capsys.readouterr().err

    def test_tail_without_theta(self, fixtures_dir, tmp_path):
        status = run(["train", "--data", str(fixtures_dir / "three_rows.arff"), "--labels", "1",
                      "--out", str(tmp_path / "w.model")])
        assert status == 2
        assert not (tmp_path / "w.model").exists()

    def test_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.arff"
        bad.write_text("@relation r\n@attribute a numeric\n@attribute y {0,1}\n@data\n1,7\n", encoding="utf-8")
        assert run(["stats", "--data", str(bad), "--labels", "1"]) == 1
        assert ":5:" in capsys.readouterr().err

    def test_non_utf8_input(self, tmp_path, capsys):
        bad = tmp_path / "latin.arff"
        bad.write_bytes(b"@relation r\n@attribute a numeric\n@attribute y {0,1}\n@data\n0,1\n\xe9,0\n")
        assert run(["stats", "--data", str(bad), "--labels", "1"]) == 1
        assert ":6:" in capsys.readouterr().err

    def test_model_data_mismatch(self, fixtures_dir, trained):
        status = run(["eval", "--model", str(trained), "--data", str(fixtures_dir / "three_rows.arff"),
                      "--labels", "1"])
        assert status == 2


class TestCommands:
    def test_synth_outputs(self, synth_dir):
        assert (synth_dir / "train.arff").is_file()
        assert (synth_dir / "test.arff").is_file()
        header = (synth_dir / "truth.model").read_text(encoding="utf-8").splitlines()
        assert "# generator=PCG64" in header
        assert "# seed=3" in header

    def test_synth_byte_identical(self, synth_dir):
        before = (synth_dir / "train.arff").read_bytes(), (synth_dir / "truth.model").read_bytes()
        assert run([
            "synth", "--n", "80", "--d", "5", "--l", "6", "--rank", "2",
            "--seed", "3", "--test-frac", "0.25", "--out-dir", str(synth_dir),
        ]) == 0
        assert ((synth_dir / "train.arff").read_bytes(), (synth_dir / "truth.model").read_bytes()) == before

    def test_train_artifacts(self, synth_dir, trained):
        w = load_model(trained)
        assert w.shape == (5, 6)
        text = trained.read_text(encoding="utf-8")
        assert "# command=train" in text
        assert "# solver.gamma=1.1" in text
        assert "# solver.theta_resolved=2" in text
        t0_line = next(line for line in text.splitlines() if line.startswith("# solver.t0_resolved="))
        features = load_arff(synth_dir / "train.arff", 6).features
        assert float(t0_line.partition("=")[2]) == pytest.approx(lipschitz_step(features), rel=1e-12)

        rows = read_csv(synth_dir / "conv.csv")
        assert rows[0] == ["iteration", "objective", "loss", "penalty", "t"]
        objectives = [float(row[1]) for row in rows[1:]]
        assert objectives[-1] <= objectives[0]
        assert int(rows[1][0]) == 0

        report = parse_key_values((synth_dir / "train.txt").read_text(encoding="utf-8"))
        assert int(report["iterations"]) == len(rows) - 2

    def test_train_deterministic(self, synth_dir, trained, tmp_path):
        argv = [
            "train", "--data", str(synth_dir / "train.arff"), "--labels", "6",
            "--reg", "tail", "--theta-frac", "0.4", "--c", "1.0",
            "--out", str(tmp_path / "w.model"),
        ]
        assert run(argv) == 0
        first = (tmp_path / "w.model").read_bytes()
        assert run(argv) == 0
        assert (tmp_path / "w.model").read_bytes() == first

    def test_eval_report(self, synth_dir, trained, tmp_path):
        out = tmp_path / "metrics.txt"
        status = run(["eval", "--model", str(trained), "--data", str(synth_dir / "test.arff"),
                      "--labels", "6", "--k", "1,3,5", "--out", str(out), "--csv", str(tmp_path / "m.csv")])
        assert status == 0
        text = out.read_text(encoding="utf-8")
        assert all(line.startswith("#") or "=" in line for line in text.splitlines())
        values = parse_key_values(text)
        for key in METRIC_KEYS:
            assert 0.0 <= float(values[key]) <= 1.0
        assert float(values["average_auc"]) > 0.5
        assert [row[0] for row in read_csv(tmp_path / "m.csv")[1:]] == list(METRIC_KEYS)

    def test_predict_scores(self, synth_dir, trained, tmp_path):
        out = tmp_path / "scores.csv"
        assert run(["predict", "--model", str(trained), "--data", str(synth_dir / "test.arff"),
                    "--labels", "6", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == [f"label{j}" for j in range(1, 7)]
        assert len(rows) == 1 + 20

    def test_bound_report(self, trained, tmp_path):
        out = tmp_path / "bound.txt"
        assert run(["bound", "--model", str(trained), "--n", "60", "--delta", "0.05",
                    "--r", "1.0", "--theta-frac", "0.4", "--out", str(out)]) == 0
        values = parse_key_values(out.read_text(encoding="utf-8"))
        assert int(values["theta"]) == 2
        for key in ("trace_bound_value", "local_rc_value", "global_gap", "local_gap"):
            assert float(values[key]) >= 0.0

    def test_stats_report(self, fixtures_dir, capsys):
        assert run(["stats", "--data", str(fixtures_dir / "emotions20.arff"), "--labels", "4"]) == 0
        values = parse_key_values(capsys.readouterr().out)
        assert values["n"] == "20"
        assert float(values["cardinality"]) == pytest.approx(1.9)
        assert values["distinct"] == "9"

    def test_stats_merges_files(self, fixtures_dir, capsys):
        path = str(fixtures_dir / "tiny_dense.arff")
        assert run(["stats", "--data", path, path, "--labels", "1"]) == 0
        assert parse_key_values(capsys.readouterr().out)["n"] == "6"

    def test_demo_completion(self, tmp_path):
        contour = tmp_path / "contour.csv"
        report = tmp_path / "min.txt"
        assert run(["demo-completion", "--norm", "trace", "--out", str(contour), "--report", str(report)]) == 0
        rows = read_csv(contour)
        assert rows[0] == ["v1", "v2", "norm"]
        assert len(rows) == 1 + 41 * 41
        values = parse_key_values(report.read_text(encoding="utf-8"))
        assert float(values["v1"]) == pytest.approx(1.8377, abs=0.005)
        assert float(values["v2"]) == pytest.approx(1.4248, abs=0.005)
        assert float(values["sigma3"]) == pytest.approx(0.2965, abs=1e-3)

    def test_compare(self, synth_dir, tmp_path):
        out = tmp_path / "compare.csv"
        assert run(["compare", "--train", str(synth_dir / "train.arff"), "--test", str(synth_dir / "test.arff"),
                    "--labels", "6", "--max-iters", "60", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["method", "theta", "rank", "top1", "top3", "top5",
                           "hamming_loss", "average_auc", "average_precision"]
        assert [row[0] for row in rows[1:]] == ["tail"] * 4 + ["trace", "frobenius"]
        assert [row[1] for row in rows[1:5]] == ["1", "2", "4", "5"]

    def test_compare_drops_cut_offs_above_label_count(self, fixtures_dir, tmp_path):
        data = str(fixtures_dir / "emotions20.arff")
        out = tmp_path / "compare.csv"
        assert run(["compare", "--train", data, "--test", data, "--labels", "4",
                    "--max-iters", "20", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert rows[0] == ["method", "theta", "rank", "top1", "top3",
                           "hamming_loss", "average_auc", "average_precision"]
        assert [row[1] for row in rows[1:5]] == ["1", "2", "2", "3"]

    def test_compare_needs_a_usable_cut_off(self, fixtures_dir, tmp_path):
        data = str(fixtures_dir / "emotions20.arff")
        assert run(["compare", "--train", data, "--test", data, "--labels", "4", "--k", "5,6",
                    "--max-iters", "5", "--out", str(tmp_path / "compare.csv")]) == 2


@pytest.mark.skipif(not yeast_available(), reason="yeast ARFF files not found in TAILRANK_DATA_DIR")
class TestYeastSmoke:
    def test_end_to_end(self, tmp_path):
        train_path, test_path = yeast_paths()
        model = tmp_path / "w.model"
        assert run(["train", "--data", str(train_path), "--labels", "14", "--reg", "tail",
                    "--theta-frac", "0.4", "--c", "1.0", "--max-iters", "200", "--out", str(model)]) == 0
        reports = []
        out = tmp_path / "metrics.txt"
        for _ in range(2):
            assert run(["eval", "--model", str(model), "--data", str(test_path), "--labels", "14",
                        "--out", str(out)]) == 0
            reports.append(out.read_bytes())
        assert reports[0] == reports[1]
        values = parse_key_values(reports[0].decode("utf-8"))
        for key in METRIC_KEYS:
            assert 0.0 <= float(values[key]) <= 1.0
        assert float(values["average_auc"]) > 0.5

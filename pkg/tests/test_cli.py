import json

import numpy as np
import pytest

from actiforest.cli import main
from actiforest.data import load_csv, make_toroid, save_csv
from actiforest.iforest import Forest


@pytest.fixture()
def toroid_csv(tmp_path):
    path = tmp_path / "toroid.csv"
    save_csv(make_toroid(150, 15, seed=1), path)
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestFit:
    def test_creates_model(self, toroid_csv, tmp_path, capsys):
        out = tmp_path / "model.json"
        code = run_cli(
            "fit", "--data", toroid_csv, "--label-col", "label",
            "--trees", 10, "--psi", 32, "--seed", 5, "--out", out,
        )
        assert code == 0
        assert out.exists()
        forest = Forest.load(out)
        assert forest.n_trees == 10 and forest.psi == 32
        printed = capsys.readouterr().out
        assert "psi: 32" in printed and "c_psi" in printed

    def test_same_seed_byte_identical(self, toroid_csv, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run_cli(
                "fit", "--data", toroid_csv, "--label-col", "label",
                "--trees", 5, "--psi", 16, "--seed", 9, "--out", out,
            ) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_psi_larger_than_dataset_is_data_error(self, toroid_csv, tmp_path):
        code = run_cli(
            "fit", "--data", toroid_csv, "--label-col", "label",
            "--psi", 100000, "--seed", 1, "--out", tmp_path / "m.json",
        )
        assert code == 1

    def test_missing_file_is_data_error(self, tmp_path):
        code = run_cli(
            "fit", "--data", tmp_path / "nope.csv", "--seed", 1,
            "--out", tmp_path / "m.json",
        )
        assert code == 1

    def test_bad_flag_is_usage_error(self, toroid_csv, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli("fit", "--data", toroid_csv, "--trees", "ten", "--out", tmp_path / "m")
        assert err.value.code == 2


class TestScore:
    @pytest.fixture()
    def model(self, toroid_csv, tmp_path):
        out = tmp_path / "model.json"
        run_cli(
            "fit", "--data", toroid_csv, "--label-col", "label",
            "--trees", 10, "--psi", 32, "--seed", 5, "--out", out,
        )
        return out

    def test_cold_start_matches_forest(self, toroid_csv, model, tmp_path):
        out = tmp_path / "scores.csv"
        assert run_cli(
            "score", "--model", model, "--data", toroid_csv,
            "--label-col", "label", "--out", out,
        ) == 0
        forest = Forest.load(model)
        ds = load_csv(toroid_csv, label_column="label")
        expected = forest.anomaly_scores(ds.features)
        got = np.array([float(line.split(",")[1]) for line in out.read_text().splitlines()[1:]])
        assert np.array_equal(got, expected)

    def test_session_overlay_raises_labeled_score(self, toroid_csv, model, tmp_path):
        from actiforest.active import ANOMALY, Session

        forest = Forest.load(model)
        ds = load_csv(toroid_csv, label_column="label")
        session = Session(forest, ds.features, budget=5)
        session.label_point(160, ANOMALY)  # an inner anomaly row
        ckpt_path = tmp_path / "session.json"
        session.save_checkpoint(ckpt_path)

        plain, overlaid = tmp_path / "plain.csv", tmp_path / "overlaid.csv"
        run_cli("score", "--model", model, "--data", toroid_csv, "--label-col", "label", "--out", plain)
        run_cli(
            "score", "--model", model, "--data", toroid_csv, "--label-col", "label",
            "--session", ckpt_path, "--out", overlaid,
        )
        read = lambda p: np.array(
            [float(line.split(",")[1]) for line in p.read_text().splitlines()[1:]]
        )
        assert read(overlaid)[160] > read(plain)[160]

    def test_feature_mismatch_is_data_error(self, model, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        code = run_cli("score", "--model", model, "--data", bad, "--out", tmp_path / "s.csv")
        assert code == 1
        assert "features" in capsys.readouterr().err

    def test_ranked_output_descending(self, toroid_csv, model, tmp_path):
        out = tmp_path / "ranked.csv"
        run_cli(
            "score", "--model", model, "--data", toroid_csv,
            "--label-col", "label", "--ranked", "--out", out,
        )
        scores = [float(line.split(",")[1]) for line in out.read_text().splitlines()[1:]]
        assert scores == sorted(scores, reverse=True)


class TestSimulate:
    def test_writes_metric_rows(self, toroid_csv, tmp_path):
        out = tmp_path / "report"
        code = run_cli(
            "simulate", "--data", toroid_csv, "--label-col", "label",
            "--queries", 3, "--reps", 2, "--trees", 10, "--psi", 32,
            "--seed", 0, "--out", out,
        )
        assert code == 0
        rows = (out / "raw.csv").read_text().splitlines()
        assert len(rows) == 1 + 2 * 4  # header + reps * (queries + 1)

    def test_zero_queries_baseline_only(self, toroid_csv, tmp_path):
        out = tmp_path / "report0"
        assert run_cli(
            "simulate", "--data", toroid_csv, "--label-col", "label",
            "--queries", 0, "--reps", 1, "--trees", 10, "--psi", 32,
            "--seed", 0, "--out", out,
        ) == 0
        rows = (out / "raw.csv").read_text().splitlines()
        assert len(rows) == 2
        assert rows[1].split(",")[4] == "0"

    def test_unknown_strategy_is_usage_error(self, toroid_csv, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            run_cli(
                "simulate", "--data", toroid_csv, "--label-col", "label",
                "--query-strategy", "wild-guess", "--out", tmp_path / "r",
            )
        assert err.value.code == 2
        assert "most_anomalous" in capsys.readouterr().err

    def test_missing_labels_is_data_error(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("a,b\n1,2\n3,4\n")
        code = run_cli(
            "simulate", "--data", path, "--label-col", "label",
            "--out", tmp_path / "r",
        )
        assert code == 1


class TestBenchAndToroid:
    def test_gen_toroid_and_bench_plan(self, tmp_path):
        data = tmp_path / "t.csv"
        assert run_cli("gen-toroid", "--normal", 80, "--anomaly", 8, "--seed", 2, "--out", data) == 0
        plan = tmp_path / "plan.json"
        plan.write_text(
            json.dumps(
                {
                    "datasets": [{"name": "tiny", "path": str(data), "label_col": "label"}],
                    "strategies": [["most_anomalous", "piecewise_linear"]],
                    "n_queries": 2,
                    "n_repetitions": 2,
                    "n_trees": 8,
                    "psi": 16,
                    "base_seed": 3,
                }
            )
        )
        out = tmp_path / "bench"
        assert run_cli("bench", "--plan", plan, "--out", out) == 0
        assert (out / "aggregate.csv").exists()

    def test_gen_toroid_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli("gen-toroid", "--normal", 50, "--anomaly", 5, "--seed", 4, "--out", a)
        run_cli("gen-toroid", "--normal", 50, "--anomaly", 5, "--seed", 4, "--out", b)
        assert a.read_bytes() == b.read_bytes()

    def test_bad_plan_is_data_error(self, tmp_path):
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps({"datasets": [{"name": "x"}]}))
        assert run_cli("bench", "--plan", plan, "--out", tmp_path / "o") == 1

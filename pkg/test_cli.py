# test_cli.py
import json

import pandas as pd
import pytest

from main import dispatch, parse_config


def run(argv, tmp_path, environment=None):
    return dispatch(parse_config(list(argv) + ["--outdir", str(tmp_path)], environment or {}))


def run_dirs(tmp_path):
    return sorted(p for p in tmp_path.iterdir() if p.is_dir())


class TestParseConfig:
    def test_flag_beats_environment(self):
        config = parse_config(["mc", "--n", "8", "--seed", "42"], {"SYNCHROLAB_SEED": "7"})
        assert config.seed == 42

    def test_environment_beats_default(self):
        config = parse_config(["mc", "--n", "8"], {"SYNCHROLAB_SEED": "7", "SYNCHROLAB_OUTDIR": "out"})
        assert config.seed == 7
        assert config.outdir == "out"

    def test_config_file_beats_environment(self, tmp_path):
        env_file = tmp_path / "run.env"
        env_file.write_text("SYNCHROLAB_SEED=11\nSYNCHROLAB_TRIALS=25\n", encoding="utf-8")
        config = parse_config(["mc", "--n", "8", "--config", str(env_file)], {"SYNCHROLAB_SEED": "7"})
        assert (config.seed, config.trials) == (11, 25)
        config = parse_config(["mc", "--n", "8", "--seed", "3", "--config", str(env_file)], {})
        assert config.seed == 3

    def test_n_grid(self):
        assert parse_config(["mc", "--n-grid", "64,128,256"], {}).n_grid == [64, 128, 256]

    def test_pairs(self):
        config = parse_config(["independence", "--n", "5", "--pairs", "1:0,2:3"], {})
        assert config.pairs == [(1, 0), (2, 3)]

    @pytest.mark.parametrize("argv", [
        ["cerny"],
        ["mc"],
        ["cerny", "--n", "4", "--unknown"],
        ["mc", "--n", "8", "--trials", "0"],
        ["mc", "--n", "8", "--seed", "-1"],
        ["mc", "--n", "8", "--format", "xml"],
        ["mc", "--n", "x"],
        ["no-such-command"],
    ])
    def test_invalid_arguments_exit_2(self, argv):
        with pytest.raises(SystemExit) as excinfo:
            parse_config(argv, {})
        assert excinfo.value.code == 2


class TestDispatch:
    def test_cerny(self, tmp_path, capsys):
        assert run(["cerny", "--n", "4"], tmp_path) == 0
        assert "shortest reset length 9" in capsys.readouterr().out

        [run_dir] = run_dirs(tmp_path)
        manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["final_status"] == "success"
        assert manifest["run_id"].startswith("0001_")
        assert set(manifest["checksums"]) == {"cerny.json"}
        data = json.loads((run_dir / "cerny.json").read_text(encoding="utf-8"))
        assert data["length"] == 9

    def test_exact_json(self, tmp_path, capsys):
        assert run(["exact", "--n", "3", "--format", "json"], tmp_path) == 0
        out = capsys.readouterr().out
        assert '"sync_count": 21' in out
        assert '"total": 27' in out

        [run_dir] = run_dirs(tmp_path)
        check = json.loads((run_dir / "exact_check.json").read_text(encoding="utf-8"))
        assert check["mean_D_matches"] and check["mean_Z1_matches"]
        assert check["expected_Z1_closed_form"] == "1/3"

    def test_chromatic_big_integer(self, tmp_path, capsys):
        assert run(["chromatic", "--n", "12", "--i", "5", "--eval", "12"], tmp_path) == 0
        assert capsys.readouterr().out.strip() == str(11 ** 12 + 11)

    def test_sync_check_witness(self, tmp_path, capsys):
        assert run(["sync-check", "--b", "0,0,2,2"], tmp_path) == 0
        assert "synchronizing=false" in capsys.readouterr().out

    def test_reset_word(self, tmp_path, capsys):
        assert run(["reset-word", "--b", "1,2,0,0,3"], tmp_path) == 0
        assert "reset word" in capsys.readouterr().out

    def test_matrix_csv(self, tmp_path):
        assert run(["matrix", "--b", "0,0,2,2", "--format", "csv"], tmp_path) == 0
        [run_dir] = run_dirs(tmp_path)
        frame = pd.read_csv(run_dir / "matrix_stats.csv")
        assert list(frame["D"]) == [1]
        assert not frame["certificate_present"].iloc[0]
        assert (run_dir / "matrix.csv").read_text(encoding="utf-8").startswith("R,entries,i,z")

    def test_independence(self, tmp_path, capsys):
        assert run(["independence", "--n", "5", "--pairs", "1:0,1:1,2:0"], tmp_path) == 0
        assert "acyclic=false factorizes=false" in capsys.readouterr().out

    def test_composite_prime_check_exit_2(self, tmp_path, capsys):
        assert run(["prime-check", "--n", "4"], tmp_path) == 2
        assert "error" in capsys.readouterr().err
        [run_dir] = run_dirs(tmp_path)
        manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["final_status"] == "failed"
        assert manifest["checksums"] == {}

    def test_bound_single_state_exit_2(self, tmp_path, capsys):
        assert run(["bound-thm22", "--n", "1"], tmp_path) == 2
        assert "n >= 2" in capsys.readouterr().err

    def test_bound_reports_vacuous(self, tmp_path, capsys):
        assert run(["bound-thm22", "--n", "10", "--epsilon", "0.1"], tmp_path) == 0
        assert "(vacuous)" in capsys.readouterr().out

    def test_capacity_exit_3(self, tmp_path):
        assert run(["cerny", "--n", "25"], tmp_path) == 3
        assert run(["exact", "--n", "9"], tmp_path) == 3

    def test_no_save(self, tmp_path):
        assert run(["cerny", "--n", "3", "--no-save"], tmp_path) == 0
        assert run_dirs(tmp_path) == []

    def test_run_ids_count_up(self, tmp_path):
        run(["cerny", "--n", "3"], tmp_path)
        run(["cerny", "--n", "3"], tmp_path)
        assert [p.name[:5] for p in run_dirs(tmp_path)] == ["0001_", "0002_"]

    def test_mc_data_files_reproducible(self, tmp_path):
        argv = ["mc", "--n-grid", "16,24", "--trials", "200", "--seed", "5"]
        assert run(argv, tmp_path) == 0
        assert run(argv + ["--threads", "2"], tmp_path) == 0
        first, second = run_dirs(tmp_path)
        for name in ("mc.json", "summaries.json", "trend.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
        manifest = json.loads((second / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["config"]["workers"] == 2

import numpy as np
import pytest

from madgan.checkpoint import load_checkpoint
from madgan.cli import main, read_scores_csv


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Synthetic train/test CSVs plus a small trained checkpoint."""
    d = tmp_path_factory.mktemp("cli")
    train_csv = d / "train.csv"
    test_csv = d / "test.csv"
    model_bin = d / "model.bin"
    assert run_cli("synth", "--out", str(train_csv), "--length", "600",
                   "--variables", "2", "--seed", "3") == 0
    assert run_cli("synth", "--out", str(test_csv), "--length", "400",
                   "--variables", "2", "--seed", "4",
                   "--attack", "spike:0:100:30:2.0") == 0
    assert run_cli("train", "--data", str(train_csv), "--out", str(model_bin),
                   "--epochs", "3", "--batch_size", "16", "--latent_dim", "3",
                   "--gen_hidden", "8", "--gen_depth", "1",
                   "--disc_hidden", "8", "--disc_depth", "1",
                   "--pc", "none", "--inv_iterations", "10",
                   "--log", str(d / "train_log.csv")) == 0
    return d


class TestSynth:
    def test_writes_loadable_csv(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run_cli("synth", "--out", str(out), "--length", "50",
                       "--variables", "3", "--seed", "0") == 0
        header = out.read_text().splitlines()[0]
        assert header.count(",") == 3  # 3 variables + label
        assert len(out.read_text().splitlines()) == 51

    def test_attack_labels_present(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run_cli("synth", "--out", str(out), "--length", "100",
                       "--seed", "0", "--attack", "stuck:0:20:10:0") == 0
        labels = [int(l.rsplit(",", 1)[1]) for l in out.read_text().splitlines()[1:]]
        assert sum(labels) == 10

    def test_bad_attack_spec(self, tmp_path, capsys):
        rc = run_cli("synth", "--out", str(tmp_path / "s.csv"),
                     "--attack", "spike:0:20")
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            run_cli("synth", "--out", str(p), "--length", "80", "--seed", "7")
        assert a.read_bytes() == b.read_bytes()


class TestTrain:
    def test_checkpoint_and_log_written(self, workdir):
        model, config = load_checkpoint(workdir / "model.bin")
        assert config.epochs == 3 and config.latent_dim == 3
        assert len(model.training_log) == 3
        log_lines = (workdir / "train_log.csv").read_text().splitlines()
        assert log_lines[0] == "epoch,d_loss,g_loss,mmd"
        assert len(log_lines) == 4

    def test_missing_data_file_fails_cleanly(self, tmp_path, capsys):
        rc = run_cli("train", "--data", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "m.bin"))
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_config_value_fails_cleanly(self, workdir, tmp_path, capsys):
        rc = run_cli("train", "--data", str(workdir / "train.csv"),
                     "--out", str(tmp_path / "m.bin"), "--epochs", "three")
        assert rc == 1
        assert "error:" in capsys.readouterr().err


class TestDetectEval:
    def test_detect_writes_scores(self, workdir, tmp_path):
        scores_csv = tmp_path / "scores.csv"
        assert run_cli("detect", "--model", str(workdir / "model.bin"),
                       "--data", str(workdir / "test.csv"),
                       "--scores", str(scores_csv), "--tau", "q0.95") == 0
        scores, truth = read_scores_csv(scores_csv)
        assert len(scores.drs) == 400
        assert truth is not None and truth.sum() == 30
        header = scores_csv.read_text().splitlines()[0]
        assert header == ("timestep,drs,residual_part,discrimination_part,"
                          "lc,label,ground_truth")

    def test_detect_is_byte_deterministic(self, workdir, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert run_cli("detect", "--model", str(workdir / "model.bin"),
                           "--data", str(workdir / "test.csv"),
                           "--scores", str(p)) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_variable_count_mismatch(self, workdir, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        run_cli("synth", "--out", str(bad), "--length", "100",
                "--variables", "3", "--seed", "0")
        rc = run_cli("detect", "--model", str(workdir / "model.bin"),
                     "--data", str(bad), "--scores", str(tmp_path / "s.csv"))
        assert rc == 1
        assert "variable columns" in capsys.readouterr().err

    def test_eval_sweep_prints_best_rows(self, workdir, tmp_path, capsys):
        scores_csv = tmp_path / "scores.csv"
        run_cli("detect", "--model", str(workdir / "model.bin"),
                "--data", str(workdir / "test.csv"), "--scores", str(scores_csv))
        capsys.readouterr()
        assert run_cli("eval", "--scores", str(scores_csv),
                       "--out", str(tmp_path / "table.csv")) == 0
        out = capsys.readouterr().out
        assert "best-f1" in out and "best-recall" in out
        table = (tmp_path / "table.csv").read_text().splitlines()
        assert table[0] == "tau,quantile,precision,recall,f1"
        assert len(table) == 202

    def test_eval_fixed_mode(self, workdir, tmp_path, capsys):
        scores_csv = tmp_path / "scores.csv"
        run_cli("detect", "--model", str(workdir / "model.bin"),
                "--data", str(workdir / "test.csv"), "--scores", str(scores_csv))
        capsys.readouterr()
        assert run_cli("eval", "--scores", str(scores_csv), "--mode", "fixed",
                       "--tau", "0.5") == 0
        assert "precision=" in capsys.readouterr().out

    def test_eval_without_truth_fails(self, tmp_path, capsys):
        p = tmp_path / "scores.csv"
        p.write_text("timestep,drs,residual_part,discrimination_part,lc,label\n"
                     "0,0.5,0.5,0.5,1,0\n")
        assert run_cli("eval", "--scores", str(p)) == 1
        assert "ground_truth" in capsys.readouterr().err


class TestSweep:
    def test_pc_axis_writes_table(self, workdir, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run_cli("sweep", "--axis", "pc", "--values", "1,2",
                       "--train", str(workdir / "train.csv"),
                       "--test", str(workdir / "test.csv"),
                       "--out", str(out),
                       "--epochs", "2", "--batch_size", "16",
                       "--latent_dim", "3", "--gen_hidden", "8",
                       "--gen_depth", "1", "--disc_hidden", "8",
                       "--disc_depth", "1", "--inv_iterations", "5") == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "pc,precision,recall,f1"
        assert len(lines) == 3

    def test_unlabeled_test_rejected(self, workdir, tmp_path, capsys):
        plain = tmp_path / "plain.csv"
        plain.write_text("v0,v1\n" + "\n".join("0.1,0.2" for _ in range(50)) + "\n")
        rc = run_cli("sweep", "--axis", "pc", "--values", "1",
                     "--train", str(workdir / "train.csv"),
                     "--test", str(plain), "--out", str(tmp_path / "o.csv"))
        assert rc == 1
        assert "labeled" in capsys.readouterr().err

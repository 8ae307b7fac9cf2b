import json

import pytest

from deepsc_sr import cli


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run("synth", "--seed", 4, "--count", 4, "--out", root / "corpus") == 0
    (root / "cfg.json").write_text(
        json.dumps({"epochs": 2, "batch_size": 2, "learning_rate": 0.5, "clip_norm": 1.0, "seed": 1})
    )
    return root


class TestCommands:
    def test_train_eval(self, workspace, capsys):
        m = workspace / "corpus" / "manifest.tsv"
        assert run("train", "--config", workspace / "cfg.json", "--manifest", m, "--out", workspace / "m.bin") == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["epochs"] == 2
        out = workspace / "eval.csv"
        assert run("eval", "--ckpt", workspace / "m.bin", "--manifest", m, "--snrs", "0,inf", "--out", out) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "system,channel,snr_db,cer,wer,count,seed" and len(lines) == 5

    def test_baseline(self, workspace):
        m = workspace / "corpus" / "manifest.tsv"
        out = workspace / "base.csv"
        assert run("baseline-eval", "--manifest", m, "--channels", "awgn", "--snrs=-6:0:6", "--out", out) == 0
        assert len(out.read_text().splitlines()) == 3
        meta = json.loads((workspace / "base.csv.meta.json").read_text())
        assert meta["polar"] == {"n": 512, "k": 256, "list_size": 4, "design_snr_db": 2.0}
        assert "perfect" in meta["asr"]

    def test_synth_deterministic(self, tmp_path):
        run("synth", "--seed", 9, "--count", 3, "--out", tmp_path / "a")
        run("synth", "--seed", 9, "--count", 3, "--out", tmp_path / "b")
        assert (tmp_path / "a" / "manifest.tsv").read_bytes() == (tmp_path / "b" / "manifest.tsv").read_bytes()


class TestExitCodes:
    def test_missing_manifest(self, tmp_path, capsys):
        assert run("baseline-eval", "--manifest", tmp_path / "nope.tsv", "--out", tmp_path / "o.csv") == 1
        assert "not found" in capsys.readouterr().err

    def test_bad_config_key(self, workspace, tmp_path):
        (tmp_path / "c.json").write_text('{"epoch": 1}')
        m = workspace / "corpus" / "manifest.tsv"
        assert run("train", "--config", tmp_path / "c.json", "--manifest", m, "--out", tmp_path / "m.bin") == 1

    def test_bad_snr_grid(self, workspace, tmp_path):
        m = workspace / "corpus" / "manifest.tsv"
        assert run("baseline-eval", "--manifest", m, "--snrs", "x", "--out", tmp_path / "o.csv") == 1

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_numerical_failure(self, workspace, tmp_path):
        (tmp_path / "c.json").write_text('{"epochs": 2, "batch_size": 1, "learning_rate": 1e6}')
        m = workspace / "corpus" / "manifest.tsv"
        assert run("train", "--config", tmp_path / "c.json", "--manifest", m, "--out", tmp_path / "m.bin") == 2

    def test_usage_error(self):
        with pytest.raises(SystemExit):
            run("frobnicate")

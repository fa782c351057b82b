import json
import subprocess
import sys
from pathlib import Path

import pytest

from kgstab.config import SCHEMA, STAGES, defaults, load_config, parse_config, schema_text

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "kgstab.cli", *args], capture_output=True, text=True, cwd=cwd,
                          timeout=600)


class TestConfig:
    def test_defaults_cover_schema(self):
        cfg = defaults()
        assert set(cfg.values) == set(SCHEMA)
        assert cfg.stages == STAGES

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="unknown key"):
            parse_config("n_pionts = 10")

    def test_duplicate_key(self):
        with pytest.raises(ValueError, match="duplicate"):
            parse_config("mass = 1\nmass = 2")

    def test_bad_value(self):
        with pytest.raises(ValueError, match="n_points"):
            parse_config("n_points = many")
        with pytest.raises(ValueError):
            parse_config("stages = spectrum, lunch")

    def test_comments_and_types(self):
        cfg = parse_config("# header\nmass = 2  # heavier\nstages = toy\neps_pair = 0.1; 0.2\nsim_sponge = no")
        assert cfg.mass == 2.0 and cfg.stages == ("toy",)
        assert cfg.eps_pair == (0.1, 0.2) and cfg.sim_sponge is False
        assert cfg.explicit == ("mass", "stages", "eps_pair", "sim_sponge")

    def test_digest_is_stable_and_sensitive(self):
        a = parse_config("mass = 1\nseed = 3")
        b = parse_config("seed = 3\n\nmass = 1.0")
        assert a.digest() == b.digest()
        assert a.digest() != a.replace(seed=4).digest()
        with pytest.raises(KeyError):
            a.replace(nonsense=1)

    def test_schema_text_round_trips(self):
        assert parse_config(schema_text()).digest() == defaults().digest()

    @pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.cfg")), ids=lambda p: p.stem)
    def test_shipped_configs_parse(self, path):
        load_config(path)

    def test_default_cfg_matches_defaults(self):
        assert load_config(CONFIGS / "default.cfg").digest() == defaults().digest()


class TestCli:
    def test_free_potential(self, tmp_path):
        r = cli("spectrum", "--config", str(CONFIGS / "free.cfg"), "--out", str(tmp_path), "--quiet")
        assert r.returncode == 0, r.stderr
        assert "trapped modes n = 0" in r.stdout
        assert "linear scattering regime" in r.stdout

    def test_one_well_prints_spectrum(self, tmp_path):
        r = cli("spectrum", "--config", str(CONFIGS / "one_well.cfg"), "--out", str(tmp_path), "--quiet")
        assert r.returncode == 0, r.stderr
        assert "trapped modes n = 1" in r.stdout and "N = 2" in r.stdout
        data = json.loads((tmp_path / "spectrum.json").read_text())
        assert data["n"] == 1

    def test_degenerate_pair_exits_3(self, tmp_path):
        r = cli("spectrum", "--config", str(CONFIGS / "degenerate.cfg"), "--out", str(tmp_path), "--quiet")
        assert r.returncode == 3
        assert "H2" in r.stderr
        v = json.loads((tmp_path / "verdict.json").read_text())
        assert v["name"] == "degenerate"

    def test_manifest_lists_exactly_the_outputs(self, tmp_path):
        r = cli("spectrum", "--config", str(CONFIGS / "one_well.cfg"), "--out", str(tmp_path), "--quiet",
                "--seed", "5")
        assert r.returncode == 0
        m = json.loads((tmp_path / "manifest.json").read_text())
        assert m["config"]["seed"] == 5
        assert m["config_digest"] == load_config(CONFIGS / "one_well.cfg").replace(seed=5).digest()
        listed = set(m["outputs"]) | {"manifest.json"}
        assert listed == {p.name for p in tmp_path.iterdir()}
        assert m["exit_code"] == 0 and m["failed_stage"] is None

    def test_config_errors(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("depht = -3\n")
        r = cli("spectrum", "--config", str(bad), "--out", str(tmp_path / "o"))
        assert r.returncode == 2 and "config error" in r.stderr
        r = cli("spectrum", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "o"))
        assert r.returncode == 2
        r = cli("spectrum", "--threads", "0", "--out", str(tmp_path / "o"))
        assert r.returncode == 2

    def test_unknown_subcommand(self):
        assert cli("bogus").returncode == 2

import json
import subprocess
import sys

import pytest

from tvball.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main, to_json
from tvball.config import parse_config
from tvball.errors import ConfigParseError
from tvball.field import read_csv, read_pgm16

FIG = "r1 = 1.2\nr2 = 1.0\nd = 0.05\n"


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestConfig:
    def test_minimal(self):
        rc = parse_config(FIG)
        assert (rc.r1, rc.r2, rc.d) == (1.2, 1.0, 0.05)
        assert rc.lambdas == [0.1]

    def test_lists_and_strings(self):
        rc = parse_config(FIG + "lambda = [0.05, 0.3]\nformats = 'csv'\nlevels = [0.25]\n")
        assert rc.lambdas == [0.05, 0.3] and rc.formats == ["csv"] and rc.levels == [0.25]

    def test_comments_and_blank_lines(self):
        parse_config("# header\n\n" + FIG + "  # trailing\n")

    @pytest.mark.parametrize(
        "extra",
        [
            "colour = 3\n",
            "r1 = 2\n",
            "lambda = -1\n",
            "lambda = []\n",
            "h = 0\n",
            "box = [0, 1, 0]\n",
            "box = [1, 0, 0, 1]\n",
            "levels = [1.5]\n",
            "formats = ['png']\n",
            "tv = 1\n",
            "optimality_grid = 1\n",
            "lambda = oops\n",
            "nonsense line\n",
        ],
    )
    def test_rejects(self, extra):
        with pytest.raises(ConfigParseError):
            parse_config(FIG + extra)

    def test_missing_key(self):
        with pytest.raises(ConfigParseError):
            parse_config("r1 = 1\nr2 = 1\n")

    def test_invalid_geometry(self):
        with pytest.raises(ConfigParseError):
            parse_config("r1 = 1\nr2 = 1\nd = -1\n")


def test_json_formatting():
    assert to_json({"b": 0.1, "a": [1, None, True]}) == '{\n  "b": 0.10000000000000001,\n  "a": [\n    1,\n    null,\n    true\n  ]\n}'
    assert to_json(float("inf")) == '"inf"'


class TestCommands:
    def test_report(self, tmp_path, capsys):
        cfg = write(tmp_path, FIG + "lambda = [0.02, 0.1, 0.5, 0.8]\n")
        assert main(["report", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_OK
        doc = json.loads((tmp_path / "o" / "report.json").read_text())
        assert doc["case_flag"] == "ratio_lt" and doc["interacting"] is True
        assert [r["regime"] for r in doc["regimes"]] == ["A", "B", "C1", "D"]
        assert list(doc)[:3] == ["config", "interacting", "case_flag"]

    def test_report_far_and_touching(self, tmp_path):
        cfg = write(tmp_path, "r1 = 1\nr2 = 1\nd = 3\n")
        main(["report", "--config", cfg, "--out", str(tmp_path / "far")])
        doc = json.loads((tmp_path / "far" / "report.json").read_text())
        assert doc["interacting"] is False and doc["lambda1"] is None and doc["lambda2"] is None
        cfg = write(tmp_path, "r1 = 1\nr2 = 1\nd = 0\n", "t.cfg")
        main(["report", "--config", cfg, "--out", str(tmp_path / "t")])
        assert json.loads((tmp_path / "t" / "report.json").read_text())["lambda1"] == 0.0

    def test_report_deterministic(self, tmp_path):
        cfg = write(tmp_path, FIG + "lambda = [0.02, 0.3]\n")
        main(["report", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["report", "--config", cfg, "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_field(self, tmp_path):
        cfg = write(tmp_path, FIG + "lambda = [0.1, 0.9]\nh = 0.0625\n")
        out = tmp_path / "f"
        assert main(["field", "--config", cfg, "--out", str(out)]) == EXIT_OK
        u = read_csv(out / "field_00.csv")
        assert 0 < u.values.max() <= 1
        assert not read_csv(out / "field_01.csv").values.any()
        assert read_pgm16(out / "field_00.pgm").same_grid(u)
        svg = (out / "field_00.svg").read_text()
        assert svg.startswith("<?xml") and " A " in svg

    def test_field_deterministic(self, tmp_path):
        cfg = write(tmp_path, FIG + "lambda = 0.3\nh = 0.125\n")
        main(["field", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["field", "--config", cfg, "--out", str(tmp_path / "b")])
        for name in ("field_00.csv", "field_00.pgm", "field_00.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_phase(self, tmp_path):
        cfg = write(tmp_path, FIG + "phase_s_points = 5\nphase_lambda_points = 4\n")
        assert main(["phase", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
        lines = (tmp_path / "phase.csv").read_text().splitlines()
        assert lines[0] == "lambda,s,regime,kind,energy" and len(lines) == 21

    def test_verify_pass(self, tmp_path):
        cfg = write(tmp_path, FIG + "lambda = [0.02, 0.3]\noptimality_grid = 6\nraster_h = 0.0078125\n")
        assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
        doc = json.loads((tmp_path / "verify.json").read_text())
        assert doc["passed"] and doc["failed"] == []

    def test_verify_corrupted(self, tmp_path):
        cfg = write(tmp_path, FIG + "optimality_grid = 4\nraster_h = 0.0078125\ncorrupt_R1 = 1e-6\n")
        assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == EXIT_FAIL
        doc = json.loads((tmp_path / "verify.json").read_text())
        assert doc["failed"] == ["R1 residual"]

    def test_verify_noninteracting(self, tmp_path):
        cfg = write(tmp_path, "r1 = 1\nr2 = 0.5\nd = 2\nlambda = [0.1, 0.2]\nh = 0.0625\n")
        assert main(["verify", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
        doc = json.loads((tmp_path / "verify.json").read_text())
        assert [c["name"] for c in doc["checks"]] == ["non-interaction formula"]

    def test_config_error_exit(self, tmp_path):
        cfg = write(tmp_path, "r1 = 1\n")
        assert main(["report", "--config", cfg, "--out", str(tmp_path)]) == EXIT_CONFIG
        assert main(["report", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_bad_thread_variable(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TVBALL_THREADS", "many")
        assert main(["report", "--config", write(tmp_path, FIG), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_console_script(self, tmp_path):
        cfg = write(tmp_path, FIG)
        r = subprocess.run([sys.executable, "-m", "tvball", "report", "--config", cfg, "--out", str(tmp_path)], capture_output=True, text=True)
        assert r.returncode == 0
        assert json.loads(r.stdout)["case_flag"] == "ratio_lt"

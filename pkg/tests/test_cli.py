import json

import numpy as np
import pytest

from grabeval.cli import cli_main, read_config_file
from grabeval.frame import FormatSpec, load_frame


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return lambda *argv: cli_main(list(argv))


def test_generate_uniform(run, tmp_path):
    assert run("generate", "--pattern", "uniform", "--level", "128", "--size", "256x256", "--out", "u.pgm") == 0
    data = (tmp_path / "u.pgm").read_bytes()
    assert data.startswith(b"P5\n256 256\n255\n")
    payload = data[len(b"P5\n256 256\n255\n"):]
    assert len(payload) == 256 * 256 and set(payload) == {128}


def test_analyze_uniform_noise(run, tmp_path):
    run("generate", "--level", "128", "--out", "u.pgm")
    assert run("analyze", "--input", "u.pgm", "--tests", "noise", "--out", "r.json") == 0
    doc = json.loads((tmp_path / "r.json").read_text())
    result = doc["sections"]["noise"]["result"]
    assert result["abs_mean_noise"] == 0 and result["rms_noise"] == 0 and result["max_noise"] == 0
    assert doc["overall"] == "pass"


def test_analyze_missing_code_fails(run, tmp_path):
    run("generate", "--pattern", "ramp", "--missing-codes", "77", "--out", "missing77.pgm")
    assert run("analyze", "--input", "missing77.pgm", "--tests", "adc", "--out", "r.json") == 1
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["sections"]["adc"]["result"]["missing_codes"] == [77]


def test_generate_with_defects_and_raw(run, tmp_path):
    assert run("generate", "--pattern", "bars", "--size", "128x64", "--jitter", "1", "--noise", "0.5",
               "--seed", "3", "--format", "raw8", "--out", "b.raw") == 0
    frame = load_frame(tmp_path / "b.raw", FormatSpec("raw8", 128, 64, 8))
    assert frame.shape == (64, 128)
    assert run("analyze", "--input", "b.raw", "--size", "128x64", "--tests", "sync", "--out", "r.json") == 0


def test_generate_16bit_raw(run, tmp_path):
    assert run("generate", "--pattern", "ramp", "--bit-depth", "12", "--size", "64x4",
               "--format", "raw16le", "--out", "r.raw16") == 0
    frame = load_frame(tmp_path / "r.raw16", FormatSpec("raw16le", 64, 4, 12))
    assert frame.samples[0, -1] == 4095


def test_config_file_with_flag_override(run, tmp_path):
    run("generate", "--level", "128", "--noise", "0.8", "--seed", "1", "--out", "u.pgm")
    (tmp_path / "eval.cfg").write_text(
        "# lab settings\ninput = u.pgm\ntests = noise\nmax-na-lsb = 0.1\nreport_format = json\n"
    )
    assert run("analyze", "--config", "eval.cfg", "--out", "a.json") == 1
    assert run("analyze", "--config", "eval.cfg", "--max-na-lsb", "5", "--out", "b.json") == 0
    doc = json.loads((tmp_path / "b.json").read_text())
    assert doc["config"]["thresholds"]["max_na_lsb"] == 5.0


def test_generate_from_config(run, tmp_path):
    (tmp_path / "gen.cfg").write_text("pattern = bars\nsize = 64x8\nperiod = 16\nout = bars.pgm\n")
    assert run("generate", "--config", "gen.cfg") == 0
    frame = load_frame(tmp_path / "bars.pgm")
    assert frame.shape == (8, 64) and frame.samples[0, 8] == 20


def test_config_per_test_inputs(run, tmp_path):
    run("generate", "--level", "128", "--out", "u.pgm")
    run("generate", "--pattern", "ramp", "--out", "r.pgm")
    (tmp_path / "c.cfg").write_text("input = u.pgm\ninput.adc = r.pgm\ntests = noise,adc\n")
    assert run("analyze", "--config", "c.cfg", "--out", "r.json") == 0


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["analyze", "--tests", "noise"],
        ["analyze", "--input", "x.pgm", "--tests", "bogus"],
        ["generate", "--pattern", "uniform"],
        ["generate", "--pattern", "spiral", "--out", "x.pgm"],
        ["analyze", "--input-for", "nonsense=x.pgm"],
    ],
)
def test_usage_errors(run, argv, capsys):
    assert run(*argv) == 2
    assert capsys.readouterr().err


def test_missing_input_file_is_input_error(run, capsys):
    assert run("analyze", "--input", "absent.pgm", "--tests", "noise") == 2
    assert "absent.pgm" in capsys.readouterr().err


def test_bad_config_key(run, tmp_path):
    (tmp_path / "c.cfg").write_text("colour = red\n")
    assert run("analyze", "--config", "c.cfg") == 2


def test_invalid_defect_rejected(run):
    assert run("generate", "--interference", "0.7:3", "--out", "x.pgm") == 2


def test_report_rerender(run, tmp_path, capsys):
    run("generate", "--pattern", "ramp", "--out", "r.pgm")
    run("analyze", "--input", "r.pgm", "--tests", "adc", "--out", "r.json")
    capsys.readouterr()
    assert run("report", "r.json") == 0
    assert "ADC parameters: No missing codes." in capsys.readouterr().out
    assert run("report", "r.json", "--report-format", "csv-bundle", "--out", "bundle") == 0
    assert (tmp_path / "bundle" / "histogram.csv").exists()


def test_text_to_stdout(run, capsys):
    run("generate", "--level", "50", "--out", "u.pgm")
    capsys.readouterr()
    assert run("analyze", "--input", "u.pgm", "--tests", "noise", "--report-format", "text") == 0
    assert "Overall: PASS" in capsys.readouterr().out


def test_read_config_file(tmp_path):
    (tmp_path / "c.cfg").write_text("a = 1\n\n# comment\nb-c=x y  # trailing\nflag true\n")
    assert read_config_file(tmp_path / "c.cfg") == {"a": "1", "b_c": "x y", "flag": "true"}

import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grabeval.evaluate import (
    ALL_TESTS,
    EvalConfig,
    EvaluationReport,
    Thresholds,
    judge,
    run_evaluation,
)
from grabeval.report import csv_bundle, emit_report, load_report, to_json, to_text
from grabeval.spectral import DominantBin, format_dominant


def verdicts_by_check(report):
    return {(v["test"], v["check"]): v["verdict"] for v in report.verdicts}


def test_uniform_noise_and_analog_pass(write_frame):
    path = write_frame("u.pgm", level=128)
    report = run_evaluation(EvalConfig(input=str(path), tests=("noise", "analog")))
    assert report.sections["noise"]["result"]["abs_mean_noise"] == 0
    assert report.sections["analog"]["result"]["line_stability_lsb"] == 0
    v = verdicts_by_check(report)
    assert v[("noise", "abs_mean_noise")] == "pass"
    assert v[("analog", "line_stability_lsb")] == "pass"
    assert v[("sync", "sync_accuracy")] == "not-evaluated"
    assert report.overall == "pass"


def test_missing_code_fails_adc(write_frame):
    path = write_frame("r.pgm", "ramp", missing_codes={77})
    report = run_evaluation(EvalConfig(input=str(path), tests=("adc",)))
    assert report.sections["adc"]["result"]["missing_codes"] == [77]
    assert verdicts_by_check(report)[("adc", "missing_code_count")] == "fail"
    assert report.overall == "fail"


def test_jittered_bars_sync_passes(write_frame):
    path = write_frame("b.pgm", "bars", 128, 512, jitter_amplitude=1, seed=4)
    report = run_evaluation(EvalConfig(input=str(path), tests=("sync",)))
    accuracy = report.sections["sync"]["result"]["accuracy"]
    assert accuracy == pytest.approx(2 / 3, abs=0.1)
    assert report.overall == "pass"


def test_error_isolated_to_its_test(write_frame):
    path = str(write_frame("u.pgm", level=100, noise_sigma=0.7, seed=1))
    alone = run_evaluation(EvalConfig(input=path, tests=("noise",)))
    together = run_evaluation(EvalConfig(input=path, tests=ALL_TESTS))
    assert together.sections["sync"]["status"] == "error"
    assert "NotBimodalError" in together.sections["sync"]["error"]
    assert together.sections["noise"] == alone.sections["noise"]
    assert together.overall == "fail"


def test_per_test_inputs(write_frame):
    u, r = write_frame("u.pgm"), write_frame("r.pgm", "ramp")
    report = run_evaluation(EvalConfig(input=str(u), inputs={"adc": str(r)}, tests=("noise", "adc")))
    assert [i["path"] for i in report.inputs] == [str(u), str(r)]
    assert report.sections["adc"]["input"] == str(r)
    assert report.overall == "pass"


@pytest.mark.parametrize(
    "config",
    [
        EvalConfig(input="x.pgm", tests=()),
        EvalConfig(input="x.pgm", tests=("bogus",)),
        EvalConfig(input="x.pgm", orientation="diagonal"),
        EvalConfig(input="x.pgm", thresholds=Thresholds(max_na_lsb=0)),
        EvalConfig(input="x.pgm", thresholds=Thresholds(k_dom=1.0)),
        EvalConfig(input=None, tests=("noise",)),
    ],
)
def test_invalid_configs(config):
    with pytest.raises(ValueError):
        config.validate()


def test_missing_input_file_propagates(tmp_path):
    with pytest.raises(FileNotFoundError):
        run_evaluation(EvalConfig(input=str(tmp_path / "none.pgm"), tests=("noise",)))


def _section(result):
    return {"status": "ok", "input": "x", "result": result}


sections_strategy = st.fixed_dictionaries(
    {
        "noise": st.builds(lambda a, b: _section({"abs_mean_noise": a, "rms_noise": b}),
                           st.floats(0, 5), st.floats(0, 5)),
        "analog": st.builds(
            lambda a, b, c: _section({"line_stability_lsb": a, "corner_delta_lsb": b, "decay_slope_lsb_per_line": c}),
            st.floats(0, 5), st.floats(0, 5), st.floats(-5, 5)),
        "sync": st.builds(lambda a: _section({"accuracy": a}), st.floats(0, 3)),
    }
)


@settings(max_examples=100, deadline=None)
@given(sections_strategy, st.sampled_from(
    ["max_na_lsb", "max_nms_lsb", "max_line_stability_lsb", "max_corner_delta_lsb",
     "max_decay_lsb_per_line", "max_sync_points"]), st.floats(0, 10))
def test_verdict_monotonicity(sections, name, extra):
    tight = Thresholds()
    loose = replace(tight, **{name: getattr(tight, name) + extra})
    before, _ = judge(sections, tight)
    after, _ = judge(sections, loose)
    for b, a in zip(before, after):
        if b["verdict"] == "pass":
            assert a["verdict"] == "pass"


def test_overall_pass_iff_all_checks_pass():
    sections = {"sync": _section({"accuracy": 0.5})}
    verdicts, overall = judge(sections, Thresholds())
    assert overall == "pass"
    verdicts, overall = judge(sections, Thresholds(max_sync_points=0.4))
    assert overall == "fail"


def _noise_only_report(write_frame):
    path = write_frame("u.pgm")
    return run_evaluation(EvalConfig(input=str(path), tests=("noise",)))


def test_json_noise_schema(write_frame, tmp_path):
    report = _noise_only_report(write_frame)
    out = tmp_path / "r.json"
    emit_report(report, "json", out)
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    for key in ("mean_level", "abs_mean_noise", "max_noise", "rms_noise"):
        assert key in doc["sections"]["noise"]["result"]
    assert {v["verdict"] for v in doc["verdicts"] if v["test"] == "noise"} == {"pass"}
    assert list(doc)[:3] == ["schema_version", "tool", "version"]
    assert load_report(out).to_dict() == report.to_dict()


def test_emit_twice_byte_identical(write_frame, tmp_path):
    report = _noise_only_report(write_frame)
    for fmt in ("json", "text"):
        emit_report(report, fmt, tmp_path / f"a.{fmt}")
        emit_report(report, fmt, tmp_path / f"b.{fmt}")
        assert (tmp_path / f"a.{fmt}").read_bytes() == (tmp_path / f"b.{fmt}").read_bytes()


def _table_report():
    dom = [DominantBin(32, 0.125, 75.5, 256), DominantBin(64, 0.25, 80.0, 256), DominantBin(128, 0.5, 100.0, 256)]
    sections = {
        "spectral": _section({"dominant_text": format_dominant(dom), "dominant": [1, 2, 3]}),
        "sync": _section({"accuracy": 0.72, "unit": "points/transition"}),
    }
    verdicts, overall = judge(sections, Thresholds())
    return EvaluationReport(inputs=[], config={}, sections=sections, verdicts=verdicts, overall=overall)


def test_text_rows_table_style():
    text = to_text(_table_report())
    assert "Dominant freq.: fs/8-75.5% fs/4-80% fs/2-100%" in text.splitlines()
    assert "Sync. parameters: 0.72 points/transition" in text.splitlines()


def test_text_no_missing_codes(write_frame):
    path = write_frame("r.pgm", "ramp")
    report = run_evaluation(EvalConfig(input=str(path), tests=("adc",)))
    assert any(line.startswith("ADC parameters: No missing codes.") for line in to_text(report).splitlines())


def test_csv_bundle(write_frame, tmp_path):
    u = write_frame("u.pgm", width=64, height=64, noise_sigma=1, seed=2)
    r = write_frame("r.pgm", "ramp", 256, 8)
    b = write_frame("b.pgm", "bars", 64, 8)
    report = run_evaluation(EvalConfig(input=str(u), inputs={"adc": str(r), "sync": str(b)}))
    written = emit_report(report, "csv-bundle", tmp_path / "bundle")
    names = sorted(p.name for p in written)
    assert names == ["blockmeans.csv", "histogram.csv", "spectrum.csv", "transitions.csv"]
    hist = (tmp_path / "bundle" / "histogram.csv").read_text().splitlines()
    assert hist[0] == "code,count" and hist[1] == "0,8" and len(hist) == 257
    spec = (tmp_path / "bundle" / "spectrum.csv").read_text().splitlines()
    assert spec[0] == "bin,freq_fraction,power" and len(spec) == 34
    blocks = (tmp_path / "bundle" / "blockmeans.csv").read_text().splitlines()
    assert len(blocks) == 4 and all(len(row.split(",")) == 4 for row in blocks)
    trans = (tmp_path / "bundle" / "transitions.csv").read_text().splitlines()
    assert trans[0] == "line,q,column" and trans[1] == "0,1,16"
    assert csv_bundle(load_report_roundtrip(report, tmp_path)) == csv_bundle(report)


def load_report_roundtrip(report, tmp_path):
    path = tmp_path / "rt.json"
    path.write_text(to_json(report))
    return load_report(path)


def test_unknown_format(write_frame, tmp_path):
    with pytest.raises(ValueError):
        emit_report(_noise_only_report(write_frame), "xml", tmp_path / "r.xml")

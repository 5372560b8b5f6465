"""Report rendering: JSON document, one-line-per-test text summary, CSV bundle."""

from __future__ import annotations

import json
from pathlib import Path

from grabeval.analog import block_means_csv
from grabeval.evaluate import EvaluationReport
from grabeval.spectral import spectrum_csv
from grabeval.stats import histogram_csv
from grabeval.sync import transitions_csv

REPORT_FORMATS = ("json", "text", "csv-bundle")

_ROW_TITLES = {
    "noise": "Noise performance",
    "analog": "Black level stability",
    "spectral": "Dominant freq.",
    "adc": "ADC parameters",
    "sync": "Sync. parameters",
}
_ROW_ORDER = ("noise", "analog", "spectral", "adc", "sync")


def to_json(report: EvaluationReport) -> str:
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def load_report(path) -> EvaluationReport:
    return EvaluationReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _row(test: str, r: dict) -> list:
    if test == "noise":
        return [
            f"abs. {r['abs_mean_noise']:.3f} LSB RMS {r['rms_noise']:.3f} LSB "
            f"max {r['max_noise']:.3f} LSB (mean level {r['mean_level']:.2f})"
        ]
    if test == "analog":
        rows = [
            f"Variation {r['variation_percent']:.3f}% (line-to-line {r['line_stability_lsb']:.2f} LSB, "
            f"corner delta {r['corner_delta_lsb']:.2f} LSB, decay {r['decay_slope_lsb_per_line']:.3f} LSB/line)"
        ]
        edges = r.get("edge_timing")
        if edges:
            rise = "-" if edges["max_rise_px"] is None else f"{edges['mean_rise_px']:.2f} px (max {edges['max_rise_px']})"
            fall = "-" if edges["max_fall_px"] is None else f"{edges['mean_fall_px']:.2f} px (max {edges['max_fall_px']})"
            rows.append(f"Rise/fall times: rise {rise}, fall {fall}")
        return rows
    if test == "spectral":
        return [r["dominant_text"]]
    if test == "adc":
        codes = r["missing_codes"]
        if codes:
            shown = ", ".join(str(c) for c in codes[:32]) + (" ..." if len(codes) > 32 else "")
            text = f"Missing codes: {shown}."
        else:
            text = "No missing codes."
        return [f"{text} Effective resolution {r['effective_resolution_bits']:.3f} bits"]
    if test == "sync":
        return [f"{r['accuracy']:.2f} {r['unit']}"]
    raise KeyError(test)


def to_text(report: EvaluationReport) -> str:
    out = [f"{report.tool} {report.version} evaluation report"]
    for inp in report.inputs:
        out.append(
            f"Input: {inp['path']} {inp['width']}x{inp['height']} {inp['bit_depth']}-bit "
            f"sha256:{inp['sha256'][:16]}"
        )
    out.append("")
    for test in _ROW_ORDER:
        section = report.sections.get(test)
        if section is None:
            continue
        title = _ROW_TITLES[test]
        if section["status"] != "ok":
            out.append(f"{title}: not evaluated ({section['error']})")
            continue
        first, *rest = _row(test, section["result"])
        out.append(f"{title}: {first}")
        out.extend(rest)
    out.append("")
    out.append("Verdicts:")
    for v in report.verdicts:
        if v["verdict"] == "not-evaluated":
            if v["test"] in report.sections:
                out.append(f"  {v['test']}.{v['check']}: not-evaluated")
            continue
        value = v["value"]
        shown = f"{value:.4g}" if isinstance(value, float) else str(value)
        out.append(f"  {v['test']}.{v['check']}: {shown} <= {v['limit']:g} {v['verdict']}")
    out.append(f"Overall: {report.overall.upper()}")
    return "\n".join(out) + "\n"


def csv_bundle(report: EvaluationReport) -> dict:
    """File name -> CSV text for every table the report's sections carry."""
    files = {}
    sections = report.sections

    def result(test):
        s = sections.get(test)
        return s["result"] if s and s["status"] == "ok" else None

    if (adc := result("adc")) is not None:
        files["histogram.csv"] = histogram_csv(adc["histogram"])
    if (spec := result("spectral")) is not None:
        files["spectrum.csv"] = spectrum_csv(spec["global_power"], spec["line_length"])
    if (analog := result("analog")) is not None:
        files["blockmeans.csv"] = block_means_csv(analog["block_means"])
    if (sync := result("sync")) is not None:
        files["transitions.csv"] = transitions_csv(sync["points"])
    return files


def emit_report(report: EvaluationReport, fmt: str, path) -> list:
    """Write the report; returns the paths written.

    For ``csv-bundle``, ``path`` is a directory (created if needed).
    """
    if fmt not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")
    path = Path(path)
    if fmt == "csv-bundle":
        path.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in csv_bundle(report).items():
            target = path / name
            target.write_text(text, encoding="utf-8", newline="\n")
            written.append(target)
        return written
    text = to_json(report) if fmt == "json" else to_text(report)
    path.write_text(text, encoding="utf-8", newline="\n")
    return [path]

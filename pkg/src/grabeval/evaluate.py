"""Run the requested evaluations on capture files and judge them against thresholds."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from grabeval import __version__
from grabeval.analog import analog_analysis
from grabeval.frame import Frame, FormatSpec, load_frame
from grabeval.spectral import spectral_analysis
from grabeval.stats import adc_analysis, noise_metrics
from grabeval.sync import detect_transitions, sync_accuracy

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ALL_TESTS = ("noise", "adc", "analog", "spectral", "sync")

PASS, FAIL, NOT_EVALUATED = "pass", "fail", "not-evaluated"


@dataclass(frozen=True)
class Thresholds:
    max_na_lsb: float = 1.0
    max_nms_lsb: float = 1.0
    max_line_stability_lsb: float = 2.0
    max_corner_delta_lsb: float = 2.0
    max_decay_lsb_per_line: float = 1.0
    max_sync_points: float = 1.0
    k_dom: float = 5.0
    missing_code_rel_threshold: float = 0.1

    def validate(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"threshold {name} must be positive, got {value}")
        if not self.k_dom > 1:
            raise ValueError(f"k_dom must be > 1, got {self.k_dom}")
        if not self.missing_code_rel_threshold < 1:
            raise ValueError("missing_code_rel_threshold must be < 1")


@dataclass(frozen=True)
class EvalConfig:
    """What to analyse and how.

    ``inputs`` maps a test name to its own capture file, overriding
    ``input`` for that test; this lets one run combine a flat field, a
    ramp and a bars capture.
    """

    input: Optional[str] = None
    input_format: Optional[FormatSpec] = None
    inputs: dict = field(default_factory=dict)
    tests: tuple = ALL_TESTS
    orientation: str = "rows"
    thresholds: Thresholds = field(default_factory=Thresholds)
    block_size: int = 16
    subpixel: bool = False

    def validate(self):
        if not self.tests:
            raise ValueError("at least one test must be requested")
        unknown = set(self.tests) - set(ALL_TESTS)
        if unknown:
            raise ValueError(f"unknown tests: {sorted(unknown)}")
        if self.orientation not in ("rows", "columns"):
            raise ValueError(f"orientation must be rows or columns, got {self.orientation!r}")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        for test in self.tests:
            if self.path_for(test) is None:
                raise ValueError(f"no input file given for test {test!r}")
        self.thresholds.validate()

    def path_for(self, test: str) -> Optional[str]:
        return self.inputs.get(test, self.input)


@dataclass
class EvaluationReport:
    """Everything a run produced, held as plain JSON-ready data.

    ``sections`` maps each requested test to ``{"status", "input",
    "result" | "error"}``; ``verdicts`` lists every threshold check.
    """

    inputs: list
    config: dict
    sections: dict
    verdicts: list
    overall: str
    tool: str = "grabeval"
    version: str = __version__
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tool": self.tool,
            "version": self.version,
            "inputs": self.inputs,
            "config": self.config,
            "sections": self.sections,
            "verdicts": self.verdicts,
            "overall": self.overall,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema_version {data.get('schema_version')!r}")
        return cls(
            inputs=data["inputs"],
            config=data["config"],
            sections=data["sections"],
            verdicts=data["verdicts"],
            overall=data["overall"],
            tool=data.get("tool", "grabeval"),
            version=data.get("version", __version__),
        )

    @property
    def failed(self) -> bool:
        return self.overall != PASS


def _run_noise(frame, cfg):
    return noise_metrics(frame).to_dict()


def _run_adc(frame, cfg):
    return adc_analysis(frame, cfg.thresholds.missing_code_rel_threshold).to_dict()


def _run_analog(frame, cfg):
    return analog_analysis(frame, cfg.block_size).to_dict()


def _run_spectral(frame, cfg):
    return spectral_analysis(frame, cfg.thresholds.k_dom, cfg.orientation).to_dict()


def _run_sync(frame, cfg):
    tset = detect_transitions(frame, subpixel=cfg.subpixel)
    result = sync_accuracy(tset).to_dict()
    result["polarity"] = list(tset.polarity)
    result["points"] = [[float(v) for v in row] for row in tset.points]
    return result


_RUNNERS = {
    "noise": _run_noise,
    "adc": _run_adc,
    "analog": _run_analog,
    "spectral": _run_spectral,
    "sync": _run_sync,
}


def _checks(thresholds: Thresholds):
    """(test, check name, result key, threshold, limit) for every verdict.

    Every check passes when ``value <= limit``.
    """
    t = thresholds
    return [
        ("noise", "abs_mean_noise", lambda r: r["abs_mean_noise"], "max_na_lsb", t.max_na_lsb),
        ("noise", "rms_noise", lambda r: r["rms_noise"], "max_nms_lsb", t.max_nms_lsb),
        ("adc", "missing_code_count", lambda r: len(r["missing_codes"]), None, 0),
        ("analog", "line_stability_lsb", lambda r: r["line_stability_lsb"],
         "max_line_stability_lsb", t.max_line_stability_lsb),
        ("analog", "corner_delta_lsb", lambda r: r["corner_delta_lsb"],
         "max_corner_delta_lsb", t.max_corner_delta_lsb),
        ("analog", "abs_decay_lsb_per_line", lambda r: abs(r["decay_slope_lsb_per_line"]),
         "max_decay_lsb_per_line", t.max_decay_lsb_per_line),
        ("spectral", "dominant_count", lambda r: len(r["dominant"]), None, 0),
        ("sync", "sync_accuracy", lambda r: r["accuracy"], "max_sync_points", t.max_sync_points),
    ]


def judge(sections: dict, thresholds: Thresholds) -> tuple[list, str]:
    """Per-threshold verdicts and the overall verdict.

    Overall is ``pass`` only when every requested test ran and every
    evaluated check passed.
    """
    verdicts = []
    for test, name, getter, threshold_name, limit in _checks(thresholds):
        section = sections.get(test)
        entry = {"test": test, "check": name, "limit": limit, "threshold": threshold_name}
        if section is None or section["status"] != "ok":
            entry.update(value=None, verdict=NOT_EVALUATED)
        else:
            value = getter(section["result"])
            entry.update(value=value, verdict=PASS if value <= limit else FAIL)
        verdicts.append(entry)
    errored = any(s["status"] != "ok" for s in sections.values())
    failed = any(v["verdict"] == FAIL for v in verdicts)
    return verdicts, FAIL if (errored or failed) else PASS


def _describe(path: str, frame: Frame) -> dict:
    return {
        "path": str(path),
        "width": frame.width,
        "height": frame.height,
        "bit_depth": frame.bit_depth,
        "sha256": hashlib.sha256(Path(path).read_bytes()).hexdigest(),
    }


def _config_summary(cfg: EvalConfig) -> dict:
    return {
        "tests": list(cfg.tests),
        "orientation": cfg.orientation,
        "block_size": cfg.block_size,
        "subpixel": cfg.subpixel,
        "thresholds": asdict(cfg.thresholds),
    }


def run_evaluation(config: EvalConfig) -> EvaluationReport:
    """Load the inputs and run each requested test.

    Input loading errors propagate (the run cannot start). Analysis errors
    are confined to their test, which is reported ``not-evaluated``.
    """
    config.validate()
    frames: dict = {}
    inputs = []
    for test in ALL_TESTS:
        if test not in config.tests:
            continue
        path = config.path_for(test)
        if path not in frames:
            frames[path] = load_frame(path, config.input_format)
            inputs.append(_describe(path, frames[path]))

    sections = {}
    for test in ALL_TESTS:
        if test not in config.tests:
            continue
        path = config.path_for(test)
        try:
            result = _RUNNERS[test](frames[path], config)
        except ValueError as exc:
            log.warning("%s test on %s failed: %s", test, path, exc)
            sections[test] = {"status": "error", "input": str(path),
                              "error": f"{type(exc).__name__}: {exc}"}
        else:
            sections[test] = {"status": "ok", "input": str(path), "result": result}

    verdicts, overall = judge(sections, config.thresholds)
    return EvaluationReport(
        inputs=inputs,
        config=_config_summary(config),
        sections=sections,
        verdicts=verdicts,
        overall=overall,
    )

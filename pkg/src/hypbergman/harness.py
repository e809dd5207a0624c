"""Verification sweeps: sample point pairs, evaluate kernels, compare bounds.

A sweep is described by a :class:`VerificationConfig` (usually loaded from
JSON) and produces a :class:`BoundReport` with one row per
``(delta, pair, k)`` case.
"""

from __future__ import annotations

import csv
import io
import json
import re
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import __version__
from .bounds import rhs_compact, rhs_noncompact
from .fuchsian import (
    FuchsianGroupSpec,
    InjectivityRadiusEstimate,
    POLICIES,
    injectivity_radius,
    load_group,
    quotient_distance,
)
from .geometry import UhpPoint
from .kernel import kernel_estimates, kernel_trace

__all__ = [
    "ConfigError",
    "SamplingError",
    "VerificationConfig",
    "CaseRecord",
    "BoundReport",
    "TraceReport",
    "CSV_COLUMNS",
    "EXIT_OK",
    "EXIT_VIOLATION",
    "EXIT_CONFIG",
    "EXIT_INCOMPLETE",
    "resolve_delta",
    "sample_points",
    "sample_pairs",
    "run_verification",
    "run_trace_check",
    "emit_report",
    "load_report",
    "report_csv",
]

CSV_COLUMNS = ("case_id", "group", "k", "delta", "zx", "zy", "wx", "wy", "qdist",
               "lhs", "lhs_tail", "majorant", "rhs", "slack", "verdict")
VERDICTS = ("pass", "fail", "uncertified")

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_CONFIG = 3
EXIT_INCOMPLETE = 4

MIN_ACCEPTANCE = 1e-3
_MIN_TRIALS = 1000


class ConfigError(ValueError):
    """Invalid verification configuration."""


class SamplingError(RuntimeError):
    """Too few sampled pairs meet the distance requirement."""


_DELTA_RE = re.compile(
    r"^\s*(?:(?P<mul>[0-9.]+(?:e-?[0-9]+)?)\s*\*?\s*)?r\s*(?:(?P<sign>[+-])\s*(?P<add>[0-9.]+(?:e-?[0-9]+)?))?\s*$")


def resolve_delta(expr: Union[str, float, int], r: float) -> float:
    """A number, or an expression in ``r`` such as ``"r"``, ``"r+1"``, ``"2r"``."""
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return float(expr)
    if not isinstance(expr, str):
        raise ConfigError(f"delta entry {expr!r} is neither a number nor an expression in r")
    try:
        return float(expr)
    except ValueError:
        pass
    m = _DELTA_RE.match(expr)
    if not m:
        raise ConfigError(f"cannot parse delta expression {expr!r}")
    val = float(m["mul"] or 1.0) * r
    if m["add"]:
        val += float(m["add"]) * (1 if m["sign"] == "+" else -1)
    return val


@dataclass
class VerificationConfig:
    group: str
    k_list: list
    delta_list: list
    r_policy: Union[str, float] = "auto"
    sample_count: int = 50
    seed: int = 0
    tolerance: float = 1e-6
    cutoff: Optional[float] = None
    output: Optional[str] = None
    format: str = "csv"

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration fields: {sorted(unknown)}")
        missing = {"group", "k_list", "delta_list"} - set(data)
        if missing:
            raise ConfigError(f"missing configuration fields: {sorted(missing)}")
        cfg = cls(**data)
        cfg.check_static()
        return cfg

    @classmethod
    def from_json(cls, path) -> "VerificationConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from None
        return cls.from_dict(data)

    def check_static(self):
        if not isinstance(self.k_list, list) or not all(
                isinstance(k, int) and not isinstance(k, bool) for k in self.k_list):
            raise ConfigError("k_list must be a list of integers")
        bad = [k for k in self.k_list if k < 3]
        if bad:
            raise ConfigError(f"bounds need k >= 3; got {bad}")
        if not isinstance(self.delta_list, list):
            raise ConfigError("delta_list must be a list")
        if not (isinstance(self.sample_count, int) and self.sample_count >= 1):
            raise ConfigError("sample_count must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not (isinstance(self.tolerance, (int, float)) and self.tolerance > 0):
            raise ConfigError("tolerance must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")
        if isinstance(self.r_policy, str):
            if self.r_policy not in POLICIES or self.r_policy == "user_override":
                raise ConfigError(f"r_policy must be a number or one of {POLICIES[:3]}")
        elif not (isinstance(self.r_policy, (int, float)) and self.r_policy > 0):
            raise ConfigError("a numeric r_policy must be positive")

    def load_group(self) -> FuchsianGroupSpec:
        try:
            G = load_group(self.group)
        except (ValueError, OSError) as exc:
            raise ConfigError(str(exc)) from None
        if G.test_only:
            raise ConfigError(f"group {G.name!r} is a test oracle, not a finite-area surface")
        return G

    def radius(self, G: FuchsianGroupSpec) -> InjectivityRadiusEstimate:
        if isinstance(self.r_policy, str):
            return injectivity_radius(G, self.r_policy, cutoff=self.cutoff)
        return injectivity_radius(G, "user_override", value=float(self.r_policy))

    def deltas(self, r: float) -> list:
        out = [resolve_delta(d, r) for d in self.delta_list]
        low = [d for d in out if d < r * (1 - 1e-12)]
        if low:
            raise ConfigError(f"every delta must be >= r_X = {r:.9g}; got {low}")
        return out


# -- sampling --------------------------------------------------------------

def _sampling_domain(G, cutoff):
    if G.domain is None:
        raise ConfigError(f"group {G.name!r} has no fundamental domain to sample from")
    dom = G.truncated_domain(cutoff) if G.cusp is not None else G.domain
    if not dom.is_bounded:
        raise ConfigError(f"group {G.name!r} has no bounded sampling domain")
    return dom


def sample_points(G: FuchsianGroupSpec, n: int, rng, cutoff: Optional[float] = None) -> list:
    """``n`` points uniform in hyperbolic area on the truncated domain."""
    dom = _sampling_domain(G, cutoff)
    xmin, xmax, ymin, ymax = dom.bbox
    out = []
    while len(out) < n:
        m = max(64, 2 * (n - len(out)))
        x = rng.uniform(xmin, xmax, m)
        # density proportional to 1/y^2 on [ymin, ymax]
        y = 1.0 / (1.0 / ymin - rng.uniform(0.0, 1.0, m) * (1.0 / ymin - 1.0 / ymax))
        keep = dom.contains(x, y)
        out.extend(UhpPoint(float(a), float(b)) for a, b in zip(x[keep], y[keep]))
    return out[:n]


def sample_pairs(G: FuchsianGroupSpec, delta: float, n: int, seed: int,
                 cutoff: Optional[float] = None) -> list:
    """``n`` pairs ``(z, w, qdist)`` with certified quotient distance ``>= delta``.

    Raises :class:`SamplingError` once at least 1000 candidates have been
    tried and fewer than 0.1% were accepted.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not delta >= 0:
        raise ValueError("delta must be nonnegative")
    rng = np.random.default_rng(seed)
    out = []
    tried = 0
    while len(out) < n:
        pts = sample_points(G, 2 * 64, rng, cutoff)
        for z, w in zip(pts[::2], pts[1::2]):
            tried += 1
            q = quotient_distance(G, z, w)
            if q.certified and q.value >= delta:
                out.append((z, w, q.value))
                if len(out) == n:
                    break
        if tried >= _MIN_TRIALS and len(out) < MIN_ACCEPTANCE * tried:
            raise SamplingError(
                f"only {len(out)} of {tried} pairs on {G.name} have quotient distance >= {delta:.6g}; "
                "use a smaller delta or a larger cutoff")
    return out


# -- reports ---------------------------------------------------------------

@dataclass
class CaseRecord:
    case_id: int
    group: str
    k: int
    delta: float
    zx: float
    zy: float
    wx: float
    wy: float
    qdist: float
    lhs: float
    lhs_tail: float
    majorant: float
    rhs: float
    slack: float
    verdict: str


@dataclass
class BoundReport:
    group: str
    seed: int
    version: str
    r_x: float
    r_method: str
    cases: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    runtime: float = 0.0
    timestamp: str = ""

    @property
    def violations(self) -> int:
        return sum(c.verdict == "fail" for c in self.cases)

    @property
    def uncertified(self) -> int:
        return sum(c.verdict == "uncertified" for c in self.cases)

    @property
    def min_slack(self) -> Optional[float]:
        s = [c.slack for c in self.cases if c.verdict != "uncertified"]
        return min(s) if s else None

    def summary(self) -> dict:
        return {"cases": len(self.cases), "violations": self.violations,
                "uncertified": self.uncertified, "min_slack": self.min_slack,
                "errors": len(self.errors), "r_x": self.r_x, "r_method": self.r_method,
                "seed": self.seed, "version": self.version, "runtime": self.runtime,
                "timestamp": self.timestamp}

    @property
    def exit_code(self) -> int:
        if self.violations:
            return EXIT_VIOLATION
        if self.errors:
            return EXIT_INCOMPLETE
        return EXIT_OK

    def to_dict(self) -> dict:
        return {"group": self.group, "seed": self.seed, "version": self.version,
                "r_x": self.r_x, "r_method": self.r_method,
                "cases": [asdict(c) for c in self.cases], "errors": list(self.errors),
                "runtime": self.runtime, "timestamp": self.timestamp,
                "summary": self.summary()}

    @classmethod
    def from_dict(cls, data: dict) -> "BoundReport":
        cases = [CaseRecord(**c) for c in data.get("cases", [])]
        return cls(data["group"], data["seed"], data["version"], data["r_x"], data["r_method"],
                   cases, list(data.get("errors", [])), data.get("runtime", 0.0),
                   data.get("timestamp", ""))


def _fmt(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def report_csv(report: BoundReport, timestamp: bool = True) -> str:
    """CSV text: the header, one row per case, then a ``#`` summary line.

    With ``timestamp=False`` the summary omits the wall-clock fields so the
    text depends only on the configuration and seed.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.cases:
        w.writerow([_fmt(getattr(c, col)) for col in CSV_COLUMNS])
    s = report.summary()
    s.pop("runtime")
    stamp = s.pop("timestamp")
    parts = [f"{key}={_fmt(val)}" for key, val in s.items()]
    if timestamp:
        parts.append(f"timestamp={stamp}")
    buf.write("# summary " + " ".join(parts) + "\n")
    return buf.getvalue()


def emit_report(report: BoundReport, format: str = "csv", path=None) -> str:
    """Write the report as ``csv`` or ``json``; returns the text.

    ``path=None`` only returns the text.
    """
    if format == "csv":
        text = report_csv(report)
    elif format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    else:
        raise ValueError("format must be 'csv' or 'json'")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def load_report(path) -> BoundReport:
    """Read a JSON report written by :func:`emit_report`."""
    return BoundReport.from_dict(json.loads(Path(path).read_text()))


# -- sweeps ----------------------------------------------------------------

def run_verification(config: VerificationConfig, progress=None) -> BoundReport:
    """Evaluate every ``(delta, pair, k)`` case of ``config``.

    Pairs are drawn once per ``delta`` and shared by all weights.  A
    ``delta`` whose sampling fails is recorded in ``errors`` and skipped.
    """
    t0 = time.perf_counter()
    config.check_static()
    G = config.load_group()
    rx = config.radius(G)
    deltas = config.deltas(rx.value)
    report = BoundReport(G.name, config.seed, __version__, rx.value, rx.method)
    ks = sorted(set(config.k_list))
    if ks:
        for delta in deltas:
            try:
                pairs = sample_pairs(G, delta, config.sample_count, config.seed, config.cutoff)
            except SamplingError as exc:
                report.errors.append({"delta": delta, "error": str(exc)})
                continue
            for z, w, qd in pairs:
                # the tail certificate uses the computed radius, never an override
                est = kernel_estimates(G, z, w, ks, config.tolerance)
                for k in config.k_list:
                    norm, major = est[k]
                    if G.compact:
                        rhs = rhs_compact(k, delta, rx.value)
                    else:
                        rhs = rhs_noncompact(k, delta, rx.value, z.y, w.y)
                    if not norm.certified:
                        verdict = "uncertified"
                    elif norm.value + norm.tail <= rhs:
                        verdict = "pass"
                    else:
                        verdict = "fail"
                    report.cases.append(CaseRecord(
                        len(report.cases), G.name, k, delta, z.x, z.y, w.x, w.y, qd,
                        norm.value, norm.tail, major.value, rhs, rhs - norm.value, verdict))
                if progress is not None:
                    progress(len(report.cases))
    report.runtime = time.perf_counter() - t0
    report.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return report


@dataclass
class TraceReport:
    group: str
    rows: list

    def table(self) -> list:
        """``(k, computed, expected, relative error)`` per weight."""
        out = []
        for t in self.rows:
            if t.expected is None:
                rel = None
            elif t.expected == 0:
                rel = abs(t.value)
            else:
                rel = abs(t.value - t.expected) / t.expected
            out.append((t.k, t.value, t.expected, rel))
        return out


def run_trace_check(G: FuchsianGroupSpec, k_list: Sequence[int], mesh: float = 0.05,
                    cutoff: Optional[float] = None, radius: float = 7.0) -> TraceReport:
    """Integrate the diagonal kernel norm and compare with ``dim S_2k``.

    For a zero expected dimension the "relative error" column holds the
    absolute value of the computed trace.
    """
    rows = kernel_trace(G, list(k_list), mesh=mesh, cutoff=cutoff, radius=radius) if k_list else []
    return TraceReport(G.name, list(rows))

"""delta-sweeps over all bounds, log-log exponent fits and CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .caratheodory import METRICS, MetricBound, caratheodory_ring, lemma4_value
from .errors import ConfigError, FitError, MetricsError, NotApplicableError
from .geometry import NORMAL, BasePoint, TangentVector2
from .kobayashi import DEFAULT_BUDGET, kobayashi_lower, search_disc, tangential_crosscheck
from .sibony import sibony_lower, sibony_upper

DELTA_MIN = 1e-6
DELTA_MAX = 0.2
CHAIN_SLACK = 1e-9
CSV_COLUMNS = ["m", "delta", "metric", "kind", "method", "value", "dir_z_re", "dir_z_im", "dir_w_re", "dir_w_im"]
RANK = {"caratheodory": 0, "sibony": 1, "kobayashi": 2}

# |fitted - theoretical| allowed per (metric, kind)
FIT_TOLERANCE = {
    ("caratheodory", "exact"): 0.01,
    ("sibony", "lower"): 0.01,
    ("sibony", "exact"): 0.01,
    ("sibony", "upper"): 0.02,
    ("kobayashi", "upper"): 0.05,
    ("kobayashi", "lower"): 0.05,
    ("kobayashi", "exact"): 0.01,
}


@dataclass
class SweepConfig:
    m: int = 2
    delta_min: float = 1e-5
    delta_max: float = 1e-2
    steps: int = 16
    metrics: Sequence[str] = METRICS
    directions: Sequence[TangentVector2] = (NORMAL,)
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    threads: Optional[int] = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ConfigError(f"m must be an integer >= 2, got {self.m}")
        if not (DELTA_MIN <= self.delta_min < self.delta_max <= DELTA_MAX):
            raise ConfigError(f"need {DELTA_MIN:g} <= delta_min < delta_max <= {DELTA_MAX:g}")
        if self.steps < 4:
            raise ConfigError("steps must be >= 4")
        bad = set(self.metrics) - set(METRICS)
        if bad or not self.metrics:
            raise ConfigError(f"unknown metrics {sorted(bad)}")
        if not self.directions or any(d.is_zero() for d in self.directions):
            raise ConfigError("directions must be nonzero")
        if self.budget < 100:
            raise ConfigError("budget must be >= 100")

    def deltas(self) -> np.ndarray:
        return np.geomspace(self.delta_min, self.delta_max, self.steps)


@dataclass(frozen=True)
class SweepRecord:
    m: int
    delta: float
    metric: str
    kind: str
    method: str
    value: float
    direction: TangentVector2

    @property
    def failed(self) -> bool:
        return self.method.startswith("error")

    @classmethod
    def from_bound(cls, m: int, b: MetricBound) -> "SweepRecord":
        return cls(m, b.delta, b.metric, b.kind, b.method, b.value, b.direction)

    def sort_key(self):
        d = self.direction
        return (self.delta, self.metric, self.kind, d.xi_z.real, d.xi_z.imag, d.xi_w.real, d.xi_w.imag, self.method)


@dataclass(frozen=True)
class ExponentFit:
    metric: str
    kind: str
    slope: float
    intercept: float
    r_squared: float
    theoretical_slope: float
    within_tolerance: bool
    n: int = 0
    direction: Optional[TangentVector2] = None


def theoretical_slope(metric: str, kind: str, m: int, direction: TangentVector2 = NORMAL) -> float:
    """Blow-up exponent of the bound family as delta -> 0 (0 means bounded)."""
    if metric == "caratheodory" or direction.xi_z == 0:
        return 0.0
    if metric == "kobayashi" and kind == "upper":
        return -(1.0 - 1.0 / (2 * m))
    return -(1.0 - 1.0 / m)


# --- sweep -----------------------------------------------------------------------

def _axis(d: TangentVector2) -> str:
    if d.xi_w == 0:
        return "normal"
    if d.xi_z == 0:
        return "tangential"
    return "general"


def _error(m, delta, metric, kind, d, exc) -> SweepRecord:
    msg = str(exc).replace(",", ";").replace("\n", " ")
    return SweepRecord(m, float(delta), metric, kind, f"error:{type(exc).__name__}:{msg}", math.nan, d)


def _records_at(delta: float, config: SweepConfig) -> list[SweepRecord]:
    m = config.m
    base = BasePoint(float(delta))
    out: list[SweepRecord] = []
    disc_cache: dict[str, float] = {}

    def normal_disc() -> float:
        if "normal" not in disc_cache:
            disc_cache["normal"] = search_disc(base, m, config.budget).bound
        return disc_cache["normal"]

    def tangential_disc() -> float:
        if "tangential" not in disc_cache:
            disc_cache["tangential"] = tangential_crosscheck(base, m).disc_value
        return disc_cache["tangential"]

    def add(metric, kind, d, fn):
        try:
            b = fn()
            if b is not None:
                out.append(SweepRecord.from_bound(m, b))
        except MetricsError as exc:
            out.append(_error(m, delta, metric, kind, d, exc))

    for d in config.directions:
        axis = _axis(d)
        exact = None
        if axis == "general":
            try:
                exact = lemma4_value(base, d, m)
            except NotApplicableError:
                exact = None

        if "caratheodory" in config.metrics:
            add("caratheodory", "exact", d, lambda: caratheodory_ring(base, d, m))

        if "sibony" in config.metrics:
            def s_low():
                b = sibony_lower(base, m, d)
                if axis == "general":
                    b = MetricBound("sibony", "lower", b.value, "witness-general", base.delta, d)
                return b

            def s_up():
                if axis == "normal":
                    return sibony_upper(base, m).scaled(d.xi_z)
                if axis == "tangential":
                    return lemma4_value(base, d, m)["sibony"]
                if exact is not None:
                    return exact["sibony"]
                return None

            add("sibony", "lower", d, s_low)
            add("sibony", "upper", d, s_up)

        if "kobayashi" in config.metrics:
            def k_up():
                if axis == "normal":
                    return MetricBound("kobayashi", "upper", normal_disc(), "disc-search", base.delta, NORMAL).scaled(d.xi_z)
                if axis == "tangential":
                    return MetricBound("kobayashi", "upper", tangential_disc(), "disc-tangential", base.delta, TangentVector2(0, 1)).scaled(d.xi_w)
                if exact is not None:
                    return exact["kobayashi"]
                return None

            add("kobayashi", "lower", d, lambda: kobayashi_lower(base, m, d))
            add("kobayashi", "upper", d, k_up)
    return out


def _threads(config: SweepConfig) -> int:
    n = config.threads
    env = os.environ.get("METRICS_THREADS")
    if n is None:
        n = os.cpu_count() or 1
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            raise ConfigError(f"METRICS_THREADS must be an integer, got {env!r}") from None
    return max(1, n)


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """All applicable bounds at log-spaced deltas, sorted by (delta, metric, kind)."""
    deltas = [float(d) for d in config.deltas()]
    workers = min(_threads(config), len(deltas))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda d: _records_at(d, config), deltas))
    else:
        chunks = [_records_at(d, config) for d in deltas]
    records = [r for chunk in chunks for r in chunk]
    return sorted(records, key=SweepRecord.sort_key)


def check_ordering(records: Iterable[SweepRecord], slack: float = CHAIN_SLACK) -> list[str]:
    """Violations of C <= S <= K among the bounds at each (delta, direction)."""
    groups: dict[tuple, list[SweepRecord]] = {}
    for r in records:
        if not r.failed:
            groups.setdefault((r.m, r.delta, r.direction), []).append(r)
    problems = []
    for (m, delta, d), rs in groups.items():
        for metric in METRICS:
            lows = [r for r in rs if RANK[r.metric] <= RANK[metric] and r.kind in ("lower", "exact")]
            highs = [r for r in rs if RANK[r.metric] >= RANK[metric] and r.kind in ("upper", "exact")]
            if not lows or not highs:
                continue
            lo = max(lows, key=lambda r: r.value)
            hi = min(highs, key=lambda r: r.value)
            if lo.value > hi.value + slack:
                problems.append(
                    f"m={m} delta={delta!r} {metric}: {lo.metric}.{lo.kind}={lo.value!r} "
                    f"> {hi.metric}.{hi.kind}={hi.value!r}"
                )
    return problems


# --- fitting ------------------------------------------------------------------------

def fit_exponent(
    records: Sequence[SweepRecord],
    tolerance: Optional[float] = None,
    target: Optional[float] = None,
) -> ExponentFit:
    """Ordinary least squares of log(value) on log(delta) for one (metric, kind)."""
    rs = [r for r in records if not r.failed]
    if len({(r.metric, r.kind) for r in rs}) > 1:
        raise FitError("records mix several (metric, kind) groups")
    if len(rs) < 4:
        raise FitError(f"need at least 4 records to fit, got {len(rs)}")
    if any(not (r.value > 0) for r in rs):
        raise FitError("all values must be positive")
    x = np.log([r.delta for r in rs])
    y = np.log([r.value for r in rs])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float((resid ** 2).sum()) / ss_tot)
    head = rs[0]
    if target is None:
        target = theoretical_slope(head.metric, head.kind, head.m, head.direction)
    if tolerance is None:
        tolerance = FIT_TOLERANCE.get((head.metric, head.kind), 0.05)
    return ExponentFit(
        metric=head.metric,
        kind=head.kind,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        theoretical_slope=target,
        within_tolerance=bool(abs(slope - target) <= tolerance),
        n=len(rs),
        direction=head.direction,
    )


def fit_all(records: Sequence[SweepRecord]) -> list[ExponentFit]:
    groups: dict[tuple, list[SweepRecord]] = {}
    for r in records:
        if not r.failed:
            groups.setdefault((r.metric, r.kind, r.direction), []).append(r)
    fits = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], _dir_tuple(k[2]))):
        try:
            fits.append(fit_exponent(groups[key]))
        except FitError:
            continue
    return fits


# --- serialization ---------------------------------------------------------------------

def fmt_number(x: float) -> str:
    """Shortest round-trip decimal; integral values without a trailing .0."""
    x = float(x)
    if math.isfinite(x) and x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _dir_tuple(d: TangentVector2) -> tuple[float, float, float, float]:
    return (d.xi_z.real, d.xi_z.imag, d.xi_w.real, d.xi_w.imag)


def _record_dict(r: SweepRecord) -> dict:
    d = r.direction
    return {
        "m": r.m,
        "delta": r.delta,
        "metric": r.metric,
        "kind": r.kind,
        "method": r.method,
        "value": None if math.isnan(r.value) else r.value,
        "direction": [[d.xi_z.real, d.xi_z.imag], [d.xi_w.real, d.xi_w.imag]],
    }


def _fit_dict(f: ExponentFit) -> dict:
    out = {
        "metric": f.metric,
        "kind": f.kind,
        "slope": f.slope,
        "intercept": f.intercept,
        "r_squared": f.r_squared,
        "theoretical_slope": f.theoretical_slope,
        "within_tolerance": f.within_tolerance,
        "n": f.n,
    }
    if f.direction is not None:
        d = f.direction
        out["direction"] = [[d.xi_z.real, d.xi_z.imag], [d.xi_w.real, d.xi_w.imag]]
    return out


def emit(records: Sequence[SweepRecord], fits: Sequence[ExponentFit] = (), fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [str(r.m), fmt_number(r.delta), r.metric, r.kind, r.method, fmt_number(r.value)]
                + [fmt_number(c) for c in _dir_tuple(r.direction)]
            )
        return buf.getvalue()
    if fmt == "json":
        doc = {"records": [_record_dict(r) for r in records], "fits": [_fit_dict(f) for f in fits]}
        return json.dumps(doc, indent=1, allow_nan=False) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")


def _direction_from(pairs) -> TangentVector2:
    (zr, zi), (wr, wi) = pairs
    return TangentVector2(complex(zr, zi), complex(wr, wi))


def load_json(text: str) -> tuple[list[SweepRecord], list[ExponentFit]]:
    """Inverse of emit(..., fmt="json")."""
    doc = json.loads(text)
    records = [
        SweepRecord(
            m=r["m"],
            delta=r["delta"],
            metric=r["metric"],
            kind=r["kind"],
            method=r["method"],
            value=math.nan if r["value"] is None else r["value"],
            direction=_direction_from(r["direction"]),
        )
        for r in doc["records"]
    ]
    fits = [
        ExponentFit(
            metric=f["metric"],
            kind=f["kind"],
            slope=f["slope"],
            intercept=f["intercept"],
            r_squared=f["r_squared"],
            theoretical_slope=f["theoretical_slope"],
            within_tolerance=f["within_tolerance"],
            n=f.get("n", 0),
            direction=_direction_from(f["direction"]) if "direction" in f else None,
        )
        for f in doc["fits"]
    ]
    return records, fits


def load_csv(text: str) -> list[SweepRecord]:
    rows = csv.DictReader(io.StringIO(text))
    return [
        SweepRecord(
            m=int(row["m"]),
            delta=float(row["delta"]),
            metric=row["metric"],
            kind=row["kind"],
            method=row["method"],
            value=float(row["value"]),
            direction=TangentVector2(
                complex(float(row["dir_z_re"]), float(row["dir_z_im"])),
                complex(float(row["dir_w_re"]), float(row["dir_w_im"])),
            ),
        )
        for row in rows
    ]

"""Closed-loop simulation harness.

The plant runs time-driven at a 1 ms step; the controller runs every 20 ms.
Each controller sample: poll the backward channel, classify the arrivals
and update the delay estimate, form e1 = r - y_d and e2 = e1 - y_asp, run
the PI step, quantize the drive to 8 bits, send it with a freshly drawn
round-trip delay, then retune and step the predictor with the sent drive
(its output is what the NEXT sample subtracts). Deliveries at the plant set
the held input and are echoed back immediately, each echo carrying the
speed at the delivery tick and the originating drive's send stamp, so the
controller can measure the true round trip from its own clock.

run_sampled_loop is the idealized all-discrete rig used by the equivalence
checks: everything lives on the 20 ms grid, delays are exact sample counts,
and the true plant is the nominal model itself.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .control import PiConfig, PiState, duty_ratio, pi_step
from .delay_approx import Series
from .estimator import EstimatorState, classify_and_measure, on_send
from .netsim import DelayChannel, MotorPlant, draw_round_trip
from .predictor import CONTROL_PERIOD, SmithPredictor, nominal_model, residual

PERIOD_MS = 20
# normalized two-level profile: step up, hold, step down
DEFAULT_REFERENCE = ((0.0, 100.0), (12.0, 80.0))
DEFAULT_DURATION = 20.0
MODES = ("no-sp", "csp", "asp")

CSV_COLUMNS = ("t", "r", "y", "y_d", "td_ms", "tm_ms", "rule",
               "e1", "e2", "y_asp", "drive", "duty_pct")


class ReferenceProfile:
    """Piecewise-constant setpoint: value at t is the last level at or before t."""

    def __init__(self, points=DEFAULT_REFERENCE):
        pts = sorted((float(t), float(level)) for t, level in points)
        if not pts:
            raise ValueError("reference profile needs at least one point")
        self.points = tuple(pts)

    def at(self, t):
        level = self.points[0][1]
        for start, value in self.points:
            if t >= start:
                level = value
            else:
                break
        return level

    @property
    def final_level(self):
        return self.points[-1][1]


@dataclass
class Scenario:
    mode: str = "asp"
    series: str = "dfr"
    fixed_tm: float = 0.06
    delay_lo: float = 0.03
    delay_hi: float = 0.13
    reference: tuple = DEFAULT_REFERENCE
    duration: float = DEFAULT_DURATION
    seed: int = 0
    initial_tm: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        Series.parse(self.series)
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if not 0 <= self.delay_lo <= self.delay_hi:
            raise ValueError("delay bounds must satisfy 0 <= lo <= hi")
        if self.mode == "csp" and self.fixed_tm < 0:
            raise ValueError("csp mode needs a nonnegative fixed_tm")
        if self.initial_tm < 0:
            raise ValueError("initial_tm must be nonnegative")
        self.profile = ReferenceProfile(self.reference)


@dataclass
class TraceRecord:
    t: float
    r: float
    y: float
    y_d: float
    td_ms: int
    tm_ms: float
    rule: str
    e1: float
    e2: float
    y_asp: float
    drive: float
    duty_pct: float


@dataclass
class SimTrace:
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return [getattr(rec, name) for rec in self.records]


@dataclass
class RunMetrics:
    max_duty: float
    min_duty: float
    sse_pct: float
    oscillating: bool
    settling_time: float


def _build_predictor(scenario):
    if scenario.mode == "no-sp":
        return None
    if scenario.mode == "csp":
        return SmithPredictor(scenario.series, t_m=scenario.fixed_tm, adaptive=False)
    return SmithPredictor(scenario.series, t_m=scenario.initial_tm, adaptive=True)


def run_scenario(scenario, pi_config=None, quantize=True):
    """Execute one closed-loop run; deterministic for a fixed scenario."""
    rng = random.Random(scenario.seed)
    channel = DelayChannel()
    plant = MotorPlant()
    est = EstimatorState(period_ms=PERIOD_MS, initial_tm=scenario.initial_tm * 1000.0)
    predictor = _build_predictor(scenario)
    cfg = pi_config if pi_config is not None else PiConfig()
    pi = PiState()
    lo_ms = scenario.delay_lo * 1000.0
    hi_ms = scenario.delay_hi * 1000.0
    duration_ms = int(round(scenario.duration * 1000))

    held_u = 0.0
    y_d = 0.0
    y_asp = 0.0
    return_delay = {}
    trace = SimTrace()

    for t_ms in range(duration_ms):
        if t_ms % PERIOD_MS == 0:
            deliveries = channel.poll("backward", t_ms)
            rule, accepted = classify_and_measure(est, deliveries, t_ms)
            if accepted is not None:
                y_d = accepted.payload
            r = scenario.profile.at(t_ms / 1000.0)
            e1 = r - y_d
            e2 = residual(e1, y_asp)
            drive = pi_step(cfg, pi, e2)
            if quantize:
                drive = float(min(255, max(0, round(drive))))
            t_d, t1, t2 = draw_round_trip(rng, lo_ms, hi_ms)
            sent = channel.send("forward", drive, now=t_ms, delay=t1)
            return_delay[sent.seq] = t2
            on_send(est, t_ms)
            y_asp_next = 0.0
            if predictor is not None:
                predictor.retune(est.t_m / 1000.0)
                y_asp_next = predictor.step(drive)
            trace.records.append(TraceRecord(
                t=t_ms / 1000.0, r=r, y=plant.speed, y_d=y_d,
                td_ms=t_d, tm_ms=est.t_m, rule=rule.value,
                e1=e1, e2=e2, y_asp=y_asp, drive=drive,
                duty_pct=duty_ratio(min(max(drive, 0.0), 255.0)),
            ))
            y_asp = y_asp_next
        for msg in channel.poll("forward", t_ms):
            held_u = msg.payload
            channel.send("backward", plant.speed, now=t_ms,
                         delay=return_delay.pop(msg.seq), origin=msg.sent_at)
        plant.tick(held_u)
    return trace


def run_sampled_loop(duration=DEFAULT_DURATION, reference=DEFAULT_REFERENCE,
                     forward_samples=0, backward_samples=0, predictor=None,
                     pi_config=None, quantize=False):
    """All-discrete loop on the controller grid with exact sample delays.

    The plant is the nominal model itself, so with an exact-delay predictor
    the Smith compensation cancels the channel completely. The loop keeps
    one inherent sample of feedback transport even at zero delay (an echo
    is read at the flank after it is produced), so the compensator that
    cancels a (k1, k2) channel spans k1 + k2 - 1 samples. Drives are
    unquantized by default so equality checks work at float precision.
    """
    profile = ReferenceProfile(reference)
    cfg = pi_config if pi_config is not None else PiConfig()
    pi = PiState()
    model = nominal_model()
    gain = float(model.num[-1])
    pole = float(-model.den[-1])
    samples = int(round(duration / CONTROL_PERIOD))
    k1, k2 = int(forward_samples), int(backward_samples)
    if k1 < 0 or k2 < 0:
        raise ValueError("sample delays must be nonnegative")

    forward = {}
    backward = {}
    held_u = 0.0
    y = 0.0
    y_d = 0.0
    y_asp = 0.0
    trace = SimTrace()

    for n in range(samples):
        if n in backward:
            y_d = backward.pop(n)
        r = profile.at(n * CONTROL_PERIOD)
        e1 = r - y_d
        e2 = residual(e1, y_asp)
        drive = pi_step(cfg, pi, e2)
        if quantize:
            drive = float(min(255, max(0, round(drive))))
        forward[n + k1] = drive
        y_asp_next = 0.0
        if predictor is not None:
            predictor.retune((k1 + k2) * CONTROL_PERIOD)
            y_asp_next = predictor.step(drive)
        trace.records.append(TraceRecord(
            t=n * CONTROL_PERIOD, r=r, y=y, y_d=y_d,
            td_ms=(k1 + k2) * PERIOD_MS, tm_ms=(k1 + k2) * PERIOD_MS,
            rule="normal", e1=e1, e2=e2, y_asp=y_asp, drive=drive,
            duty_pct=duty_ratio(min(max(drive, 0.0), 255.0)),
        ))
        y_asp = y_asp_next
        # plant side of the same sample: apply any arriving drive, echo, step.
        # a zero-delay echo still lands after this sample's controller flank,
        # so its arrival is one period later, same as the event-driven loop
        if n in forward:
            held_u = forward.pop(n)
            backward[n + max(k2, 1)] = y
        y = pole * y + gain * held_u
    return trace


def compute_metrics(trace, transient_fraction=0.4):
    """Post-transient duty range, steady-state error, oscillation, settling."""
    if not trace.records:
        raise ValueError("empty trace")
    n = len(trace.records)
    records = trace.records
    setpoint = records[-1].r
    tail = records[int(n * transient_fraction):]
    duties = [rec.duty_pct for rec in tail]
    last_tenth = records[int(n * 0.9):]
    sse = abs(sum(rec.r - rec.y for rec in last_tenth) / len(last_tenth))
    sse_pct = 100.0 * sse / abs(setpoint) if setpoint else 100.0 * sse

    window = records[int(n * 0.6):]
    err = [rec.r - rec.y for rec in window]
    signs = [e for e in err if e != 0.0]
    crossings = sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))
    peak_to_peak = (max(err) - min(err)) if err else 0.0
    oscillating = crossings >= 6 and peak_to_peak > 0.05 * abs(setpoint)

    band = 0.02 * abs(setpoint)
    settling = None
    for rec in records:
        if abs(rec.r - rec.y) > band:
            settling = None
        elif settling is None:
            settling = rec.t
    return RunMetrics(
        max_duty=max(duties), min_duty=min(duties),
        sse_pct=sse_pct, oscillating=oscillating,
        settling_time=settling,
    )


def _format(value):
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return repr(value)


def csv_text(trace):
    lines = [",".join(CSV_COLUMNS)]
    for rec in trace.records:
        lines.append(",".join(_format(getattr(rec, col)) for col in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def export_csv(trace, path):
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(trace))
    return path


def load_csv(path):
    with open(path, "r", newline="") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    header = lines[0].split(",")
    if tuple(header) != CSV_COLUMNS:
        raise ValueError("unexpected CSV columns")
    trace = SimTrace()
    for line in lines[1:]:
        parts = line.split(",")
        kwargs = {}
        for col, raw in zip(CSV_COLUMNS, parts):
            if col == "rule":
                kwargs[col] = raw
            elif col == "td_ms":
                kwargs[col] = int(raw)
            else:
                kwargs[col] = float(raw)
        trace.records.append(TraceRecord(**kwargs))
    return trace


_SCENARIO_KEYS = {
    "mode": str,
    "series": str,
    "fixed_tm": float,
    "delay_lo": float,
    "delay_hi": float,
    "reference": str,
    "duration": float,
    "seed": int,
    "initial_tm": float,
}


def _parse_reference(text):
    points = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        when, _, level = chunk.partition(":")
        if not _:
            raise ValueError(f"reference point {chunk!r} is not time:level")
        points.append((float(when), float(level)))
    if not points:
        raise ValueError("reference profile is empty")
    return tuple(points)


def parse_scenario(text):
    """Parse the flat `key = value` scenario format into a Scenario."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value")
        key = key.strip()
        if key not in _SCENARIO_KEYS:
            raise ValueError(f"line {lineno}: unknown scenario key {key!r}")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _SCENARIO_KEYS[key](value.strip())
    if "reference" in values:
        values["reference"] = _parse_reference(values["reference"])
    return Scenario(**values)


def load_scenario(path):
    with open(path, "r") as fh:
        return parse_scenario(fh.read())

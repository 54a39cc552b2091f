"""Request and response models for the HTTP service."""

from typing import List, Optional, Tuple

from pydantic import BaseModel

from ..harness import DEFAULT_DURATION, DEFAULT_REFERENCE, Scenario


class ScenarioRequest(BaseModel):
    """One closed-loop run; fields mirror harness.Scenario.

    reference is a list of [time_s, level] pairs; omit it for the default
    two-level profile.
    """

    mode: str = "asp"
    series: str = "dfr"
    fixed_tm: float = 0.06
    delay_lo: float = 0.03
    delay_hi: float = 0.13
    reference: Optional[List[Tuple[float, float]]] = None
    duration: float = DEFAULT_DURATION
    seed: int = 0
    initial_tm: float = 0.0

    def to_scenario(self):
        if self.reference is None:
            reference = DEFAULT_REFERENCE
        else:
            reference = tuple((float(t), float(level)) for t, level in self.reference)
        return Scenario(
            mode=self.mode,
            series=self.series,
            fixed_tm=self.fixed_tm,
            delay_lo=self.delay_lo,
            delay_hi=self.delay_hi,
            reference=reference,
            duration=self.duration,
            seed=self.seed,
            initial_tm=self.initial_tm,
        )


class MetricsModel(BaseModel):
    max_duty: float
    min_duty: float
    sse_pct: float
    oscillating: bool
    settling_time: Optional[float] = None


class RunResponse(BaseModel):
    csv: str
    samples: int
    metrics: MetricsModel


class SweepRequest(BaseModel):
    td_min: float = 0.1
    td_max: float = 0.8
    steps: int = 25


class SweepPoint(BaseModel):
    td: float
    rightmost_real: float


class SweepResponse(BaseModel):
    points: List[SweepPoint]
    csv: str


class CriticalDelayRequest(BaseModel):
    t_lo: float = 0.1
    t_hi: float = 0.8
    tol: float = 1e-4


class CriticalDelayResponse(BaseModel):
    critical_delay: float
    oracle_omega: float
    oracle_delay: float
    difference: float


class IseTableRequest(BaseModel):
    """ISE of each approximant family over a set of delays.

    The integration grid scales with the delay: horizon = horizon_factor * tau
    and dt = tau / dt_divisor, so columns of different magnitude are equally
    resolved.
    """

    taus: List[float] = [0.04, 0.24, 1.0]
    series: Optional[List[str]] = None
    horizon_factor: float = 10.0
    dt_divisor: float = 1000.0


class IseRow(BaseModel):
    series: str
    ise: List[float]
    average: float


class IseTableResponse(BaseModel):
    taus: List[float]
    horizon_factor: float
    dt_divisor: float
    rows: List[IseRow]

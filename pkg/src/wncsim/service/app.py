"""HTTP service over the simulator, stability analysis, and ISE tables.

Domain errors (bad scenario fields, empty grids, no stability crossing in
range) surface as 422 with the raw message; only genuine bugs reach 500.
"""

from dataclasses import asdict

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..delay_approx import Series, ise_error
from ..harness import compute_metrics, csv_text, run_scenario
from ..stability import critical_delay, crossing_oracle, speed_loop_dde, sweep_rightmost
from .schemas import (
    CriticalDelayRequest,
    CriticalDelayResponse,
    IseRow,
    IseTableRequest,
    IseTableResponse,
    MetricsModel,
    RunResponse,
    ScenarioRequest,
    SweepPoint,
    SweepRequest,
    SweepResponse,
)


def sweep_csv(points):
    lines = ["td,rightmost_real"]
    lines += [f"{p.td!r},{p.rightmost_real!r}" for p in points]
    return "\n".join(lines) + "\n"


def create_app():
    app = FastAPI(title="wncsim")

    @app.exception_handler(ValueError)
    async def _domain_error(request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/run", response_model=RunResponse)
    def run(req: ScenarioRequest):
        trace = run_scenario(req.to_scenario())
        metrics = compute_metrics(trace)
        return RunResponse(
            csv=csv_text(trace),
            samples=len(trace),
            metrics=MetricsModel(**asdict(metrics)),
        )

    @app.post("/stability/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        pairs = sweep_rightmost(speed_loop_dde(0.0), req.td_min, req.td_max, req.steps)
        points = [SweepPoint(td=td, rightmost_real=real) for td, real in pairs]
        return SweepResponse(points=points, csv=sweep_csv(points))

    @app.post("/stability/critical-delay", response_model=CriticalDelayResponse)
    def critical(req: CriticalDelayRequest):
        template = speed_loop_dde(0.0)
        t_star = critical_delay(template, t_lo=req.t_lo, t_hi=req.t_hi, tol=req.tol)
        omega, t_oracle = crossing_oracle(template)
        return CriticalDelayResponse(
            critical_delay=t_star,
            oracle_omega=omega,
            oracle_delay=t_oracle,
            difference=abs(t_star - t_oracle),
        )

    @app.post("/ise-table", response_model=IseTableResponse)
    def ise_table(req: IseTableRequest):
        if not req.taus:
            raise ValueError("need at least one tau")
        names = req.series if req.series is not None else [s.value for s in Series]
        if not names:
            raise ValueError("need at least one series")
        rows = []
        for kind in [Series.parse(name) for name in names]:
            values = [
                ise_error(kind, tau, req.horizon_factor * tau, tau / req.dt_divisor).ise
                for tau in req.taus
            ]
            rows.append(
                IseRow(series=kind.value, ise=values, average=sum(values) / len(values))
            )
        return IseTableResponse(
            taus=list(req.taus),
            horizon_factor=req.horizon_factor,
            dt_divisor=req.dt_divisor,
            rows=rows,
        )

    return app

"""HTTP compute service wrapping the simulator.

Run with ``uvicorn influence.service:app``.  Each endpoint is a stateless
wrapper over the core package: clients submit a scenario or a computation
request and receive the same artifacts the CLI writes (the CSV text returned
by /simulate is byte-identical to the trajectory.csv of a local run with the
same parameters).
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .errors import InfluenceError
from .kinematics import emergent_state, lorentz_boost
from .quantify import quantify_interval
from .runner import format_verify_table, run_scenario, run_verify
from .simulation import ScenarioConfig


class SimulateRequest(BaseModel):
    kind: Literal["free", "accelerated", "accel"]
    n_events: int = Field(gt=0)
    window: int = Field(gt=0)
    seed: int = 0
    pr_right: Optional[float] = None
    r: Optional[float] = None
    phi0: Optional[float] = None
    emission_rate: float = 1000.0
    tau0: float = 1.0
    receipt_scheduling: Literal["deterministic", "bernoulli"] = "deterministic"
    emit_poset: bool = False
    include_csv: bool = True
    include_samples: bool = True

    def to_config(self) -> ScenarioConfig:
        kind = "accelerated" if self.kind == "accel" else self.kind
        return ScenarioConfig(
            kind=kind,
            n_events=self.n_events,
            window=self.window,
            seed=self.seed,
            pr_right=self.pr_right,
            r=self.r,
            phi0=self.phi0,
            emission_rate=self.emission_rate,
            tau0=self.tau0,
            receipt_scheduling=self.receipt_scheduling,
        )


class WindowSample(BaseModel):
    tau_mid: float
    beta_hat: float
    stderr: float
    beta_analytic: Optional[float] = None
    residual: Optional[float] = None


class SimulateResponse(BaseModel):
    summary: dict
    samples: list[WindowSample] = []
    csv_text: Optional[str] = None
    poset_text: Optional[str] = None


class VerifyRequest(BaseModel):
    suites: Optional[list[str]] = None
    trials: Optional[int] = Field(default=None, gt=0)
    seed: int = 0
    fixture_text: Optional[str] = None


class SuiteResultModel(BaseModel):
    name: str
    passed: bool
    trials: int
    detail: str


class VerifyResponse(BaseModel):
    all_passed: bool
    results: list[SuiteResultModel]
    table: str


class QuantifyRequest(BaseModel):
    dp: float
    dq: float


class QuantifyResponse(BaseModel):
    dp: float
    dq: float
    dt: float
    dx: float
    ds2: float
    beta: Optional[float] = None


class EmergentRequest(BaseModel):
    n_total: int = Field(gt=0)
    dp: float = Field(gt=0)
    dq: float = Field(gt=0)


class EmergentResponse(BaseModel):
    n_total: int
    dp: float
    dq: float
    rate_right: float
    rate_left: float
    mass: float
    momentum: float
    energy: float
    tau: float
    beta: float
    gamma: float


class LorentzRequest(BaseModel):
    dt: float
    dx: float
    v: float


class LorentzResponse(BaseModel):
    dt: float
    dx: float


app = FastAPI(title="influence simulator", version=__version__)


@app.exception_handler(InfluenceError)
async def _influence_error(request, exc: InfluenceError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(request: SimulateRequest) -> SimulateResponse:
    result = run_scenario(request.to_config(), emit_poset=request.emit_poset)
    samples: list[WindowSample] = []
    if request.include_samples:
        measured = result.measured
        resid = measured.residuals() if measured.analytic is not None else None
        for i in range(len(measured)):
            samples.append(
                WindowSample(
                    tau_mid=float(measured.tau_mid[i]),
                    beta_hat=float(measured.beta_hat[i]),
                    stderr=float(measured.stderr[i]),
                    beta_analytic=(
                        None if resid is None else float(measured.beta_hat[i] - resid[i])
                    ),
                    residual=None if resid is None else float(resid[i]),
                )
            )
    return SimulateResponse(
        summary=result.summary,
        samples=samples,
        csv_text=result.csv_text if request.include_csv else None,
        poset_text=result.poset_text,
    )


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(request: VerifyRequest) -> VerifyResponse:
    results = run_verify(
        suites=request.suites,
        trials=request.trials,
        seed=request.seed,
        fixture_text=request.fixture_text,
    )
    return VerifyResponse(
        all_passed=all(r.passed for r in results),
        results=[SuiteResultModel(**vars(r)) for r in results],
        table=format_verify_table(results),
    )


@app.post("/quantify", response_model=QuantifyResponse)
def quantify_endpoint(request: QuantifyRequest) -> QuantifyResponse:
    q = quantify_interval(request.dp, request.dq)
    return QuantifyResponse(dp=q.dp, dq=q.dq, dt=q.dt, dx=q.dx, ds2=q.ds2, beta=q.beta)


@app.post("/emergent", response_model=EmergentResponse)
def emergent_endpoint(request: EmergentRequest) -> EmergentResponse:
    s = emergent_state(request.n_total, request.dp, request.dq)
    return EmergentResponse(
        n_total=s.n_total,
        dp=s.dp,
        dq=s.dq,
        rate_right=s.rate_right,
        rate_left=s.rate_left,
        mass=s.mass,
        momentum=s.momentum,
        energy=s.energy,
        tau=s.tau,
        beta=s.beta,
        gamma=s.gamma,
    )


@app.post("/lorentz", response_model=LorentzResponse)
def lorentz_endpoint(request: LorentzRequest) -> LorentzResponse:
    dt, dx = lorentz_boost(request.dt, request.dx, request.v)
    return LorentzResponse(dt=dt, dx=dx)

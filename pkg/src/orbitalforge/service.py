"""HTTP service exposing the verification runners.

Every POST endpoint takes the same config model as the CLI subcommand of the
same name and returns the full report; the service is a thin wrapper so the
heavy computations stay reusable for multi-client runs.

Run with:  uvicorn orbitalforge.service:app
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .errors import ConfigurationError, DegenerateInputError, NumericalFailureError
from .runs import (
    CharacterConfig,
    HcizConfig,
    HeatflowConfig,
    RootSystemQuery,
    SaddleConfig,
    VerifyHcConfig,
    VolumeConfig,
    run_character,
    run_hciz,
    run_heatflow,
    run_root_system,
    run_saddle,
    run_verify_hc,
    run_volume,
)

app = FastAPI(title="orbitalforge", version=__version__)


def _guarded(runner, cfg):
    try:
        return runner(cfg)
    except DegenerateInputError as exc:
        raise HTTPException(status_code=422, detail=f"degenerate input: {exc}")
    except (ConfigurationError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except NumericalFailureError as exc:
        raise HTTPException(status_code=500, detail=f"numerical failure: {exc}")


@app.get("/v1/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/v1/verify-hc")
def verify_hc(cfg: VerifyHcConfig) -> dict:
    return _guarded(run_verify_hc, cfg)


@app.post("/v1/hciz")
def hciz_endpoint(cfg: HcizConfig) -> dict:
    return _guarded(run_hciz, cfg)


@app.post("/v1/character")
def character(cfg: CharacterConfig) -> dict:
    return _guarded(run_character, cfg)


@app.post("/v1/volume")
def volume(cfg: VolumeConfig) -> dict:
    return _guarded(run_volume, cfg)


@app.post("/v1/saddle")
def saddle(cfg: SaddleConfig) -> dict:
    return _guarded(run_saddle, cfg)


@app.post("/v1/heatflow")
def heatflow(cfg: HeatflowConfig) -> dict:
    return _guarded(run_heatflow, cfg)


@app.get("/v1/root-system")
def root_system(family: str, rank: int) -> dict:
    return _guarded(run_root_system, RootSystemQuery(family=family, rank=rank))

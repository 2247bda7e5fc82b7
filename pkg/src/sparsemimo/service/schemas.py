"""Request and response models for the HTTP API."""

from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, Field


class ComplexMatrix(BaseModel):
    re: list[list[float]]
    im: list[list[float]]


class ErrorResponse(BaseModel):
    error: str
    field: Optional[str] = None
    detail: str


class ConfigRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)


class ValidateResponse(BaseModel):
    ok: bool
    config_hash: str


class SimulateRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    schemes: list[str] = ["proposed", "comb-linear"]
    snr_db: list[float] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
    trials: int = Field(200, ge=1)
    time_varying: bool = False
    threads: int = Field(1, ge=1)


NonFinite = Literal["nan", "inf", "-inf"]


class SweepRowModel(BaseModel):
    scheme: str
    snr_db: float
    nt: int
    nr: int
    np: int
    r: int
    # JSON has no NaN/inf: an all-excluded cell is "nan", an exact fit "-inf"
    mean_nmse_db: Union[float, NonFinite]
    trials: int
    excluded: int


class SimulateResponse(BaseModel):
    config_hash: str
    rows: list[SweepRowModel]


class GenerateRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    snr_db: Optional[float] = Field(None, description="null for a noiseless measurement")
    seed: int = 0


class GenerateResponse(BaseModel):
    sidecar: dict[str, Any]
    measurement: ComplexMatrix
    truth: ComplexMatrix
    delays_s: list[float]


class EstimateRequest(BaseModel):
    sidecar: dict[str, Any]
    measurement: ComplexMatrix


class EstimateResponse(BaseModel):
    delays_s: list[float]
    gains: ComplexMatrix
    cfr: ComplexMatrix

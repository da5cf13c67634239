"""Request/response models of the compute service.

All quantities on the wire are already resolved to angular frequency (rad/s)
and seconds; unit suffixes are a client-side (CLI) concern. Tabulated
profiles travel inline as (omega, re, im) rows so the service never touches
the filesystem.
"""

from __future__ import annotations

from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..errors import ConfigError
from ..profiles import GAUSSIAN, SUPER_GAUSSIAN, TABULATED, PumpSpec, SpectralProfile


class ProfileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["gaussian", "supergauss", "table"]
    bandwidth: Optional[float] = Field(default=None, description="intensity rms width, rad/s")
    center: float = Field(default=0.0, description="center offset, rad/s")
    order: int = Field(default=3, ge=1, description="super-Gaussian exponent")
    table: Optional[list[tuple[float, float, float]]] = Field(
        default=None, description="rows of (omega_rad_s, re, im)")

    def to_profile(self) -> SpectralProfile:
        if self.kind == TABULATED:
            if not self.table:
                raise ConfigError("tabulated profile needs table rows")
            rows = np.asarray(self.table, dtype=float)
            return SpectralProfile.tabulated(rows[:, 0], rows[:, 1] + 1j * rows[:, 2])
        if self.bandwidth is None:
            raise ConfigError(f"{self.kind} profile needs a bandwidth")
        if self.kind == GAUSSIAN:
            return SpectralProfile.gaussian(self.bandwidth, self.center)
        return SpectralProfile.super_gaussian(self.order, self.bandwidth, self.center)

    @classmethod
    def from_profile(cls, profile: SpectralProfile) -> "ProfileModel":
        if profile.kind == TABULATED:
            rows = [(float(w), float(a.real), float(a.imag))
                    for w, a in zip(profile.table_omega, profile.table_amplitude)]
            return cls(kind="table", table=rows)
        if profile.kind == SUPER_GAUSSIAN:
            return cls(kind="supergauss", bandwidth=profile.bandwidth,
                       center=profile.center, order=profile.order)
        return cls(kind="gaussian", bandwidth=profile.bandwidth, center=profile.center)


class PumpModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cw: bool = False
    profile: Optional[ProfileModel] = None

    def to_pump(self) -> PumpSpec:
        profile = self.profile.to_profile() if self.profile is not None else None
        return PumpSpec(profile=profile, cw=self.cw)

    @classmethod
    def from_pump(cls, pump: PumpSpec) -> "PumpModel":
        if pump.cw:
            return cls(cw=True)
        return cls(cw=False, profile=ProfileModel.from_profile(pump.profile))


class GridOverride(BaseModel):
    """Explicit grid sizing for scenarios outside the automatic rule's reach."""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(ge=64, description="samples per axis (power of two)")
    half_span: Optional[float] = Field(
        default=None, gt=0.0,
        description="half-width of each axis around its filter center, rad/s")


class ConcurrenceRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pump: PumpModel
    filter_a: ProfileModel
    filter_b: ProfileModel
    tau_a: float
    tau_b: float
    method: Literal["auto", "analytic", "numeric", "time-domain"] = "auto"
    grid: Optional[GridOverride] = None
    include_rho: bool = False


class ConcurrenceResponse(BaseModel):
    C: float
    kappa_re: float
    kappa_im: float
    method: str
    est_error: float
    rho_re: Optional[list[list[float]]] = None
    rho_im: Optional[list[list[float]]] = None


class OptimizeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pump: PumpModel
    filter_a: ProfileModel
    filter_b: ProfileModel
    tau_a: float
    bracket_lo: Optional[float] = None
    bracket_hi: Optional[float] = None
    tol: Optional[float] = Field(default=None, description="tau_b tolerance; "
                                 "default 1e-5 * the bracket scale")
    method: Literal["auto", "analytic", "numeric"] = "auto"
    paper_tau0: bool = False
    grid: Optional[GridOverride] = None


class OptimizeResponse(BaseModel):
    tau_b_opt: float
    C_opt: float
    method: str
    iterations: int
    converged: bool
    bracket_lo: float
    bracket_hi: float
    tau0: float
    tau0_paper: Optional[float] = None


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    axis: Literal["taub", "bp"]
    start: float
    stop: float
    points: int = Field(ge=1)
    pump: PumpModel
    filter_a: ProfileModel
    filter_b: ProfileModel
    tau_a: float
    tol: float = Field(default=1e-6, gt=0.0)
    validate_points: bool = False
    grid: Optional[GridOverride] = None


class SweepResponse(BaseModel):
    x: list[float]
    concurrence: list[float]
    metadata: dict[str, str]


class ValidateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # test-harness hook: shifts the closed-form reference to prove the checks bite
    gaussian_perturbation: float = 0.0


class CheckModel(BaseModel):
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""


class ValidateResponse(BaseModel):
    passed: bool
    checks: list[CheckModel]
    notes: list[str]


class JsaDumpRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pump: PumpModel
    filter_a: ProfileModel
    filter_b: ProfileModel
    which: Literal["jsi", "temporal"]
    tau_max: float = 0.0
    grid: Optional[GridOverride] = None


class ErrorBody(BaseModel):
    kind: Literal["config", "numeric"]
    message: str

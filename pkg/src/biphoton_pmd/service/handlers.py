"""Service request handlers.

Plain functions from request model to response model; the FastAPI app and
the in-process CLI client both call these, so local and remote runs execute
identical code paths.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .. import concurrence as conc
from .. import optimizer as opt
from .. import polarization as pol
from ..biphoton import BiphotonAmplitude, GridSpec, auto_grid, build_jsa, \
    grid_to_csv, temporal_amplitude
from ..errors import ConfigError
from ..profiles import GAUSSIAN, PumpSpec, SpectralProfile, intensity_centroid, \
    rms_bandwidth
from ..validation import run_validation
from . import schemas


def _resolve_grid(pump: PumpSpec, filter_a: SpectralProfile, filter_b: SpectralProfile,
                  override: Optional[schemas.GridOverride],
                  tau_max: float) -> Optional[GridSpec]:
    if override is None:
        return None
    if override.half_span is not None:
        half_a = half_b = override.half_span
    else:
        auto = auto_grid(pump, filter_a, filter_b, tau_max=tau_max)
        half_a = 0.5 * auto.span_a
        half_b = 0.5 * auto.span_b
    c_a = intensity_centroid(filter_a)
    c_b = intensity_centroid(filter_b)
    return GridSpec(n_a=override.n, n_b=override.n,
                    omega_a_min=c_a - half_a, omega_a_max=c_a + half_a,
                    omega_b_min=c_b - half_b, omega_b_max=c_b + half_b)


def _build(pump: PumpSpec, filter_a: SpectralProfile, filter_b: SpectralProfile,
           override: Optional[schemas.GridOverride], tau_max: float) -> BiphotonAmplitude:
    grid = _resolve_grid(pump, filter_a, filter_b, override, tau_max)
    return build_jsa(pump, filter_a, filter_b, grid=grid, tau_max=tau_max)


def _all_gaussian(pump: PumpSpec, filter_a: SpectralProfile,
                  filter_b: SpectralProfile) -> bool:
    pump_ok = pump.cw or pump.profile.kind == GAUSSIAN
    return pump_ok and filter_a.kind == GAUSSIAN and filter_b.kind == GAUSSIAN


def handle_concurrence(req: schemas.ConcurrenceRequest) -> schemas.ConcurrenceResponse:
    pump = req.pump.to_pump()
    filter_a = req.filter_a.to_profile()
    filter_b = req.filter_b.to_profile()
    scenario = conc.PmdScenario(req.tau_a, req.tau_b)

    if req.method == "analytic":
        if not _all_gaussian(pump, filter_a, filter_b):
            raise ConfigError("analytic method requires Gaussian shapes")
        b_p = 0.0 if pump.cw else pump.profile.bandwidth
        result = conc.concurrence_gaussian_result(
            b_p, filter_a.bandwidth, filter_b.bandwidth, scenario)
    elif pump.cw:
        result = conc.concurrence_cw(filter_a, filter_b, req.tau_a, req.tau_b)
    else:
        tau_max = max(abs(req.tau_a), abs(req.tau_b))
        jsa = _build(pump, filter_a, filter_b, req.grid, tau_max)
        if req.method == "time-domain":
            result = conc.concurrence_time_domain(jsa, scenario)
        else:
            result = conc.concurrence_numeric(jsa, scenario)

    resp = schemas.ConcurrenceResponse(
        C=float(result.concurrence),
        kappa_re=float(result.kappa.real),
        kappa_im=float(result.kappa.imag),
        method=result.method.value,
        est_error=float(result.est_error),
    )
    if req.include_rho:
        rho = pol.density_matrix_from_overlap(result.kappa).rho
        resp.rho_re = [[float(v) for v in row] for row in rho.real]
        resp.rho_im = [[float(v) for v in row] for row in rho.imag]
    return resp


def handle_optimize(req: schemas.OptimizeRequest) -> schemas.OptimizeResponse:
    pump = req.pump.to_pump()
    filter_a = req.filter_a.to_profile()
    filter_b = req.filter_b.to_profile()

    all_gauss = _all_gaussian(pump, filter_a, filter_b)
    if req.method == "analytic" and not all_gauss:
        raise ConfigError("analytic method requires Gaussian shapes")
    use_analytic = req.method == "analytic" or (req.method == "auto" and all_gauss)

    b_p = 0.0 if pump.cw else rms_bandwidth(pump.profile)
    b_a = rms_bandwidth(filter_a)
    b_b = rms_bandwidth(filter_b)

    if use_analytic:
        tau_b_opt, c_opt = opt.optimal_dgd_gaussian(b_p, b_a, req.tau_a)
        lo, hi = sorted((0.0, 2.0 * req.tau_a))
        method, iterations, converged = "GaussianAnalytic", 0, True
    else:
        if pump.cw:
            raise ConfigError("numeric optimization needs a pulsed pump; "
                              "a CW pump is optimal at tau_b = tau_a exactly")
        bracket = None
        if req.bracket_lo is not None or req.bracket_hi is not None:
            if req.bracket_lo is None or req.bracket_hi is None:
                raise ConfigError("bracket needs both endpoints")
            bracket = (req.bracket_lo, req.bracket_hi)
        jsa = _build(pump, filter_a, filter_b, req.grid,
                     tau_max=2.0 * abs(req.tau_a))
        result = opt.optimize_compensator(jsa, req.tau_a, bracket=bracket, tol=req.tol)
        tau_b_opt, c_opt = result.tau_b_opt, result.c_opt
        lo, hi = result.bracket
        method, iterations, converged = "FreqQuadrature", result.iterations, result.converged

    resp = schemas.OptimizeResponse(
        tau_b_opt=float(tau_b_opt), C_opt=float(c_opt), method=method,
        iterations=iterations, converged=converged,
        bracket_lo=float(lo), bracket_hi=float(hi),
        tau0=float(conc.sensitivity_tolerance(b_p, b_a, b_b)),
    )
    if req.paper_tau0:
        resp.tau0_paper = float(conc.sensitivity_tolerance_pump_only(b_p))
    return resp


def handle_sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    if req.points < 1:
        raise ConfigError("sweep needs at least one point")
    if req.points > 1 and req.stop <= req.start:
        raise ConfigError("sweep range must be increasing")
    pump = req.pump.to_pump()
    filter_a = req.filter_a.to_profile()
    filter_b = req.filter_b.to_profile()
    grid_values = np.linspace(req.start, req.stop, req.points)

    if req.axis == "taub":
        if pump.cw:
            raise ConfigError("tau_b sweeps need a pulsed pump; the CW result "
                              "depends only on tau_a - tau_b")
        tau_extent = float(max(abs(grid_values[0]), abs(grid_values[-1]), abs(req.tau_a)))
        jsa = _build(pump, filter_a, filter_b, req.grid, tau_max=tau_extent)
        curve = opt.sweep_taub(
            jsa, req.tau_a, [float(v) for v in grid_values],
            validate=req.validate_points,
            gaussian_bandwidths=(
                (pump.profile.bandwidth, filter_a.bandwidth, filter_b.bandwidth)
                if _all_gaussian(pump, filter_a, filter_b) and not pump.cw else None),
        )
    else:
        if pump.cw:
            raise ConfigError("pump-bandwidth sweeps need a pulsed pump shape")
        curve = opt.sweep_pump_bandwidth(
            pump, filter_a, filter_b, req.tau_a,
            [float(v) for v in grid_values], tol=req.tol,
            validate=req.validate_points)

    return schemas.SweepResponse(
        x=[float(v) for v in curve.x],
        concurrence=[float(v) for v in curve.concurrence],
        metadata={k: str(v) for k, v in curve.metadata.items()},
    )


def handle_validate(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
    report = run_validation(gaussian_perturbation=req.gaussian_perturbation)
    return schemas.ValidateResponse(
        passed=report.passed,
        checks=[schemas.CheckModel(name=c.name, passed=c.passed, measured=c.measured,
                                   threshold=c.threshold, detail=c.detail)
                for c in report.checks],
        notes=list(report.notes),
    )


def handle_jsa_dump(req: schemas.JsaDumpRequest) -> str:
    pump = req.pump.to_pump()
    filter_a = req.filter_a.to_profile()
    filter_b = req.filter_b.to_profile()
    jsa = _build(pump, filter_a, filter_b, req.grid, tau_max=req.tau_max)
    if req.which == "jsi":
        header = "joint spectral intensity |f(omega_a, omega_b)|^2; axes rad/s"
        return grid_to_csv(jsa.grid.omega_a, jsa.grid.omega_b, jsa.jsi(), header)
    t_a, t_b, g = temporal_amplitude(jsa)
    header = "temporal intensity |g(t_a, t_b)|^2; axes seconds"
    return grid_to_csv(t_a, t_b, (g * np.conj(g)).real, header)

"""Compensator-DGD optimization and the standard sweep curves.

The best achievable concurrence for Gaussian shapes is analytic:

    tau_b_opt = tau_a / (1 + B_p^2 / B_a^2)
    C_opt     = exp[-tau_a^2 / (2 (B_p^-2 + B_a^-2))]

and depends on neither B_b nor the filter detunings. For everything else a
derivative-free 1-D maximizer runs on the frequency-domain engine: a 33-point
coarse scan brackets the peak, then golden-section refines it. The objective
is smooth but not provably unimodal, so the scan guards the bracket.

Sweep points are independent pure functions; the thread cap comes from the
BIPHOTON_PMD_THREADS environment variable (0 or unset = auto). Results are
assembled in grid order, so output bytes do not depend on the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .biphoton import BiphotonAmplitude, build_jsa
from .concurrence import KappaProfile, concurrence_numeric, concurrence_time_domain, \
    concurrence_gaussian, PmdScenario
from .errors import ConfigError, NumericsError
from .profiles import GAUSSIAN, SUPER_GAUSSIAN, PumpSpec, SpectralProfile
from .units import format_float

THREADS_ENV_VAR = "BIPHOTON_PMD_THREADS"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
COARSE_SCAN_POINTS = 33
MAX_ITERATIONS = 200
ENGINE_AGREEMENT_TOL = 1e-6


@dataclass(frozen=True)
class OptimizationResult:
    tau_b_opt: float
    c_opt: float
    iterations: int
    bracket: tuple[float, float]
    converged: bool


@dataclass(frozen=True)
class SweepCurve:
    """Ordered (x, concurrence) samples plus the fixed-parameter metadata."""

    axis: str
    x: tuple[float, ...]
    concurrence: tuple[float, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.x) != len(self.concurrence):
            raise NumericsError("sweep curve axes disagree in length")
        if any(b <= a for a, b in zip(self.x, self.x[1:])):
            raise NumericsError("sweep x values must be strictly increasing")
        if any(c < 0.0 or c > 1.0 + 1e-9 for c in self.concurrence):
            raise NumericsError("sweep concurrence left [0, 1]")


def resolve_thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV_VAR} must be >= 0")
    if n == 0:
        return min(8, os.cpu_count() or 1)
    return n


def _map_in_order(func: Callable, items: Sequence) -> list:
    workers = resolve_thread_count()
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def optimal_dgd_gaussian(b_p: float, b_a: float, tau_a: float) -> tuple[float, float]:
    """Analytic optimum (tau_b_opt, C_opt) for Gaussian shapes."""
    if b_a <= 0.0:
        raise NumericsError("filter bandwidth must be positive")
    if b_p < 0.0:
        raise NumericsError("pump bandwidth must be >= 0")
    if b_p == 0.0:
        return tau_a, 1.0
    tau_b = tau_a / (1.0 + b_p ** 2 / b_a ** 2)
    c_opt = math.exp(-tau_a ** 2 / (2.0 * (b_p ** -2 + b_a ** -2)))
    return tau_b, c_opt


def golden_section_maximize(func: Callable[[float], float], lo: float, hi: float,
                            tol: float, max_iterations: int = MAX_ITERATIONS,
                            ) -> tuple[float, float, int, bool]:
    """Golden-section maximization on [lo, hi]; returns (x, f(x), iters, converged)."""
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    iterations = 0
    while (b - a) > tol and iterations < max_iterations:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = func(d)
        iterations += 1
    x = 0.5 * (a + b)
    return x, func(x), iterations, (b - a) <= tol


def optimize_compensator(jsa: BiphotonAmplitude, tau_a: float,
                         bracket: Optional[tuple[float, float]] = None,
                         tol: float = 1e-6) -> OptimizationResult:
    """Maximize C(tau_a, tau_b) over tau_b inside the bracket.

    The default bracket is [0, 2 tau_a] (mirrored for negative tau_a), which
    holds the optimum for Gaussian shapes with a factor-2 margin for flat-top
    ones. Running out of the iteration cap returns the best point seen with
    ``converged=False`` instead of raising.
    """
    if tol <= 0.0:
        raise ConfigError("tolerance must be positive")
    if bracket is None:
        lo, hi = (0.0, 2.0 * tau_a) if tau_a >= 0.0 else (2.0 * tau_a, 0.0)
    else:
        lo, hi = float(bracket[0]), float(bracket[1])
        if hi < lo:
            raise ConfigError("bracket must satisfy lo <= hi")

    profile = KappaProfile(jsa, tau_a)
    if hi == lo:
        return OptimizationResult(lo, profile.concurrence(lo), 0, (lo, hi), True)

    xs = np.linspace(lo, hi, COARSE_SCAN_POINTS)
    cs = [profile.concurrence(float(x)) for x in xs]
    k = int(np.argmax(cs))
    sub_lo = xs[max(k - 1, 0)]
    sub_hi = xs[min(k + 1, COARSE_SCAN_POINTS - 1)]

    x, fx, iterations, converged = golden_section_maximize(
        profile.concurrence, float(sub_lo), float(sub_hi), tol)
    if cs[k] > fx:  # never return worse than the scan's best
        x, fx = float(xs[k]), cs[k]
    return OptimizationResult(x, fx, iterations, (lo, hi), converged)


def _cross_validate(jsa: BiphotonAmplitude, scenario: PmdScenario, c_freq: float,
                    gaussian_bandwidths: Optional[tuple[float, float, float]]) -> None:
    c_time = concurrence_time_domain(jsa, scenario).concurrence
    if abs(c_time - c_freq) > ENGINE_AGREEMENT_TOL:
        raise NumericsError(
            f"engine disagreement at tau_a={scenario.tau_a!r}, tau_b={scenario.tau_b!r}: "
            f"|{c_freq!r} - {c_time!r}| > {ENGINE_AGREEMENT_TOL}"
        )
    if gaussian_bandwidths is not None:
        b_p, b_a, b_b = gaussian_bandwidths
        c_ref = concurrence_gaussian(b_p, b_a, b_b, scenario.tau_a, scenario.tau_b)
        if abs(c_ref - c_freq) > ENGINE_AGREEMENT_TOL:
            raise NumericsError(
                f"closed-form disagreement at tau_a={scenario.tau_a!r}, "
                f"tau_b={scenario.tau_b!r}: |{c_freq!r} - {c_ref!r}|"
            )


def _gaussian_bandwidths(pump: PumpSpec, filter_a: SpectralProfile,
                         filter_b: SpectralProfile) -> Optional[tuple[float, float, float]]:
    if pump.cw or pump.profile.kind != GAUSSIAN:
        return None
    if filter_a.kind != GAUSSIAN or filter_b.kind != GAUSSIAN:
        return None
    return pump.profile.bandwidth, filter_a.bandwidth, filter_b.bandwidth


def sweep_taub(jsa: BiphotonAmplitude, tau_a: float, taub_grid: Sequence[float],
               validate: bool = False,
               gaussian_bandwidths: Optional[tuple[float, float, float]] = None,
               ) -> SweepCurve:
    """Concurrence along a tau_b grid at fixed tau_a.

    The x column is tau_b / tau_a whenever tau_a is nonzero (the natural
    normalization for compensator curves), else raw tau_b.
    """
    taubs = [float(t) for t in taub_grid]
    if not taubs:
        raise ConfigError("sweep grid must not be empty")
    if any(b <= a for a, b in zip(taubs, taubs[1:])):
        raise ConfigError("sweep grid must be strictly increasing")

    profile = KappaProfile(jsa, tau_a)
    values = []
    for index, tau_b in enumerate(taubs):
        try:
            c = profile.concurrence(tau_b)
            if validate:
                _cross_validate(jsa, PmdScenario(tau_a, tau_b), c, gaussian_bandwidths)
        except NumericsError as exc:
            raise NumericsError(f"sweep failed at point {index} (tau_b={tau_b!r}): {exc}") from exc
        values.append(c)

    if tau_a != 0.0:
        x = tuple(t / tau_a for t in taubs)
        x_label = "tau_b/tau_a"
        if tau_a < 0.0:  # normalization flips the order; restore increasing x
            x = tuple(reversed(x))
            values = list(reversed(values))
    else:
        x = tuple(taubs)
        x_label = "tau_b"
    metadata = {
        "axis": "taub", "x": x_label, "tau_a": format_float(tau_a),
        "pump": jsa.pump_descriptor, "filter_a": jsa.filter_a_descriptor,
        "filter_b": jsa.filter_b_descriptor,
    }
    return SweepCurve("taub", x, tuple(values), metadata)


def sweep_pump_bandwidth(pump_shape: PumpSpec, filter_a: SpectralProfile,
                         filter_b: SpectralProfile, tau_a: float,
                         bp_grid: Sequence[float], tol: float = 1e-6,
                         validate: bool = False) -> SweepCurve:
    """Best compensated concurrence versus pump bandwidth.

    Each point rebuilds the joint spectral amplitude with the pump's shape at
    that bandwidth and reports C at the numerically optimized tau_b. Points
    run concurrently under the BIPHOTON_PMD_THREADS cap.
    """
    if pump_shape.cw:
        raise ConfigError("pump-bandwidth sweeps need a pulsed pump shape")
    bps = [float(b) for b in bp_grid]
    if not bps:
        raise ConfigError("sweep grid must not be empty")
    if any(b <= a for a, b in zip(bps, bps[1:])):
        raise ConfigError("sweep grid must be strictly increasing")
    if any(b <= 0.0 for b in bps):
        raise ConfigError("pump bandwidths must be positive")

    base = pump_shape.profile
    if base.kind not in (GAUSSIAN, SUPER_GAUSSIAN):
        raise ConfigError("pump-bandwidth sweeps need a rescalable (parametric) pump shape")

    def _point(item: tuple[int, float]) -> float:
        index, b_p = item
        try:
            if base.kind == GAUSSIAN:
                pump = PumpSpec(SpectralProfile.gaussian(b_p, base.center))
            else:
                pump = PumpSpec(SpectralProfile.super_gaussian(base.order, b_p, base.center))
            jsa = build_jsa(pump, filter_a, filter_b, tau_max=2.0 * abs(tau_a))
            result = optimize_compensator(jsa, tau_a, tol=tol)
            if validate:
                scenario = PmdScenario(tau_a, result.tau_b_opt)
                _cross_validate(jsa, scenario, result.c_opt,
                                _gaussian_bandwidths(pump, filter_a, filter_b))
            return result.c_opt
        except NumericsError as exc:
            raise NumericsError(f"sweep failed at point {index} (B_p={b_p!r}): {exc}") from exc

    values = _map_in_order(_point, list(enumerate(bps)))
    metadata = {
        "axis": "bp", "x": "B_p", "tau_a": format_float(tau_a),
        "pump_shape": "gaussian" if base.kind == GAUSSIAN else f"supergauss:n={base.order}",
        "filter_a": filter_a.describe(), "filter_b": filter_b.describe(),
    }
    return SweepCurve("bp", tuple(bps), tuple(values), metadata)


def curve_to_csv(curve: SweepCurve) -> str:
    """Serialize with '#' metadata lines, x,concurrence rows, LF endings."""
    lines = [f"# {key}={value}" for key, value in curve.metadata.items()]
    lines.append("x,concurrence")
    for x, c in zip(curve.x, curve.concurrence):
        lines.append(f"{format_float(x)},{format_float(c)}")
    return "\n".join(lines) + "\n"

"""Joint spectral amplitude of a filtered photon pair and its temporal image.

The two-photon field produced by a pulsed pump behind one filter per arm is

    f(w_a, w_b) = conj(H_a(w_a)) * conj(H_b(w_b)) * E_p(w_a + w_b)

with phase matching taken as exactly flat over the filter passbands.
The temporal amplitude uses the fixed Fourier convention

    g(t_a, t_b) = (1/2pi)^2 integral f(w_a, w_b) exp(-i w_a t_a - i w_b t_b)

so downstream phases depend on this sign choice; it is part of the contract.

Discretization is a uniform tensor grid, half-open per axis (the span is the
FFT period). Grid quadrature uses the plain rectangle rule: with the boundary
coverage requirement below it coincides with the trapezoid rule to within the
1e-8 edge leakage, and it keeps the normalization identity exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft as sfft

from .errors import ConfigError, GridCoverageError, NumericsError, ResolutionCapError
from .profiles import TABULATED, PumpSpec, SpectralProfile, intensity_centroid, rms_bandwidth
from .units import format_float

TWO_PI = 2.0 * math.pi

#: |f|^2 on the grid edge must stay below this fraction of the global max.
BOUNDARY_LEAK_MAX = 1e-8
#: |g| is considered supported where it exceeds this fraction of its peak.
TEMPORAL_SUPPORT_LEVEL = 1e-4
#: per-axis sample cap for auto grids
N_CAP = 2 ** 14

_EVAL_BLOCK_ROWS = 256


@dataclass(frozen=True)
class GridSpec:
    """Uniform 2-D frequency grid, half-open along each axis.

    Samples sit at omega_min + k*domega for k = 0..n-1 with
    domega = (omega_max - omega_min)/n, so omega_max is the period endpoint
    and the conjugate time step is exactly 2*pi/span.
    """

    n_a: int
    n_b: int
    omega_a_min: float
    omega_a_max: float
    omega_b_min: float
    omega_b_max: float

    def __post_init__(self):
        for n in (self.n_a, self.n_b):
            if n < 64 or n & (n - 1):
                raise ConfigError("grid sizes must be powers of two >= 64")
        if self.omega_a_max <= self.omega_a_min or self.omega_b_max <= self.omega_b_min:
            raise ConfigError("grid spans must be non-empty")

    @property
    def span_a(self) -> float:
        return self.omega_a_max - self.omega_a_min

    @property
    def span_b(self) -> float:
        return self.omega_b_max - self.omega_b_min

    @property
    def domega_a(self) -> float:
        return self.span_a / self.n_a

    @property
    def domega_b(self) -> float:
        return self.span_b / self.n_b

    @property
    def omega_a(self) -> np.ndarray:
        return self.omega_a_min + self.domega_a * np.arange(self.n_a)

    @property
    def omega_b(self) -> np.ndarray:
        return self.omega_b_min + self.domega_b * np.arange(self.n_b)

    @property
    def dt_a(self) -> float:
        return TWO_PI / self.span_a

    @property
    def dt_b(self) -> float:
        return TWO_PI / self.span_b

    @property
    def time_window_a(self) -> float:
        return self.n_a * self.dt_a

    @property
    def time_window_b(self) -> float:
        return self.n_b * self.dt_b

    @property
    def t_a(self) -> np.ndarray:
        return (np.arange(self.n_a) - self.n_a // 2) * self.dt_a

    @property
    def t_b(self) -> np.ndarray:
        return (np.arange(self.n_b) - self.n_b // 2) * self.dt_b


@dataclass(frozen=True, eq=False)
class BiphotonAmplitude:
    """Discretized joint spectral amplitude with its grid and provenance."""

    grid: GridSpec
    samples: np.ndarray = field(repr=False)     # complex, shape (n_a, n_b)
    normalized: bool
    pump_descriptor: str = ""
    filter_a_descriptor: str = ""
    filter_b_descriptor: str = ""

    def __post_init__(self):
        if self.samples.shape != (self.grid.n_a, self.grid.n_b):
            raise ConfigError("sample array does not match the grid")
        self.samples.setflags(write=False)

    @property
    def quadrature_scale(self) -> float:
        """Weight of one grid cell in the (1/2pi)^2 d2omega measure."""
        return self.grid.domega_a * self.grid.domega_b / TWO_PI ** 2

    def spectral_norm_squared(self) -> float:
        acc = 0.0
        for i0 in range(0, self.grid.n_a, _EVAL_BLOCK_ROWS):
            block = self.samples[i0:i0 + _EVAL_BLOCK_ROWS]
            acc += float(np.sum(block.real ** 2 + block.imag ** 2))
        return acc * self.quadrature_scale

    def jsi(self) -> np.ndarray:
        """Joint spectral intensity |f|^2 (new array)."""
        return self.samples.real ** 2 + self.samples.imag ** 2


def _eval_samples(pump: PumpSpec, filter_a: SpectralProfile,
                  filter_b: SpectralProfile, grid: GridSpec) -> np.ndarray:
    wa = grid.omega_a
    wb = grid.omega_b
    ha = np.conj(filter_a(wa))
    hb = np.conj(filter_b(wb))
    out = np.empty((grid.n_a, grid.n_b), dtype=np.complex128)
    # row blocks keep the E_p(w_a + w_b) temporary bounded on large grids
    for i0 in range(0, grid.n_a, _EVAL_BLOCK_ROWS):
        i1 = min(i0 + _EVAL_BLOCK_ROWS, grid.n_a)
        total = wa[i0:i1, None] + wb[None, :]
        out[i0:i1] = (ha[i0:i1, None] * hb[None, :]) * pump.profile(total)
    return out


def _boundary_leak(samples: np.ndarray) -> float:
    """max |f|^2 on the grid edge divided by the global max."""
    peak_sq = 0.0
    for i0 in range(0, samples.shape[0], _EVAL_BLOCK_ROWS):
        block = samples[i0:i0 + _EVAL_BLOCK_ROWS]
        peak_sq = max(peak_sq, float(np.max(block.real ** 2 + block.imag ** 2)))
    if peak_sq == 0.0:
        return math.inf
    edges = [samples[0, :], samples[-1, :], samples[:, 0], samples[:, -1]]
    edge_sq = max(float(np.max(np.abs(e) ** 2)) for e in edges)
    return edge_sq / peak_sq


def auto_grid(pump: PumpSpec, filter_a: SpectralProfile, filter_b: SpectralProfile,
              tau_max: float = 0.0) -> GridSpec:
    """Choose a grid that holds the spectrum and the delayed waveforms.

    Spans cover +-max(8 B_filter, 8 B_pump) around each filter center; the
    sample spacing satisfies domega <= pi / (4 (T_support + tau_max)) where
    T_support is the temporal half-extent at which the waveform amplitude has
    dropped to 1e-4 of its peak (estimated from the 1-D impulse responses of
    the filters plus the pump envelope, whose convolution bounds g).
    """
    if pump.cw:
        raise ConfigError("auto_grid needs a pulsed pump; CW uses the 1-D engine")
    if tau_max < 0.0:
        raise ConfigError("tau_max must be >= 0")

    b_p = rms_bandwidth(pump.profile)
    b_a = rms_bandwidth(filter_a)
    b_b = rms_bandwidth(filter_b)
    c_a = intensity_centroid(filter_a)
    c_b = intensity_centroid(filter_b)

    half_a = max(8.0 * b_a, 8.0 * b_p)
    half_b = max(8.0 * b_b, 8.0 * b_p)

    t_pump = _impulse_support(pump.profile)
    support_a = _impulse_support(filter_a) + t_pump
    support_b = _impulse_support(filter_b) + t_pump

    def _axis_n(half_span: float, support: float) -> int:
        domega_max = math.pi / (4.0 * (support + tau_max))
        n = max(64, _next_pow2(int(math.ceil(2.0 * half_span / domega_max))))
        if n > N_CAP:
            raise ResolutionCapError(
                f"grid needs {n} samples per axis (cap {N_CAP}); "
                "narrow-pump or long-delay scenarios need an explicit grid"
            )
        return n

    grid = GridSpec(
        n_a=_axis_n(half_a, support_a),
        n_b=_axis_n(half_b, support_b),
        omega_a_min=c_a - half_a, omega_a_max=c_a + half_a,
        omega_b_min=c_b - half_b, omega_b_max=c_b + half_b,
    )

    # widen until the spectrum is contained (tabulated/offset corner cases)
    for _ in range(8):
        if _probe_leak(pump, filter_a, filter_b, grid) <= BOUNDARY_LEAK_MAX:
            return grid
        grid = _widen(grid)
        if max(grid.n_a, grid.n_b) > N_CAP:
            raise ResolutionCapError("boundary coverage not reachable under the sample cap")
    raise GridCoverageError("could not contain the spectrum while widening the grid")


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1)).bit_length()


def _widen(grid: GridSpec) -> GridSpec:
    def _stretch(lo, hi):
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return c - 1.5 * h, c + 1.5 * h
    a_lo, a_hi = _stretch(grid.omega_a_min, grid.omega_a_max)
    b_lo, b_hi = _stretch(grid.omega_b_min, grid.omega_b_max)
    return GridSpec(n_a=_next_pow2(grid.n_a * 2), n_b=_next_pow2(grid.n_b * 2),
                    omega_a_min=a_lo, omega_a_max=a_hi,
                    omega_b_min=b_lo, omega_b_max=b_hi)


def _probe_leak(pump, filter_a, filter_b, grid: GridSpec, n_probe: int = 64) -> float:
    """Boundary leak estimated on edge lines plus a coarse interior grid."""
    wa = grid.omega_a
    wb = grid.omega_b
    ca = np.conj(filter_a(wa))
    cb = np.conj(filter_b(wb))

    def _line(w_fixed_a=None, w_fixed_b=None):
        if w_fixed_a is not None:
            return np.abs(np.conj(filter_a(np.array([w_fixed_a]))) * cb
                          * pump.profile(w_fixed_a + wb)) ** 2
        return np.abs(ca * np.conj(filter_b(np.array([w_fixed_b])))
                      * pump.profile(wa + w_fixed_b)) ** 2

    edge = max(float(np.max(_line(w_fixed_a=wa[0]))),
               float(np.max(_line(w_fixed_a=wa[-1]))),
               float(np.max(_line(w_fixed_b=wb[0]))),
               float(np.max(_line(w_fixed_b=wb[-1]))))
    sa = wa[:: max(1, grid.n_a // n_probe)]
    sb = wb[:: max(1, grid.n_b // n_probe)]
    coarse = np.abs(np.conj(filter_a(sa))[:, None] * np.conj(filter_b(sb))[None, :]
                    * pump.profile(sa[:, None] + sb[None, :])) ** 2
    peak = float(np.max(coarse))
    if peak == 0.0:
        return math.inf
    return edge / peak


def _impulse_support(profile: SpectralProfile, n: int = 32768) -> float:
    """Half-extent of |impulse response| above TEMPORAL_SUPPORT_LEVEL of peak.

    The wide spectral window (40 sigma) keeps the conjugate time step small
    against the measured support, so the crossing is located to a few percent.
    """
    if profile.kind == TABULATED:
        center = intensity_centroid(profile)
        half = 0.5 * float(profile.table_omega[-1] - profile.table_omega[0]) \
            + 8.0 * rms_bandwidth(profile)
    else:
        center = profile.center
        half = 40.0 * profile.sigma
    domega = 2.0 * half / n
    w = center - half + domega * np.arange(n)
    h = sfft.ifft(np.asarray(profile(w), dtype=complex))
    mag = np.abs(h)
    mag /= mag.max()
    dt = TWO_PI / (2.0 * half)
    # ifft index k maps to time k*dt (periodic); fold to [-T/2, T/2)
    t = np.arange(n) * dt
    t[t >= 0.5 * n * dt] -= n * dt
    supported = np.abs(t[mag >= TEMPORAL_SUPPORT_LEVEL])
    return float(supported.max()) if supported.size else dt


def build_jsa(pump: PumpSpec, filter_a: SpectralProfile, filter_b: SpectralProfile,
              grid: Optional[GridSpec] = None, tau_max: float = 0.0,
              auto_regrid: bool = True) -> BiphotonAmplitude:
    """Sample, check and normalize the joint spectral amplitude.

    With ``grid=None`` the grid comes from :func:`auto_grid`. After sampling,
    the boundary-coverage requirement is enforced; failures either widen the
    grid (``auto_regrid=True``) or raise :class:`GridCoverageError`. The
    returned amplitude satisfies sum |f|^2 domega_a domega_b / (2pi)^2 = 1.
    """
    if pump.cw:
        raise ConfigError("build_jsa needs a pulsed pump; CW uses the 1-D engine")
    if grid is None:
        grid = auto_grid(pump, filter_a, filter_b, tau_max=tau_max)

    for _ in range(8):
        samples = _eval_samples(pump, filter_a, filter_b, grid)
        leak = _boundary_leak(samples)
        if leak <= BOUNDARY_LEAK_MAX:
            break
        if not auto_regrid:
            raise GridCoverageError(
                f"boundary leak {leak:.3e} exceeds {BOUNDARY_LEAK_MAX:.0e}; "
                "grid rejected (auto-regridding disabled)"
            )
        del samples
        grid = _widen(grid)
        if max(grid.n_a, grid.n_b) > N_CAP:
            raise ResolutionCapError("boundary coverage not reachable under the sample cap")
    else:
        raise GridCoverageError("could not contain the spectrum while widening the grid")

    norm_sq = 0.0
    for i0 in range(0, grid.n_a, _EVAL_BLOCK_ROWS):
        block = samples[i0:i0 + _EVAL_BLOCK_ROWS]
        norm_sq += float(np.sum(block.real ** 2 + block.imag ** 2))
    norm_sq *= grid.domega_a * grid.domega_b / TWO_PI ** 2
    if norm_sq <= 0.0 or not math.isfinite(norm_sq):
        raise NumericsError("joint spectral amplitude has zero norm on the grid")
    samples *= 1.0 / math.sqrt(norm_sq)

    return BiphotonAmplitude(
        grid=grid, samples=samples, normalized=True,
        pump_descriptor=pump.describe(),
        filter_a_descriptor=filter_a.describe(),
        filter_b_descriptor=filter_b.describe(),
    )


def inverse_transform_2d(samples: np.ndarray, grid: GridSpec,
                         tau_a: float = 0.0, tau_b: float = 0.0) -> np.ndarray:
    """Temporal field on the grid's centered time axes.

    Evaluates (1/2pi)^2 sum f(w) exp(-i w . t) domega^2 for t on
    (grid.t_a, grid.t_b); optional tau arguments multiply the spectrum by the
    exact delay ramp exp(-i (w_a tau_a + w_b tau_b)) first, which shifts the
    waveform by (tau_a, tau_b) without any temporal interpolation.
    """
    wa = grid.omega_a
    wb = grid.omega_b
    t_a = grid.t_a
    t_b = grid.t_b
    in_a = np.exp(-1j * (wa - wa[0]) * t_a[0] - 1j * wa * tau_a)
    in_b = np.exp(-1j * (wb - wb[0]) * t_b[0] - 1j * wb * tau_b)
    work = samples * in_a[:, None]
    work *= in_b[None, :]
    g = sfft.fft2(work)
    del work
    out_a = np.exp(-1j * wa[0] * t_a) * (grid.domega_a / TWO_PI)
    out_b = np.exp(-1j * wb[0] * t_b) * (grid.domega_b / TWO_PI)
    g *= out_a[:, None]
    g *= out_b[None, :]
    return g


def temporal_amplitude(jsa: BiphotonAmplitude) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Time grids and g(t_a, t_b) for a normalized amplitude."""
    if not jsa.normalized:
        raise NumericsError("temporal_amplitude needs a normalized amplitude")
    g = inverse_transform_2d(jsa.samples, jsa.grid)
    return jsa.grid.t_a, jsa.grid.t_b, g


def grid_to_csv(axis1: np.ndarray, axis2: np.ndarray, values: np.ndarray,
                header: str) -> str:
    """CSV dump (axis1, axis2, value) with LF endings for inspection plots."""
    lines = [f"# {header}", "axis1,axis2,value"]
    for i, x1 in enumerate(axis1):
        row = values[i]
        for j, x2 in enumerate(axis2):
            lines.append(f"{format_float(x1)},{format_float(x2)},{format_float(row[j])}")
    return "\n".join(lines) + "\n"

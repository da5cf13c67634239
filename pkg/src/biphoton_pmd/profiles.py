"""Pump and filter spectral profiles.

A profile is a complex field amplitude H(omega) with a calibrated rms
bandwidth B, defined as the rms width of the intensity |H(omega)|^2.
Parametric shapes are peak-normalized (|H| = 1 at the center frequency).

Shapes
------
gaussian        |H(w)|^2 = exp(-(w - c)^2 / (2 sigma^2)), sigma = B
supergauss(n)   |H(w)|^2 = exp(-((w - c)^2 / (2 sigma^2))^n), sigma calibrated
                so that the intensity rms width equals B; n = 1 recovers the
                Gaussian. n = 3 models flat-top telecom mux filters. The rms
                calibration is a convention of this library; measured filter
                specs often quote other width conventions, so convert first.
table           linear interpolation between samples, zero outside the table.

Profiles are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import gamma as _gamma

from .errors import ConfigError, NonNormalizableProfileError
from .units import parse_frequency

GAUSSIAN = "gaussian"
SUPER_GAUSSIAN = "supergauss"
TABULATED = "table"


def supergaussian_rms(sigma: float, order: int) -> float:
    """Exact intensity rms width of exp(-((w/sigma)^2/2)^n).

    Moment integrals of the super-Gaussian reduce to Gamma functions:
    rms^2 = 2 sigma^2 * Gamma(3/(2n)) / Gamma(1/(2n)).
    """
    if order < 1:
        raise ConfigError("super-Gaussian order must be >= 1")
    return sigma * math.sqrt(2.0 * _gamma(3.0 / (2 * order)) / _gamma(1.0 / (2 * order)))


def calibrate_supergaussian(b_target: float, order: int) -> float:
    """Width parameter sigma such that the intensity rms width equals b_target."""
    if b_target <= 0.0:
        raise ConfigError("bandwidth must be positive")
    return b_target / supergaussian_rms(1.0, order)


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Complex spectral amplitude with center offset and calibrated bandwidth.

    Use the ``gaussian``, ``super_gaussian`` and ``tabulated`` constructors;
    the raw constructor does not calibrate ``sigma``.
    """

    kind: str
    center: float = 0.0
    bandwidth: float = 0.0          # intensity rms width, rad/s (parametric)
    order: int = 1                  # super-Gaussian exponent n
    sigma: float = 0.0              # internal width parameter, rad/s
    table_omega: Optional[np.ndarray] = field(default=None, repr=False)
    table_amplitude: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def gaussian(cls, bandwidth: float, center: float = 0.0) -> "SpectralProfile":
        if bandwidth <= 0.0:
            raise ConfigError("bandwidth must be positive")
        return cls(kind=GAUSSIAN, center=center, bandwidth=bandwidth, order=1,
                   sigma=bandwidth)

    @classmethod
    def super_gaussian(cls, order: int, bandwidth: float,
                       center: float = 0.0) -> "SpectralProfile":
        sigma = calibrate_supergaussian(bandwidth, order)
        return cls(kind=SUPER_GAUSSIAN, center=center, bandwidth=bandwidth,
                   order=int(order), sigma=sigma)

    @classmethod
    def tabulated(cls, omega: np.ndarray, amplitude: np.ndarray) -> "SpectralProfile":
        omega = np.asarray(omega, dtype=float)
        amplitude = np.asarray(amplitude, dtype=complex)
        if omega.ndim != 1 or omega.shape != amplitude.shape or omega.size < 2:
            raise ConfigError("tabulated profile needs matching 1-D omega/amplitude arrays")
        if np.any(np.diff(omega) <= 0):
            raise ConfigError("tabulated omega values must be strictly increasing")
        omega.setflags(write=False)
        amplitude.setflags(write=False)
        return cls(kind=TABULATED, table_omega=omega, table_amplitude=amplitude)

    def __call__(self, omega: np.ndarray | float) -> np.ndarray | complex:
        """Field amplitude at omega (rad/s); not the intensity."""
        w = np.asarray(omega, dtype=float)
        if self.kind == GAUSSIAN:
            out = np.exp(-((w - self.center) ** 2) / (4.0 * self.sigma ** 2)) + 0j
        elif self.kind == SUPER_GAUSSIAN:
            x = ((w - self.center) ** 2) / (2.0 * self.sigma ** 2)
            out = np.exp(-0.5 * x ** self.order) + 0j
        elif self.kind == TABULATED:
            re = np.interp(w, self.table_omega, self.table_amplitude.real,
                           left=0.0, right=0.0)
            im = np.interp(w, self.table_omega, self.table_amplitude.imag,
                           left=0.0, right=0.0)
            out = re + 1j * im
        else:
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if np.isscalar(omega):
            return complex(out)
        return out

    def intensity(self, omega: np.ndarray | float) -> np.ndarray | float:
        v = self(omega)
        return (v * np.conj(v)).real if isinstance(v, np.ndarray) else abs(v) ** 2

    def describe(self) -> str:
        if self.kind == GAUSSIAN:
            return f"gaussian:B={self.bandwidth!r},offset={self.center!r}"
        if self.kind == SUPER_GAUSSIAN:
            return f"supergauss:n={self.order},B={self.bandwidth!r},offset={self.center!r}"
        return f"table:{self.table_omega.size}pts"


def eval_spectrum(profile: SpectralProfile, omega: np.ndarray | float):
    """Functional form of ``profile(omega)``."""
    return profile(omega)


def _moments_quad(profile: SpectralProfile) -> tuple[float, float, float]:
    # Adaptive quadrature of the intensity moments over the decaying support.
    half = 12.0 * max(profile.sigma, 1e-300)
    lo, hi = profile.center - half, profile.center + half
    kw = dict(limit=400, epsabs=0.0, epsrel=1e-11)
    i0 = integrate.quad(lambda w: profile.intensity(float(w)), lo, hi, **kw)[0]
    i1 = integrate.quad(lambda w: w * profile.intensity(float(w)), lo, hi, **kw)[0]
    if i0 <= 0.0 or not math.isfinite(i0):
        raise NonNormalizableProfileError("non-normalizable profile")
    mean = i1 / i0
    i2 = integrate.quad(lambda w: (w - mean) ** 2 * profile.intensity(float(w)),
                        lo, hi, **kw)[0]
    return i0, mean, i2


def _moments_table(profile: SpectralProfile) -> tuple[float, float, float]:
    w = profile.table_omega
    p = np.abs(profile.table_amplitude) ** 2
    i0 = float(np.trapezoid(p, w))
    if i0 <= 0.0 or not math.isfinite(i0):
        raise NonNormalizableProfileError("non-normalizable profile")
    mean = float(np.trapezoid(w * p, w)) / i0
    i2 = float(np.trapezoid((w - mean) ** 2 * p, w))
    return i0, mean, i2


def rms_bandwidth(profile: SpectralProfile) -> float:
    """Rms width of the intensity, computed numerically.

    For calibrated parametric shapes this reproduces ``profile.bandwidth``
    (cross-check of the Gamma-function calibration against quadrature);
    for tables it is the trapezoid moment of the sampled intensity.
    """
    if profile.kind == TABULATED:
        i0, _, i2 = _moments_table(profile)
    else:
        i0, _, i2 = _moments_quad(profile)
    value = math.sqrt(i2 / i0)
    if not math.isfinite(value) or value <= 0.0:
        raise NonNormalizableProfileError("non-normalizable profile")
    return value


def intensity_centroid(profile: SpectralProfile) -> float:
    if profile.kind == TABULATED:
        return _moments_table(profile)[1]
    return profile.center


@dataclass(frozen=True)
class PumpSpec:
    """Pump descriptor: a spectral profile centered at zero, or CW.

    With ``cw=True`` the profile (and its bandwidth) is ignored and all
    concurrence computations go through the stationary 1-D engine.
    """

    profile: Optional[SpectralProfile] = None
    cw: bool = False

    def __post_init__(self):
        if not self.cw and self.profile is None:
            raise ConfigError("pulsed pump needs a spectral profile")

    def describe(self) -> str:
        return "cw" if self.cw else self.profile.describe()


def load_profile_table(path: str) -> SpectralProfile:
    """Read a CSV with columns omega_rad_s, re, im into a tabulated profile."""
    omegas, res, ims = [], [], []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            for row in reader:
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if row[0].strip().lower() in ("omega_rad_s", "omega"):
                    continue  # header
                omegas.append(float(row[0]))
                res.append(float(row[1]))
                ims.append(float(row[2]) if len(row) > 2 else 0.0)
    except OSError as exc:
        raise ConfigError(f"cannot read profile table {path!r}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"malformed profile table {path!r}: {exc}") from exc
    if len(omegas) < 2:
        raise ConfigError(f"profile table {path!r} needs at least two samples")
    return SpectralProfile.tabulated(np.array(omegas), np.array(res) + 1j * np.array(ims))


def parse_profile_spec(text: str, normalized: bool = False) -> SpectralProfile:
    """Parse the profile mini-grammar used by the CLI and config files.

    Forms: ``gaussian:B=<val><unit>[,offset=<val><unit>]``,
    ``supergauss:n=<int>,B=...[,offset=...]``, ``table:<path.csv>``.
    """
    text = text.strip()
    if ":" not in text:
        raise ConfigError(f"malformed profile spec {text!r}")
    head, _, rest = text.partition(":")
    head = head.strip().lower()
    if head == TABULATED:
        return load_profile_table(rest.strip())
    fields = {}
    for item in rest.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigError(f"malformed field {item!r} in profile spec {text!r}")
        key, _, value = item.partition("=")
        fields[key.strip().lower()] = value.strip()
    if "b" not in fields:
        raise ConfigError(f"profile spec {text!r} is missing B=<bandwidth>")
    bandwidth = parse_frequency(fields.pop("b"), normalized)
    center = parse_frequency(fields.pop("offset"), normalized) if "offset" in fields else 0.0
    if head == GAUSSIAN:
        extra = set(fields)
        if extra:
            raise ConfigError(f"unknown fields {sorted(extra)} in profile spec {text!r}")
        return SpectralProfile.gaussian(bandwidth, center)
    if head == SUPER_GAUSSIAN:
        try:
            order = int(fields.pop("n"))
        except KeyError:
            raise ConfigError(f"supergauss spec {text!r} is missing n=<order>") from None
        except ValueError:
            raise ConfigError(f"super-Gaussian order must be an integer in {text!r}") from None
        if fields:
            raise ConfigError(f"unknown fields {sorted(fields)} in profile spec {text!r}")
        if order < 1:
            raise ConfigError("super-Gaussian order must be >= 1")
        return SpectralProfile.super_gaussian(order, bandwidth, center)
    raise ConfigError(f"unknown profile shape {head!r}")


def parse_pump_spec(text: str, normalized: bool = False) -> PumpSpec:
    """Pump grammar: either ``cw`` or a profile spec (centered at zero)."""
    if text.strip().lower() == "cw":
        return PumpSpec(profile=None, cw=True)
    profile = parse_profile_spec(text, normalized)
    if profile.kind != TABULATED and profile.center != 0.0:
        raise ConfigError("pump profile must be centered at zero offset")
    return PumpSpec(profile=profile, cw=False)

"""Physical configuration layer: spectral densities, reservoirs, system
parameters, drive protocols, and the elementary thermal/response kernels.

Unit convention: hbar = k_B = M = 1, so energies and temperatures are
frequencies and spectral densities carry dimensions of frequency^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError, SymbolicKindError

__all__ = [
    "SpectralDensity", "PowerLaw", "DiracMode", "Lorentzian", "Tabulated",
    "ReservoirSpec", "SystemParams", "DrivePlan",
    "planck_occupation", "eval_spectral_density", "dissipation_kernel_laplace",
]

# Default hard cutoff multiplier for power-law densities, in units of the
# largest characteristic frequency of the problem.
DEFAULT_CUTOFF_FACTOR = 50.0


class SpectralDensity:
    """Coupling profile I(omega) between the central oscillator and a bath.

    Subclasses implement ``_evaluate`` on omega >= 0.  ``DiracMode`` is
    symbolic and never evaluates pointwise; integrals against it collapse
    analytically in the integral assemblers.
    """

    kind = "abstract"
    is_dirac = False

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega < 0):
            raise DomainError("spectral density evaluated at omega < 0")
        out = self._evaluate(omega)
        return float(out) if np.isscalar(omega) or omega.ndim == 0 else out

    def _evaluate(self, omega):
        raise NotImplementedError

    @property
    def cutoff(self):
        """Frequency above which the density is zero or negligible."""
        raise NotImplementedError

    @property
    def origin_exponent(self):
        """Leading power of I(omega) as omega -> 0 (for endpoint handling)."""
        return 1.0


@dataclass
class PowerLaw(SpectralDensity):
    """I(omega) = prefactor * (omega/omega_ref)**exponent on [0, hard_cutoff]."""

    prefactor: float
    exponent: float
    omega_ref: float = 1.0
    hard_cutoff: float = 50.0

    kind = "PowerLaw"

    def __post_init__(self):
        if self.prefactor < 0:
            raise ConfigError("power-law prefactor must be >= 0")
        if self.exponent <= -1:
            raise ConfigError("power-law exponent <= -1 is non-integrable at the origin")
        if self.omega_ref <= 0 or self.hard_cutoff <= 0:
            raise ConfigError("omega_ref and hard_cutoff must be positive")

    @classmethod
    def ohmic(cls, damping, omega_ref=1.0, hard_cutoff=50.0):
        """Strictly ohmic density normalized so the flat dissipation kernel
        equals ``damping``: I(omega) = (2*damping/pi) * omega."""
        return cls(prefactor=2.0 * damping * omega_ref / math.pi,
                   exponent=1.0, omega_ref=omega_ref, hard_cutoff=hard_cutoff)

    def _evaluate(self, omega):
        with np.errstate(divide="ignore"):
            vals = self.prefactor * (omega / self.omega_ref) ** self.exponent
        return np.where(omega <= self.hard_cutoff, vals, 0.0)

    @property
    def cutoff(self):
        return self.hard_cutoff

    @property
    def origin_exponent(self):
        return self.exponent


@dataclass
class DiracMode(SpectralDensity):
    """Single-mode reservoir I(omega) = weight * delta(omega - mode_frequency).

    Carried symbolically: pointwise evaluation is a contract violation and
    raises; integrals against it must collapse analytically.
    """

    weight: float
    mode_frequency: float

    kind = "DiracMode"
    is_dirac = True

    def __post_init__(self):
        if self.weight < 0:
            raise ConfigError("Dirac mode weight must be >= 0")
        if self.mode_frequency <= 0:
            raise ConfigError("Dirac mode frequency must be positive")

    def _evaluate(self, omega):
        raise SymbolicKindError(
            "DiracMode density cannot be evaluated pointwise; "
            "integrals against it collapse analytically")

    def __call__(self, omega):
        self._evaluate(omega)

    @property
    def cutoff(self):
        return self.mode_frequency

    def smoothed(self, width):
        """Lorentzian replacement of the delta with full width ``width``."""
        return Lorentzian(weight=self.weight, center=self.mode_frequency,
                          width=width)


@dataclass
class Lorentzian(SpectralDensity):
    """I(omega) = weight * (width/2pi) / ((omega-center)^2 + (width/2)^2)."""

    weight: float
    center: float
    width: float

    kind = "Lorentzian"

    def __post_init__(self):
        if self.weight < 0:
            raise ConfigError("Lorentzian weight must be >= 0")
        if self.center <= 0 or self.width <= 0:
            raise ConfigError("Lorentzian center and width must be positive")

    def _evaluate(self, omega):
        half = 0.5 * self.width
        return self.weight * (half / math.pi) / ((omega - self.center) ** 2 + half ** 2)

    @property
    def cutoff(self):
        # tails fall off as 1/omega^2; beyond this the density is negligible
        return self.center + 1e4 * self.width


@dataclass
class Tabulated(SpectralDensity):
    """Linear interpolation through sorted (omega, I) samples, zero outside."""

    frequencies: np.ndarray
    values: np.ndarray

    kind = "Tabulated"

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.frequencies.ndim != 1 or self.frequencies.shape != self.values.shape:
            raise ConfigError("tabulated density needs matching 1-d arrays")
        if np.any(np.diff(self.frequencies) <= 0):
            raise ConfigError("tabulated frequencies must be strictly increasing")
        if np.any(self.frequencies < 0):
            raise ConfigError("tabulated frequencies must be >= 0")
        if np.any(self.values < 0):
            raise ConfigError("tabulated density values must be >= 0")

    def _evaluate(self, omega):
        return np.interp(omega, self.frequencies, self.values, left=0.0, right=0.0)

    @property
    def cutoff(self):
        return float(self.frequencies[-1])


@dataclass
class ReservoirSpec:
    """A labelled bath: coupling profile plus preparation temperature."""

    label: str
    density: SpectralDensity
    temperature: float = 0.0

    def __post_init__(self):
        if self.label not in ("A", "B"):
            raise ConfigError("reservoir label must be 'A' or 'B'")
        if self.temperature < 0:
            raise ConfigError("reservoir temperature must be >= 0")

    def occupation(self, omega):
        return planck_occupation(omega, self.temperature)


@dataclass
class SystemParams:
    """Renormalized frequency and decay rate of the driven oscillator (M = 1)."""

    omega0: float
    gamma: float

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ConfigError("omega0 must be positive")
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")

    @property
    def underdamped(self):
        return self.gamma < self.omega0

    @property
    def v_renormalized(self):
        # static stiffness consistent with g(i w) = 1/(omega0^2 - (w - i gamma)^2)
        return self.omega0 ** 2 + self.gamma ** 2


PERTURBATIVE_RATIO = 0.05


@dataclass
class DrivePlan:
    """Periodic parametric drive V(t) = sum_k V_k exp(i k omega_d t).

    Components must satisfy V_{-k} = conj(V_k) so V(t) is real.
    """

    components: dict = field(default_factory=dict)
    omega_d: float = 1.0

    def __post_init__(self):
        if self.omega_d <= 0:
            raise ConfigError("drive frequency must be positive")
        if 0 not in self.components:
            raise ConfigError("drive needs a static component V_0")
        comps = {int(k): complex(v) for k, v in self.components.items()}
        for k, v in comps.items():
            conj = comps.get(-k)
            if conj is None or abs(conj - np.conj(v)) > 1e-12 * max(1.0, abs(v)):
                raise ConfigError(
                    f"drive components break Hermitian symmetry at k={k}")
        if abs(comps[0].imag) > 1e-12 * max(1.0, abs(comps[0])):
            raise ConfigError("static drive component V_0 must be real")
        self.components = comps

    @classmethod
    def harmonic(cls, v0, amplitude, omega_d):
        """V(t) = V0 + amplitude*(exp(i omega_d t) + exp(-i omega_d t))."""
        amplitude = complex(amplitude)
        comps = {0: complex(v0)}
        if amplitude != 0:
            comps[1] = amplitude
            comps[-1] = np.conj(amplitude)
        return cls(components=comps, omega_d=omega_d)

    @property
    def v0(self):
        return self.components[0].real

    @property
    def k_max(self):
        ks = [abs(k) for k, v in self.components.items() if k != 0 and v != 0]
        return max(ks) if ks else 0

    @property
    def is_harmonic(self):
        return all(abs(k) <= 1 for k in self.components)

    @property
    def amplitude(self):
        """Oscillating amplitude V for a harmonic drive."""
        return self.components.get(1, 0.0 + 0.0j)

    @property
    def is_perturbative(self):
        if self.v0 == 0:
            return False
        worst = max((abs(v) for k, v in self.components.items() if k != 0),
                    default=0.0)
        return worst / abs(self.v0) < PERTURBATIVE_RATIO

    def value(self, t):
        """Reconstructed V(t); imaginary part is a numerical-noise check."""
        t = np.asarray(t, dtype=float)
        total = sum(v * np.exp(1j * k * self.omega_d * t)
                    for k, v in self.components.items())
        return total


def planck_occupation(omega, temperature):
    """Bose occupation 1/(exp(omega/T) - 1); exactly 0 at T = 0.

    Stable both for omega/T >> 1 (underflows to 0, never NaN) and for
    omega/T << 1 (expm1 keeps full precision).
    """
    omega_arr = np.asarray(omega, dtype=float)
    scalar = omega_arr.ndim == 0
    if np.any(omega_arr <= 0):
        raise DomainError("Planck occupation requires omega > 0")
    if temperature < 0:
        raise DomainError("temperature must be >= 0")
    if temperature == 0:
        out = np.zeros_like(omega_arr)
        return float(out) if scalar else out
    x = omega_arr / temperature
    with np.errstate(over="ignore"):
        out = np.where(x > 700.0, 0.0, 1.0 / np.expm1(np.minimum(x, 700.0)))
    return float(out) if scalar else out


def eval_spectral_density(sd: SpectralDensity, omega):
    """Pointwise I(omega).  DiracMode raises a symbolic-kind error."""
    return sd(omega)


def dissipation_kernel_laplace(densities, omega, rel_tol=1e-10):
    """Boundary value gamma_hat(i omega) of the dissipation kernel transform.

    gamma_hat(s) = int_0^inf dw (I(w)/w) * s/(s^2 + w^2); on s = i omega + 0+
    the real part collapses to (pi/2) I(|omega|)/|omega| and the imaginary
    part is the principal-value integral.  For a strictly ohmic density
    built with ``PowerLaw.ohmic(g)`` the real part equals g across the band.
    """
    if np.iterable(densities) and not isinstance(densities, SpectralDensity):
        densities = list(densities)
    else:
        densities = [densities]
    omega = float(omega)
    if omega == 0.0:
        return 0.0 + 0.0j
    sign = 1.0 if omega > 0 else -1.0
    w = abs(omega)

    real = 0.0
    imag = 0.0
    for sd in densities:
        if sd.is_dirac:
            wm, wt = sd.mode_frequency, sd.weight
            if abs(w - wm) < 1e-12 * wm:
                raise DomainError("dissipation kernel pole at the Dirac mode frequency")
            imag += (wt / wm) * w / (wm ** 2 - w ** 2)
            continue
        real += 0.5 * math.pi * sd(w) / w
        imag += _pv_kernel_integral(sd, w, rel_tol)
    return real + 1j * sign * imag


def _pv_kernel_integral(sd, w, rel_tol):
    """omega * PV int_0^cut (I(x)/x) / (x^2 - omega^2) dx for a continuous density."""
    cut = sd.cutoff
    if cut <= 0:
        return 0.0

    def regular(x):
        return sd(x) / x / (x + w)

    if w >= cut:
        val, _ = integrate.quad(lambda x: sd(x) / x / (x ** 2 - w ** 2),
                                0.0, cut, epsrel=rel_tol, epsabs=0.0, limit=200)
        return w * val

    # pole strictly inside (0, cut): Cauchy-weight quadrature on a symmetric
    # window, plain quadrature elsewhere
    half = 0.5 * min(w, cut - w)
    a, b = w - half, w + half
    pv, _ = integrate.quad(regular, a, b, weight="cauchy", wvar=w,
                           epsrel=rel_tol, epsabs=0.0, limit=200)
    total = pv
    if a > 0:
        left, _ = integrate.quad(lambda x: sd(x) / x / (x ** 2 - w ** 2),
                                 0.0, a, epsrel=rel_tol, epsabs=0.0, limit=200)
        total += left
    if b < cut:
        right, _ = integrate.quad(lambda x: sd(x) / x / (x ** 2 - w ** 2),
                                  b, cut, epsrel=rel_tol, epsabs=0.0, limit=200)
        total += right
    return w * total

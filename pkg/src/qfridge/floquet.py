"""Static Green function and the coupled Floquet coefficients A_k(omega).

The driven Green function is expanded over harmonics of the drive,
G(t,t') = (1/2pi) sum_k int dw A_k(w) e^{iw(t-t')} e^{ik w_d t}, and the
coefficients satisfy the coupled linear system

    A_k(w) = delta_{k,0} g(iw) - sum_{j != 0} g(i(w + k w_d)) V_j A_{k-j}(w),

solved exactly by a dense truncated solve, or perturbatively for a weak
harmonic drive.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, TruncationError, UnsupportedDriveError
from .model import DrivePlan, SystemParams, PERTURBATIVE_RATIO

__all__ = [
    "GreenStatic", "FloquetSolution", "static_green", "solve_floquet",
    "perturbative_A1", "floquet_residual", "floquet_coefficients",
]

RESIDUAL_FLOOR = 1e-30
DEFAULT_RESIDUAL_TOL = 1e-10
DEFAULT_CONVERGENCE_TOL = 1e-8
MAX_TRUNCATION = 32


@dataclass
class GreenStatic:
    """Laplace transform of the static (undriven) damped-oscillator response.

    Convention: g(iw) = 1/(omega0^2 - (w - i gamma)^2), under which
    |g(iw)|^2 = 1/((w^2 - omega0^2 + gamma^2)^2 + 4 gamma^2 w^2) and the
    landmark cooling limits gamma^2/(4 w_m^2) and gamma/(2 w_m) come out.
    ``half_damping`` switches to the gamma/2 variant for sensitivity studies.
    """

    omega0: float
    gamma: float
    half_damping: bool = False

    @classmethod
    def from_system(cls, system: SystemParams, half_damping=False):
        return cls(system.omega0, system.gamma, half_damping)

    def __call__(self, omega):
        g = 0.5 * self.gamma if self.half_damping else self.gamma
        omega = np.asarray(omega, dtype=float)
        val = 1.0 / (self.omega0 ** 2 - (omega - 1j * g) ** 2)
        return complex(val) if omega.ndim == 0 else val


def static_green(gs: GreenStatic, omega):
    """g(i omega); entire in omega for gamma > 0, with g(-iw) = conj(g(iw))."""
    return gs(omega)


def _component_array(drive: DrivePlan, K):
    """V_{k-m} convolution matrix with the j = 0 term excluded."""
    size = 2 * K + 1
    vmat = np.zeros((size, size), dtype=complex)
    for kk, vv in drive.components.items():
        if kk == 0:
            continue
        for row in range(size):
            col = row - kk
            if 0 <= col < size:
                vmat[row, col] = vv
    return vmat


def _solve_fixed(green: GreenStatic, drive: DrivePlan, grid, K):
    """Direct dense solve of the truncated coupled system at every grid point."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    ks = np.arange(-K, K + 1)
    shifted = grid[:, None] + ks[None, :] * drive.omega_d   # (n, 2K+1)
    gk = green(shifted)
    vmat = _component_array(drive, K)
    mats = np.eye(2 * K + 1, dtype=complex)[None, :, :] + gk[:, :, None] * vmat[None, :, :]
    rhs = np.zeros((grid.size, 2 * K + 1), dtype=complex)
    rhs[:, K] = green(grid)
    try:
        coeffs = np.linalg.solve(mats, rhs[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"singular Floquet system: {exc}") from exc
    return grid, coeffs


def _residual(green, drive, grid, coeffs, K):
    """Max defect of the defining system restricted to |k| <= K, relative to
    the dominant coefficient at each frequency (backward-error style)."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    ks = np.arange(-K, K + 1)
    gk = green(grid[:, None] + ks[None, :] * drive.omega_d)
    vmat = _component_array(drive, K)
    rhs = -gk * (coeffs @ vmat.T)
    rhs[:, K] += green(grid)
    defect = np.abs(coeffs - rhs)
    # componentwise backward error: defect against the magnitudes of the
    # terms that combine to produce it
    scale = np.abs(coeffs) + np.abs(gk) * (np.abs(coeffs) @ np.abs(vmat).T)
    scale[:, K] += np.abs(green(grid))
    scale = np.maximum(scale, RESIDUAL_FLOOR)
    return float(np.max(defect / scale))


@dataclass
class FloquetSolution:
    """Table of A_k(omega) on a frequency grid, with truncation metadata."""

    system: SystemParams
    drive: DrivePlan
    grid: np.ndarray
    K: int
    coeffs: np.ndarray          # shape (len(grid), 2K+1), complex
    residual: float
    half_damping: bool = False

    @property
    def green(self):
        return GreenStatic.from_system(self.system, self.half_damping)

    def k_index(self, k):
        if abs(k) > self.K:
            raise IndexError(f"harmonic index {k} outside truncation K={self.K}")
        return k + self.K

    def coefficient(self, k):
        """A_k over the whole grid."""
        return self.coeffs[:, self.k_index(k)]

    def at_frequency(self, omega):
        """Coefficient row A_{-K..K}(omega); re-solves off-grid points."""
        omega = float(omega)
        hits = np.nonzero(np.isclose(self.grid, omega, rtol=1e-12, atol=0.0))[0]
        if hits.size:
            return self.coeffs[hits[0]]
        _, coeffs = _solve_fixed(self.green, self.drive, [omega], self.K)
        return coeffs[0]


def solve_floquet(system: SystemParams, drive: DrivePlan, grid, K=None,
                  residual_tol=DEFAULT_RESIDUAL_TOL,
                  convergence_tol=DEFAULT_CONVERGENCE_TOL,
                  half_damping=False) -> FloquetSolution:
    """Solve the truncated coupled system on ``grid``.

    With ``K=None`` the truncation starts at max(4, 2*k_max) and escalates by
    +2 until both the residual criterion and K-convergence (sup-norm change
    below ``convergence_tol`` of the solution scale) hold, capped at 32.
    """
    green = GreenStatic.from_system(system, half_damping)
    if K is not None:
        if K < max(1, drive.k_max):
            raise TruncationError(
                f"K={K} below the largest driven harmonic {drive.k_max}",
                suggested_k=max(4, 2 * drive.k_max))
        grid_arr, coeffs = _solve_fixed(green, drive, grid, K)
        res = _residual(green, drive, grid_arr, coeffs, K)
        if res > residual_tol:
            raise TruncationError(
                f"residual {res:.3e} above tolerance {residual_tol:.1e}",
                suggested_k=K + 2)
        return FloquetSolution(system, drive, grid_arr, K, coeffs, res,
                               half_damping)

    k_trial = max(4, 2 * drive.k_max)
    grid_arr, coeffs = _solve_fixed(green, drive, grid, k_trial)
    while True:
        if k_trial + 2 > MAX_TRUNCATION:
            raise TruncationError(
                f"no K-convergence up to the cap K={MAX_TRUNCATION}",
                suggested_k=MAX_TRUNCATION)
        _, bigger = _solve_fixed(green, drive, grid_arr, k_trial + 2)
        scale = np.max(np.abs(coeffs))
        diff = np.max(np.abs(bigger[:, 2:-2] - coeffs)) / max(scale, RESIDUAL_FLOOR)
        res = _residual(green, drive, grid_arr, coeffs, k_trial)
        if diff <= convergence_tol and res <= residual_tol:
            return FloquetSolution(system, drive, grid_arr, k_trial, coeffs,
                                   res, half_damping)
        k_trial += 2
        coeffs = bigger


def floquet_coefficients(system: SystemParams, drive: DrivePlan, omegas, K,
                         half_damping=False):
    """A_{-K..K} at arbitrary frequencies, shape (len(omegas), 2K+1)."""
    green = GreenStatic.from_system(system, half_damping)
    _, coeffs = _solve_fixed(green, drive, omegas, K)
    return coeffs


def perturbative_A1(system: SystemParams, drive: DrivePlan, omega,
                    half_damping=False):
    """Leading-order coefficients for a weak harmonic drive.

    Returns (A_{+1}, A_{-1}) with A_{+-1}(w) = -g(i(w +- w_d)) V g(iw).
    """
    if not drive.is_harmonic:
        raise UnsupportedDriveError("perturbative coefficients need a harmonic drive")
    if drive.v0 != 0 and not drive.is_perturbative:
        worst = abs(drive.amplitude) / abs(drive.v0)
        warnings.warn(
            f"drive ratio |V|/V0 = {worst:.3g} exceeds the perturbative "
            f"threshold {PERTURBATIVE_RATIO}", stacklevel=2)
    green = GreenStatic.from_system(system, half_damping)
    v = drive.amplitude
    g0 = green(np.asarray(omega, dtype=float))
    a_plus = -green(np.asarray(omega) + drive.omega_d) * v * g0
    a_minus = -green(np.asarray(omega) - drive.omega_d) * np.conj(v) * g0
    return a_plus, a_minus


def floquet_residual(sol: FloquetSolution):
    """Recomputed max relative defect of a stored solution (corruption check)."""
    return _residual(sol.green, sol.drive, sol.grid, sol.coeffs, sol.K)

"""Independent validation path: exact Gaussian dynamics of the full
system-plus-discretized-baths model.

Each reservoir becomes N explicit harmonic modes; the joint state is
Gaussian, so the full covariance matrix obeys the closed Lyapunov equation
dSigma/dt = F(t) Sigma + Sigma F(t)^T, integrated with fixed-step RK4.
Heat currents, the position-momentum correlation sigma_xp, occupancies and
the first law are then measured directly, with no Floquet machinery —
this module deliberately shares no formulas with ``currents``/``limits``.

Coordinate order: (x_S, x_A modes, x_B modes, p_S, p_A modes, p_B modes).
The stiffness matrix is an arrowhead, K = diag(d) + e0 b^T + b e0^T, so
every application of F to a matrix costs O(n^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NotConvergedError, QfridgeError
from .model import DrivePlan, ReservoirSpec, SpectralDensity, SystemParams, planck_occupation

__all__ = [
    "DiscretizedBath", "CovarianceState", "Trajectory", "OracleRecord",
    "build_discretized_bath", "reconstructed_kernel", "thermal_state",
    "propagate", "measure_currents", "dressed_ground_state",
    "ground_state_occupation_a",
]

MIN_MODES = 1
STEPS_PER_FAST_PERIOD = 20
SYMPLECTIC_FLOOR = 0.5 - 1e-9
PERIODICITY_TOL = 1e-4
MIN_TRANSIENT_PERIODS = 20


@dataclass
class DiscretizedBath:
    """Explicit-mode stand-in for a continuum reservoir.

    Couplings satisfy c_j^2 = omega_j * I(omega_j) * domega_j so the
    reconstructed dissipation kernel matches the continuum one.
    """

    label: str
    frequencies: np.ndarray     # sorted mode frequencies
    couplings: np.ndarray       # c_j
    spacings: np.ndarray        # domega_j (0 for an exact single mode)
    temperature: float = 0.0
    counterterm: float = None   # system-stiffness counterterm; static_shift if None
    stiffness_correction: np.ndarray = None  # per-mode addition to omega_j^2

    @property
    def n_modes(self):
        return self.frequencies.size

    @property
    def recurrence_time(self):
        """2 pi over the finest spacing; horizons must stay below half this."""
        pos = self.spacings[self.spacings > 0]
        if pos.size == 0:
            return math.inf
        return 2.0 * math.pi / float(np.min(pos))

    @property
    def static_shift(self):
        """gamma(0) contribution sum_j c_j^2 / omega_j^2 (frequency pull)."""
        return float(np.sum(self.couplings ** 2 / self.frequencies ** 2))

    @property
    def system_counterterm(self):
        return self.static_shift if self.counterterm is None else self.counterterm


def _pv_band_shift(sd, lo, hi, pin):
    """Principal value of int_band w I(w)/(w^2 - pin^2) dw.

    Used as a pinned counterterm: subtracting this from the bare stiffness
    leaves the dressed resonance of the band-limited bath exactly at ``pin``,
    where the plain static shift gamma(0) would leave a residual detuning of
    order the band-edge logarithms.
    """
    from scipy.integrate import quad

    if not (lo < pin < hi):
        val, _ = quad(lambda w: w * sd(w) / (w ** 2 - pin ** 2), lo, hi,
                      limit=200)
        return val
    # Cauchy weight needs the pole strictly interior: take a symmetric
    # window around it, then add the regular remainder; w I/(w^2-p^2) = f/(w-p)
    def f(w):
        return w * sd(w) / (w + pin)
    h = min(pin - lo, hi - pin)
    val, _ = quad(f, pin - h, pin + h, weight="cauchy", wvar=pin, limit=200)
    for a, b in ((lo, pin - h), (pin + h, hi)):
        if b > a:
            part, _ = quad(lambda w: w * sd(w) / (w ** 2 - pin ** 2), a, b,
                           limit=200)
            val += part
    return val


def build_discretized_bath(sd: SpectralDensity, n_modes, band, focus=(),
                           label="B", temperature=0.0, pin=None,
                           system=None, grading=0.0) -> DiscretizedBath:
    """Place ``n_modes`` modes over ``band`` with boosted density inside
    each ``focus`` window ``(center, half_width[, density_factor])`` (factor
    defaults to 8); DiracMode gives exactly one mode.

    ``grading`` > 0 ramps the point density outside the focus windows from
    1 up to 1+grading across the band.  The resulting slow chirp of the
    coarse spacings breaks their commensurability, so the coarse region has
    no coherent revival (a uniform grid re-emits absorbed energy at
    t = 2 pi / spacing); the fine focus grids stay uniform for quadrature
    accuracy and their revival is excluded by the horizon guard.

    With ``pin`` set, the bath's system-stiffness counterterm is the band
    principal value at that frequency instead of gamma(0), so the dressed
    system resonance sits at ``pin`` exactly as the continuum model assumes.
    For a Dirac bath with ``pin`` and ``system`` given, the single explicit
    mode also gets a stiffness correction c^2 Re chi(omega_m) cancelling the
    backaction frequency pull that a vanishing-measure continuum would not
    have."""
    if sd.is_dirac:
        wm = sd.mode_frequency
        c2 = wm * sd.weight
        counter = None
        corr = None
        if pin is not None:
            counter = c2 / (wm ** 2 - pin ** 2) if wm != pin else 0.0
            if system is not None:
                ginv = (system.omega0 ** 2 - (wm - 1j * system.gamma) ** 2)
                corr = np.array([c2 * (1.0 / ginv).real])
        return DiscretizedBath(
            label=label, frequencies=np.array([wm]),
            couplings=np.array([math.sqrt(c2)]),
            spacings=np.array([0.0]), temperature=temperature,
            counterterm=counter, stiffness_correction=corr)

    lo, hi = band
    if not (0.0 <= lo < hi):
        raise ConfigError("bath band must satisfy 0 <= lo < hi")
    if n_modes < MIN_MODES:
        raise ConfigError("need at least one bath mode")

    # point-placement density: 1 outside focus windows, 8 inside; mode
    # frequencies are the midpoints of equal-measure cells
    fine = np.linspace(lo, hi, 200001)
    weight = 1.0 + grading * (fine - lo) / (hi - lo)
    for window in focus:
        center, half = window[:2]
        factor = window[2] if len(window) > 2 else 8.0
        mask = np.abs(fine - center) <= half
        weight[mask] = np.maximum(weight[mask], factor)
    measure = np.concatenate([[0.0], np.cumsum(0.5 * (weight[1:] + weight[:-1])
                                               * np.diff(fine))])
    edges = np.interp(np.linspace(0.0, measure[-1], n_modes + 1), measure, fine)
    freqs = 0.5 * (edges[1:] + edges[:-1])
    spacings = np.diff(edges)
    if freqs[0] <= 0:
        freqs = np.clip(freqs, 1e-12, None)
    dens = sd(freqs)
    couplings = np.sqrt(freqs * dens * spacings)
    counter = _pv_band_shift(sd, lo, hi, pin) if pin is not None else None
    return DiscretizedBath(label=label, frequencies=freqs,
                           couplings=couplings, spacings=spacings,
                           temperature=temperature, counterterm=counter)


def reconstructed_kernel(bath: DiscretizedBath, s):
    """Discrete-mode dissipation kernel gamma_hat(s) = sum_j (c_j^2/omega_j^2) s/(s^2 + omega_j^2)."""
    s = complex(s)
    return complex(np.sum((bath.couplings ** 2 / bath.frequencies ** 2)
                          * s / (s ** 2 + bath.frequencies ** 2)))


# ---------------------------------------------------------------------------
# state and generator

@dataclass
class CovarianceState:
    """Full covariance over (x..., p...) plus simulation clock."""

    sigma: np.ndarray
    time: float = 0.0
    period_index: int = 0

    @property
    def n_coords(self):
        return self.sigma.shape[0] // 2


def _mode_arrays(baths):
    freqs = np.concatenate([b.frequencies for b in baths])
    coups = np.concatenate([b.couplings for b in baths])
    return freqs, coups


def thermal_state(system: SystemParams, baths, system_occupation=0.0,
                  mode_a_occupation=None) -> CovarianceState:
    """Uncorrelated product of thermal mode states.

    Bath modes start at their bath temperature; the single-mode bath A can
    be given an explicit initial occupancy (to start a cooling transient
    above the steady value).
    """
    freqs, _ = _mode_arrays(baths)
    n = 1 + freqs.size
    occ = [system_occupation]
    for b in baths:
        for w in b.frequencies:
            if b.spacings.max() == 0.0 and mode_a_occupation is not None:
                occ.append(mode_a_occupation)
            else:
                occ.append(planck_occupation(w, b.temperature)
                           if b.temperature > 0 else 0.0)
    occ = np.asarray(occ)
    all_freqs = np.concatenate([[system.omega0], freqs])
    sigma = np.zeros((2 * n, 2 * n))
    xx = (occ + 0.5) / all_freqs
    pp = (occ + 0.5) * all_freqs
    sigma[np.arange(n), np.arange(n)] = xx
    sigma[np.arange(n, 2 * n), np.arange(n, 2 * n)] = pp
    return CovarianceState(sigma=sigma)


def _stiffness_parts(system, drive, baths):
    """Diagonal d (without the time-dependent piece) and arrowhead vector b.

    The bare system stiffness carries the counterterm + gamma(0) so that
    the dressed static frequency matches the renormalized omega0 implied by
    the drive's static component.
    """
    freqs, coups = _mode_arrays(baths)
    n = 1 + freqs.size
    shift = sum(b.system_counterterm for b in baths)
    d = np.empty(n)
    d[0] = shift          # + V(t) added per step
    d[1:] = freqs ** 2
    start = 1
    for b in baths:
        if b.stiffness_correction is not None:
            d[start:start + b.n_modes] += b.stiffness_correction
        start += b.n_modes
    b = np.zeros(n)
    b[1:] = -coups
    return d, b


def _static_normal_modes(system, drive, baths):
    """Eigendecomposition of the static stiffness K (drive frozen at v0)."""
    d, bvec = _stiffness_parts(system, drive, baths)
    d = d.copy()
    d[0] += float(drive.v0)
    kmat = np.diag(d)
    kmat[0, :] += bvec
    kmat[:, 0] += bvec
    vals, vecs = np.linalg.eigh(kmat)
    if vals.min() <= 0.0:
        raise QfridgeError("static stiffness is not positive definite")
    return vals, vecs


def _single_mode_index(baths):
    """(coordinate index, frequency) of the explicit single-mode bath."""
    start, idx, freq = 1, None, None
    for b in baths:
        if b.n_modes == 1 and b.spacings.max() == 0.0:
            idx, freq = start, float(b.frequencies[0])
        start += b.n_modes
    if idx is None:
        raise ConfigError("no single-mode bath present")
    return idx, freq


def dressed_ground_state(system: SystemParams, drive: DrivePlan, baths,
                         mode_a_extra=0.0) -> CovarianceState:
    """Exact Gaussian ground state of the coupled static Hamiltonian.

    With the drive frozen at its static value v0 the model is a quadratic
    Hamiltonian with stiffness K = diag(d) + e0 b^T + b e0^T; its ground
    state has Sigma_xx = K^(-1/2)/2 and Sigma_pp = K^(1/2)/2.  Starting
    trajectories here (rather than from an uncoupled product vacuum) avoids
    the coupling-quench transient in which the dressing energy sloshes
    undamped through the discretized bath.  ``mode_a_extra`` adds that many
    thermal quanta to the single explicit mode on top of the ground state.
    """
    baths = list(baths)
    vals, vecs = _static_normal_modes(system, drive, baths)
    sq = np.sqrt(vals)
    n = vals.size
    sigma = np.zeros((2 * n, 2 * n))
    sigma[:n, :n] = 0.5 * (vecs / sq) @ vecs.T
    sigma[n:, n:] = 0.5 * (vecs * sq) @ vecs.T
    if mode_a_extra:
        idx, freq = _single_mode_index(baths)
        sigma[idx, idx] += mode_a_extra / freq
        sigma[n + idx, n + idx] += mode_a_extra * freq
    return CovarianceState(sigma=sigma)


def ground_state_occupation_a(system: SystemParams, drive: DrivePlan, baths):
    """Occupancy of the single explicit mode in the coupled static ground state.

    The bare single mode is "dressed" slightly above vacuum purely by the
    coupling; this static offset is the baseline against which drive-induced
    occupancy is measured.
    """
    baths = list(baths)
    vals, vecs = _static_normal_modes(system, drive, baths)
    idx, freq = _single_mode_index(baths)
    row2 = vecs[idx] ** 2
    sq = np.sqrt(vals)
    xx = 0.5 * float(np.sum(row2 / sq))
    pp = 0.5 * float(np.sum(row2 * sq))
    return 0.5 * (pp / freq + freq * xx) - 0.5


def _lyapunov_rhs(sigma, d, b, n):
    """F Sigma + Sigma F^T for F = [[0, I], [-K, 0]], K = diag(d)+e0 b^T+b e0^T."""
    sxx = sigma[:n, :n]
    sxp = sigma[:n, n:]
    spp = sigma[n:, n:]
    # K @ M for the arrowhead K
    def kdot(m):
        out = d[:, None] * m
        out[0] += b @ m
        out += np.outer(b, m[0])
        return out

    kxx = kdot(sxx)                  # K Sigma_xx
    kxp = kdot(sxp)                  # K Sigma_xp
    out = np.empty_like(sigma)
    out[:n, :n] = sxp + sxp.T
    out[:n, n:] = spp - kxx.T        # Sigma_pp - (K Sigma_xx)^T; K symmetric
    out[n:, :n] = out[:n, n:].T
    out[n:, n:] = -(kxp + kxp.T)
    return out


@dataclass
class Trajectory:
    """Per-sample scalar observables plus the final covariance."""

    times: np.ndarray
    h_system: np.ndarray        # <H_S> with the instantaneous stiffness
    h_bath: dict                # label -> <H_alpha>(t)
    sigma_xp: np.ndarray        # system <{x,p}/2>
    x2: np.ndarray              # system <x^2>
    v_of_t: np.ndarray          # drive stiffness V(t)
    occupation_a: np.ndarray    # single-mode bath occupancy (if present)
    period: float
    samples_per_period: int
    final: CovarianceState
    min_symplectic: float
    periodic_defect: float      # last period-to-period relative covariance change


def propagate(state: CovarianceState, system: SystemParams, drive: DrivePlan,
              baths, horizon_periods, steps_per_period=None) -> Trajectory:
    """Fixed-step RK4 integration over ``horizon_periods`` drive periods."""
    baths = list(baths)
    freqs, _ = _mode_arrays(baths)
    n = 1 + freqs.size
    if state.n_coords != n:
        raise ConfigError("state dimension does not match the bath layout")
    period = 2.0 * math.pi / drive.omega_d

    t_rec = min(b.recurrence_time for b in baths)
    if horizon_periods * period > 0.5 * t_rec:
        need = math.ceil(2.0 * horizon_periods * period / t_rec)
        raise QfridgeError(
            f"horizon {horizon_periods} periods exceeds half the recurrence "
            f"time {t_rec:.3g}; increase bath modes by about x{need}")

    w_max = max(float(freqs.max()), system.omega0,
                math.sqrt(abs(drive.v0)) + 1e-12)
    if steps_per_period is None:
        steps_per_period = max(
            int(math.ceil(period / ((2.0 * math.pi / w_max) / STEPS_PER_FAST_PERIOD))),
            40)
    dt = period / steps_per_period

    d0, bvec = _stiffness_parts(system, drive, baths)
    sigma = state.sigma.copy()
    t = state.time

    # mode bookkeeping for observables
    slices = {}
    start = 1
    for b in baths:
        slices[b.label] = slice(start, start + b.n_modes)
        start += b.n_modes
    dirac = [b for b in baths if b.n_modes == 1 and b.spacings.max() == 0.0]
    dirac_idx = slices[dirac[0].label].start if dirac else None
    dirac_freq = dirac[0].frequencies[0] if dirac else 1.0

    n_steps = horizon_periods * steps_per_period
    n_samples = n_steps + 1
    times = np.empty(n_samples)
    h_sys = np.empty(n_samples)
    h_bath = {b.label: np.empty(n_samples) for b in baths}
    sxp_arr = np.empty(n_samples)
    x2_arr = np.empty(n_samples)
    v_arr = np.empty(n_samples)
    occ_a = np.empty(n_samples)

    freqs2 = freqs ** 2

    def record(i, tt, sig, v_now):
        times[i] = tt
        x2 = sig[0, 0]
        p2 = sig[n, n]
        x2_arr[i] = x2
        sxp_arr[i] = sig[0, n]
        v_arr[i] = v_now
        h_sys[i] = 0.5 * (p2 + (d0[0] + v_now) * x2)
        diag_x = np.diagonal(sig)[1:n]
        diag_p = np.diagonal(sig)[n + 1:]
        for b in baths:
            sl = slices[b.label]
            j = slice(sl.start - 1, sl.stop - 1)
            h_bath[b.label][i] = 0.5 * float(
                np.sum(diag_p[j] + freqs2[j] * diag_x[j]))
        if dirac_idx is not None:
            k = dirac_idx
            occ_a[i] = 0.5 * (sig[n + k, n + k] / dirac_freq
                              + dirac_freq * sig[k, k]) - 0.5
        else:
            occ_a[i] = math.nan

    def v_at(tt):
        return float(drive.value(tt).real)

    record(0, t, sigma, v_at(t))
    min_nu = _min_symplectic(sigma, n)
    prev_period_sigma = sigma.copy()
    periodic_defect = math.inf

    d = d0.copy()
    for step in range(n_steps):
        # RK4 with the time-dependent arrowhead diagonal
        def rhs(sig, tt):
            d[0] = d0[0] + v_at(tt)
            return _lyapunov_rhs(sig, d, bvec, n)

        k1 = rhs(sigma, t)
        k2 = rhs(sigma + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(sigma + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(sigma + dt * k3, t + dt)
        sigma += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = state.time + (step + 1) * dt
        record(step + 1, t, sigma, v_at(t))

        if (step + 1) % steps_per_period == 0:
            nu = _min_symplectic(sigma, n)
            min_nu = min(min_nu, nu)
            if nu < SYMPLECTIC_FLOOR:
                raise QfridgeError(
                    f"covariance positivity violated (nu_min={nu:.6f}); "
                    "reduce the step size")
            sys_block = np.ix_([0, n], [0, n])
            scale = np.linalg.norm(prev_period_sigma[sys_block]) + 1e-300
            periodic_defect = (np.linalg.norm(sigma[sys_block]
                                              - prev_period_sigma[sys_block])
                               / scale)
            prev_period_sigma = sigma.copy()

    final = CovarianceState(sigma=sigma, time=t,
                            period_index=state.period_index + horizon_periods)
    return Trajectory(times=times, h_system=h_sys, h_bath=h_bath,
                      sigma_xp=sxp_arr, x2=x2_arr, v_of_t=v_arr,
                      occupation_a=occ_a, period=period,
                      samples_per_period=steps_per_period, final=final,
                      min_symplectic=min_nu, periodic_defect=periodic_defect)


def _min_symplectic(sigma, n):
    """Smallest single-mode reduced symplectic eigenvalue sqrt(det of the
    2x2 (x_i, p_i) block); a cheap necessary uncertainty check."""
    xx = np.diagonal(sigma)[:n]
    pp = np.diagonal(sigma)[n:]
    xp = np.diagonal(sigma[:n, n:])
    det = xx * pp - xp ** 2
    return float(np.sqrt(np.clip(det, 0.0, None).min()))


# ---------------------------------------------------------------------------
# measurement

@dataclass
class OracleRecord:
    """Period-averaged currents and identity checks from a trajectory window."""

    heat: dict                  # label -> Qdot_alpha (positive: bath -> system)
    heat_total: float
    v_sigma_xp: float           # time average of V(t) sigma_xp(t)
    occupation_a: float         # window-end occupancy of the single-mode bath
    occupation_mid: float       # mid-window occupancy
    occupation_window: float    # time-average over the window (for rate comparisons)
    window: tuple
    min_symplectic: float
    periodic_defect: float


def measure_currents(traj: Trajectory, baths, window=None) -> OracleRecord:
    """Average currents over an integer number of periods.

    ``window`` is (first_period, last_period); default: the final third of
    the trajectory, which must be past the transient.
    """
    spp = traj.samples_per_period
    n_periods = (traj.times.size - 1) // spp
    if window is None:
        if n_periods < MIN_TRANSIENT_PERIODS:
            raise NotConvergedError(
                f"need at least {MIN_TRANSIENT_PERIODS} periods, got {n_periods}")
        window = (2 * n_periods // 3, n_periods)
    p0, p1 = window
    if not (0 <= p0 < p1 <= n_periods):
        raise ConfigError("measurement window outside the trajectory")
    i0, i1 = p0 * spp, p1 * spp
    dt_window = traj.times[i1] - traj.times[i0]

    heat = {}
    for label, h in traj.h_bath.items():
        heat[label] = -(h[i1] - h[i0]) / dt_window
    total = sum(heat.values())

    v_sxp = float(np.trapezoid(traj.v_of_t[i0:i1 + 1] * traj.sigma_xp[i0:i1 + 1],
                               traj.times[i0:i1 + 1]) / dt_window)

    occ_slice = traj.occupation_a
    last = float(np.mean(occ_slice[i1 - spp:i1 + 1]))
    mid_idx = (i0 + i1) // 2
    mid = float(np.mean(occ_slice[mid_idx - spp // 2: mid_idx + spp // 2 + 1]))
    win_mean = float(np.trapezoid(occ_slice[i0:i1 + 1],
                                  traj.times[i0:i1 + 1]) / dt_window)
    return OracleRecord(heat=heat, heat_total=total, v_sigma_xp=v_sxp,
                        occupation_a=last, occupation_mid=mid,
                        occupation_window=win_mean,
                        window=(p0, p1), min_symplectic=traj.min_symplectic,
                        periodic_defect=traj.periodic_defect)


def drive_work(traj: Trajectory, i0=0, i1=None):
    """Work injected over a window, int (1/2) dV/dt <x^2> dt (time-domain first law)."""
    if i1 is None:
        i1 = traj.times.size - 1
    v = traj.v_of_t[i0:i1 + 1]
    t = traj.times[i0:i1 + 1]
    vdot = np.gradient(v, t)
    return float(np.trapezoid(0.5 * vdot * traj.x2[i0:i1 + 1], t))

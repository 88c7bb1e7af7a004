"""Discretized-bath oracle: construction, kernel fidelity, guards, dynamics."""
import math

import numpy as np
import pytest

from qfridge.config import load_preset
from qfridge.errors import ConfigError, NotConvergedError, QfridgeError
from qfridge.model import (
    DiracMode, DrivePlan, PowerLaw, SystemParams, dissipation_kernel_laplace,
)
from qfridge.oracle import (
    build_discretized_bath, drive_work, measure_currents, propagate,
    reconstructed_kernel, thermal_state,
)


def ohmic_bath(n_modes, band=(0.1, 2.0), damping=0.1, focus=(), pin=None):
    return build_discretized_bath(PowerLaw.ohmic(damping, hard_cutoff=band[1]),
                                  n_modes, band, focus=focus, pin=pin)


class TestBathConstruction:
    def test_dirac_single_mode(self):
        sd = DiracMode(weight=0.02, mode_frequency=0.25)
        bath = build_discretized_bath(sd, 1, (0.0, 1.0), label="A")
        assert bath.n_modes == 1
        assert bath.frequencies[0] == 0.25
        # c^2 = omega_m * weight, spacing zero, no recurrence horizon
        assert bath.couplings[0] ** 2 == pytest.approx(0.25 * 0.02, rel=1e-14)
        assert bath.spacings[0] == 0.0
        assert bath.recurrence_time == math.inf

    def test_dirac_pinned_counterterm_and_correction(self):
        sd = DiracMode(weight=0.02, mode_frequency=0.25)
        system = SystemParams(omega0=1.0, gamma=0.05)
        bath = build_discretized_bath(sd, 1, (0.0, 1.0), label="A",
                                      pin=1.0, system=system)
        c2 = 0.25 * 0.02
        assert bath.system_counterterm == pytest.approx(
            c2 / (0.25 ** 2 - 1.0), rel=1e-14)
        ginv = 1.0 - (0.25 - 0.05j) ** 2
        assert bath.stiffness_correction[0] == pytest.approx(
            c2 * (1.0 / ginv).real, rel=1e-14)

    def test_continuum_coupling_rule(self):
        # c_j^2 = omega_j I(omega_j) domega_j reproduces the spectral density
        sd = PowerLaw.ohmic(0.1, hard_cutoff=2.0)
        bath = ohmic_bath(50)
        assert bath.n_modes == 50
        expect = bath.frequencies * sd(bath.frequencies) * bath.spacings
        assert np.allclose(bath.couplings ** 2, expect, rtol=1e-12)
        assert bath.frequencies[0] > 0.1 and bath.frequencies[-1] < 2.0

    def test_focus_window_densifies_by_eight(self):
        bath = ohmic_bath(200, focus=[(1.0, 0.1)])
        inside = bath.spacings[np.abs(bath.frequencies - 1.0) < 0.08]
        outside = bath.spacings[np.abs(bath.frequencies - 1.0) > 0.3]
        assert np.median(outside) / np.median(inside) == pytest.approx(
            8.0, rel=0.02)

    def test_band_validation(self):
        sd = PowerLaw.ohmic(0.1)
        with pytest.raises(ConfigError):
            build_discretized_bath(sd, 10, (1.0, 0.5))
        with pytest.raises(ConfigError):
            build_discretized_bath(sd, 0, (0.1, 1.0))


class TestKernel:
    def test_reconstruction_converges_to_band_integral(self):
        # gamma_hat(s) = int_band I(w) s / (w (s^2 + w^2)) dw, sampled by the
        # coupling rule; the Riemann sum converges to the quadrature value
        from scipy.integrate import quad

        sd = PowerLaw.ohmic(0.1, hard_cutoff=2.0)
        s = 0.05 + 0.7j

        def integrand(w):
            return sd(w) * s / (w * (s * s + w * w))

        ref = (quad(lambda w: integrand(w).real, 0.1, 2.0, limit=200)[0]
               + 1j * quad(lambda w: integrand(w).imag, 0.1, 2.0, limit=200)[0])
        errs = []
        for n in (50, 200):
            bath = ohmic_bath(n)
            errs.append(abs(reconstructed_kernel(bath, s) - ref))
        assert errs[1] < 0.1 * errs[0]
        assert errs[1] < 1e-3 * abs(ref)

    def test_pinned_counterterm_matches_pv_closed_form(self):
        # ohmic I = (2 g / pi) w: PV int w I/(w^2-p^2) has an elementary form
        damping, lo, hi, p = 0.1, 0.1, 2.0, 1.0
        a = 2.0 * damping / math.pi
        bath = ohmic_bath(30, band=(lo, hi), damping=damping, pin=p)
        closed = a * ((hi - lo) + 0.5 * p * (
            math.log((hi - p) / (hi + p)) - math.log((p - lo) / (p + lo))))
        assert bath.system_counterterm == pytest.approx(closed, rel=1e-9)

    def test_unpinned_counterterm_is_static_shift(self):
        bath = ohmic_bath(30)
        assert bath.system_counterterm == bath.static_shift


class TestThermalState:
    def test_vacuum_diagonals(self):
        system = SystemParams(omega0=1.0, gamma=0.05)
        bath = ohmic_bath(10)
        state = thermal_state(system, [bath])
        n = state.n_coords
        assert n == 11
        freqs = np.concatenate([[1.0], bath.frequencies])
        assert np.allclose(np.diagonal(state.sigma)[:n], 0.5 / freqs)
        assert np.allclose(np.diagonal(state.sigma)[n:], 0.5 * freqs)
        assert state.time == 0.0

    def test_mode_a_occupation_override(self):
        system = SystemParams(omega0=1.0, gamma=0.05)
        mode = build_discretized_bath(DiracMode(weight=0.02,
                                                mode_frequency=0.25),
                                      1, (0.0, 1.0), label="A")
        bath = ohmic_bath(5)
        state = thermal_state(system, [mode, bath], mode_a_occupation=0.5)
        # mode A sits at coordinate index 1
        assert state.sigma[1, 1] == pytest.approx(1.0 / 0.25)
        # continuum modes stay in vacuum
        assert state.sigma[2, 2] == pytest.approx(
            0.5 / bath.frequencies[0], rel=1e-12)

    def test_dimension_mismatch_raises(self):
        system = SystemParams(omega0=1.0, gamma=0.05)
        drive = DrivePlan.harmonic(v0=1.0, amplitude=0.0, omega_d=0.75)
        state = thermal_state(system, [ohmic_bath(5)])
        with pytest.raises(ConfigError):
            propagate(state, system, drive, [ohmic_bath(6)], 1)


class TestGuards:
    def test_recurrence_guard(self):
        system = SystemParams(omega0=1.0, gamma=0.05)
        drive = DrivePlan.harmonic(v0=1.0, amplitude=0.0, omega_d=0.75)
        bath = ohmic_bath(10)     # coarse grid -> short recurrence time
        state = thermal_state(system, [bath])
        with pytest.raises(QfridgeError, match="recurrence"):
            propagate(state, system, drive, [bath], 500)

    def test_measure_currents_window_validation(self):
        system = SystemParams(omega0=1.0, gamma=0.05)
        drive = DrivePlan.harmonic(v0=1.0, amplitude=0.0, omega_d=0.75)
        bath = ohmic_bath(60)
        state = thermal_state(system, [bath])
        traj = propagate(state, system, drive, [bath], 5)
        with pytest.raises(NotConvergedError):
            measure_currents(traj, [bath])      # too short for a default window
        with pytest.raises(ConfigError):
            measure_currents(traj, [bath], window=(2, 9))


class TestDynamics:
    @staticmethod
    def small_setup(amplitude_ratio):
        cfg = load_preset("validate")
        system, drive = cfg.system, cfg.drive
        if amplitude_ratio == 0.0:
            drive = DrivePlan.harmonic(v0=drive.v0, amplitude=0.0,
                                       omega_d=drive.omega_d)
        wm = cfg.omega_m
        focus = [(system.omega0, 2.2 * system.gamma),
                 (drive.omega_d - wm, 1.1 * system.gamma)]
        bath_a = build_discretized_bath(cfg.reservoirs["A"].density, 1,
                                        (0.0, 1.0), label="A",
                                        pin=system.omega0, system=system)
        bath_b = build_discretized_bath(cfg.reservoirs["B"].density, 120,
                                        (0.1, 3.5), focus=focus, label="B",
                                        pin=system.omega0)
        return system, drive, [bath_a, bath_b]

    def test_undriven_vacuum_is_stationary(self):
        system, drive, baths = self.small_setup(0.0)
        state = thermal_state(system, baths)
        traj = propagate(state, system, drive, baths, 8)
        # the product vacuum is not the coupled ground state, so the mode
        # dresses by O(c^2) and sloshes, but nothing grows secularly and the
        # closed evolution preserves purity
        assert np.max(traj.occupation_a) < 0.05
        spp = traj.samples_per_period
        early = np.mean(traj.occupation_a[2 * spp:4 * spp])
        late = np.mean(traj.occupation_a[6 * spp:8 * spp])
        assert late < 3.0 * early + 1e-9
        assert traj.min_symplectic == pytest.approx(0.5, abs=1e-6)

    def test_driven_first_law_closure(self):
        system, drive, baths = self.small_setup(0.12)
        state = thermal_state(system, baths, mode_a_occupation=0.5)
        traj = propagate(state, system, drive, baths, 30)
        rec = measure_currents(traj, baths, window=(10, 30))
        spp = traj.samples_per_period
        dt = traj.times[30 * spp] - traj.times[10 * spp]
        work_rate = drive_work(traj, 10 * spp, 30 * spp) / dt
        # energy bookkeeping: injected work leaves through the reservoirs
        assert rec.heat_total + work_rate == pytest.approx(
            0.0, abs=0.05 * abs(work_rate))
        assert rec.min_symplectic > 0.5 - 1e-6

"""Cooling limits: closed forms, balance, structured reservoirs, optimizer."""
import math

import numpy as np
import pytest

from qfridge.config import load_preset
from qfridge.errors import DomainError, OutOfRegimeError
from qfridge.floquet import solve_floquet
from qfridge.limits import (
    classify_regime, critical_ratio, doppler_limit, half_frequency_limit,
    occupation_leading_order, occupation_slow_sd, optimize_drive,
    rp_nrh_ratio, sideband_limit, steady_occupation, structured_enhancement,
    structured_limit,
)
from qfridge.model import DiracMode, DrivePlan, PowerLaw, ReservoirSpec, SystemParams


class TestClosedForms:
    def test_sideband_closed_form(self):
        cfg = load_preset("sideband")
        rep = sideband_limit(cfg.system, cfg.reservoirs["B"].density,
                             cfg.omega_m)
        assert rep.n_occ == pytest.approx(2.4999348716862026e-05, rel=1e-10)
        assert rep.omega_d_optimal == pytest.approx(
            math.sqrt(1.0 - 1e-10) - 1e-3, rel=1e-14)
        assert rep.feasible and rep.regime == "SidebandResolved"

    def test_sideband_rejects_doppler_regime(self):
        sys_ = SystemParams(omega0=1.0, gamma=0.02)
        with pytest.raises(OutOfRegimeError):
            sideband_limit(sys_, PowerLaw.ohmic(0.04), 0.001)

    def test_doppler_closed_form(self):
        cfg = load_preset("doppler")
        rep = doppler_limit(cfg.system, cfg.omega_m)
        assert rep.n_occ == pytest.approx(10.0, rel=1e-14)     # gamma/(2 wm)
        assert rep.omega_d_optimal == pytest.approx(0.98, rel=1e-14)

    def test_doppler_rejects_sideband_regime(self):
        with pytest.raises(OutOfRegimeError):
            doppler_limit(SystemParams(omega0=1.0, gamma=1e-4), 0.01)

    def test_slow_sd_infeasible_branch(self):
        # omega0^2 <= omega_m^2 + gamma^2 + omega_d^2 closes the channel
        sys_ = SystemParams(omega0=1.0, gamma=0.1)
        assert occupation_slow_sd(sys_, 0.3, 1.2) == math.inf

    def test_slow_sd_matches_leading_order(self):
        # for a flat-enough bath the two occupancy expressions agree
        sys_ = SystemParams(omega0=1.0, gamma=0.02)
        wm, wd = 1e-3, 0.97
        slow = occupation_slow_sd(sys_, wm, wd)
        lead = occupation_leading_order(sys_, PowerLaw.ohmic(0.04), wm, wd)
        assert slow == pytest.approx(lead, rel=5e-2)

    def test_leading_order_closed_channel(self):
        sys_ = SystemParams(omega0=1.0, gamma=0.01)
        with pytest.raises(OutOfRegimeError):
            occupation_leading_order(sys_, PowerLaw.ohmic(0.02), 0.4, 0.3)

    def test_half_frequency_pathway(self):
        cfg = load_preset("half-frequency")
        n = half_frequency_limit(cfg.system, cfg.reservoirs["B"].density,
                                 cfg.omega_m, cfg.drive.amplitude)
        assert n == pytest.approx(8.889333338888888e-11, rel=1e-10)

    def test_half_frequency_matches_exact(self):
        # the k = 2 pathway estimate tracks the exact truncated solve
        cfg = load_preset("half-frequency")
        est = half_frequency_limit(cfg.system, cfg.reservoirs["B"].density,
                                   cfg.omega_m, cfg.drive.amplitude)
        sol = solve_floquet(cfg.system, cfg.drive, [cfg.omega_m])
        exact = steady_occupation(sol, cfg.reservoirs)
        assert est == pytest.approx(exact, rel=0.05)


class TestBalance:
    def test_steady_occupation_balances_ratio(self):
        cfg = load_preset("doppler")
        sol = solve_floquet(cfg.system, cfg.drive, [cfg.omega_m])
        n = steady_occupation(sol, cfg.reservoirs)
        ratio = rp_nrh_ratio(sol, cfg.reservoirs, cfg.drive.omega_d, n)
        assert ratio == pytest.approx(1.0, rel=1e-10)

    def test_exact_matches_leading_order_when_weak(self):
        cfg = load_preset("sideband")
        sol = solve_floquet(cfg.system, cfg.drive, [cfg.omega_m])
        exact = steady_occupation(sol, cfg.reservoirs)
        lead = occupation_leading_order(cfg.system,
                                        cfg.reservoirs["B"].density,
                                        cfg.omega_m, cfg.drive.omega_d)
        assert exact == pytest.approx(lead, rel=1e-3)


class TestStructured:
    def test_critical_ratio_frozen(self):
        band = critical_ratio(0.5)
        assert band.lower == pytest.approx(0.45631098730792363, abs=1e-10)
        assert band.upper == 0.5
        assert band.small_kappa_estimate == pytest.approx(0.46875)

    def test_small_kappa_estimate_tracks_bisection(self):
        for kappa in (0.2, 0.3, 0.5):
            band = critical_ratio(kappa)
            assert band.small_kappa_estimate == pytest.approx(
                band.lower, rel=0.05)

    def test_tiny_kappa_falls_back_to_estimate(self):
        band = critical_ratio(0.05)
        assert band.lower == band.small_kappa_estimate
        assert band.lower == pytest.approx(0.5, abs=1e-6)

    def test_enhancement_below_one_for_super_ohmic(self):
        x = np.linspace(1e-4, 0.5 - 1e-4, 1000)
        for kappa in (1.0, 3.0):
            f = structured_enhancement(kappa, x)
            assert np.all(f < 1.0)

    def test_sub_ohmic_band_edges(self):
        # kappa < 1: f > 1 below the critical edge, f < 1 above it
        band = critical_ratio(0.5)
        assert structured_enhancement(0.5, band.lower - 0.01) > 1.0
        assert structured_enhancement(0.5, band.lower + 0.01) < 1.0

    def test_structured_limit_scaling(self):
        sys_ = SystemParams(omega0=1.0, gamma=1e-3)
        val = structured_limit(sys_, 3.0, 0.1)
        expect = 0.25 * (1e-3 / 0.1) ** 2 * structured_enhancement(3.0, 0.1)
        assert val == pytest.approx(expect, rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            critical_ratio(0.0)
        with pytest.raises(OutOfRegimeError):
            structured_limit(SystemParams(omega0=1.0, gamma=1e-3), 1.0, 0.6)


class TestRegimes:
    def test_classification(self):
        assert classify_regime(SystemParams(1.0, 1e-3), 0.1) == "SidebandResolved"
        assert classify_regime(SystemParams(1.0, 0.02), 0.001) == "Doppler"
        assert classify_regime(SystemParams(1.0, 0.05), 0.1) == "Intermediate"
        assert classify_regime(SystemParams(1.0, 0.005), 0.5,
                               omega_d=0.5) == "HalfFrequency"


class TestOptimizer:
    def test_sideband_optimum(self):
        cfg = load_preset("sideband")
        sec = cfg.section("limits")
        rep = optimize_drive(cfg.system, cfg.drive,
                             list(cfg.reservoirs.values()),
                             (sec["bracket_lo"], sec["bracket_hi"]))
        assert rep.n_occ == pytest.approx(2.5e-5, rel=0.05)
        assert rep.omega_d_optimal == pytest.approx(rep.analytic_omega_d,
                                                    rel=1e-3)
        assert rep.analytic_match

    def test_doppler_optimum_frozen(self):
        cfg = load_preset("doppler")
        rep = optimize_drive(cfg.system, cfg.drive,
                             list(cfg.reservoirs.values()), (0.9, 1.0))
        assert rep.n_occ == pytest.approx(9.510407663660866, rel=1e-6)
        assert rep.omega_d_optimal == pytest.approx(0.9799709300025407,
                                                    rel=1e-6)
        assert rep.provenance == "ExactFloquet"

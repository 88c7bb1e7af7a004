"""Emission spectrum channels, ion mapping, and the Casimir ratio."""
import math

import numpy as np
import pytest

from qfridge.config import load_preset
from qfridge.errors import ConfigError
from qfridge.spectrum import (
    IonPreset, SpectrumParams, build_spectrum, casimir_ratio,
    integrated_rate_nrh, integrated_rate_pairs, integrated_rate_rp,
    ion_mapping, occupancy_narrow_line, photon_rate_nrh, photon_rate_pairs,
    photon_rate_rp, self_consistent_occupancy,
)

TWO_PI = 2.0 * math.pi


def figure_params():
    cfg = load_preset("figure67")
    return SpectrumParams(
        system=cfg.system, drive=cfg.drive,
        bath_b=cfg.reservoirs["B"].density,
        mode_weight=cfg.reservoirs["A"].density.weight,
        omega_m=cfg.omega_m,
        smoothing_width=cfg.section("spectrum").get("smoothing_width")), cfg


def ion_preset():
    return IonPreset(omega_m=TWO_PI * 5e6, omega0=TWO_PI * 755e12,
                     gamma=TWO_PI * 20e6, rabi=TWO_PI * 1e6, lamb_dicke=0.078)


class TestChannels:
    def test_supports(self):
        params, cfg = figure_params()
        wd = cfg.drive.omega_d
        # RP lives above wd, NRH and pairs inside (0, wd)
        assert photon_rate_rp(params, wd - 0.01) == 0.0
        assert photon_rate_rp(params, wd + cfg.omega_m) > 0.0
        assert photon_rate_nrh(params, wd + 0.01) == 0.0
        assert photon_rate_nrh(params, wd - cfg.omega_m) > 0.0
        assert photon_rate_pairs(params, wd + 0.01) == 0.0
        assert photon_rate_pairs(params, 0.0) == 0.0

    def test_pair_continuum_symmetry(self):
        params, cfg = figure_params()
        wd = cfg.drive.omega_d
        w = np.linspace(1e-3, wd - 1e-3, 501)
        f = photon_rate_pairs(params, w)
        g = photon_rate_pairs(params, wd - w)
        assert np.max(np.abs(f - g)) <= 1e-12 * np.max(np.abs(f))

    def test_occupancy_balance_is_exact(self):
        params, _ = figure_params()
        n = self_consistent_occupancy(params)
        resolved = SpectrumParams(
            system=params.system, drive=params.drive, bath_b=params.bath_b,
            mode_weight=params.mode_weight, omega_m=params.omega_m,
            smoothing_width=params.smoothing_width, occupancy=n)
        j_rp = integrated_rate_rp(resolved)
        j_nrh = integrated_rate_nrh(resolved)
        assert j_rp == pytest.approx(j_nrh, rel=1e-6)

    def test_narrow_line_limit(self):
        # the smoothed-line occupancy approaches the zero-linewidth value
        params, _ = figure_params()
        n_delta = occupancy_narrow_line(params)
        narrow = SpectrumParams(
            system=params.system, drive=params.drive, bath_b=params.bath_b,
            mode_weight=params.mode_weight, omega_m=params.omega_m,
            smoothing_width=1e-5 * params.omega_m)
        n_sc = self_consistent_occupancy(narrow)
        assert n_sc == pytest.approx(n_delta, rel=1e-2)


class TestTable:
    def test_build_spectrum_structure(self):
        params, cfg = figure_params()
        table = build_spectrum(params, n_base=2001)
        wd, wm = cfg.drive.omega_d, cfg.omega_m
        gm = params.smoothing_width or 1e-2 * wm
        assert table.grid[0] == 0.0
        assert table.grid[-1] > wd
        # peak positions within the smoothing width
        assert abs(table.grid[np.argmax(table.f_rp)] - (wd + wm)) <= gm
        assert abs(table.grid[np.argmax(table.f_nrh)] - (wd - wm)) <= gm
        # integrated line rates balance at the self-consistent occupancy
        assert table.rate_rp == pytest.approx(table.rate_nrh, rel=0.02)
        assert table.rate_pairs > 0.0
        # power columns are the omega-weighted densities
        i = len(table.grid) // 2
        assert table.power_nrh[i] == pytest.approx(
            table.grid[i] * table.f_nrh[i], rel=1e-12)

    def test_explicit_occupancy_respected(self):
        params, cfg = figure_params()
        fixed = SpectrumParams(
            system=params.system, drive=params.drive, bath_b=params.bath_b,
            mode_weight=params.mode_weight, omega_m=params.omega_m,
            smoothing_width=params.smoothing_width, occupancy=0.123)
        table = build_spectrum(fixed, n_base=801)
        assert table.occupancy == 0.123


class TestIonMapping:
    def test_unit_mapping(self):
        model = ion_mapping(ion_preset())
        assert model.system.omega0 == 1.0
        assert model.system.gamma == pytest.approx(20e6 / 755e12, rel=1e-12)
        assert model.omega_m == pytest.approx(5e6 / 755e12, rel=1e-12)
        # weight ratio gamma / (eta^2 Omega^2) carries one factor of the
        # frequency scale after mapping to machine units
        expect = (TWO_PI * 20e6) / (0.078 ** 2 * (TWO_PI * 1e6) ** 2) \
            * (TWO_PI * 755e12)
        assert model.weight_ratio == pytest.approx(expect, rel=1e-12)
        assert model.frequency_scale == pytest.approx(TWO_PI * 755e12)

    def test_drive_is_full_modulation_below_carrier(self):
        model = ion_mapping(ion_preset())
        assert abs(model.drive.amplitude) == pytest.approx(model.drive.v0)
        assert model.drive.omega_d == pytest.approx(
            1.0 - 0.5 * model.system.gamma, rel=1e-12)

    def test_lamb_dicke_warning(self):
        bad = IonPreset(omega_m=1.0, omega0=100.0, gamma=1.0, rabi=1.0,
                        lamb_dicke=1.5)
        with pytest.warns(UserWarning):
            ion_mapping(bad)


class TestCasimirRatio:
    def test_closed_form_for_cubic_bath(self):
        model = ion_mapping(ion_preset())
        params = model.spectrum_params(occupancy=0.0)
        ratio = casimir_ratio(params)
        expect = 0.25 * model.omega_m * model.weight_ratio * model.system.gamma
        assert ratio.closed_form == pytest.approx(expect, rel=1e-12)
        # quadrature and closed form agree at order-of-magnitude level
        assert ratio.quadrature == pytest.approx(ratio.closed_form, rel=1.0)

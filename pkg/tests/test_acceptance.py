"""Contract acceptance suite: one test and one printed line per criterion.

Each criterion prints `ACCEPTANCE PASS <name> (t=...)` or `ACCEPTANCE FAIL
<name>` directly to the terminal (bypassing capture) so a plain pytest run
shows one status line per criterion.
"""
import contextlib
import math
import sys
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from qfridge.config import load_preset
from qfridge.currents import heat_breakdown, heat_nrh
from qfridge.floquet import (
    floquet_coefficients, perturbative_A1, solve_floquet,
)
from qfridge.limits import (
    critical_ratio, occupation_slow_sd, optimize_drive,
    structured_enhancement,
)
from qfridge.model import (
    DiracMode, DrivePlan, PowerLaw, ReservoirSpec, SystemParams,
)
from qfridge.spectrum import (
    IonPreset, build_spectrum, casimir_ratio, integrated_rate_nrh,
    integrated_rate_pairs, integrated_rate_rp, ion_mapping,
)


@contextlib.contextmanager
def criterion(name, runtime_limit=None):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL {name}", file=sys.__stdout__, flush=True)
        raise
    elapsed = time.perf_counter() - t0
    if runtime_limit is not None and elapsed > runtime_limit:
        print(f"ACCEPTANCE FAIL {name} (runtime {elapsed:.1f}s > "
              f"{runtime_limit}s)", file=sys.__stdout__, flush=True)
        raise AssertionError(f"{name}: runtime {elapsed:.1f}s over limit")
    print(f"ACCEPTANCE PASS {name} (t={elapsed:.1f}s)",
          file=sys.__stdout__, flush=True)


def test_sideband_resolved_limit():
    with criterion("sideband-resolved-limit", 30):
        cfg = load_preset("sideband")
        sec = cfg.section("limits")
        rep = optimize_drive(cfg.system, cfg.drive,
                             list(cfg.reservoirs.values()),
                             (sec["bracket_lo"], sec["bracket_hi"]))
        gamma, wm = cfg.system.gamma, cfg.omega_m
        assert rep.n_occ == pytest.approx(gamma ** 2 / (4 * wm ** 2), rel=0.05)
        assert rep.n_occ == pytest.approx(2.5e-5, rel=0.05)
        target = math.sqrt(cfg.system.omega0 ** 2 - gamma ** 2) - wm
        assert rep.omega_d_optimal == pytest.approx(target, rel=1e-3)


def test_doppler_limit():
    with criterion("doppler-limit", 10):
        cfg = load_preset("doppler")
        sys_, wm = cfg.system, cfg.omega_m
        res = minimize_scalar(lambda wd: occupation_slow_sd(sys_, wm, wd),
                              bounds=(0.9, 1.0), method="bounded",
                              options={"xatol": 1e-8})
        assert res.x == pytest.approx(sys_.omega0 - sys_.gamma, rel=0.05)
        assert res.fun == pytest.approx(sys_.gamma / (2 * wm), rel=0.10)
        assert res.fun == pytest.approx(10.0, rel=0.10)


def test_structured_reservoir_critical_band():
    with criterion("structured-critical-band", 5):
        band = critical_ratio(0.5)
        assert band.lower == pytest.approx(0.457, abs=0.002)
        x = np.linspace(1e-6, 0.5 - 1e-6, 1000)
        for kappa in (1.0, 3.0):
            assert np.all(structured_enhancement(kappa, x) < 1.0)


def test_casimir_ratio_and_rates():
    with criterion("casimir-ratio-and-rates", 60):
        cfg = load_preset("ca-ion")
        model = ion_mapping(IonPreset(**cfg.raw["ion"]))
        params = model.spectrum_params()
        ratio = casimir_ratio(params)
        assert 0.3e-4 <= ratio.quadrature <= 3e-4
        scale = model.frequency_scale
        line_rate = (integrated_rate_rp(params)
                     + integrated_rate_nrh(params)) * scale
        assert 1.5e3 <= line_rate <= 6e3
        assert integrated_rate_pairs(params) * scale < 1.0


def test_spectrum_properties():
    with criterion("spectrum-properties", 60):
        cfg = load_preset("figure67")
        from qfridge.spectrum import SpectrumParams
        params = SpectrumParams(
            system=cfg.system, drive=cfg.drive,
            bath_b=cfg.reservoirs["B"].density,
            mode_weight=cfg.reservoirs["A"].density.weight,
            omega_m=cfg.omega_m,
            smoothing_width=cfg.section("spectrum").get("smoothing_width"))
        table = build_spectrum(params, n_base=4001)
        wd, wm = cfg.drive.omega_d, cfg.omega_m
        gm = table.smoothing_width
        # pair continuum reflection symmetry about omega_d / 2
        grid = table.grid
        inner = grid[(grid > 1e-9) & (grid < wd - 1e-9)]
        f = np.interp(inner, grid, table.f_pairs)
        g = np.interp(wd - inner, grid, table.f_pairs)
        assert np.max(np.abs(f - g)) <= 1e-12 * np.max(np.abs(table.f_pairs))
        # sideband peaks at omega_d +/- omega_m within the linewidth
        assert abs(grid[np.argmax(table.f_rp)] - (wd + wm)) <= gm
        assert abs(grid[np.argmax(table.f_nrh)] - (wd - wm)) <= gm
        # line-rate balance at the self-consistent occupancy
        assert table.rate_rp == pytest.approx(table.rate_nrh, rel=0.02)


def test_floquet_solver_contract():
    with criterion("floquet-solver-contract"):
        # residual on every preset
        for name in ("figure67", "sideband", "doppler", "half-frequency",
                     "validate"):
            cfg = load_preset(name)
            sol = solve_floquet(cfg.system, cfg.drive, [cfg.omega_m])
            assert sol.residual <= 1e-10, name
        ion = ion_mapping(IonPreset(**load_preset("ca-ion").raw["ion"]))
        sol = solve_floquet(ion.system, ion.drive, [ion.omega_m])
        assert sol.residual <= 1e-10

        # perturbative agreement at V/V0 = 1e-3
        sys_ = SystemParams(omega0=1.0, gamma=0.01)
        v0 = sys_.v_renormalized
        drive = DrivePlan.harmonic(v0=v0, amplitude=1e-3 * v0, omega_d=0.9)
        grid = np.linspace(0.1, 1.8, 60)
        a_p, a_m = perturbative_A1(sys_, drive, grid)
        sol = solve_floquet(sys_, drive, grid)
        assert np.max(np.abs(a_p - sol.coefficient(+1))
                      / np.abs(sol.coefficient(+1))) < 0.01
        assert np.max(np.abs(a_m - sol.coefficient(-1))
                      / np.abs(sol.coefficient(-1))) < 0.01

        # K-convergence at V/V0 = 0.1
        strong = DrivePlan.harmonic(v0=v0, amplitude=0.1 * v0, omega_d=0.9)
        c6 = floquet_coefficients(sys_, strong, grid, 6)
        c10 = floquet_coefficients(sys_, strong, grid, 10)
        pad = (c10.shape[1] - c6.shape[1]) // 2
        diff = np.max(np.abs(c10[:, pad:-pad] - c6))
        assert diff / np.max(np.abs(c6)) <= 1e-8


def test_thermodynamic_sign_suite():
    with criterion("thermodynamic-sign-suite"):
        rng = np.random.default_rng(20260825)
        for _ in range(200):
            gamma = 10.0 ** rng.uniform(-3, -1)
            system = SystemParams(omega0=1.0, gamma=gamma)
            v0 = system.v_renormalized
            drive = DrivePlan.harmonic(
                v0=v0, amplitude=10.0 ** rng.uniform(-4, -1) * v0,
                omega_d=rng.uniform(0.3, 1.5))
            res = [
                ReservoirSpec("A", DiracMode(weight=1e-4,
                                             mode_frequency=rng.uniform(0.05, 0.45)),
                              temperature=rng.choice([0.0, rng.uniform(0.0, 1.0)])),
                ReservoirSpec("B", PowerLaw.ohmic(2.0 * gamma),
                              temperature=rng.choice([0.0, rng.uniform(0.0, 1.0)])),
            ]
            sol = solve_floquet(system, drive,
                                [res[0].density.mode_frequency])
            assert heat_nrh(sol, res, "A") <= 0.0
            assert heat_nrh(sol, res, "B") <= 0.0

        # undriven equal-temperature null
        system = SystemParams(omega0=1.0, gamma=0.01)
        quiet = DrivePlan.harmonic(v0=system.v_renormalized, amplitude=0.0,
                                   omega_d=0.9)
        res = [ReservoirSpec("A", DiracMode(weight=1e-4, mode_frequency=0.1),
                             temperature=0.5),
               ReservoirSpec("B", PowerLaw.ohmic(0.02), temperature=0.5)]
        sol = solve_floquet(system, quiet, [0.1])
        bd = heat_breakdown(sol, res)
        for lbl in ("A", "B"):
            assert abs(bd.rp[lbl]) <= 1e-12
            assert abs(bd.rh[lbl]) <= 1e-12
            assert abs(bd.nrh[lbl]) <= 1e-12

        # V^2 scaling: Richardson slope at small amplitude
        system = SystemParams(omega0=1.0, gamma=1e-3)
        v0 = system.v_renormalized
        res = [ReservoirSpec("A", DiracMode(weight=1e-4, mode_frequency=0.1)),
               ReservoirSpec("B", PowerLaw.ohmic(2e-3))]
        q = []
        for ratio in (1e-4, 2e-4):
            drv = DrivePlan.harmonic(v0=v0, amplitude=ratio * v0, omega_d=0.9)
            sol = solve_floquet(system, drv, [0.1])
            q.append(heat_nrh(sol, res, "B"))
        slope = math.log(q[1] / q[0]) / math.log(2.0)
        assert slope == pytest.approx(2.0, rel=0.02)


def test_oracle_equivalence():
    with criterion("oracle-equivalence", 600):
        from qfridge.cli import run_validation
        checks = run_validation(load_preset("validate"))
        failures = [c for c in checks if not c[4]]
        assert not failures, failures

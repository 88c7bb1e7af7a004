"""Run configuration: strict INI parsing, presets, canonical round-trip dump.

Sections and keys are validated against a fixed schema — unknown sections
or keys are hard errors, every diagnostic names the offending section/key.
The canonical dump re-emits sorted sections and keys with shortest
round-trip float formatting so config -> dump -> parse is the identity.
"""
from __future__ import annotations

import configparser
import importlib.resources
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .model import (DiracMode, DrivePlan, Lorentzian, PowerLaw, ReservoirSpec,
                    SpectralDensity, SystemParams)

__all__ = ["RunConfig", "load_config", "load_preset", "preset_names",
           "canonical_dump"]

# schema: section -> {key: (type, required)}
_SCHEMA = {
    "system": {"omega0": float, "gamma": float},
    "drive": {"omega_d": float, "v0": str, "amplitude": str},
    "reservoir.a": {"kind": str, "weight": float, "mode_frequency": float,
                    "temperature": float, "damping": float,
                    "prefactor": float, "exponent": float, "omega_ref": float,
                    "hard_cutoff": float, "center": float, "width": float},
    "reservoir.b": {"kind": str, "weight": float, "mode_frequency": float,
                    "temperature": float, "damping": float,
                    "prefactor": float, "exponent": float, "omega_ref": float,
                    "hard_cutoff": float, "center": float, "width": float},
    "floquet": {"truncation": str, "residual_tol": float,
                "convergence_tol": float, "grid_min": float,
                "grid_max": float, "grid_points": int},
    "limits": {"bracket_lo": float, "bracket_hi": float, "rel_tol": float},
    "spectrum": {"smoothing_width": float, "occupancy": float,
                 "grid_points": int, "exact_floquet": bool,
                 "frequency_scale": float, "mode_weight": float},
    "ion": {"omega_m": float, "omega0": float, "gamma": float,
            "rabi": float, "lamb_dicke": float},
    "oracle": {"modes": int, "periods": int, "band_lo": float,
               "band_hi": float, "initial_occupation_a": float,
               "steps_per_period": int, "transient_lo": int,
               "transient_hi": int, "grading": float},
    "sweep": {"axis": str, "start": float, "stop": float, "points": int},
    "output": {"deterministic": bool},
}
_REQUIRED = {
    "system": ("omega0", "gamma"),
    "drive": ("omega_d", "v0", "amplitude"),
}

_RESERVOIR_KEYS = {
    "dirac": {"weight", "mode_frequency"},
    "power_law": {"prefactor", "exponent"},
    "ohmic": {"damping"},
    "lorentzian": {"weight", "center", "width"},
}
_RESERVOIR_OPTIONAL = {
    "dirac": set(),
    "power_law": {"omega_ref", "hard_cutoff"},
    "ohmic": {"omega_ref", "hard_cutoff"},
    "lorentzian": set(),
}


def _fmt(value):
    """Shortest round-trip text for a config/CSV scalar."""
    if hasattr(value, "item") and not isinstance(value, str):
        value = value.item()          # numpy scalar -> python scalar
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value == math.inf:
            return "inf"
        return repr(value)
    return str(value)


def _parse_bool(raw, where):
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


@dataclass
class RunConfig:
    """Fully validated configuration for any subcommand."""

    system: SystemParams
    drive: DrivePlan
    reservoirs: dict                 # label -> ReservoirSpec
    raw: dict                        # section -> {key: typed value}

    # ------------------------------------------------------------------
    @property
    def omega_m(self):
        dens = self.reservoirs["A"].density
        if not dens.is_dirac:
            raise ConfigError("reservoir.a: mode frequency requires kind = dirac")
        return dens.mode_frequency

    def section(self, name):
        return self.raw.get(name, {})

    def floquet_grid(self):
        sec = self.section("floquet")
        import numpy as np
        lo = sec.get("grid_min", 0.0)
        hi = sec.get("grid_max", 2.0 * self.system.omega0)
        n = sec.get("grid_points", 201)
        if not (lo < hi) or n < 2:
            raise ConfigError("floquet: grid_min < grid_max and grid_points >= 2 required")
        return np.linspace(lo, hi, n)

    def truncation(self):
        raw = self.section("floquet").get("truncation", "auto")
        if raw == "auto":
            return None
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"floquet.truncation: {raw!r} is not 'auto' or an integer") from exc


def _typed(section, key, raw):
    kind = _SCHEMA[section][key]
    where = f"[{section}] {key}"
    if kind is bool:
        return _parse_bool(raw, where)
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind.__name__}") from exc


def _build_density(section, data) -> SpectralDensity:
    kind = data.get("kind")
    if kind is None:
        raise ConfigError(f"[{section}] missing key 'kind'")
    if kind not in _RESERVOIR_KEYS:
        raise ConfigError(
            f"[{section}] kind: unknown reservoir kind {kind!r} "
            f"(choose from {sorted(_RESERVOIR_KEYS)})")
    need = _RESERVOIR_KEYS[kind]
    allowed = need | _RESERVOIR_OPTIONAL[kind] | {"kind", "temperature"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"[{section}] {key}: not a key of kind {kind!r}")
    for key in need:
        if key not in data:
            raise ConfigError(f"[{section}] missing key {key!r} for kind {kind!r}")
    if kind == "dirac":
        return DiracMode(weight=data["weight"],
                         mode_frequency=data["mode_frequency"])
    if kind == "ohmic":
        extra = {k: data[k] for k in ("omega_ref", "hard_cutoff") if k in data}
        return PowerLaw.ohmic(data["damping"], **extra)
    if kind == "power_law":
        extra = {k: data[k] for k in ("omega_ref", "hard_cutoff") if k in data}
        return PowerLaw(prefactor=data["prefactor"], exponent=data["exponent"],
                        **extra)
    return Lorentzian(weight=data["weight"], center=data["center"],
                      width=data["width"])


def _build_drive(data, system: SystemParams) -> DrivePlan:
    v0_raw = data["v0"]
    if v0_raw == "renormalized":
        v0 = system.v_renormalized
    else:
        try:
            v0 = float(v0_raw)
        except ValueError as exc:
            raise ConfigError(
                f"[drive] v0: {v0_raw!r} is not 'renormalized' or a number") from exc
    amp_raw = data["amplitude"]
    if isinstance(amp_raw, str) and amp_raw.startswith("ratio:"):
        try:
            amp = float(amp_raw[len("ratio:"):]) * v0
        except ValueError as exc:
            raise ConfigError(f"[drive] amplitude: bad ratio in {amp_raw!r}") from exc
    else:
        try:
            amp = float(amp_raw)
        except ValueError as exc:
            raise ConfigError(
                f"[drive] amplitude: {amp_raw!r} is not a number or 'ratio:X'") from exc
    return DrivePlan.harmonic(v0=v0, amplitude=amp, omega_d=data["omega_d"])


def parse_config_text(text, origin="<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from exc

    raw = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{origin}: unknown section [{section}]")
        raw[section] = {}
        for key, value in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{origin}: unknown key {key!r} in [{section}]")
            raw[section][key] = _typed(section, key, value)

    for section, keys in _REQUIRED.items():
        if section not in raw:
            raise ConfigError(f"{origin}: missing section [{section}]")
        for key in keys:
            if key not in raw[section]:
                raise ConfigError(f"{origin}: [{section}] missing key {key!r}")

    try:
        system = SystemParams(**raw["system"])
    except ConfigError as exc:
        raise ConfigError(f"{origin}: [system] {exc}") from exc
    try:
        drive = _build_drive(raw["drive"], system)
    except ConfigError:
        raise
    reservoirs = {}
    for label, section in (("A", "reservoir.a"), ("B", "reservoir.b")):
        if section not in raw:
            continue
        data = raw[section]
        density = _build_density(section, data)
        reservoirs[label] = ReservoirSpec(
            label=label, density=density,
            temperature=data.get("temperature", 0.0))
    return RunConfig(system=system, drive=drive, reservoirs=reservoirs, raw=raw)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, origin=str(path))


def preset_names():
    root = importlib.resources.files("qfridge.presets")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_preset(name) -> RunConfig:
    root = importlib.resources.files("qfridge.presets")
    candidate = root / f"{name}.ini"
    if not candidate.is_file():
        raise ConfigError(
            f"unknown preset {name!r} (available: {', '.join(preset_names())})")
    return parse_config_text(candidate.read_text(encoding="utf-8"),
                             origin=f"preset:{name}")


def canonical_dump(cfg: RunConfig) -> str:
    """Sorted, normalized text form; parse(canonical_dump(c)) == c."""
    lines = []
    for section in sorted(cfg.raw):
        lines.append(f"[{section}]")
        for key in sorted(cfg.raw[section]):
            lines.append(f"{key} = {_fmt(cfg.raw[section][key])}")
        lines.append("")
    return "\n".join(lines)

"""Flat ``key = value`` machine description files.

Every key is optional; missing keys take the defaults of the reference
machine (5 nm spacing, 5 nm tip of mu0 M = 2.2 T centered 15 nm above the
selected donor, B0 = 10 T, T = 1 K). Units are SI throughout.
"""

from dataclasses import dataclass, field

from .fields import MachineGeometry
from .readout import DetectionModel
from .spinmodel import DonorParams

# key -> (section, unit, type)
KEYS = {
    "n_sites": ("geometry", "count", int),
    "spacing_a": ("geometry", "m", float),
    "tip_radius": ("geometry", "m", float),
    "tip_center_height_d": ("geometry", "m", float),
    "tip_magnetization_mu0M": ("geometry", "T", float),
    "external_field_B0": ("geometry", "T", float),
    "temperature": ("geometry", "K", float),
    "g_e": ("params", "dimensionless", float),
    "gamma_n_eff": ("params", "Hz/T", float),
    "hyperfine_A_over_h": ("params", "Hz", float),
    "signal_gain": ("detection", "a.u.", float),
    "noise_rms": ("detection", "a.u.", float),
    "threshold": ("detection", "a.u.", float),
    "seed": ("run", "integer", int),
}


class ConfigError(ValueError):
    """Malformed or invalid machine description."""


@dataclass(frozen=True)
class MachineConfig:
    geometry: MachineGeometry = field(default_factory=MachineGeometry)
    params: DonorParams = field(default_factory=DonorParams)
    detection: DetectionModel = field(default_factory=DetectionModel)
    seed: int = 0

    def values(self):
        out = {}
        for key, (section, _, _) in KEYS.items():
            out[key] = self.seed if section == "run" else getattr(getattr(self, section), key)
        return out

    def with_values(self, **values):
        return build_config(dict(self.values(), **values))


def build_config(values):
    unknown = set(values) - set(KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    groups = {"geometry": {}, "params": {}, "detection": {}}
    seed = 0
    for key, value in values.items():
        section = KEYS[key][0]
        if section == "run":
            seed = value
        else:
            groups[section][key] = value
    try:
        return MachineConfig(
            geometry=MachineGeometry(**groups["geometry"]),
            params=DonorParams(**groups["params"]),
            detection=DetectionModel(**groups["detection"]),
            seed=seed,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _parse_value(key, text):
    kind = KEYS[key][2]
    try:
        if kind is int:
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


def parse_config(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, value)
    return build_config(values)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def serialize_config(config):
    lines = ["# MRFM Te:Si machine description (SI units)"]
    for key, value in config.values().items():
        unit = KEYS[key][1]
        text = str(value) if isinstance(value, int) else repr(float(value))
        lines.append(f"{key} = {text}  # {unit}")
    return "\n".join(lines) + "\n"

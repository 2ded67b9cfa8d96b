"""INI configuration: sections [model], [pump], [disorder], [solver], [sweep].

Keys mirror the dataclass field names; unspecified keys keep their defaults.
Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .classify import ClassifierThresholds
from .drive import DisorderSpec, PumpSpec
from .params import ModelParams
from .solver import SolverConfig

#: [solver] keys that describe the grid rather than SolverConfig
_GRID_KEYS = ("n", "length")


@dataclass
class SweepSection:
    f_inc: list = field(default_factory=lambda: [1.0])
    delta: list = field(default_factory=lambda: [0.22])
    k_p: float = 0.4
    seed: int = 1
    workers: int = 1
    out_dir: str = ""
    save_maps: bool = False


@dataclass
class ConfigBundle:
    model: ModelParams = field(default_factory=ModelParams)
    pump: PumpSpec = field(default_factory=PumpSpec)
    disorder: DisorderSpec = field(default_factory=DisorderSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: SweepSection = field(default_factory=SweepSection)
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    grid_n: int = 512
    grid_length: float = 256.0


_SECTIONS = {
    "model": ModelParams,
    "pump": PumpSpec,
    "disorder": DisorderSpec,
    "solver": SolverConfig,
    "sweep": SweepSection,
    "classify": ClassifierThresholds,
}


def load_config(path) -> ConfigBundle:
    parser = configparser.ConfigParser(interpolation=None)
    text = Path(path).read_text()
    parser.read_string(text, source=str(path))
    bundle = ConfigBundle()
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ValueError(f"unknown config section [{section}] in {path}")
        cls = _SECTIONS[section]
        fields = {f.name: f for f in dataclasses.fields(cls)}
        target = {
            "model": "model", "pump": "pump", "disorder": "disorder",
            "solver": "solver", "sweep": "sweep", "classify": "thresholds",
        }[section]
        obj = getattr(bundle, target)
        for key, raw in parser.items(section):
            if section == "solver" and key in _GRID_KEYS:
                if key == "n":
                    bundle.grid_n = int(raw)
                else:
                    bundle.grid_length = float(raw)
                continue
            if key not in fields:
                raise ValueError(f"unknown key {key!r} in section [{section}] of {path}")
            setattr(obj, key, _coerce(raw, fields[key].type, cls, key))
    # detunings follow delta_lp unless explicitly set
    if parser.has_section("model") and not parser.has_option("model", "delta_c"):
        bundle.model.delta_c = None
        bundle.model.delta_x = None
        bundle.model.__post_init__()
    return bundle


def _coerce(raw: str, annotation, cls, key):
    raw = raw.strip()
    ann = str(annotation)
    if "list" in ann:
        return [float(v) for v in raw.replace(",", " ").split()]
    if "bool" in ann:
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in ann:
        return int(raw)
    if "float" in ann:
        if "None" in ann and raw.lower() == "none":
            return None
        return float(raw)
    if "str" in ann:
        return raw
    raise ValueError(f"cannot coerce config value for {cls.__name__}.{key}")

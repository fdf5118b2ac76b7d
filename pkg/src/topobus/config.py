"""YAML run configuration: parsing, unit conversion and validation.

Grammar (all sections optional, unknown keys rejected)::

    experiment: phase-diagram      # must match the CLI subcommand if given
    seed: 0
    format: csv                    # csv | json
    output: results.csv
    wire:                          # bare numbers: internal units (t = a = 1)
      chemical_potential: 0.0      # any unit suffix switches the block to
      pairing: 0.5                 # physical units (meV, nm, T, m_e)
      ...
    flux:                          # bare numbers: GHz (h = 1)
      e_j: 10 GHz
      ...
    <experiment_name>:             # per-experiment options, see OPTION_DEFAULTS

Quantities may be written ``"0.25 meV"``, ``"120 ueV"``, ``"1.5 GHz"``,
``"0.8 T"``, ``"2000 nm"`` or ``"20 meV nm"``.
"""

from __future__ import annotations

import copy
import re
from dataclasses import asdict, dataclass, field
from typing import Any

import yaml

from .flux_qubit import FluxQubitParameters
from .wire_model import WireParameters, zeeman_splitting

EXPERIMENTS = (
    "wire-spectrum",
    "phase-diagram",
    "majorana-splitting",
    "flux-potential",
    "flux-splitting",
    "entangle",
    "teleport",
    "bell-stats",
)
PROTOCOL_EXPERIMENTS = ("entangle", "teleport")

_H = 2**-0.5

OPTION_DEFAULTS: dict[str, dict[str, Any]] = {
    "wire-spectrum": {},
    "phase-diagram": {
        "mu": {"start": 0.0, "stop": 1.0, "num": 11},
        "zeeman": {"start": 0.0, "stop": 1.6, "num": 33},
    },
    "majorana-splitting": {"lengths": [16, 20, 24, 28, 32, 36, 40, 44, 48, 52, 56, 60, 64]},
    "flux-potential": {"grid": 101},
    "flux-splitting": {"q_ext": {"start": 0.0, "stop": 2.0, "num": 41}},
    "entangle": {"flux_id": 1, "psi_t": [_H, _H], "psi_c": [_H, _H], "q_ext": 0.0},
    "teleport": {"source": 0, "target": 3, "input": [_H, _H], "resource": "measured"},
    "bell-stats": {"flux_id": 1, "state": [[1.0, 0.0], [1.0, 0.0]], "samples": 10000},
}

WIRE_KEYS = (
    "effective_mass",
    "chemical_potential",
    "rashba",
    "zeeman",
    "zeeman_field",
    "g_factor",
    "pairing",
    "length",
    "num_sites",
)
FLUX_KEYS = ("e_j", "e_j2", "e_c", "flux", "attempt_frequency")
TOP_KEYS = ("experiment", "seed", "format", "output", "wire", "flux") + tuple(e.replace("-", "_") for e in EXPERIMENTS)

_ENERGY_MEV = {"mev": 1.0, "uev": 1e-3, "μev": 1e-3, "µev": 1e-3, "ev": 1e3}
_LENGTH_NM = {"nm": 1.0, "um": 1e3, "μm": 1e3, "µm": 1e3}
_FIELD_T = {"t": 1.0, "mt": 1e-3}
_FREQ_GHZ = {"ghz": 1.0, "mhz": 1e-3}
_MEV_TO_GHZ = 241.79894242  # 1 meV / h in GHz
_FREQ_OR_ENERGY = {**_FREQ_GHZ, **{k: v * _MEV_TO_GHZ for k, v in _ENERGY_MEV.items()}}
_RASHBA = {"mevnm": 1.0, "mev*nm": 1.0, "mev·nm": 1.0, "evnm": 1e3}

_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


class ConfigError(ValueError):
    """Parse or validation failure; ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass
class RunConfig:
    experiment: str | None
    wire: WireParameters
    flux: FluxQubitParameters
    options: dict[str, Any]
    output: str | None = None
    seed: int = 0
    format: str | None = None
    echo: dict[str, Any] = field(default_factory=dict)


def _split_quantity(value, path: str) -> tuple[float, str | None]:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got a boolean", path)
    if isinstance(value, (int, float)):
        return float(value), None
    if isinstance(value, str):
        m = _QTY.match(value)
        if m:
            unit = m.group(2).replace(" ", "").lower() or None
            return float(m.group(1)), unit
    raise ConfigError(f"{path}: cannot read {value!r} as a number with optional unit", path)


def _convert(value, table: dict[str, float], path: str, default_unit: str) -> tuple[float, bool]:
    num, unit = _split_quantity(value, path)
    if unit is None:
        return num, False
    if unit not in table:
        raise ConfigError(f"{path}: unit {unit!r} not accepted here (use {', '.join(table)}; default {default_unit})", path)
    return num * table[unit], True


def _check_keys(block: Any, valid, where: str):
    if block is None:
        return {}
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(block).__name__}", where)
    unknown = sorted(set(block) - set(valid))
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}; valid keys: {', '.join(valid)}", f"{where}.{unknown[0]}")
    return block


def _wire(block: dict) -> tuple[WireParameters, dict]:
    block = _check_keys(block, WIRE_KEYS, "wire")
    if "zeeman" in block and "zeeman_field" in block:
        raise ConfigError("wire: give either zeeman or zeeman_field, not both", "wire.zeeman")
    tables = {
        "chemical_potential": _ENERGY_MEV,
        "zeeman": _ENERGY_MEV,
        "pairing": _ENERGY_MEV,
        "length": _LENGTH_NM,
        "rashba": _RASHBA,
        "zeeman_field": _FIELD_T,
    }
    values: dict[str, float] = {}
    physical = "zeeman_field" in block
    for key, raw in block.items():
        if key in ("num_sites",):
            if not isinstance(raw, int) or isinstance(raw, bool):
                raise ConfigError(f"wire.num_sites: must be an integer >= 2, got {raw!r}", "wire.num_sites")
            values[key] = raw
            continue
        if key in ("effective_mass", "g_factor"):
            values[key], _ = _convert(raw, {}, f"wire.{key}", "dimensionless")
            continue
        values[key], had_unit = _convert(raw, tables[key], f"wire.{key}", "")
        physical |= had_unit
    if values.get("pairing", 0.0) < 0:
        raise ConfigError("wire.pairing: must be >= 0 (proximity-induced pairing)", "wire.pairing")
    if "effective_mass" in values and values["effective_mass"] <= 0:
        raise ConfigError("wire.effective_mass: must be > 0", "wire.effective_mass")
    if "length" in values and values["length"] <= 0:
        raise ConfigError("wire.length: must be > 0", "wire.length")
    if "num_sites" in values and values["num_sites"] < 2:
        raise ConfigError("wire.num_sites: must be >= 2", "wire.num_sites")
    if physical:
        if "zeeman_field" in values:
            values["zeeman"] = zeeman_splitting(values.pop("g_factor", 2.0), values.pop("zeeman_field"))
        values.pop("g_factor", None)
        num_sites = int(values.get("num_sites", 200))
        try:
            p = WireParameters.from_physical(
                values.get("effective_mass", 0.015),
                values.get("chemical_potential", 0.0),
                values.get("rashba", 20.0),
                values.get("zeeman", 0.5),
                values.get("pairing", 0.25),
                values.get("length", 2000.0),
                num_sites,
            )
        except ValueError as exc:
            raise ConfigError(f"wire: {exc}", "wire") from exc
        return p, {"units": "physical", "input": dict(values), **asdict(p)}
    if "g_factor" in values:
        raise ConfigError("wire.g_factor: only meaningful with zeeman_field", "wire.g_factor")
    try:
        p = WireParameters(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"wire: {exc}", "wire") from exc
    return p, {"units": "internal", **asdict(p)}


def _flux(block: dict) -> tuple[FluxQubitParameters, dict]:
    block = _check_keys(block, FLUX_KEYS, "flux")
    values = {}
    for key, raw in block.items():
        if key == "flux":
            values[key], _ = _convert(raw, {}, "flux.flux", "flux quanta")
        else:
            values[key], _ = _convert(raw, _FREQ_OR_ENERGY, f"flux.{key}", "GHz")
    for key in ("e_j", "e_j2", "e_c", "attempt_frequency"):
        if key in values and values[key] <= 0:
            raise ConfigError(f"flux.{key}: must be > 0", f"flux.{key}")
    p = FluxQubitParameters(**values)
    return p, asdict(p)


def _merge(defaults: dict, given: dict, where: str) -> dict:
    given = _check_keys(given, tuple(defaults), where)
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(defaults[k], dict):
            out[k] = _merge(defaults[k], v, f"{where}.{k}")
        else:
            out[k] = v
    return out


def _complex(v, path: str) -> complex:
    try:
        if isinstance(v, str):
            return complex(v.replace(" ", "").replace("i", "j"))
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(float(v[0]), float(v[1]))
        return complex(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: cannot read {v!r} as a complex amplitude", path) from exc


def _qubit_state(v, path: str) -> tuple[complex, complex]:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(f"{path}: expected two amplitudes [alpha, beta]", path)
    a, b = _complex(v[0], f"{path}[0]"), _complex(v[1], f"{path}[1]")
    norm = (abs(a) ** 2 + abs(b) ** 2) ** 0.5
    if abs(norm - 1) > 1e-6:
        raise ConfigError(f"{path}: amplitudes must be normalized, |alpha|^2+|beta|^2 = {norm**2:.6g}", path)
    return a / norm, b / norm


def _range(spec: dict, path: str) -> dict:
    try:
        start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: start/stop must be numbers and num an integer", path) from exc
    if num < 1:
        raise ConfigError(f"{path}.num: must be >= 1", f"{path}.num")
    return {"start": start, "stop": stop, "num": num}


def _validate_options(experiment: str, opts: dict) -> dict:
    where = experiment.replace("-", "_")
    if experiment == "phase-diagram":
        opts["mu"] = _range(opts["mu"], f"{where}.mu")
        opts["zeeman"] = _range(opts["zeeman"], f"{where}.zeeman")
    elif experiment == "majorana-splitting":
        ls = opts["lengths"]
        if not isinstance(ls, list) or not ls or not all(isinstance(x, (int, float)) and x > 0 for x in ls):
            raise ConfigError(f"{where}.lengths: must be a non-empty list of positive lengths", f"{where}.lengths")
    elif experiment == "flux-potential":
        if not isinstance(opts["grid"], int) or opts["grid"] < 2:
            raise ConfigError(f"{where}.grid: must be an integer >= 2", f"{where}.grid")
    elif experiment == "flux-splitting":
        opts["q_ext"] = _range(opts["q_ext"], f"{where}.q_ext")
    elif experiment == "entangle":
        opts["psi_t"] = _qubit_state(opts["psi_t"], f"{where}.psi_t")
        opts["psi_c"] = _qubit_state(opts["psi_c"], f"{where}.psi_c")
        opts["q_ext"] = float(opts["q_ext"])
    elif experiment == "teleport":
        opts["input"] = _qubit_state(opts["input"], f"{where}.input")
        if opts["resource"] not in ("measured", "injected"):
            raise ConfigError(f"{where}.resource: must be 'measured' or 'injected'", f"{where}.resource")
    elif experiment == "bell-stats":
        st = opts["state"]
        if not isinstance(st, list) or len(st) != 2:
            raise ConfigError(f"{where}.state: expected two single-qubit states", f"{where}.state")
        opts["state"] = [_qubit_state(q, f"{where}.state[{k}]") for k, q in enumerate(st)]
        if not isinstance(opts["samples"], int) or opts["samples"] < 1:
            raise ConfigError(f"{where}.samples: must be a positive integer", f"{where}.samples")
    return opts


def _echo_value(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_echo_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _echo_value(x) for k, x in v.items()}
    return v


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Parse and validate a YAML document; ``experiment`` selects option defaults."""
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"parse error at {where}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error: {exc}") from exc
    doc = _check_keys(doc or {}, TOP_KEYS, "config")
    declared = doc.get("experiment")
    if declared is not None and declared not in EXPERIMENTS:
        raise ConfigError(f"experiment: {declared!r} is not one of {', '.join(EXPERIMENTS)}", "experiment")
    if experiment is not None and declared is not None and declared != experiment:
        raise ConfigError(f"experiment: config declares {declared!r} but {experiment!r} was requested", "experiment")
    experiment = experiment or declared
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed: must be a non-negative integer", "seed")
    fmt = doc.get("format")
    if fmt is not None and fmt not in ("csv", "json"):
        raise ConfigError("format: must be csv or json", "format")
    wire, wire_echo = _wire(doc.get("wire"))
    flux, flux_echo = _flux(doc.get("flux"))
    for exp in EXPERIMENTS:
        key = exp.replace("-", "_")
        if key in doc and exp != experiment:
            _merge(OPTION_DEFAULTS[exp], doc[key], key)
    options: dict[str, Any] = {}
    if experiment is not None:
        key = experiment.replace("-", "_")
        options = _validate_options(experiment, _merge(OPTION_DEFAULTS[experiment], doc.get(key), key))
    echo = {
        "experiment": experiment,
        "seed": seed,
        "wire": wire_echo,
        "flux": flux_echo,
        "options": _echo_value(options),
    }
    return RunConfig(experiment, wire, flux, options, doc.get("output"), seed, fmt, echo)

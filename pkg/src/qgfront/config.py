"""Experiment configuration: versioned YAML schema, overrides, hashing.

Unknown keys are rejected so that typos fail loudly before any compute.
"""

import hashlib
import json
import math

import yaml

from . import solver
from .kernel import QuadratureSpec


class ConfigError(ValueError):
    pass


SCHEMA_VERSION = 1

# key -> (type, default); nested dicts mirror the document structure
_SOLVER_KEYS = {
    "n": (int, 512),
    "length": (float, 80.0),
    "frame": (str, "moving"),
    "jump": (float, 1.0 / math.pi),
    "t_final": (float, 10.0),
    "dt": (float, 0.1),
    "adaptive": (bool, False),
    "tol": (float, 1e-9),
    "nonlinearity": (str, "series"),
    "mu_max": (int, 3),
    "dealias": (float, 2.0 / 3.0),
}
_INITIAL_KEYS = {
    "family": (str, "gaussian"),
    "amplitude": (float, 1e-2),
    "width": (float, 1.0),
    "center": (float, 0.0),
    "k_lo": (float, 1.0),
    "k_hi": (float, 2.0),
    "phases": (str, "zero"),
    "rise": (float, 6.0),
    "fall": (float, 1.5),
    "modes": (list, None),
    "path": (str, None),
}
_QUAD_KEYS = {
    "inner_cutoff": (float, 1.0),
    "inner_panels": (int, 3),
    "inner_nodes": (int, 20),
    "inner_smax": (float, 18.0),
    "z_max": (float, 40.0),
    "outer_panel": (float, 2.0),
    "outer_nodes": (int, 16),
}
_DIAG_KEYS = {
    "cadence": (float, 1.0),
    "sobolev_s": (float, 8.0),
    "track": (list, None),
    "pad": (int, 4),
}
_OUTPUT_KEYS = {
    "dir": (str, "runs"),
    "name": (str, ""),
}
_TOP = {
    "version": (int, SCHEMA_VERSION),
    "seed": (int, 0),
    "solver": _SOLVER_KEYS,
    "initial": _INITIAL_KEYS,
    "quadrature": _QUAD_KEYS,
    "diagnostics": _DIAG_KEYS,
    "output": _OUTPUT_KEYS,
}


def default_config():
    out = {}
    for key, spec in _TOP.items():
        if isinstance(spec, dict):
            out[key] = {k: v for k, (_, v) in spec.items() if v is not None}
        else:
            out[key] = spec[1]
    return out


def _validate_section(section, data, schema, path):
    if not isinstance(data, dict):
        raise ConfigError(f"section '{path}' must be a mapping")
    for key, value in data.items():
        if key not in schema:
            raise ConfigError(f"unknown key '{path}.{key}'")
        typ, _ = schema[key]
        if value is None:
            continue
        if typ is float and isinstance(value, int):
            value = float(value)
            data[key] = value
        if typ is bool and not isinstance(value, bool):
            raise ConfigError(f"key '{path}.{key}' must be a boolean")
        if not isinstance(value, typ):
            raise ConfigError(
                f"key '{path}.{key}' must be {typ.__name__}, got {type(value).__name__}")


def validate(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config document must be a mapping")
    for key, value in cfg.items():
        if key not in _TOP:
            raise ConfigError(f"unknown top-level key '{key}'")
        spec = _TOP[key]
        if isinstance(spec, dict):
            _validate_section(key, value, spec, key)
        elif key == "version":
            if value != SCHEMA_VERSION:
                raise ConfigError(f"unsupported schema version {value}")
        elif not isinstance(value, spec[0]):
            raise ConfigError(f"key '{key}' must be {spec[0].__name__}")
    return cfg


def load_config(path):
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    merged = default_config()
    validate(doc)
    for key, value in doc.items():
        if isinstance(value, dict):
            merged[key].update(value)
        else:
            merged[key] = value
    validate(merged)
    return merged


def _coerce(text):
    low = text.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def apply_overrides(cfg, overrides):
    """Apply --override KEY=VAL entries (dotted paths)."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not KEY=VAL")
        key, _, raw = item.partition("=")
        parts = key.strip().split(".")
        node = cfg
        for p in parts[:-1]:
            if p not in node or not isinstance(node[p], dict):
                raise ConfigError(f"override path '{key}' not in schema")
            node = node[p]
        leaf = parts[-1]
        schema = _TOP
        for p in parts[:-1]:
            schema = schema[p]
        if leaf not in schema:
            raise ConfigError(f"override key '{key}' not in schema")
        node[leaf] = _coerce(raw)
    validate(cfg)
    return cfg


def config_hash(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:12]


def to_run_config(cfg):
    s = cfg["solver"]
    init = cfg["initial"]
    family = init.get("family", "gaussian")
    params = {k: v for k, v in init.items() if k != "family" and v is not None}
    if family == "modes" and "modes" in params:
        params["modes"] = [tuple(m) for m in params["modes"]]
    quad = QuadratureSpec(**cfg.get("quadrature", {}))
    return solver.RunConfig(
        n=s["n"], length=s["length"], frame=s["frame"], jump=s["jump"],
        t_final=s["t_final"], dt=s["dt"], adaptive=s["adaptive"], tol=s["tol"],
        nonlinearity=s["nonlinearity"], mu_max=s["mu_max"], dealias=s["dealias"],
        cadence=cfg["diagnostics"]["cadence"], quad=quad,
        initial_family=family, initial_params=tuple(sorted(params.items())),
        seed=cfg["seed"],
    )

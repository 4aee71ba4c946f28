"""Run configurations: JSON files validated against per-command schemas, merged with flags."""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any, Dict, Optional

import jsonschema


class ConfigError(ValueError):
    """Unreadable or invalid configuration; the message carries file:line diagnostics."""


_NUM = {"type": "number"}
_INT = {"type": "integer"}
_POS_INT = {"type": "integer", "minimum": 1}
_BOOL = {"type": "boolean"}
_STR = {"type": "string"}
_OBJ_OR_PATH = {"type": ["object", "string"]}
_NUM_LIST = {"type": "array", "items": _NUM}

_COMMON = {"out": _STR, "seed": _INT, "svg": _BOOL, "command": _STR}

SCHEMAS: Dict[str, dict] = {
    "check-identities": {
        "n": _POS_INT, "deg": _POS_INT, "trials": _POS_INT, "names": {"type": ["array", "null"], "items": _STR},
    },
    "certify-convexity": {
        "potential": _OBJ_OR_PATH, "N": _POS_INT, "tuples": _POS_INT, "tol": _NUM,
    },
    "sample": {
        "potential": _OBJ_OR_PATH, "N": _POS_INT, "count": _POS_INT, "burnin": _INT, "thin": _POS_INT,
        "step": _NUM, "mala": _BOOL, "chains": {"type": ["integer", "null"]}, "adapt": _BOOL,
        "sd_tol": {"type": ["number", "null"]}, "ks_tol": {"type": ["number", "null"]},
    },
    "sde": {
        "fam": _OBJ_OR_PATH, "alpha": _NUM, "N": _POS_INT, "T": _NUM, "dt": _NUM, "record_every": _POS_INT,
        "slope_factor": _NUM,
    },
    "semigroup": {
        "fam": _OBJ_OR_PATH, "alpha": _NUM, "poly": _STR, "N": _POS_INT, "paths": _POS_INT, "dt": _NUM,
        "t": _NUM_LIST, "richardson": _BOOL, "rel_tol": _NUM, "z_tol": _NUM,
    },
    "transport": {
        "fam": _OBJ_OR_PATH, "N": _POS_INT, "count": _POS_INT, "T": _NUM, "dt": _NUM, "paths": _POS_INT,
        "d_alpha": _NUM, "alpha_max": _NUM, "mode": {"enum": ["adjoint", "fd"]}, "scheme": {"enum": ["heun", "rk4"]},
        "grid": {"enum": ["uniform", "graded"]}, "grid_power": _NUM, "richardson": _BOOL, "single": _BOOL,
        "tail_tol": _NUM, "antithetic": _BOOL, "noise": {"enum": ["auto", "on", "off"]},
        "sampler": {"type": ["object", "null"]}, "map_tol": _NUM, "ks_tol": _NUM, "sd_tol": _NUM,
    },
    "onevar": {
        "V": _NUM_LIST, "W": {"type": ["array", "null"], "items": _NUM}, "grid": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
        "alpha_steps": _POS_INT, "s_horizon": _NUM, "ds": _NUM, "refine": _POS_INT, "map_tol": _NUM,
        "sd_tol": _NUM, "ensemble": {"type": ["string", "null"]},
    },
}


def schema(command: str) -> dict:
    props = dict(_COMMON)
    props.update(SCHEMAS[command])
    return {"type": "object", "properties": props, "additionalProperties": False}


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config(path, command: str) -> Dict[str, Any]:
    """Parse and validate a JSON config; errors name the file and line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror})") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    validate(data, command, path, text)
    return data


def validate(data: dict, command: str, path="<config>", text: str = "") -> None:
    v = jsonschema.Draft7Validator(schema(command))
    errs = sorted(v.iter_errors(data), key=lambda e: list(e.path))
    if not errs:
        return
    msgs = []
    for e in errs:
        key = str(e.path[0]) if e.path else None
        if key is None and e.validator == "additionalProperties":
            found = re.findall(r"'([^']+)'", e.message)
            key = found[0] if found else None
        line = _line_of(text, key) if (text and key) else None
        where = f"{path}:{line}" if line else str(path)
        msgs.append(f"{where}: {'/'.join(map(str, e.path)) or key or '(root)'}: {e.message}")
    raise ConfigError("\n".join(msgs))


def resolve(defaults: dict, file_cfg: Optional[dict], overrides: dict) -> dict:
    """defaults < config file < explicit flags (flags left unset are None and ignored)."""
    out = dict(defaults)
    out.update(file_cfg or {})
    out.update({k: v for k, v in overrides.items() if v is not None})
    return out


def load_json_object(ref, base: Optional[Path] = None) -> dict:
    """Inline object, or a path (relative to ``base`` when given) to a JSON file holding one."""
    if isinstance(ref, dict):
        return ref
    p = Path(ref)
    if base is not None and not p.is_absolute() and not p.exists():
        p = base / p
    try:
        return json.loads(p.read_text())
    except OSError as e:
        raise ConfigError(f"{p}: cannot read ({e.strerror})") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{p}:{e.lineno}:{e.colno}: {e.msg}") from e


def write_resolved(out: Path, cfg: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / "config.json"
    p.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
    return p

"""Flat ``key = value`` config files for networks and parameter sweeps.

A network file holds exactly the keys in :data:`CONFIG_KEYS`; ``#`` starts a
comment and blank lines are ignored. Quantities carrying a ``_db``/``_dbm``
suffix are converted to linear units here and nowhere else. A sweep file
holds the same keys plus ``sweep_param``, ``sweep_start``, ``sweep_stop`` and
``sweep_step``; the swept key itself may be omitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .radio import NetworkConfig, NodeLayout, db_to_linear, dbm_to_mw

__all__ = [
    "CONFIG_KEYS",
    "SWEEP_PARAMS",
    "ConfigError",
    "SweepSpec",
    "parse_config",
    "load_config",
    "parse_sweep",
    "load_sweep",
    "config_from_values",
    "format_config",
]

CONFIG_KEYS = (
    "s_x", "s_y", "r1_x", "r1_y", "r2_x", "r2_y", "d_x", "d_y",
    "p_s_dbm", "n0_dbm", "alpha", "r0", "eta", "m1_mj", "m2_mj",
    "inv_lambda1_db", "inv_lambda2_db",
)

# sweep parameter name -> config key it overrides
SWEEP_PARAMS = {
    "lambda1_db": "inv_lambda1_db",
    "lambda2_db": "inv_lambda2_db",
    "p_s_dbm": "p_s_dbm",
    "r0": "r0",
    "m1": "m1_mj",
    "m2": "m2_mj",
}
_SWEEP_KEYS = ("sweep_param", "sweep_start", "sweep_stop", "sweep_step")


class ConfigError(ValueError):
    """Malformed or invalid config; ``line`` is the 1-based offending line when known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _tokenize(text: str, source: str, allowed: tuple[str, ...]):
    """Yield ``(key, raw_value, line_no)``; rejects unknown and duplicate keys."""
    seen = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", no, source)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", no, source)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", no, source)
        if not value:
            raise ConfigError(f"missing value for {key!r}", no, source)
        seen[key] = no
        yield key, value, no


_POSITIVE = ("m1_mj", "m2_mj", "alpha", "r0")


def _number(key, value, no, source) -> float:
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {value!r}", no, source) from None
    if not math.isfinite(x):
        raise ConfigError(f"{key}: must be finite, got {value!r}", no, source)
    if key in _POSITIVE and not x > 0:
        raise ConfigError(f"{key}: must be > 0, got {value}", no, source)
    if key == "eta" and not 0 < x <= 1:
        raise ConfigError(f"eta: must lie in (0, 1], got {value}", no, source)
    return x


def config_from_values(values: dict[str, float]) -> NetworkConfig:
    """Convert a complete ``CONFIG_KEYS`` mapping to linear units."""
    layout = NodeLayout(
        s_pos=(values["s_x"], values["s_y"]),
        r1_pos=(values["r1_x"], values["r1_y"]),
        r2_pos=(values["r2_x"], values["r2_y"]),
        d_pos=(values["d_x"], values["d_y"]),
    )
    return NetworkConfig(
        layout=layout,
        p_s=dbm_to_mw(values["p_s_dbm"]),
        m1=values["m1_mj"],
        m2=values["m2_mj"],
        lambda1=1.0 / db_to_linear(values["inv_lambda1_db"]),
        lambda2=1.0 / db_to_linear(values["inv_lambda2_db"]),
        n0=dbm_to_mw(values["n0_dbm"]),
        alpha=values["alpha"],
        r0=values["r0"],
        eta=values["eta"],
    )


def _build(values, source) -> NetworkConfig:
    try:
        return config_from_values(values)
    except ValueError as exc:  # coincident nodes: no single offending line
        raise ConfigError(str(exc), None, source) from None


def _missing(values, required, source):
    missing = [k for k in required if k not in values]
    if missing:
        raise ConfigError(f"missing key(s): {', '.join(missing)}", None, source)


def parse_config(text: str, source: str = "<config>") -> NetworkConfig:
    values = {}
    for key, value, no in _tokenize(text, source, CONFIG_KEYS):
        values[key] = _number(key, value, no, source)
    _missing(values, CONFIG_KEYS, source)
    return _build(values, source)


def load_config(path) -> NetworkConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))


@dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over ``start, start + step, ..., <= stop`` with the rest fixed."""

    param: str
    start: float
    stop: float
    step: float
    base: dict

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"sweep_param must be one of {sorted(SWEEP_PARAMS)}, got {self.param!r}")
        if not self.step > 0:
            raise ValueError("sweep_step must be > 0")
        if not self.start <= self.stop:
            raise ValueError("sweep_start must be <= sweep_stop")

    @property
    def key(self) -> str:
        return SWEEP_PARAMS[self.param]

    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        # round away accumulated float noise so 0.1-style steps print cleanly
        return np.round(self.start + self.step * np.arange(n), 12)

    def configs(self) -> list[tuple[float, NetworkConfig]]:
        out = []
        for v in self.values():
            vals = dict(self.base)
            vals[self.key] = float(v)
            out.append((float(v), config_from_values(vals)))
        return out


def parse_sweep(text: str, source: str = "<sweep>") -> SweepSpec:
    values, lines, param = {}, {}, None
    for key, value, no in _tokenize(text, source, CONFIG_KEYS + _SWEEP_KEYS):
        lines[key] = no
        if key == "sweep_param":
            if value not in SWEEP_PARAMS:
                raise ConfigError(f"sweep_param must be one of {sorted(SWEEP_PARAMS)}, got {value!r}",
                                  no, source)
            param = value
        else:
            values[key] = _number(key, value, no, source)
    _missing(values | ({"sweep_param": 0} if param else {}), _SWEEP_KEYS, source)
    swept = SWEEP_PARAMS[param]
    _missing(values, [k for k in CONFIG_KEYS if k != swept], source)
    start, stop, step = (values.pop(k) for k in _SWEEP_KEYS[1:])
    try:
        spec = SweepSpec(param, start, stop, step, {k: v for k, v in values.items()})
    except ValueError as exc:
        where = "sweep_step" if "step" in str(exc) else "sweep_stop"
        raise ConfigError(str(exc), lines.get(where), source) from None
    # validate every point's config so domain errors surface before any work
    for v in spec.values():
        vals = dict(spec.base)
        vals[swept] = float(v)
        try:
            config_from_values(vals)
        except ValueError as exc:
            raise ConfigError(f"{param} = {v!r}: {exc}", lines.get("sweep_start"), source) from None
    return spec


def load_sweep(path) -> SweepSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", None, str(path)) from None
    return parse_sweep(text, str(path))


def format_config(values: dict[str, float]) -> str:
    """Render a ``CONFIG_KEYS`` mapping in the file format (round-trips through ``parse_config``)."""
    return "".join(f"{k} = {values[k]!r}\n" for k in CONFIG_KEYS)

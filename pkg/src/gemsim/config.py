"""Flat key-value run configuration: parse, resolve, serialize.

Grammar: one `dotted.key = value` per line, `#` starts a comment, blank
lines ignored.  Values are parsed as int, float, complex, bool, a bare
string, or a comma-separated list of those.  Orientation families use
`sign:weight` items, e.g. `medium.orientations = +1:0.5,-1:0.5`.

Every physical parameter is either set explicitly or resolved from a
named preset; the effective configuration is echoed next to the outputs
so a run can be reproduced from its own echo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Tuple

from .errors import ConfigError
from .params import (
    CascadeSpec,
    GridSpec,
    IntrinsicLineModel,
    MediumParams,
    Protocol,
    PulseSpec,
)

PRESET_NAMES = (
    "fig1_ideal",
    "fig2_short_storage",
    "fig2_long_storage",
    "fig4_experiment",
    "fig4_improved",
    "cascade_demo",
)

_KNOWN_KEYS = {
    "scenario",
    "medium.coupling", "medium.density", "medium.gradient", "medium.z_half",
    "medium.decay", "medium.orientations",
    "medium.intrinsic.shape", "medium.intrinsic.width",
    "medium.intrinsic.n_classes", "medium.intrinsic.truncation",
    "pulse.shape", "pulse.duration", "pulse.amplitude", "pulse.center",
    "pulse.carrier_offset",
    "grid.n_z", "grid.dt", "grid.t_start", "grid.t_end", "grid.store_stride",
    "protocol.flip_times", "protocol.initial_sign",
    "cascade.enabled", "cascade.storage", "cascade.beta_scale",
}

_DEFAULTS: Dict[str, object] = {
    "medium.coupling": 1.0,
    "medium.decay": 0.0,
    "medium.z_half": 1.0,
    "medium.orientations": "+1:1.0",
    "medium.intrinsic.shape": "delta",
    "medium.intrinsic.width": 0.0,
    "medium.intrinsic.n_classes": 1,
    "medium.intrinsic.truncation": 10.0,
    "pulse.shape": "gaussian",
    "pulse.amplitude": (1.0 + 0.0j),
    "pulse.carrier_offset": 0.0,
    "grid.store_stride": 16,
    "protocol.flip_times": (0.0,),
    "protocol.initial_sign": 1,
    "cascade.enabled": False,
    "cascade.storage": 8.0,
    "cascade.beta_scale": 1.0,
}

_REQUIRED = (
    "medium.density", "medium.gradient",
    "pulse.duration", "pulse.center",
    "grid.n_z", "grid.dt", "grid.t_start", "grid.t_end",
)


def _parse_scalar(text: str):
    s = text.strip()
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    try:
        return complex(s.replace(" ", ""))
    except ValueError:
        pass
    return s


def parse_value(text: str):
    s = text.strip()
    if "," in s:
        return tuple(_parse_scalar(p) for p in s.split(",") if p.strip())
    return _parse_scalar(s)


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ",".join(format_value(v) for v in value)
    if isinstance(value, complex):
        if value.imag == 0.0:
            return repr(value.real)
        return format(value, "").strip("()")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, object]:
    out: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"{source}:{lineno}: expected 'key = value', got {raw!r}"
            )
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}",
                              key=key)
        out[key] = parse_value(val)
    return out


def load_preset(name: str) -> Dict[str, object]:
    if name not in PRESET_NAMES:
        raise ConfigError(
            f"unknown scenario {name!r}; available: {', '.join(PRESET_NAMES)}",
            key="scenario",
        )
    text = (resources.files("gemsim") / "scenarios" / f"{name}.cfg").read_text()
    return parse_config_text(text, source=f"{name}.cfg")


def _parse_orientations(value) -> Tuple[Tuple[float, float], ...]:
    items = value if isinstance(value, tuple) else (value,)
    fams = []
    for item in items:
        s = str(item)
        if ":" not in s:
            raise ConfigError(
                f"orientation item {s!r} is not 'sign:weight'",
                key="medium.orientations",
            )
        sgn, _, wt = s.partition(":")
        fams.append((float(sgn), float(wt)))
    return tuple(fams)


@dataclass
class RunConfig:
    """A fully resolved run: all physical and grid parameters pinned."""

    values: Dict[str, object] = field(default_factory=dict)
    scenario: Optional[str] = None

    @classmethod
    def resolve(
        cls,
        scenario: Optional[str] = None,
        file_values: Optional[Dict[str, object]] = None,
        overrides: Optional[Dict[str, object]] = None,
    ) -> "RunConfig":
        """Preset < config file < --set overrides, then defaults."""
        merged: Dict[str, object] = {}
        file_values = dict(file_values or {})
        name = scenario or file_values.pop("scenario", None)
        if name is not None:
            merged.update(load_preset(str(name)))
            merged.pop("scenario", None)
        merged.update(file_values)
        if overrides:
            for k, v in overrides.items():
                if k not in _KNOWN_KEYS:
                    raise ConfigError(f"unknown key {k!r}", key=k)
                merged[k] = v
        for k, v in _DEFAULTS.items():
            merged.setdefault(k, v)
        missing = [k for k in _REQUIRED if k not in merged]
        if missing:
            raise ConfigError(
                f"missing required keys: {', '.join(missing)}",
                key=missing[0],
            )
        return cls(values=merged, scenario=name)

    def _get(self, key: str, kind=float):
        try:
            v = self.values[key]
        except KeyError:
            raise ConfigError(f"missing key {key!r}", key=key) from None
        try:
            if kind is float:
                return float(v)
            if kind is int:
                iv = int(v)
                if iv != float(v):
                    raise ValueError
                return iv
            if kind is complex:
                return complex(v)
            if kind is bool:
                if not isinstance(v, bool):
                    raise ValueError
                return v
            return v
        except (TypeError, ValueError):
            raise ConfigError(
                f"key {key!r} has invalid value {v!r}", key=key
            ) from None

    def build(self):
        """Return (medium, pulse, grid, protocol)."""
        intr = IntrinsicLineModel(
            shape=str(self._get("medium.intrinsic.shape", str)),
            width=self._get("medium.intrinsic.width"),
            n_classes=self._get("medium.intrinsic.n_classes", int),
            truncation=self._get("medium.intrinsic.truncation"),
        )
        medium = MediumParams(
            coupling=self._get("medium.coupling"),
            density=self._get("medium.density"),
            gradient=self._get("medium.gradient"),
            z_half=self._get("medium.z_half"),
            decay=self._get("medium.decay"),
            intrinsic=intr,
            orientations=_parse_orientations(self.values["medium.orientations"]),
        )
        pulse = PulseSpec(
            shape=str(self._get("pulse.shape", str)),
            duration=self._get("pulse.duration"),
            amplitude=self._get("pulse.amplitude", complex),
            center=self._get("pulse.center"),
            carrier_offset=self._get("pulse.carrier_offset"),
        )
        grid = GridSpec(
            n_z=self._get("grid.n_z", int),
            dt=self._get("grid.dt"),
            t_start=self._get("grid.t_start"),
            t_end=self._get("grid.t_end"),
            store_stride=self._get("grid.store_stride", int),
        )
        ft = self.values["protocol.flip_times"]
        if not isinstance(ft, tuple):
            ft = (ft,)
        protocol = Protocol(
            flip_times=tuple(float(x) for x in ft),
            initial_sign=self._get("protocol.initial_sign", int),
            cascade=self.cascade_spec(),
        )
        return medium, pulse, grid, protocol

    def cascade_spec(self) -> Optional[CascadeSpec]:
        if not self._get("cascade.enabled", bool):
            return None
        return CascadeSpec(
            storage=self._get("cascade.storage"),
            beta_scale=self._get("cascade.beta_scale"),
        )

    def dump(self) -> str:
        """Serialize the fully resolved configuration (echo format)."""
        lines = ["# gemsim resolved configuration"]
        for key in sorted(self.values):
            lines.append(f"{key} = {format_value(self.values[key])}")
        return "\n".join(lines) + "\n"


def parse_set_overrides(items: List[str]) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, val = item.partition("=")
        out[key.strip()] = parse_value(val)
    return out

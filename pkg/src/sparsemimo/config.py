"""Simulation configuration and its JSON form.

The JSON layout is::

    {"system":    {"n", "fs_hz", "fc_hz", "ng"},
     "channel":   {"p", "tau_max_s", "delay_profile", "power_profile_db", "normalize_power"},
     "geometry":  {"nt", "nr"},
     "doppler":   {"speed_mps"},
     "pilot":     {"np", "d", "theta"},
     "estimator": {"r", "p_assumed", "order_selection"}}

Every section and key is optional; unknown keys are rejected.
``delay_profile`` is ``"itu_veh_b"``, ``"uniform_random"``, or
``{"explicit": [delays in s]}``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ConfigError, InvalidField, UnknownKey
from .params import (
    ITU_VEH_B_DELAYS,
    ITU_VEH_B_POWERS_DB,
    ChannelParams,
    DelayProfile,
    DopplerParams,
    EstimatorConfig,
    MimoGeometry,
    SystemParams,
    validate,
)
from .pilots import PilotPlan, default_plan

SCHEMA: dict[str, tuple[str, ...]] = {
    "system": ("n", "fs_hz", "fc_hz", "ng"),
    "channel": ("p", "tau_max_s", "delay_profile", "power_profile_db", "normalize_power"),
    "geometry": ("nt", "nr"),
    "doppler": ("speed_mps",),
    "pilot": ("np", "d", "theta"),
    "estimator": ("r", "p_assumed", "order_selection"),
}


@dataclass(frozen=True)
class SimConfig:
    system: SystemParams
    channel: ChannelParams
    geometry: MimoGeometry
    doppler: DopplerParams
    plan: PilotPlan
    estimator: EstimatorConfig

    def validate(self) -> None:
        validate(self.system, self.channel, self.geometry, self.plan)

    def to_dict(self) -> dict[str, Any]:
        ch = self.channel
        if ch.delay_profile is DelayProfile.EXPLICIT:
            profile: Any = {"explicit": list(ch.explicit_delays)}
        else:
            profile = ch.delay_profile.value
        return {
            "system": {"n": self.system.N, "fs_hz": self.system.fs, "fc_hz": self.system.fc, "ng": self.system.Ng},
            "channel": {
                "p": ch.P,
                "tau_max_s": ch.tau_max,
                "delay_profile": profile,
                "power_profile_db": list(ch.power_profile_db),
                "normalize_power": ch.normalize_power,
            },
            "geometry": {"nt": self.geometry.Nt, "nr": self.geometry.Nr},
            "doppler": {"speed_mps": self.doppler.speed},
            "pilot": {"np": self.plan.Np, "d": self.plan.D, "theta": list(self.plan.theta)},
            "estimator": {
                "r": self.estimator.R,
                "p_assumed": self.estimator.P_assumed,
                "order_selection": self.estimator.order_selection.value,
            },
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def with_geometry(self, nt: int, nr: int) -> SimConfig:
        d = self.to_dict()
        d["geometry"] = {"nt": nt, "nr": nr}
        d["pilot"]["theta"] = None
        return config_from_dict(d)

    def with_estimator(self, **changes) -> SimConfig:
        d = self.to_dict()
        d["estimator"].update(changes)
        return config_from_dict(d)


def _check_keys(section: str, values: dict[str, Any]) -> None:
    if not isinstance(values, dict):
        raise InvalidField(section, "JSON object", f"section '{section}' must be an object")
    for key in values:
        if key not in SCHEMA[section]:
            raise UnknownKey(f"{section}.{key}", "known key", f"unknown key '{section}.{key}'")


def _number(section: str, values: dict, key: str, default, cast=float):
    v = values.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidField(f"{section}.{key}", "number", f"'{section}.{key}' must be a number, got {v!r}")
    if cast is int and v != int(v):
        raise InvalidField(f"{section}.{key}", "integer", f"'{section}.{key}' must be an integer, got {v!r}")
    return cast(v)


def _channel(values: dict[str, Any], system: SystemParams, D: int) -> ChannelParams:
    profile = values.get("delay_profile", "itu_veh_b")
    explicit: tuple[float, ...] = ()
    if isinstance(profile, dict):
        if set(profile) != {"explicit"}:
            raise InvalidField("channel.delay_profile", "{'explicit': [...]}",
                               f"unrecognised delay_profile object keys {sorted(profile)}")
        explicit = tuple(float(t) for t in profile["explicit"])
        kind = DelayProfile.EXPLICIT
    elif isinstance(profile, list):
        explicit = tuple(float(t) for t in profile)
        kind = DelayProfile.EXPLICIT
    else:
        try:
            kind = DelayProfile(profile)
        except ValueError:
            raise InvalidField("channel.delay_profile", "itu_veh_b | uniform_random | {explicit}",
                               f"unknown delay_profile {profile!r}") from None
        if kind is DelayProfile.EXPLICIT:
            raise InvalidField("channel.delay_profile", "{'explicit': [...]}", "explicit profile needs a delay list")

    if kind is DelayProfile.ITU_VEH_B:
        P_default, tau_default = len(ITU_VEH_B_DELAYS), ITU_VEH_B_DELAYS[-1]
        powers_default = list(ITU_VEH_B_POWERS_DB)
    elif kind is DelayProfile.EXPLICIT:
        P_default, tau_default = len(explicit), max(explicit) if explicit else None
        powers_default = None
    else:
        P_default, tau_default, powers_default = None, None, None

    P = _number("channel", values, "p", P_default, int)
    if P is None:
        raise InvalidField("channel.p", "required", "channel.p is required for uniform_random delays")
    tau_max = _number("channel", values, "tau_max_s", tau_default)
    if tau_max is None:
        tau_max = system.N / (system.fs * D)
    if tau_max == 0 and kind is DelayProfile.EXPLICIT:
        tau_max = system.Ts
    powers = values.get("power_profile_db")
    if powers is None:
        powers = powers_default if powers_default is not None else [0.0] * P
    normalize = values.get("normalize_power", True)
    if not isinstance(normalize, bool):
        raise InvalidField("channel.normalize_power", "boolean")
    return ChannelParams(P=P, tau_max=tau_max, delay_profile=kind, power_profile_db=tuple(powers),
                         normalize_power=normalize, explicit_delays=explicit)


def config_from_dict(data: dict[str, Any]) -> SimConfig:
    """Build a :class:`SimConfig` from the JSON layout, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise InvalidField("config", "JSON object", "configuration must be a JSON object")
    for section in data:
        if section not in SCHEMA:
            raise UnknownKey(section, "known section", f"unknown key '{section}'")
    sections = {name: data.get(name) or {} for name in SCHEMA}
    for name, values in sections.items():
        _check_keys(name, values)

    s = sections["system"]
    system = SystemParams(
        N=_number("system", s, "n", 4096, int),
        fs=_number("system", s, "fs_hz", 10e6),
        fc=_number("system", s, "fc_hz", 1e9),
        Ng=_number("system", s, "ng", 256, int),
    )
    g = sections["geometry"]
    geometry = MimoGeometry(Nt=_number("geometry", g, "nt", 4, int), Nr=_number("geometry", g, "nr", 4, int))
    p = sections["pilot"]
    Np = _number("pilot", p, "np", 64, int)
    D = _number("pilot", p, "d", 16, int)
    theta = p.get("theta")
    if theta is None:
        plan = default_plan(geometry, Np, D, system.N)
    else:
        plan = PilotPlan(Np=Np, D=D, theta=tuple(int(t) for t in theta), N=system.N)
    channel = _channel(sections["channel"], system, D)
    speed = _number("doppler", sections["doppler"], "speed_mps", 0.0)
    doppler = DopplerParams.for_system(system, speed)
    e = sections["estimator"]
    estimator = EstimatorConfig(
        R=_number("estimator", e, "r", 0, int),
        P_assumed=_number("estimator", e, "p_assumed", channel.P, int),
        order_selection=e.get("order_selection", "fixed"),
        max_delay=channel.tau_max,
    )
    return SimConfig(system, channel, geometry, doppler, plan, estimator)


def load_config(path: str | Path) -> SimConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", "valid JSON", f"{path}: {exc}") from None
    return config_from_dict(data)

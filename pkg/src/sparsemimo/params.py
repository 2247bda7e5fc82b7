"""Configuration types and cross-parameter validation.

All types are frozen dataclasses that check their own invariants on
construction; :func:`validate` adds the constraints that span several types
(delay aliasing and the minimum pilot count).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import DelayAliasing, InvalidField, NpTooSmall, ShapeMismatch

if TYPE_CHECKING:
    from .pilots import PilotPlan

SPEED_OF_LIGHT = 299_792_458.0

# ITU-R M.1225 Vehicular B tapped delay line (channel A of the vehicular
# test environment): relative delays in seconds, average powers in dB.
ITU_VEH_B_DELAYS = (0.0, 0.3e-6, 8.9e-6, 12.9e-6, 17.1e-6, 20.0e-6)
ITU_VEH_B_POWERS_DB = (-2.5, 0.0, -12.8, -10.0, -25.2, -16.0)

# relative slack for comparing derived float bounds (e.g. 25.6 us vs N*Ts/D)
_REL_SLACK = 1e-12


def _require(ok: bool, field_name: str, bound: str, message: str | None = None) -> None:
    if not ok:
        raise InvalidField(field_name, bound, message)


def _enum(cls, value, field_name: str):
    try:
        return cls(value)
    except ValueError:
        allowed = " | ".join(m.value for m in cls)
        raise InvalidField(field_name, allowed, f"{field_name}={value!r} is not one of {allowed}") from None


@dataclass(frozen=True)
class SystemParams:
    N: int = 4096
    fs: float = 10e6
    fc: float = 1e9
    Ng: int = 256

    def __post_init__(self):
        _require(self.N > 0, "N", "N > 0", f"N={self.N} must be > 0")
        _require(self.fs > 0, "fs", "fs > 0", f"fs={self.fs} must be > 0")
        _require(self.fc >= 0, "fc", "fc >= 0", f"fc={self.fc} must be >= 0")
        _require(self.Ng >= 0, "Ng", "Ng >= 0", f"Ng={self.Ng} must be >= 0")
        _require(self.Ng < self.N, "Ng", "Ng < N", f"Ng={self.Ng} must be < N={self.N}")

    @property
    def Ts(self) -> float:
        return 1.0 / self.fs

    @property
    def gamma(self) -> complex:
        """Generator of the pilot-domain phase progression, exp(-j 2 pi fs / N)."""
        return complex(np.exp(-2j * np.pi * self.fs / self.N))


class DelayProfile(str, enum.Enum):
    ITU_VEH_B = "itu_veh_b"
    UNIFORM_RANDOM = "uniform_random"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class ChannelParams:
    P: int
    tau_max: float
    delay_profile: DelayProfile
    power_profile_db: tuple[float, ...]
    normalize_power: bool = True
    explicit_delays: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "delay_profile", _enum(DelayProfile, self.delay_profile, "delay_profile"))
        object.__setattr__(self, "power_profile_db", tuple(float(p) for p in self.power_profile_db))
        object.__setattr__(self, "explicit_delays", tuple(float(t) for t in self.explicit_delays))
        _require(self.P >= 1, "P", "P >= 1", f"P={self.P} must be >= 1")
        _require(self.tau_max > 0, "tau_max", "tau_max > 0", f"tau_max={self.tau_max} must be > 0")
        _require(
            len(self.power_profile_db) == self.P,
            "power_profile_db",
            "len == P",
            f"power_profile_db has {len(self.power_profile_db)} entries, P={self.P}",
        )
        _require(
            all(math.isfinite(p) for p in self.power_profile_db),
            "power_profile_db",
            "finite",
        )
        if self.delay_profile is DelayProfile.EXPLICIT:
            d = self.explicit_delays
            _require(len(d) == self.P, "delay_profile", "len(explicit delays) == P",
                     f"explicit delay list has {len(d)} entries, P={self.P}")
            for t in d:
                _require(0.0 <= t <= self.tau_max * (1 + _REL_SLACK), "delay_profile",
                         "0 <= delay <= tau_max",
                         f"explicit delay {t} s outside [0, tau_max={self.tau_max}]")
            _require(len(set(d)) == len(d), "delay_profile", "distinct delays",
                     "explicit delays must be strictly distinct")
        elif self.delay_profile is DelayProfile.ITU_VEH_B:
            _require(self.P == len(ITU_VEH_B_DELAYS), "P", "P == 6 for itu_veh_b",
                     f"itu_veh_b has 6 taps, got P={self.P}")
            _require(self.tau_max >= ITU_VEH_B_DELAYS[-1] * (1 - _REL_SLACK), "tau_max",
                     "tau_max >= 20e-6 for itu_veh_b",
                     f"tau_max={self.tau_max} shorter than the itu_veh_b spread 20e-6 s")
        elif self.explicit_delays:
            raise InvalidField("delay_profile", "no explicit delays unless profile is explicit")

    @classmethod
    def itu_veh_b(cls, normalize_power: bool = True) -> ChannelParams:
        return cls(
            P=len(ITU_VEH_B_DELAYS),
            tau_max=ITU_VEH_B_DELAYS[-1],
            delay_profile=DelayProfile.ITU_VEH_B,
            power_profile_db=ITU_VEH_B_POWERS_DB,
            normalize_power=normalize_power,
        )

    @classmethod
    def explicit(cls, delays, power_profile_db=None, tau_max=None, normalize_power=True) -> ChannelParams:
        delays = tuple(float(t) for t in delays)
        if power_profile_db is None:
            power_profile_db = (0.0,) * len(delays)
        if tau_max is None:
            tau_max = max(max(delays), np.finfo(float).tiny)
        return cls(
            P=len(delays),
            tau_max=tau_max,
            delay_profile=DelayProfile.EXPLICIT,
            power_profile_db=tuple(power_profile_db),
            normalize_power=normalize_power,
            explicit_delays=delays,
        )

    @classmethod
    def uniform_random(cls, P: int, tau_max: float, power_profile_db=None, normalize_power=True) -> ChannelParams:
        if power_profile_db is None:
            power_profile_db = (0.0,) * P
        return cls(P=P, tau_max=tau_max, delay_profile=DelayProfile.UNIFORM_RANDOM,
                   power_profile_db=tuple(power_profile_db), normalize_power=normalize_power)

    def path_powers(self) -> np.ndarray:
        """Linear per-path mean powers, normalized to unit sum when requested."""
        p = 10.0 ** (np.asarray(self.power_profile_db) / 10.0)
        if self.normalize_power:
            p = p / p.sum()
        return p

    def channel_length(self, system: SystemParams) -> float:
        """Normalized channel length tau_max / Ts."""
        return self.tau_max / system.Ts


@dataclass(frozen=True)
class MimoGeometry:
    Nt: int
    Nr: int

    def __post_init__(self):
        _require(self.Nt >= 1, "Nt", "Nt >= 1", f"Nt={self.Nt} must be >= 1")
        _require(self.Nr >= 1, "Nr", "Nr >= 1", f"Nr={self.Nr} must be >= 1")

    @property
    def pairs(self) -> int:
        return self.Nt * self.Nr

    def pair_index(self, i: int, j: int) -> int:
        """Column of antenna pair (i, j), both 1-based."""
        return (i - 1) * self.Nr + (j - 1)


@dataclass(frozen=True)
class DopplerParams:
    speed: float
    fd: float
    symbol_duration: float

    def __post_init__(self):
        _require(self.speed >= 0, "speed", "speed >= 0", f"speed={self.speed} must be >= 0")
        _require(self.fd >= 0, "fd", "fd >= 0", f"fd={self.fd} must be >= 0")
        _require(self.symbol_duration > 0, "symbol_duration", "symbol_duration > 0")
        _require(self.speed > 0 or self.fd == 0, "fd", "fd == 0 when speed == 0",
                 "a zero speed implies a zero Doppler frequency")

    @classmethod
    def for_system(cls, system: SystemParams, speed: float = 0.0) -> DopplerParams:
        return cls(
            speed=speed,
            fd=speed * system.fc / SPEED_OF_LIGHT,
            symbol_duration=(system.N + system.Ng) * system.Ts,
        )

    @property
    def is_static(self) -> bool:
        return self.fd == 0.0


class OrderSelection(str, enum.Enum):
    FIXED = "fixed"
    MDL = "mdl"


@dataclass(frozen=True)
class EstimatorConfig:
    R: int = 0
    P_assumed: int = 6
    order_selection: OrderSelection = field(default=OrderSelection.FIXED)
    # Known maximum delay spread (s).  When set, reported delays wrap in the
    # middle of the unused part of the aliasing period instead of at zero.
    max_delay: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "order_selection",
                           _enum(OrderSelection, self.order_selection, "order_selection"))
        if self.max_delay is not None:
            _require(self.max_delay > 0, "max_delay", "max_delay > 0")
        _require(self.R >= 0, "R", "R >= 0", f"R={self.R} must be >= 0")
        _require(self.P_assumed >= 1, "P_assumed", "P_assumed >= 1",
                 f"P_assumed={self.P_assumed} must be >= 1")

    @property
    def window_length(self) -> int:
        return 2 * self.R + 1


def aliasing_period(system: SystemParams, D: int) -> float:
    """Unambiguous delay range N*Ts/D of a comb with interval D (seconds)."""
    return system.N / (system.fs * D)


def validate(system: SystemParams, channel: ChannelParams, geometry: MimoGeometry, plan: PilotPlan) -> None:
    """Check cross-type constraints; raise a :class:`ConfigError` subclass on failure."""
    if plan.N != system.N:
        raise ShapeMismatch("pilot.n", "pilot N == system N",
                            f"pilot plan N={plan.N} differs from system N={system.N}")
    if len(plan.theta) != geometry.Nt:
        raise ShapeMismatch("pilot.theta", "len(theta) == Nt",
                            f"pilot plan has {len(plan.theta)} offsets for Nt={geometry.Nt}")
    period = aliasing_period(system, plan.D)
    if channel.tau_max > period * (1 + _REL_SLACK):
        raise DelayAliasing(
            "tau_max", "tau_max <= N*Ts/D",
            f"tau_max={channel.tau_max:g} s exceeds the aliasing period N*Ts/D={period:g} s (D={plan.D})",
        )
    if plan.Np < 2 * channel.P:
        raise NpTooSmall(
            "Np", "Np >= 2*P",
            f"Np={plan.Np} is below the minimum 2*P={2 * channel.P} pilots",
        )

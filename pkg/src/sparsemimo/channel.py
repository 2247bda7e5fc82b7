"""Ground-truth sparse MIMO channels.

Every antenna pair sees the same P path delays; only the complex gains differ
between pairs.  Gains evolve between OFDM symbols as a first-order
Gauss-Markov process whose one-step correlation follows Clarke's model,
``J0(2 pi fd T)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import j0

from .errors import InvalidField, ModelValidity, ProfileInfeasible
from .params import (
    ITU_VEH_B_DELAYS,
    ChannelParams,
    DelayProfile,
    DopplerParams,
    MimoGeometry,
    SystemParams,
)

MAX_REJECTION_ATTEMPTS = 10_000


def _frozen(a, dtype) -> np.ndarray:
    """Read-only array; an already read-only array of the right dtype is reused."""
    if isinstance(a, np.ndarray) and a.dtype == dtype and not a.flags.writeable:
        return a
    out = np.array(a, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One OFDM symbol's channel.

    ``gains[p, m]`` is the gain of path ``p`` for antenna pair ``m``, with
    ``m = (i - 1) * Nr + (j - 1)``.  ``powers`` holds the per-path mean
    powers the gains were drawn with; evolution needs them.
    """

    delays: np.ndarray
    gains: np.ndarray
    powers: np.ndarray
    nt: int
    nr: int
    symbol_index: int = 0

    def __post_init__(self):
        delays = _frozen(self.delays, float)
        gains = _frozen(self.gains, complex)
        powers = _frozen(self.powers, float)
        if gains.ndim == 1:
            gains = _frozen(gains[:, None], complex)
        if delays.ndim != 1 or gains.shape[0] != delays.size or powers.shape != delays.shape:
            raise InvalidField("gains", "shape P x (Nt*Nr)",
                               f"delays {delays.shape}, gains {gains.shape}, powers {powers.shape}")
        if gains.shape[1] != self.nt * self.nr:
            raise InvalidField("gains", "Nt*Nr columns",
                               f"gains has {gains.shape[1]} columns, Nt*Nr={self.nt * self.nr}")
        if np.any(np.diff(delays) <= 0) or np.any(delays < 0):
            raise InvalidField("delays", "strictly increasing, >= 0")
        if not np.all(np.isfinite(gains)):
            raise InvalidField("gains", "finite")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "powers", powers)

    @property
    def P(self) -> int:
        return self.delays.size

    @property
    def pairs(self) -> int:
        return self.gains.shape[1]

    def with_gains(self, gains: np.ndarray, symbol_index: int) -> ChannelRealization:
        # the delay array is shared, not copied: one sparse pattern for every symbol
        return ChannelRealization(self.delays, gains, self.powers, self.nt, self.nr, symbol_index)


def complex_normal(rng: np.random.Generator, shape, variance=1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def cfr_matrix(freqs, delays, gains) -> np.ndarray:
    """Evaluate sum_p gains[p, m] * exp(-j 2 pi f tau_p) for every frequency.

    Paths are accumulated one at a time in index order, so a single entry is
    bit-identical whether it is evaluated alone or inside a larger grid.
    """
    freqs = np.asarray(freqs, dtype=float)
    delays = np.asarray(delays, dtype=float)
    gains = np.asarray(gains, dtype=complex)
    out = np.zeros((freqs.size, gains.shape[1]), dtype=complex)
    for p in range(delays.size):
        out += np.exp(-2j * np.pi * freqs * delays[p])[:, None] * gains[p][None, :]
    return out


def subcarrier_frequencies(system: SystemParams, k) -> np.ndarray:
    return np.asarray(k, dtype=float) * system.fs / system.N


def _draw_delays(channel: ChannelParams, rng: np.random.Generator, min_sep: float) -> np.ndarray:
    if channel.delay_profile is DelayProfile.ITU_VEH_B:
        return np.array(ITU_VEH_B_DELAYS)
    if channel.delay_profile is DelayProfile.EXPLICIT:
        return np.sort(np.array(channel.explicit_delays))
    for _ in range(MAX_REJECTION_ATTEMPTS):
        d = np.sort(rng.uniform(0.0, channel.tau_max, channel.P))
        if channel.P == 1 or np.min(np.diff(d)) >= min_sep:
            return d
    raise ProfileInfeasible(
        f"could not place {channel.P} delays in [0, {channel.tau_max:g}) s with separation "
        f">= {min_sep:g} s after {MAX_REJECTION_ATTEMPTS} attempts"
    )


def sample_channel(
    channel: ChannelParams,
    geometry: MimoGeometry,
    seed: int,
    system: SystemParams | None = None,
) -> ChannelRealization:
    """Draw a realization at symbol 0.

    ``system`` only sets the minimum separation (2 Ts) of uniformly drawn
    delays; the default is the 10 MHz reference system.
    """
    system = system or SystemParams()
    rng = np.random.default_rng(seed)
    delays = _draw_delays(channel, rng, 2.0 * system.Ts)
    powers = channel.path_powers()
    gains = complex_normal(rng, (channel.P, geometry.pairs), powers[:, None])
    return ChannelRealization(delays, gains, powers, geometry.Nt, geometry.Nr, 0)


def gauss_markov_coefficient(fd: float, symbol_duration: float) -> float:
    """One-symbol gain correlation J0(2 pi fd T)."""
    return float(j0(2.0 * np.pi * fd * symbol_duration))


def evolve_channel(realization: ChannelRealization, doppler: DopplerParams, seed: int) -> ChannelRealization:
    """Advance the gains by one OFDM symbol; delays stay fixed."""
    x = doppler.fd * doppler.symbol_duration
    if x >= 0.5:
        raise ModelValidity("fd", "fd*symbol_duration < 0.5",
                            f"fd*T={x:g} is too large for a symbol-rate Gauss-Markov model")
    next_index = realization.symbol_index + 1
    if doppler.is_static:
        return realization.with_gains(realization.gains.copy(), next_index)
    rho = gauss_markov_coefficient(doppler.fd, doppler.symbol_duration)
    rng = np.random.default_rng(seed)
    w = complex_normal(rng, realization.gains.shape, realization.powers[:, None])
    gains = rho * realization.gains + np.sqrt(1.0 - rho * rho) * w
    return realization.with_gains(gains, next_index)


def cfr_at(realization: ChannelRealization, pair_index: int, f: float) -> complex:
    if not 0 <= pair_index < realization.pairs:
        raise IndexError(f"pair_index {pair_index} out of range [0, {realization.pairs})")
    gains = realization.gains[:, pair_index : pair_index + 1]
    return complex(cfr_matrix([f], realization.delays, gains)[0, 0])


def cfr_full(realization: ChannelRealization, system: SystemParams) -> np.ndarray:
    """Channel frequency response on all N subcarriers, shape N x (Nt*Nr)."""
    freqs = subcarrier_frequencies(system, np.arange(system.N))
    return cfr_matrix(freqs, realization.delays, realization.gains)

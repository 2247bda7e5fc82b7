"""Comb pilot plans and the noisy pilot-domain measurement matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, cfr_matrix, complex_normal, subcarrier_frequencies
from .errors import InvalidField, PilotOutOfBand, PilotOverlap, ShapeMismatch
from .params import MimoGeometry, SystemParams


@dataclass(frozen=True)
class PilotPlan:
    """Per-antenna comb: antenna i uses subcarriers theta[i-1] + l*D, l < Np."""

    Np: int
    D: int
    theta: tuple[int, ...]
    N: int

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(int(t) for t in self.theta))
        if self.Np < 1:
            raise InvalidField("Np", "Np >= 1", f"Np={self.Np} must be >= 1")
        if self.D < 1:
            raise InvalidField("D", "D >= 1", f"D={self.D} must be >= 1")
        if not self.theta:
            raise InvalidField("theta", "at least one offset")
        for t in self.theta:
            if not 0 <= t < self.D:
                raise PilotOverlap("theta", "0 <= theta_i < D", f"theta={t} outside [0, D={self.D})")
        if len(set(self.theta)) != len(self.theta):
            raise PilotOverlap("theta", "pairwise distinct", f"theta={list(self.theta)} repeats an offset")
        last = max(self.theta) + (self.Np - 1) * self.D
        if last > self.N - 1:
            raise PilotOutOfBand("Np", "max(theta) + (Np-1)*D <= N-1",
                                 f"last pilot subcarrier {last} exceeds N-1={self.N - 1}")

    @property
    def Nt(self) -> int:
        return len(self.theta)

    @property
    def total_overhead(self) -> int:
        return self.Nt * self.Np


def pilot_indices(plan: PilotPlan, i: int) -> np.ndarray:
    """Subcarrier indices of transmit antenna ``i`` (1-based)."""
    if not 1 <= i <= plan.Nt:
        raise IndexError(f"transmit antenna {i} out of range [1, {plan.Nt}]")
    return plan.theta[i - 1] + plan.D * np.arange(plan.Np)


def default_plan(geometry: MimoGeometry, Np: int, D: int, N: int) -> PilotPlan:
    if D < geometry.Nt:
        raise PilotOverlap("D", "D >= Nt", f"D={D} cannot host {geometry.Nt} disjoint combs")
    if D % geometry.Nt == 0:
        step = D // geometry.Nt
        theta = tuple(i * step for i in range(geometry.Nt))
    else:
        theta = tuple(range(geometry.Nt))
    return PilotPlan(Np=Np, D=D, theta=theta, N=N)


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """Pilot CFR estimates, shape Np x (Nt*Nr); column (i-1)*Nr + (j-1) is pair (i, j)."""

    data: np.ndarray
    snr_db: float
    symbol_index: int = 0

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.ndim != 2:
            raise ShapeMismatch("data", "2-D matrix", f"got {data.ndim}-D data")
        if not np.all(np.isfinite(data)):
            raise InvalidField("data", "finite entries")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "snr_db", float(self.snr_db))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def noise_variance(snr_db: float) -> float:
    """Per-entry noise variance for unit channel power; 0 when noiseless."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return 10.0 ** (-snr_db / 10.0)


def _pilot_columns(realization: ChannelRealization, plan: PilotPlan, system: SystemParams) -> np.ndarray:
    nr = realization.nr
    out = np.empty((plan.Np, realization.pairs), dtype=complex)
    for i in range(1, plan.Nt + 1):
        freqs = subcarrier_frequencies(system, pilot_indices(plan, i))
        cols = slice((i - 1) * nr, i * nr)
        out[:, cols] = cfr_matrix(freqs, realization.delays, realization.gains[:, cols])
    return out


def observe_pilots(
    realization: ChannelRealization,
    plan: PilotPlan,
    system: SystemParams,
    snr_db: float,
    seed: int,
) -> MeasurementMatrix:
    """LS pilot estimates at every pilot of every antenna pair.

    Noise is white with variance 10**(-snr_db/10); ``snr_db=inf`` gives the
    exact noiseless matrix.  Delays beyond N*Ts/D are not rejected here: they
    alias, which is the caller's problem (see ``params.validate``).
    """
    if plan.N != system.N:
        raise ShapeMismatch("pilot.n", "pilot N == system N", f"plan N={plan.N}, system N={system.N}")
    if plan.Nt != realization.nt:
        raise ShapeMismatch("pilot.theta", "len(theta) == Nt",
                            f"plan has {plan.Nt} combs, channel has Nt={realization.nt}")
    data = _pilot_columns(realization, plan, system)
    var = noise_variance(snr_db)
    if var > 0:
        rng = np.random.default_rng(seed)
        data = data + complex_normal(rng, data.shape, var)
    return MeasurementMatrix(data, snr_db, realization.symbol_index)

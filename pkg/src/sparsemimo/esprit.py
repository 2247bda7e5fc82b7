"""Super-resolution delay and gain estimation from stacked comb measurements.

The Np x (Nt*Nr) measurement matrix factors as V @ A + W, where V is a
Vandermonde matrix whose generators exp(-j 2 pi fs D tau_p / N) carry the
path delays.  Every antenna pair contributes a snapshot of the same signal
subspace, so TLS-ESPRIT on the stacked matrix recovers the delays at
arbitrary (off-grid) values.  Gains then follow by least squares.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import cfr_matrix, subcarrier_frequencies
from .errors import DegenerateRotation, IllConditionedLS, InvalidField, NoSignal, ShapeMismatch
from .params import EstimatorConfig, OrderSelection, SystemParams, aliasing_period
from .pilots import MeasurementMatrix, PilotPlan

COND_LIMIT = 1e12
# phases this close to a full turn are folded back to zero delay
_WRAP_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class MeasurementWindow:
    """2R+1 consecutive measurement matrices centred on symbol ``center_index``."""

    center_index: int
    matrices: tuple[MeasurementMatrix, ...]

    def __post_init__(self):
        mats = tuple(self.matrices)
        object.__setattr__(self, "matrices", mats)
        if len(mats) % 2 != 1:
            raise InvalidField("matrices", "odd window length", f"window holds {len(mats)} matrices")
        R = len(mats) // 2
        expected = list(range(self.center_index - R, self.center_index + R + 1))
        if [m.symbol_index for m in mats] != expected:
            raise InvalidField("matrices", "consecutive symbol indices q-R..q+R",
                               f"got symbol indices {[m.symbol_index for m in mats]}, expected {expected}")
        shapes = {m.shape for m in mats}
        if len(shapes) != 1:
            raise ShapeMismatch("matrices", "equal shapes", f"window mixes shapes {sorted(shapes)}")
        snrs = {m.snr_db for m in mats}
        if len(snrs) != 1:
            raise InvalidField("matrices", "equal SNR", f"window mixes SNRs {sorted(snrs)}")

    @property
    def R(self) -> int:
        return len(self.matrices) // 2


@dataclass(frozen=True, eq=False)
class DelayEstimate:
    delays: np.ndarray
    rotation_eigenvalues: np.ndarray = field(default_factory=lambda: np.empty(0, complex))

    @property
    def P(self) -> int:
        return self.delays.size


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    delays: np.ndarray
    gains: np.ndarray
    plan: PilotPlan
    system: SystemParams
    raw_gains: np.ndarray | None = None  # LS coefficients before phase compensation

    @property
    def pairs(self) -> int:
        return self.gains.shape[1]


def average_window(window: MeasurementWindow) -> MeasurementMatrix:
    mats = window.matrices
    acc = mats[0].data.copy()
    for m in mats[1:]:
        acc = acc + m.data
    return MeasurementMatrix(acc / len(mats), mats[0].snr_db, window.center_index)


def mdl_order(singular_values: np.ndarray, snapshots: int) -> int:
    """Wax-Kailath MDL order estimate from the singular values of the data matrix.

    Only the min(Np, snapshots) nonzero sample-covariance eigenvalues take
    part, so the criterion stays finite when there are fewer snapshots than
    pilots.
    """
    ev = np.asarray(singular_values, dtype=float) ** 2 / snapshots
    q = ev.size
    if q < 2:
        return 0
    ev = np.maximum(ev, np.finfo(float).tiny + ev[0] * np.finfo(float).eps ** 2)
    scores = np.empty(q)
    for k in range(q):
        tail = ev[k:]
        log_ratio = np.mean(np.log(tail)) - np.log(np.mean(tail))
        scores[k] = -snapshots * (q - k) * log_ratio + 0.5 * k * (2 * q - k) * np.log(snapshots)
    return int(np.argmin(scores))


def build_vandermonde(delays, plan: PilotPlan, system: SystemParams) -> np.ndarray:
    """Np x P matrix with entries exp(-j 2 pi fs l D tau_p / N)."""
    delays = np.atleast_1d(np.asarray(delays, dtype=float))
    s = np.sort(delays)
    if s.size > 1 and np.min(np.diff(s)) <= 1e-15:
        raise InvalidField("delays", "distinct delays", "duplicate delays within 1e-15 s")
    l = np.arange(plan.Np)[:, None]
    return np.exp(-2j * np.pi * system.fs * l * plan.D * delays[None, :] / system.N)


def delay_floor(plan: PilotPlan, system: SystemParams, max_delay: float | None = None) -> float:
    """Lower end of the reported delay interval [floor, floor + N*Ts/D).

    Zero without prior knowledge.  With a known maximum delay spread the
    unused slack of the aliasing period is split evenly on both sides, so a
    path at zero delay perturbed by noise is not wrapped to the far end.
    """
    if max_delay is None:
        return 0.0
    slack = aliasing_period(system, plan.D) - max_delay
    return -0.5 * slack if slack > 0 else 0.0


def _rotation_to_delays(lam: np.ndarray, plan: PilotPlan, system: SystemParams, floor: float) -> np.ndarray:
    scale = system.N / (2 * np.pi * system.fs * plan.D)
    start = floor / scale
    phase = np.mod(-np.angle(lam) - start, 2 * np.pi)
    phase[2 * np.pi - phase < _WRAP_EPS] = 0.0
    return (phase + start) * scale


def estimate_delays(
    H: MeasurementMatrix,
    plan: PilotPlan,
    system: SystemParams,
    config: EstimatorConfig,
) -> DelayEstimate:
    """TLS-ESPRIT on the stacked measurement matrix."""
    X = H.data
    Np, M = X.shape
    if Np != plan.Np:
        raise ShapeMismatch("H", "rows == Np", f"H has {Np} rows, plan Np={plan.Np}")

    P = config.P_assumed
    if config.order_selection is OrderSelection.MDL:
        s = np.linalg.svd(X, compute_uv=False)
        P = mdl_order(s, M)
        if P == 0:
            raise NoSignal("MDL selected model order 0")
    if Np < P + 1:
        raise InvalidField("P_assumed", "Np >= P_assumed + 1", f"Np={Np} too small for P={P}")

    U, _, _ = np.linalg.svd(X, full_matrices=P > min(Np, M))
    Es = U[:, :P]
    E12 = np.hstack([Es[:-1], Es[1:]])
    _, vecs = np.linalg.eigh(E12.conj().T @ E12)
    noise_vecs = vecs[:, :P]
    V12, V22 = noise_vecs[:P], noise_vecs[P:]
    if np.linalg.cond(V22) > COND_LIMIT:
        raise DegenerateRotation("TLS rotation block is numerically singular")
    # Psi = -V12 @ inv(V22)
    psi = -np.linalg.solve(V22.T, V12.T).T
    lam = np.linalg.eigvals(psi)
    delays = _rotation_to_delays(lam, plan, system, delay_floor(plan, system, config.max_delay))
    order = np.argsort(delays, kind="stable")
    return DelayEstimate(delays[order], lam[order])


def _antenna_of_column(plan: PilotPlan, pairs: int) -> np.ndarray:
    if pairs % plan.Nt:
        raise ShapeMismatch("H", "columns divisible by Nt", f"{pairs} columns for Nt={plan.Nt}")
    return np.repeat(np.arange(plan.Nt), pairs // plan.Nt)


def recover_gains(
    H: MeasurementMatrix,
    delays: DelayEstimate,
    plan: PilotPlan,
    system: SystemParams,
) -> ChannelEstimate:
    """Least-squares gains for fixed delays, then undo each comb's offset phase."""
    tau = np.asarray(delays.delays, dtype=float)
    if plan.Np < tau.size:
        raise InvalidField("Np", "Np >= P", f"Np={plan.Np} < P={tau.size}")
    V = build_vandermonde(tau, plan, system)
    gram = V.conj().T @ V
    if np.linalg.cond(gram) > COND_LIMIT:
        raise IllConditionedLS("Vandermonde Gram matrix is ill-conditioned")
    A = np.linalg.solve(gram, V.conj().T @ H.data)
    theta = np.asarray(plan.theta, dtype=float)[_antenna_of_column(plan, A.shape[1])]
    comp = np.exp(2j * np.pi * system.fs * theta[None, :] * tau[:, None] / system.N)
    return ChannelEstimate(tau, A * comp, plan, system, raw_gains=A)


def reconstruct_cfr(estimate: ChannelEstimate) -> np.ndarray:
    """Full-band CFR, shape N x (Nt*Nr), from estimated delays and gains."""
    system = estimate.system
    freqs = subcarrier_frequencies(system, np.arange(system.N))
    return cfr_matrix(freqs, estimate.delays, estimate.gains)


def estimate_channel(
    window: MeasurementWindow,
    plan: PilotPlan,
    system: SystemParams,
    config: EstimatorConfig,
) -> ChannelEstimate:
    H = average_window(window)
    delays = estimate_delays(H, plan, system, config)
    return recover_gains(H, delays, plan, system)


def delay_range(plan: PilotPlan, system: SystemParams) -> float:
    return aliasing_period(system, plan.D)

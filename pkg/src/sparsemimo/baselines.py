"""Reference estimators: a brute-force delay-grid oracle and comb interpolation.

Neither shares code with the ESPRIT chain beyond the Vandermonde steering
matrix, so agreement between them is a meaningful check.
"""

from __future__ import annotations

import enum
import math

import numpy as np
from scipy.optimize import least_squares

from .errors import GridTooLarge
from .esprit import build_vandermonde
from .params import SystemParams, aliasing_period
from .pilots import MeasurementMatrix, PilotPlan, pilot_indices

MAX_GRID = 1_000_000
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class InterpMethod(str, enum.Enum):
    LINEAR = "linear"
    LOWPASS_DFT = "lowpass_dft"


def projection_residual(H: MeasurementMatrix | np.ndarray, delays, plan: PilotPlan, system: SystemParams) -> float:
    """Energy of H left after LS projection onto the steering vectors of ``delays``."""
    X = H.data if isinstance(H, MeasurementMatrix) else np.asarray(H)
    V = build_vandermonde(delays, plan, system)
    coef, *_ = np.linalg.lstsq(V, X, rcond=None)
    return float(np.sum(np.abs(X - V @ coef) ** 2))


def _grid_energy(R: np.ndarray, G: int) -> np.ndarray:
    """Summed single-atom projection energy at every grid point.

    Grid point g has generator exp(-j 2 pi g / G), so the correlation with the
    steering vector is a zero-padded inverse DFT over the pilot axis.
    """
    corr = G * np.fft.ifft(R, n=G, axis=0)
    return np.sum(np.abs(corr) ** 2, axis=1) / R.shape[0]


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def grid_search_delays(
    H: MeasurementMatrix,
    plan: PilotPlan,
    system: SystemParams,
    P: int,
    resolution: float,
    refine: bool = True,
    max_sweeps: int = 50,
) -> np.ndarray:
    """Greedy matching pursuit over a uniform delay grid on [0, N*Ts/D).

    The grid step is the largest divisor of the aliasing period not above
    ``resolution``.  After P greedy picks with LS deflation, each delay is
    fitted jointly by nonlinear least squares on the projection residual
    (greedy picks on close paths are biased by their neighbours' leakage), then
    polished coordinate-wise by golden-section search within +/- resolution.
    """
    if resolution <= 0:
        raise ValueError(f"resolution={resolution} must be > 0")
    period = aliasing_period(system, plan.D)
    G = math.ceil(period / resolution - 1e-9)
    if G > MAX_GRID:
        raise GridTooLarge(f"grid of {G} points exceeds the {MAX_GRID} point limit")
    step = period / G
    X = np.asarray(H.data)

    def coefficients(idx):
        V = build_vandermonde(np.asarray(idx) * step, plan, system)
        coef, *_ = np.linalg.lstsq(V, X, rcond=None)
        return V, coef

    picks: list[int] = []
    for _ in range(P):
        if picks:
            V, coef = coefficients(picks)
            R = X - V @ coef
        else:
            R = X
        energy = _grid_energy(R, G)
        energy[picks] = -np.inf
        picks.append(int(np.argmax(energy)))

    delays = np.array(picks, dtype=float) * step
    if refine:
        delays = _polish(X, delays, plan, system)
        delays = _refine(X, delays, plan, system, resolution, max_sweeps)
    delays = np.mod(delays, period)
    delays[period - delays < 1e-12 * system.Ts] = 0.0
    return np.sort(delays)


def _stacked_residual(X, delays, plan, system) -> np.ndarray:
    V = build_vandermonde(delays, plan, system)
    coef, *_ = np.linalg.lstsq(V, X, rcond=None)
    r = (X - V @ coef).ravel()
    return np.concatenate([r.real, r.imag])


def _polish(X, delays, plan, system) -> np.ndarray:
    """Joint LS fit of all delays (gains projected out), started from the grid picks."""
    Ts = system.Ts

    def fun(t):
        try:
            return _stacked_residual(X, t * Ts, plan, system)
        except ValueError:
            return np.full(2 * X.size, 1e3)

    sol = least_squares(fun, delays / Ts, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    better = np.sum(sol.fun**2) <= np.sum(fun(delays / Ts) ** 2)
    return sol.x * Ts if better else delays


def _refine(X, delays, plan, system, resolution, max_sweeps) -> np.ndarray:
    delays = delays.copy()
    tol = 1e-12 * system.Ts
    for _ in range(max_sweeps):
        moved = 0.0
        for p in range(delays.size):
            def objective(t, p=p):
                trial = delays.copy()
                trial[p] = t
                try:
                    return projection_residual(X, trial, plan, system)
                except ValueError:
                    return np.inf
            new = _golden_min(objective, delays[p] - resolution, delays[p] + resolution, tol)
            if objective(new) > objective(delays[p]):
                new = delays[p]
            moved = max(moved, abs(new - delays[p]))
            delays[p] = new
        if moved < 10 * tol:
            break
    return delays


def dense_comb_plan(plan: PilotPlan) -> PilotPlan:
    """The comb baseline's pilot plan: same D and offsets, extended to fill the band.

    A nonparametric interpolator cannot reach beyond its pilots, so the
    conventional comb scheme spends pilots across all N subcarriers (256 per
    antenna for N=4096, D=16) where the parametric scheme needs far fewer.
    """
    Np = (plan.N - 1 - max(plan.theta)) // plan.D + 1
    return PilotPlan(Np=Np, D=plan.D, theta=plan.theta, N=plan.N)


def comb_ls_interpolate(
    H: MeasurementMatrix,
    plan: PilotPlan,
    system: SystemParams,
    method: InterpMethod | str = InterpMethod.LINEAR,
) -> np.ndarray:
    """Nonparametric full-band CFR from pilot estimates, shape N x (Nt*Nr).

    LINEAR interpolates real and imaginary parts between adjacent pilots and
    holds the nearest pilot value beyond the band edges.  LOWPASS_DFT takes
    the comb to the time domain, keeps taps shorter than the guard interval,
    and transforms back; it is zero outside the comb's Np*D subcarrier span.
    """
    method = InterpMethod(method)
    X = H.data
    pairs = X.shape[1]
    nr = pairs // plan.Nt
    k = np.arange(system.N)
    out = np.zeros((system.N, pairs), dtype=complex)
    for i in range(1, plan.Nt + 1):
        idx = pilot_indices(plan, i)
        cols = slice((i - 1) * nr, i * nr)
        if method is InterpMethod.LINEAR:
            for m in range(cols.start, cols.stop):
                out[:, m] = np.interp(k, idx, X[:, m].real) + 1j * np.interp(k, idx, X[:, m].imag)
        else:
            out[:, cols] = _lowpass_dft(X[:, cols], plan, system, plan.theta[i - 1])
    return out


def _lowpass_dft(Xi: np.ndarray, plan: PilotPlan, system: SystemParams, theta: int) -> np.ndarray:
    span = plan.Np * plan.D
    # tap n of the span-point transform sits at delay n*N*Ts/span; one comb
    # period holds Np taps before the aliased copies start
    keep = min(plan.Np, math.ceil(system.Ng * span / system.N))
    comb = np.zeros((span, Xi.shape[1]), dtype=complex)
    comb[:: plan.D] = Xi
    taps = np.fft.ifft(comb, axis=0) * plan.D
    taps[keep:] = 0.0
    spectrum = np.fft.fft(taps, axis=0)
    out = np.zeros((system.N, Xi.shape[1]), dtype=complex)
    stop = min(system.N, theta + span)
    out[theta:stop] = spectrum[: stop - theta]
    return out

"""Monte-Carlo NMSE experiments.

A trial is a pure function of (config, scheme, snr, seed): every random draw
comes from a sub-seed derived from the trial seed, a stream tag and the
OFDM symbol index.  Sweeps therefore give byte-identical CSVs regardless of
execution order or worker count.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import InterpMethod, comb_ls_interpolate, dense_comb_plan
from .channel import ChannelRealization, cfr_full, evolve_channel, sample_channel
from .config import SimConfig
from .errors import EstimationError
from .esprit import MeasurementWindow, estimate_channel, reconstruct_cfr
from .pilots import PilotPlan, observe_pilots

log = logging.getLogger(__name__)

CSV_HEADER = ["scheme", "snr_db", "nt", "nr", "np", "r", "mean_nmse_db", "trials", "excluded"]

_STREAM_CHANNEL = 0
_STREAM_EVOLUTION = 1
_STREAM_NOISE = 2


class Scheme(str, enum.Enum):
    PROPOSED = "proposed"
    COMB_LINEAR = "comb-linear"
    COMB_LOWPASS_DFT = "comb-lowpass-dft"


_SCHEME_ORDER = {s: n for n, s in enumerate(Scheme)}


@dataclass(frozen=True)
class TrialResult:
    scheme: Scheme
    snr_db: float
    nmse: float
    seed: int
    geometry: tuple[int, int]
    np: int
    r: int


@dataclass(frozen=True)
class SweepRow:
    scheme: Scheme
    snr_db: float
    nt: int
    nr: int
    np: int
    r: int
    mean_nmse_db: float
    trials: int
    excluded: int = 0


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    config_hash: str = ""

    def sorted_rows(self) -> list[SweepRow]:
        return sorted(self.rows, key=lambda r: (_SCHEME_ORDER[r.scheme], r.snr_db))

    def cell(self, scheme, snr_db: float) -> SweepRow:
        scheme = Scheme(scheme)
        for row in self.rows:
            if row.scheme is scheme and row.snr_db == snr_db:
                return row
        raise KeyError((scheme.value, snr_db))


def nmse(estimated_cfr, true_cfr) -> float:
    """Squared error over all subcarriers and pairs, normalized by the true energy."""
    est = np.asarray(estimated_cfr)
    ref = np.asarray(true_cfr)
    if est.shape != ref.shape:
        raise ValueError(f"shape mismatch: {est.shape} vs {ref.shape}")
    energy = float(np.sum(np.abs(ref) ** 2))
    if energy == 0.0:
        raise ValueError("true CFR has zero energy")
    return float(np.sum(np.abs(est - ref) ** 2)) / energy


def to_db(x: float) -> float:
    if x == 0.0:
        return -math.inf
    return 10.0 * math.log10(x)


def subseed(seed: int, stream: int, symbol: int) -> int:
    ss = np.random.SeedSequence([int(seed), stream, symbol])
    return int(ss.generate_state(1, np.uint64)[0])


def trial_window(config: SimConfig, seed: int, time_varying: bool = False) -> list[ChannelRealization]:
    """Ground-truth channels for symbols 0..2R; the scoring target is symbol R."""
    length = config.estimator.window_length
    first = sample_channel(config.channel, config.geometry, subseed(seed, _STREAM_CHANNEL, 0), config.system)
    chans = [first]
    for s in range(1, length):
        prev = chans[-1]
        if time_varying:
            chans.append(evolve_channel(prev, config.doppler, subseed(seed, _STREAM_EVOLUTION, s)))
        else:
            chans.append(prev.with_gains(prev.gains, s))
    return chans


def single_measurement(config: SimConfig, snr_db: float, seed: int):
    """Channel and pilot measurement for symbol 0, seeded exactly as in a trial."""
    chan = sample_channel(config.channel, config.geometry, subseed(seed, _STREAM_CHANNEL, 0), config.system)
    meas = observe_pilots(chan, config.plan, config.system, snr_db, subseed(seed, _STREAM_NOISE, 0))
    return chan, meas


def scheme_plan(config: SimConfig, scheme) -> PilotPlan:
    """Pilot plan a scheme observes: the configured one, or the dense comb for baselines."""
    if Scheme(scheme) is Scheme.PROPOSED:
        return config.plan
    return dense_comb_plan(config.plan)


def run_trial(config: SimConfig, scheme, snr_db: float, seed: int, time_varying: bool = False) -> TrialResult:
    scheme = Scheme(scheme)
    config.validate()
    chans = trial_window(config, seed, time_varying)
    R = config.estimator.R
    target = chans[R]
    truth = cfr_full(target, config.system)
    if scheme is Scheme.PROPOSED:
        mats = [
            observe_pilots(c, config.plan, config.system, snr_db, subseed(seed, _STREAM_NOISE, c.symbol_index))
            for c in chans
        ]
        est = estimate_channel(MeasurementWindow(R, mats), config.plan, config.system, config.estimator)
        cfr = reconstruct_cfr(est)
    else:
        # the comb baseline is a per-symbol interpolator on its own band-filling
        # comb: it sees only the target symbol
        plan = scheme_plan(config, scheme)
        meas = observe_pilots(target, plan, config.system, snr_db, subseed(seed, _STREAM_NOISE, target.symbol_index))
        method = InterpMethod.LINEAR if scheme is Scheme.COMB_LINEAR else InterpMethod.LOWPASS_DFT
        cfr = comb_ls_interpolate(meas, plan, config.system, method)
    return TrialResult(
        scheme=scheme,
        snr_db=float(snr_db),
        nmse=nmse(cfr, truth),
        seed=seed,
        geometry=(config.geometry.Nt, config.geometry.Nr),
        np=scheme_plan(config, scheme).Np,
        r=R,
    )


def _attempt(args) -> TrialResult | None:
    config, scheme, snr_db, seed, time_varying = args
    try:
        return run_trial(config, scheme, snr_db, seed, time_varying)
    except (EstimationError, np.linalg.LinAlgError) as exc:
        log.info("trial excluded: scheme=%s snr=%s seed=%d: %s", scheme.value, snr_db, seed, exc)
        return None


def run_sweep(
    config: SimConfig,
    schemes,
    snr_list_db,
    trials: int,
    time_varying: bool = False,
    threads: int = 1,
) -> SweepResult:
    if trials < 1:
        raise ValueError(f"trials={trials} must be >= 1")
    config.validate()
    schemes = [Scheme(s) for s in schemes]
    snrs = [float(s) for s in snr_list_db]
    jobs = [(config, sc, snr, seed, time_varying) for sc in schemes for snr in snrs for seed in range(trials)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_attempt, jobs))
    else:
        outcomes = [_attempt(j) for j in jobs]

    rows = []
    for c, (scheme, snr) in enumerate((sc, snr) for sc in schemes for snr in snrs):
        cell = outcomes[c * trials : (c + 1) * trials]
        ok = [t.nmse for t in cell if t is not None]
        mean = math.fsum(ok) / len(ok) if ok else math.nan
        rows.append(SweepRow(
            scheme=scheme,
            snr_db=snr,
            nt=config.geometry.Nt,
            nr=config.geometry.Nr,
            np=scheme_plan(config, scheme).Np,
            r=config.estimator.R,
            mean_nmse_db=to_db(mean) if ok else math.nan,
            trials=len(ok),
            excluded=trials - len(ok),
        ))
    return SweepResult(rows=rows, config_hash=config.config_hash())


def _f6(x: float) -> str:
    return f"{x:.6f}"


def write_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in result.sorted_rows():
            w.writerow([r.scheme.value, _f6(r.snr_db), r.nt, r.nr, r.np, r.r,
                        _f6(r.mean_nmse_db), r.trials, r.excluded])


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["snr_db"] = float(r["snr_db"])
        r["mean_nmse_db"] = float(r["mean_nmse_db"])
        for key in ("nt", "nr", "np", "r", "trials", "excluded"):
            r[key] = int(r[key])
    return rows


def emit_plot_script(result: SweepResult, path, csv_path) -> None:
    """Write a gnuplot script plotting mean NMSE (dB) against SNR, one series per scheme."""
    path = Path(path)
    rel = os.path.relpath(Path(csv_path).resolve(), path.resolve().parent)
    schemes = sorted({r.scheme for r in result.rows}, key=_SCHEME_ORDER.__getitem__)
    col = {name: n + 1 for n, name in enumerate(CSV_HEADER)}
    lines = [
        f"# NMSE vs SNR, config {result.config_hash}",
        f"# data: {rel}",
        'set datafile separator ","',
        "set key top right",
        'set xlabel "SNR (dB)"',
        'set ylabel "NMSE (dB)"',
        "set grid",
    ]
    series = [
        f"'{rel}' every ::1 using {col['snr_db']}:(strcol({col['scheme']}) eq \"{s.value}\" ? "
        f"${col['mean_nmse_db']} : NaN) with linespoints title \"{s.value}\""
        for s in schemes
    ]
    if series:
        lines.append("plot " + ", \\\n     ".join(series))
    path.write_text("\n".join(lines) + "\n")

"""File formats: measurement CSV + JSON sidecar, and full-band CFR CSV.

Complex entries are written as separate real/imaginary columns with 17
significant digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidField, ShapeMismatch
from .params import EstimatorConfig, MimoGeometry, SystemParams
from .pilots import MeasurementMatrix, PilotPlan

MEAS_HEADER = ["l", "i", "j", "re", "im"]
CFR_HEADER = ["k", "i", "j", "re", "im"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_rows(path, header, index_name_rows: int, data: np.ndarray, nr: int) -> None:
    nt = data.shape[1] // nr
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in range(index_name_rows):
            for i in range(1, nt + 1):
                for j in range(1, nr + 1):
                    v = data[row, (i - 1) * nr + (j - 1)]
                    w.writerow([row, i, j, _fmt(v.real), _fmt(v.imag)])


def _read_rows(path, header, rows: int, nt: int, nr: int) -> np.ndarray:
    out = np.full((rows, nt * nr), np.nan + 0j)
    seen = np.zeros((rows, nt * nr), dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        first = next(reader, None)
        if first != header:
            raise InvalidField(str(path), ",".join(header), f"{path}: expected header {','.join(header)}")
        for n, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 5:
                raise InvalidField(str(path), "5 columns", f"{path}:{n}: expected 5 fields")
            r, i, j = int(rec[0]), int(rec[1]), int(rec[2])
            if not (0 <= r < rows and 1 <= i <= nt and 1 <= j <= nr):
                raise ShapeMismatch(str(path), "indices in range", f"{path}:{n}: index ({r},{i},{j}) out of range")
            m = (i - 1) * nr + (j - 1)
            out[r, m] = complex(float(rec[3]), float(rec[4]))
            seen[r, m] = True
    if not seen.all():
        raise ShapeMismatch(str(path), "complete matrix", f"{path}: {int((~seen).sum())} entries missing")
    return out


def write_measurement_csv(meas: MeasurementMatrix, nr: int, path) -> None:
    _write_rows(path, MEAS_HEADER, meas.shape[0], meas.data, nr)


def read_measurement_csv(path, plan: PilotPlan, geometry: MimoGeometry, snr_db: float,
                         symbol_index: int = 0) -> MeasurementMatrix:
    data = _read_rows(path, MEAS_HEADER, plan.Np, geometry.Nt, geometry.Nr)
    return MeasurementMatrix(data, snr_db, symbol_index)


def write_cfr_csv(cfr: np.ndarray, nr: int, path) -> None:
    _write_rows(path, CFR_HEADER, cfr.shape[0], np.asarray(cfr), nr)


def read_cfr_csv(path, N: int, geometry: MimoGeometry) -> np.ndarray:
    return _read_rows(path, CFR_HEADER, N, geometry.Nt, geometry.Nr)


def sidecar_dict(plan: PilotPlan, system: SystemParams, geometry: MimoGeometry,
                 estimator: EstimatorConfig, snr_db: float, symbol_index: int = 0) -> dict[str, Any]:
    """JSON-safe description of a measurement; a noiseless SNR is stored as null."""
    return {
        "system": {"n": system.N, "fs_hz": system.fs, "fc_hz": system.fc, "ng": system.Ng},
        "geometry": {"nt": geometry.Nt, "nr": geometry.Nr},
        "pilot": {"np": plan.Np, "d": plan.D, "theta": list(plan.theta), "n": plan.N},
        "estimator": {
            "r": estimator.R,
            "p_assumed": estimator.P_assumed,
            "order_selection": estimator.order_selection.value,
            "max_delay_s": estimator.max_delay,
        },
        "snr_db": None if math.isinf(snr_db) else snr_db,
        "symbol_index": symbol_index,
    }


def parse_sidecar(data: dict[str, Any]) -> tuple[PilotPlan, SystemParams, MimoGeometry, EstimatorConfig, float, int]:
    try:
        s, g, p, e = data["system"], data["geometry"], data["pilot"], data.get("estimator", {})
        system = SystemParams(N=int(s["n"]), fs=float(s["fs_hz"]), fc=float(s.get("fc_hz", 1e9)), Ng=int(s["ng"]))
        geometry = MimoGeometry(Nt=int(g["nt"]), Nr=int(g["nr"]))
        plan = PilotPlan(Np=int(p["np"]), D=int(p["d"]), theta=tuple(p["theta"]), N=int(p.get("n", system.N)))
        estimator = EstimatorConfig(
            R=int(e.get("r", 0)),
            P_assumed=int(e.get("p_assumed", 6)),
            order_selection=e.get("order_selection", "fixed"),
            max_delay=e.get("max_delay_s"),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidField("sidecar", "complete sidecar", f"malformed sidecar: missing or bad {exc}") from None
    snr = data.get("snr_db")
    return plan, system, geometry, estimator, math.inf if snr is None else float(snr), int(data.get("symbol_index", 0))


def write_sidecar(data: dict[str, Any], path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_sidecar(path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())

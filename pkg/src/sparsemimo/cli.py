"""Command-line client.

Every subcommand goes through the HTTP API: against ``--server URL`` (or
``$SPARSEMIMO_SERVER``) when given, otherwise against an in-process app.
Exit codes: 0 success, 1 validation error, 2 runtime or numerical error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .client import ServiceClient, ServiceError
from .errors import ConfigError
from .harness import Scheme, SweepResult, SweepRow, emit_plot_script, write_csv
from .io import parse_sidecar, read_measurement_csv, read_sidecar, write_cfr_csv, write_measurement_csv, write_sidecar
from .pilots import MeasurementMatrix

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("sparsemimo")


def parse_snr(text: str) -> list[float]:
    """'0:30:5' (inclusive range), '5,10,20', or a single value."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise argparse.ArgumentTypeError(f"bad SNR range {text!r}, expected start:stop:step")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + k * step for k in range(n)]
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad SNR list {text!r}") from None


def _snr_value(text: str) -> float | None:
    if text.lower() in ("inf", "+inf", "none", "noiseless"):
        return None
    return float(text)


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", "valid JSON", f"{path}: {exc}") from None


def _sweep_from_response(resp: dict) -> SweepResult:
    rows = [
        SweepRow(
            scheme=Scheme(r["scheme"]), snr_db=float(r["snr_db"]), nt=r["nt"], nr=r["nr"], np=r["np"], r=r["r"],
            mean_nmse_db=float(r["mean_nmse_db"]), trials=r["trials"], excluded=r["excluded"],
        )
        for r in resp["rows"]
    ]
    return SweepResult(rows=rows, config_hash=resp["config_hash"])


def cmd_validate(args, client: ServiceClient) -> int:
    resp = client.validate(_load_json(args.config))
    print(f"ok: configuration valid (hash {resp['config_hash']})")
    return EXIT_OK


def cmd_simulate(args, client: ServiceClient) -> int:
    config = _load_json(args.config)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    resp = client.simulate(config, schemes, args.snr, args.trials, args.time_varying, args.threads)
    result = _sweep_from_response(resp)
    write_csv(result, args.out)
    if args.plot:
        emit_plot_script(result, args.plot, args.out)
    for r in result.sorted_rows():
        print(f"{r.scheme.value:>16} snr={r.snr_db:6.2f} dB  nmse={r.mean_nmse_db:9.3f} dB  "
              f"trials={r.trials} excluded={r.excluded}")
    return EXIT_OK


def cmd_gen(args, client: ServiceClient) -> int:
    resp = client.generate(_load_json(args.config), _snr_value(args.snr), args.seed)
    sidecar = resp["sidecar"]
    meas = np.asarray(resp["measurement"]["re"]) + 1j * np.asarray(resp["measurement"]["im"])
    truth = np.asarray(resp["truth"]["re"]) + 1j * np.asarray(resp["truth"]["im"])
    nr = sidecar["geometry"]["nr"]
    write_measurement_csv(MeasurementMatrix(meas, math.inf), nr, args.out_meas)
    write_cfr_csv(truth, nr, args.out_truth)
    sidecar_path = args.out_sidecar or str(Path(args.out_meas).with_suffix(".json"))
    write_sidecar(sidecar, sidecar_path)
    print(f"wrote {args.out_meas}, {sidecar_path}, {args.out_truth}")
    return EXIT_OK


def cmd_estimate(args, client: ServiceClient) -> int:
    sidecar = read_sidecar(args.sidecar)
    plan, _, geometry, _, snr, symbol = parse_sidecar(sidecar)
    meas = read_measurement_csv(args.meas, plan, geometry, snr, symbol)
    resp = client.estimate(sidecar, meas.data.real.tolist(), meas.data.imag.tolist())
    cfr = np.asarray(resp["cfr"]["re"]) + 1j * np.asarray(resp["cfr"]["im"])
    write_cfr_csv(cfr, geometry.Nr, args.out)
    delays_us = ", ".join(f"{t * 1e6:.6f}" for t in resp["delays_s"])
    print(f"estimated delays (us): {delays_us}")
    return EXIT_OK


def cmd_serve(args, client=None) -> int:
    import uvicorn

    uvicorn.run("sparsemimo.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsemimo", description=__doc__.splitlines()[0])
    parser.add_argument("--server", default=os.environ.get("SPARSEMIMO_SERVER"),
                        help="base URL of a running service (default: in-process)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte-Carlo NMSE sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--schemes", default="proposed,comb-linear")
    p.add_argument("--snr", type=parse_snr, default=parse_snr("0:30:5"))
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--out", required=True)
    p.add_argument("--plot")
    p.add_argument("--time-varying", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen", help="generate one measurement and its true CFR")
    p.add_argument("--config", required=True)
    p.add_argument("--snr", default="20", help="dB, or 'inf' for noiseless")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-meas", required=True)
    p.add_argument("--out-truth", required=True)
    p.add_argument("--out-sidecar", help="default: measurement path with .json suffix")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("estimate", help="estimate the full-band CFR from a measurement CSV")
    p.add_argument("--meas", required=True)
    p.add_argument("--sidecar", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("validate", help="check a configuration file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "serve":
        return cmd_serve(args)
    try:
        with ServiceClient(args.server) as client:
            return args.func(args, client)
    except ServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if exc.is_validation else EXIT_RUNTIME
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

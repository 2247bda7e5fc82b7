"""Client for the HTTP API.

With a base URL it talks to a running server; without one it drives the
application in-process through an ASGI test transport, so the CLI works
with no server running.
"""

from __future__ import annotations

import warnings
from typing import Any

import httpx


class ServiceError(Exception):
    def __init__(self, status: int, payload: dict[str, Any]):
        self.status = status
        self.payload = payload
        detail = payload.get("detail", payload)
        super().__init__(f"{payload.get('error', 'error')}: {detail}")

    @property
    def is_validation(self) -> bool:
        return self.status == 422


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float | None = None):
        if base_url:
            self._http = httpx.Client(base_url=base_url, timeout=timeout)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import app

            self._http = TestClient(app, raise_server_exceptions=True)

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _post(self, path: str, body: dict[str, Any]) -> dict[str, Any]:
        resp = self._http.post(path, json=body)
        try:
            payload = resp.json()
        except ValueError:
            payload = {"error": "HTTPError", "detail": resp.text}
        if resp.status_code >= 400:
            if not isinstance(payload, dict):
                payload = {"error": "HTTPError", "detail": payload}
            raise ServiceError(resp.status_code, payload)
        return payload

    def validate(self, config: dict) -> dict:
        return self._post("/validate", {"config": config})

    def simulate(self, config: dict, schemes, snr_db, trials: int, time_varying=False, threads=1) -> dict:
        return self._post("/simulate", {
            "config": config, "schemes": list(schemes), "snr_db": list(snr_db),
            "trials": trials, "time_varying": time_varying, "threads": threads,
        })

    def generate(self, config: dict, snr_db: float | None, seed: int) -> dict:
        return self._post("/generate", {"config": config, "snr_db": snr_db, "seed": seed})

    def estimate(self, sidecar: dict, re, im) -> dict:
        return self._post("/estimate", {"sidecar": sidecar, "measurement": {"re": re, "im": im}})

import math
import warnings

import numpy as np
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from sparsemimo.service import app

SMALL = {
    "system": {"n": 1024, "ng": 64},
    "geometry": {"nt": 2, "nr": 2},
    "pilot": {"np": 16, "d": 16},
    "channel": {"delay_profile": "uniform_random", "p": 2},
}


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


class TestEndpoints:
    def test_health(self, client):
        r = client.get("/health")
        assert r.status_code == 200 and r.json()["status"] == "ok"

    def test_validate_ok(self, client):
        r = client.post("/validate", json={"config": {}})
        assert r.status_code == 200
        assert r.json()["ok"] is True and len(r.json()["config_hash"]) == 12

    def test_validate_error_names_field(self, client):
        r = client.post("/validate", json={"config": {"pilot": {"np": 11}}})
        assert r.status_code == 422
        body = r.json()
        assert body["error"] == "NpTooSmall" and "Np=11" in body["detail"]

    def test_unknown_key(self, client):
        r = client.post("/validate", json={"config": {"pilot": {"npp": 1}}})
        assert r.status_code == 422 and r.json()["field"] == "pilot.npp"

    def test_simulate(self, client):
        r = client.post("/simulate", json={"config": SMALL, "schemes": ["proposed", "comb-linear"],
                                           "snr_db": [0, 20], "trials": 3})
        assert r.status_code == 200
        rows = r.json()["rows"]
        assert [(x["scheme"], x["snr_db"]) for x in rows] == [
            ("proposed", 0.0), ("proposed", 20.0), ("comb-linear", 0.0), ("comb-linear", 20.0)]
        assert all(x["trials"] == 3 and x["excluded"] == 0 for x in rows)

    def test_simulate_noiseless_reports_tag(self, client):
        cfg = dict(SMALL, channel={"delay_profile": {"explicit": [0.0]}})
        r = client.post("/simulate", json={"config": cfg, "schemes": ["comb-linear"], "snr_db": [1e9], "trials": 1})
        assert r.status_code == 200
        v = r.json()["rows"][0]["mean_nmse_db"]
        assert v == "-inf" or (isinstance(v, float) and v < -100)

    def test_simulate_unknown_scheme(self, client):
        r = client.post("/simulate", json={"config": SMALL, "schemes": ["mmse"], "snr_db": [0], "trials": 1})
        assert r.status_code == 422

    def test_simulate_request_validation(self, client):
        r = client.post("/simulate", json={"config": SMALL, "trials": 0})
        assert r.status_code == 422

    def test_generate_then_estimate(self, client):
        gen = client.post("/generate", json={"config": SMALL, "snr_db": None, "seed": 4}).json()
        assert gen["sidecar"]["snr_db"] is None
        re, im = np.array(gen["measurement"]["re"]), np.array(gen["measurement"]["im"])
        assert re.shape == (16, 4)
        est = client.post("/estimate", json={"sidecar": gen["sidecar"], "measurement": gen["measurement"]})
        assert est.status_code == 200
        body = est.json()
        np.testing.assert_allclose(body["delays_s"], gen["delays_s"], rtol=0, atol=1e-6 * 1e-7)
        cfr = np.array(body["cfr"]["re"]) + 1j * np.array(body["cfr"]["im"])
        truth = np.array(gen["truth"]["re"]) + 1j * np.array(gen["truth"]["im"])
        assert cfr.shape == (1024, 4)
        assert np.sum(np.abs(cfr - truth) ** 2) / np.sum(np.abs(truth) ** 2) < 1e-18

    def test_estimate_shape_mismatch(self, client):
        gen = client.post("/generate", json={"config": SMALL, "snr_db": 10, "seed": 1}).json()
        bad = {"re": gen["measurement"]["re"][:-1], "im": gen["measurement"]["im"][:-1]}
        r = client.post("/estimate", json={"sidecar": gen["sidecar"], "measurement": bad})
        assert r.status_code == 422 and r.json()["field"] == "measurement"

    def test_estimation_failure_is_500(self, client):
        gen = client.post("/generate", json={"config": SMALL, "snr_db": None, "seed": 1}).json()
        zeros = [[0.0] * 4 for _ in range(16)]
        last = [row[:] for row in zeros]
        last[-1] = [1.0] * 4
        sidecar = dict(gen["sidecar"], estimator=dict(gen["sidecar"]["estimator"], p_assumed=1))
        r = client.post("/estimate", json={"sidecar": sidecar, "measurement": {"re": last, "im": zeros}})
        assert r.status_code == 500 and r.json()["error"] == "DegenerateRotation"

    def test_generate_is_seeded(self, client):
        a = client.post("/generate", json={"config": SMALL, "snr_db": 5, "seed": 9}).json()
        b = client.post("/generate", json={"config": SMALL, "snr_db": 5, "seed": 9}).json()
        assert a == b
        assert not math.isinf(a["sidecar"]["snr_db"])

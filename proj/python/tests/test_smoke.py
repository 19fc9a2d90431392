import json

import numpy as np
import pytest

import hetsurr


@pytest.fixture(scope="module")
def data():
    return hetsurr.simulate(1, 1500, seed=4)


def test_simulate_shapes_and_determinism(data):
    assert data["x"].shape == (1500, 6)
    assert set(np.unique(data["g"])) == {0, 1}
    again = hetsurr.simulate(1, 1500, seed=4)
    np.testing.assert_array_equal(again["y"], data["y"])


def test_true_pte_closed_form():
    x = np.zeros((3, 6))
    x[:, 0] = [0.0, 1.0, 2.0]
    t = hetsurr.true_pte(1, x)
    np.testing.assert_allclose(t["r_s"], 1 - (1 + 2 * x[:, 0]) / (4 + 2 * x[:, 0]))


def test_fit_estimate_and_plugin_identity(data):
    est = hetsurr.estimate(data["y"], data["s"], data["g"], data["x"], data["x"][:100], seed=1)
    ok = est["valid"]
    lhs = (1 - est["r_s"][ok]) * est["delta"][ok]
    np.testing.assert_allclose(lhs, est["delta_s"][ok], rtol=0, atol=1e-12)
    truth = hetsurr.true_pte(1, data["x"][:100])["r_s"]
    assert np.median(np.abs(est["r_s"] - truth)) < 0.1


def test_model_json_round_trip(data):
    model = hetsurr.fit(data["y"], data["s"], data["g"], data["x"], family="gam", seed=2)
    loaded = hetsurr.FittedModel.from_json(model.to_json())
    a = model.estimate(data["x"][:20], 1e-6)
    b = loaded.estimate(data["x"][:20], 1e-6)
    np.testing.assert_array_equal(a["r_s"], b["r_s"])
    assert loaded.family == "gam"


def test_bootstrap_intervals_and_identification(data):
    model = hetsurr.fit(data["y"], data["s"], data["g"], data["x"], seed=3)
    boot = hetsurr.bootstrap(data["y"], data["s"], data["g"], data["x"], data["x"][:30], model,
                             replicates=40, seed=3)
    assert boot.r_s.shape == (40, 30)
    ci = boot.percentile_ci(0.05)
    assert np.all(ci["r_s"][:, 0] <= ci["r_s"][:, 1])
    ident = boot.identify(0.5, 0.05)
    assert np.all(ident["p_adjusted"] >= ident["p_raw"])
    same = hetsurr.bootstrap(data["y"], data["s"], data["g"], data["x"], data["x"][:30], model,
                             replicates=40, seed=3, workers=2)
    np.testing.assert_array_equal(same.r_s, boot.r_s)
    restored = hetsurr.Bootstrap.from_json(boot.to_json())
    np.testing.assert_array_equal(restored.r_s, boot.r_s)


def test_bh_adjust():
    adj = hetsurr.bh_adjust([0.01, 0.04, 0.03, 0.2])
    np.testing.assert_allclose(adj, [0.04, 0.16 / 3, 0.16 / 3, 0.2])


def test_run_study_report():
    report = hetsurr.run_study(4, iterations=2, bootstrap=10, n=400, test_size=40, seed=5)
    assert report["completed_iterations"] == 2
    assert 0.0 <= report["metrics"]["coverage"] <= 1.0
    json.dumps(report)


def test_errors_are_typed(data):
    with pytest.raises(hetsurr.ArgumentError):
        hetsurr.fit(data["y"], data["s"], data["g"], data["x"], family="boosting")
    with pytest.raises(hetsurr.DomainError):
        hetsurr.fit(data["y"], data["s"], np.full(1500, 2.0), data["x"])
    with pytest.raises(hetsurr.HetsurrError):
        hetsurr.FittedModel.from_json('{"format_version": 1}')

import json
import math
import os

import numpy as np
import pytest

import wsqaoa

SOURCE = os.environ.get("WSQAOA_SOURCE_DIR", os.path.join(os.path.dirname(__file__), "..", ".."))
FIXTURE = os.path.join(SOURCE, "fixtures", "appendix_dax10.json")


def fc(inst, bits):
    x = np.array(bits, dtype=float)
    return inst.q * x @ inst.sigma @ x - (1 - inst.q) * inst.mu @ x


def test_fixture_matches_builtin():
    a = wsqaoa.load_instance(FIXTURE)
    b = wsqaoa.appendix_instance()
    assert np.array_equal(a.mu, b.mu)
    assert np.array_equal(a.sigma, b.sigma)
    assert a.budget == 5


def test_qubo_against_numpy():
    inst = wsqaoa.appendix_instance()
    qubo = wsqaoa.to_qubo(inst)
    for z in range(0, 1024, 7):
        bits = [(z >> i) & 1 for i in range(10)]
        ref = fc(inst, bits) + inst.penalty * (inst.budget - sum(bits)) ** 2
        assert abs(qubo.evaluate(bits) - ref) <= 1e-12
        assert qubo.evaluate_index(z) == qubo.evaluate(bits)


def test_penalty_default_and_validation():
    mu = np.array([0.1, 0.2, 0.3])
    sigma = np.eye(3) * 0.1
    inst = wsqaoa.PortfolioInstance(mu, sigma, 0.5, 1)
    assert inst.penalty == pytest.approx(wsqaoa.choose_penalty(inst))
    with pytest.raises(ValueError):
        wsqaoa.PortfolioInstance(mu, -sigma, 0.5, 1)
    with pytest.raises(wsqaoa.InputError):
        wsqaoa.PortfolioInstance(mu, sigma, 0.5, 3)


def test_relaxation_and_spectrum():
    inst = wsqaoa.appendix_instance()
    sol = wsqaoa.relax_instance(inst)
    assert sol.converged
    spec = wsqaoa.brute_force_spectrum(inst)
    assert spec.argmin == 962
    assert spec.feasible_count == 252
    assert sol.objective <= min(wsqaoa.cost_table(wsqaoa.to_qubo(inst)))
    bits, r, p = wsqaoa.classical_baseline(inst, list(sol.x_star))
    assert (r, p) == (1.0, 1.0)
    assert wsqaoa.epsilon_measure(list(sol.x_star), bits) == pytest.approx(0.4244, abs=1e-3)


def test_statevector_and_mixers():
    s = wsqaoa.init_plus(3)
    assert np.allclose(s.probabilities(), 1 / 8)
    thetas = wsqaoa.warmstart_angles([0.2, 0.5, 0.9])
    w = wsqaoa.init_warmstart(thetas)
    before = np.array(w.probabilities())
    wsqaoa.apply_warmstart_mixer(w, 0.7, thetas)
    assert np.max(np.abs(np.array(w.probabilities()) - before)) <= 1e-12
    a = wsqaoa.init_warmstart([0.3, 1.1, 2.0])
    b = wsqaoa.init_warmstart([0.3, 1.1, 2.0])
    wsqaoa.apply_warmstart_mixer(a, 0.4, [math.pi / 2] * 3)
    wsqaoa.apply_standard_mixer(b, 0.4)
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)
    hist = wsqaoa.sample_shots(s, 100, 3)
    assert sum(hist.values()) == 100
    assert hist == wsqaoa.sample_shots(s, 100, 3)


def test_optimize_small():
    inst = wsqaoa.generate_instance(3, n_assets=6)
    spec = wsqaoa.AnsatzSpec.standard(wsqaoa.to_qubo(inst), 1)
    cfg = wsqaoa.OptimizerConfig()
    cfg.restarts = 2
    cfg.max_evals_per_layer = 100
    res = wsqaoa.optimize(spec, cfg)
    assert len(res.best_gammas) == 1
    again = wsqaoa.expectation(spec, res.best_gammas, res.best_betas)
    assert abs(again - res.best_expectation) <= 1e-10
    assert res.best_expectation <= wsqaoa.expectation(spec, [0.0], [0.0]) + 1e-12


def test_elimination():
    inst = wsqaoa.appendix_instance()
    qubo = wsqaoa.to_qubo(inst)
    fixed, free = wsqaoa.round_relaxed(list(wsqaoa.relax_instance(inst).x_star), 0.25, 0.25)
    assert free == [2, 3, 9]
    red = wsqaoa.eliminate(qubo, fixed)
    assert red.n_free == 3
    for y in range(8):
        ybits = [(y >> k) & 1 for k in range(3)]
        full = wsqaoa.lift(red, ybits)
        assert abs(red.qubo.evaluate(ybits) - qubo.evaluate(full)) <= 1e-12


def test_verify_passes():
    checks = wsqaoa.verify_instance(wsqaoa.appendix_instance())
    assert all(ok for _, ok, _ in checks), checks


def test_run_experiment_json():
    cfg = {
        "sets": [{"source": "fixture", "path": FIXTURE, "label": "dax"}],
        "variants": ["standard", "pre(0.5,0.5)"],
        "depths": [0, 1],
        "optimizer": {"restarts": 1, "max_evals_per_layer": 20},
    }
    rec = json.loads(wsqaoa.run_experiment(json.dumps(cfg)))
    cells = {(c["variant"], c["p"]): c for c in rec["cells"]}
    assert cells[("standard", 0)]["P_exact"] == 1 / 1024
    assert cells[("pre(0.5,0.5)", 0)]["r"] == cells[("pre(0.5,0.5)", 1)]["r"] == 1.0

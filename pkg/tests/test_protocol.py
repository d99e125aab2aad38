import numpy as np
import pytest

from twistedhgp.protocol import (
    MAGIC,
    DenseProtocol,
    DenseState,
    FountainError,
    InconsistentOutcomeError,
    InitPlan,
    NontrivialClassError,
    SizeError,
    certify,
    extract_logical,
    logical_born,
    plan_all,
    plan_fountain,
    rho_from_mu,
    run_dense,
    run_ledger,
)
from twistedhgp.skeleton import triple_code

from conftest import rep
from test_skeleton import CHAIN, DOUBLED


@pytest.fixture(scope="module")
def fountain_code():
    return triple_code(DOUBLED, DOUBLED)


def test_fountain_plan_rep2(tc2):
    plan = plan_fountain(tc2)
    assert list(plan.clusters) == [0]
    assert plan.red.count("+") == 1 and plan.blue == ["+", "0"]
    assert plan.pairs == [(tc2.active_red()[0], 0, 0)]
    assert plan.certificate["ok"]


def test_fountain_plan_two_clusters(fountain_code):
    plan = plan_fountain(fountain_code)
    assert len(plan.clusters) == 2
    assert all(sum(plan.red[a] == "+" for a in members) == 1 for members in plan.clusters.values())
    assert len(plan.pairs) == 2 and plan.certificate["ok"]


def test_crowded_cluster_fails_certificate(fountain_code):
    plan = plan_fountain(fountain_code)
    crowded = InitPlan(list(plan.red), list(plan.blue), plan.clusters)
    for a in plan.clusters[0]:
        crowded.red[a] = "+"
    cert = certify(fountain_code, crowded)
    assert not cert["ok"] and cert["crowded_gammas"]


def test_all_zero_plan_has_no_pairs(tc2):
    plan = plan_all(tc2, "0", "0")
    assert plan.pairs == []
    assert logical_born(tc2, plan) == {(0,): 1.0, (1,): 0.0}


def test_planner_needs_product_classes():
    with pytest.raises(FountainError):
        plan_fountain(triple_code(CHAIN, DOUBLED))


def test_ledger_stages(tc2):
    t = run_ledger(tc2, plan_fountain(tc2), seed=3)
    s4 = t.stages["S4"]
    charge = [e for e in s4 if e.label == "CZ~_gamma"]
    assert [e.sign for e in charge] == [(-1) ** t.rho[0]]
    assert not any(e.label.startswith("A~") or e.label == "B^g" for e in s4)
    assert all(e.sign == 1 for e in s4 if e.label == "Z^g")
    assert sum(e.label == "A~^g" for e in t.stages["S2"]) == tc2.Xg.size(0)
    assert t.rho == rho_from_mu(tc2, t.mu)


def test_ledger_forced_zero(tc2):
    n0, n1 = tc2.Xg.size(0), tc2.Xg.size(1)
    t = run_ledger(tc2, plan_fountain(tc2), {"mu": [0] * n0, "z_mu": [0] * n1})
    assert t.rho == [0] and t.correction == []


def test_ledger_solves_coboundary_pattern(tc2):
    rng = np.random.default_rng(7)
    d0 = tc2.Xg.cobd(0).astype(int)
    for _ in range(10):
        eta = d0 @ rng.integers(0, 2, d0.shape[1]) % 2
        t = run_ledger(tc2, plan_fountain(tc2), {"z_mu": eta.tolist()})
        v = np.zeros(d0.shape[1], dtype=int)
        v[t.correction] = 1
        assert np.array_equal(d0 @ v % 2, eta)


def test_ledger_rejects_bad_outcomes(tc2):
    plan = plan_fountain(tc2)
    with pytest.raises(InconsistentOutcomeError):
        run_ledger(tc2, plan, {"z_mu": [1] + [0] * (tc2.Xg.size(1) - 1)})
    with pytest.raises(NontrivialClassError):
        run_ledger(tc2, plan, {"z_mu": tc2.green1.cocycle_reps[0].to_array().tolist()})


def test_ledger_rho_frequencies(tc2):
    plan = plan_fountain(tc2)
    hits = sum(run_ledger(tc2, plan, seed=s).rho == [0] for s in range(400))
    assert abs(hits / 400 - 0.75) <= 3 * np.sqrt(0.75 * 0.25 / 400)


def test_dense_born_rule(fountain_engine):
    assert fountain_engine.rho_distribution()[(0,)] == pytest.approx(0.75, abs=1e-12)
    assert sum(fountain_engine.outcome_distribution().values()) == pytest.approx(1.0, abs=1e-12)


def test_dense_branch_states(fountain_engine):
    for leaf in fountain_engine.leaves.values():
        for br in leaf["branches"].values():
            pair = br["logical"].pairs[0]
            target = "fidelity_magic" if leaf["rho"] == [0] else "fidelity_11"
            assert pair[target] >= 1 - 1e-9
            assert pair["purity"] == pytest.approx(1.0, abs=1e-9)
            assert br["checks"]["max_deviation"] < 1e-9
            assert br["checks"]["green_z_violations"] == 0


def test_magic_state_expectations(fountain_engine):
    leaf = next(v for v in fountain_engine.leaves.values() if v["rho"] == [0])
    state = next(iter(leaf["branches"].values()))["logical"]
    a, b, _ = fountain_engine.plan.pairs[0]
    rho2 = state.reduced([a, len(fountain_engine.tc.red) + b])
    z1 = np.kron(np.diag([1, -1]), np.eye(2))
    z2 = np.kron(np.eye(2), np.diag([1, -1]))
    assert np.trace(rho2 @ z1) == pytest.approx(1 / 3)
    assert np.trace(rho2 @ z2) == pytest.approx(1 / 3)
    assert MAGIC @ rho2 @ MAGIC == pytest.approx(1.0)
    one = state.reduced([a])
    assert np.trace(one @ one) < 1 - 1e-3


def test_extract_encoded_zero(tc2, fountain_engine):
    zero = fountain_engine.logical_basis[0]
    state = extract_logical(DenseState(16, zero), tc2)
    assert state.amplitudes[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        noisy = zero.copy()
        noisy[np.argmin(np.abs(zero))] += 0.1
        extract_logical(DenseState(16, noisy), tc2)


def test_skipped_correction_is_flagged(tc2):
    eng = DenseProtocol(tc2, plan_fountain(tc2), correct=False)
    flagged = [
        br
        for leaf in eng.leaves.values()
        for br in leaf["branches"].values()
        if br["checks"]["green_z_violations"]
    ]
    assert flagged and all(br["correction"] for br in flagged)


def test_run_dense_is_seeded(tc2):
    plan = plan_fountain(tc2)
    a, b = run_dense(tc2, plan, seed=11), run_dense(tc2, plan, seed=11)
    assert a.to_json() == b.to_json()
    assert a.rho == rho_from_mu(tc2, a.mu)


def test_dense_size_limit(tc3):
    with pytest.raises(SizeError):
        DenseProtocol(tc3, plan_fountain(tc3))
    with pytest.raises(SizeError):
        DenseState(27, np.zeros(1))

import numpy as np
import pytest

from twistedhgp.complexes import validate
from twistedhgp.skeleton import (
    ADJACENCY_RULES,
    COPIES,
    Cochain,
    ConstructionError,
    UnsupportedDegreeError,
    cup_eval_triple,
    factor_family,
    intersection_tensor,
    invariance_check,
    stokes_check,
    triple_code,
)

from conftest import rep

CHAIN = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]], dtype=np.uint8)
DOUBLED = np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1], [0, 1, 1]], dtype=np.uint8)


@pytest.mark.parametrize("L", [2, 3])
def test_qubit_counts(rep_code, L):
    tc = rep_code(L)
    assert tc.n_qubits == {"r": 2 * L * L, "b": 2 * L * L, "g": 2 * L * L}
    assert tc.total_qubits == 6 * L * L
    assert [len(tc.red), len(tc.blue), len(tc.green0), len(tc.green1)] == [2, 2, 1, 2]
    for c in COPIES:
        assert validate(tc.complex(c)).ok


def test_class_tags(tc2):
    assert [t[0] for t in tc2.red.tags] == ["mixed", "active"]
    assert [t[0] for t in tc2.blue.tags] == ["real", "spurious"]
    assert [t[0] for t in tc2.green0.tags] == ["gamma"]
    assert tc2.active_red() == [1]


def test_factor_family_errors():
    with pytest.raises(ConstructionError):
        factor_family(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ConstructionError):
        factor_family(np.eye(2, dtype=np.uint8))  # two disconnected checks
    fam = factor_family(DOUBLED)
    assert fam.n_checks == 4 and fam.n_bits == 3
    assert len(fam.loops) == len(fam.edges) - fam.n_checks + 1


@pytest.mark.parametrize("L", [2, 3, 4])
def test_tensor_is_single_delta(rep_code, L):
    tc = rep_code(L)
    T = intersection_tensor(tc)
    assert T.shape == (2, 2, 1)
    assert np.argwhere(T).tolist() == [[tc.active_red()[0], 0, 0]]


@pytest.mark.parametrize("H1,H2", [(DOUBLED, DOUBLED), (CHAIN, DOUBLED)])
def test_tensor_matches_per_triple_evaluation(H1, H2):
    tc = triple_code(H1, H2)
    T = intersection_tensor(tc)
    for a, u in enumerate(tc.red.cocycle_reps):
        for b, v in enumerate(tc.blue.cocycle_reps):
            for g, w in enumerate(tc.green0.cocycle_reps):
                got = cup_eval_triple(tc, Cochain("r", 1, u), Cochain("b", 1, v), Cochain("g", 0, w))
                assert got == T[a, b, g]


@pytest.mark.parametrize("H1,H2", [(rep(2), rep(2)), (rep(3), rep(3)), (DOUBLED, DOUBLED), (CHAIN, DOUBLED)])
def test_default_rule_is_cohomological(H1, H2):
    tc = triple_code(H1, H2)
    assert stokes_check(tc, trials=30).ok
    assert invariance_check(tc, 30) == []


@pytest.mark.parametrize("rule", [r for r in ADJACENCY_RULES if r != "min-index"])
def test_other_rules_break_invariance(rep_code, rule):
    tc = rep_code(3, rule)
    assert not stokes_check(tc, trials=30).ok
    assert invariance_check(tc, 30)


def test_cup_eval_checks_inputs(tc2):
    r = Cochain.zero(tc2, "r", 1)
    b = Cochain.zero(tc2, "b", 1)
    g = Cochain.zero(tc2, "g", 0)
    assert cup_eval_triple(tc2, r, b, g) == 0
    with pytest.raises(ValueError):
        cup_eval_triple(tc2, b, r, g)
    with pytest.raises(UnsupportedDegreeError):
        cup_eval_triple(tc2, Cochain.zero(tc2, "r", 0), Cochain.zero(tc2, "b", 0), Cochain.zero(tc2, "g", 1))
    with pytest.raises(ValueError):
        triple_code(rep(2), rep(2), "nearest")

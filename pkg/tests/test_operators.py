from functools import reduce

import numpy as np
import pytest

from twistedhgp.operators import (
    NotACocycleError,
    PhasePolyOp,
    charge_parity,
    closure_report,
    commutator,
    entangler,
    logical_operators,
    multiply,
    twisted_stabilizers,
    untwisted_stabilizers,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1, -1])


def on(n, q, g):
    """Single-qubit gate g on qubit q; qubit 0 is the least significant bit."""
    return reduce(np.kron, [g if k == q else I2 for k in reversed(range(n))])


def cz(n, i, j):
    d = np.arange(2**n)
    return np.diag(np.where((d >> i & 1) & (d >> j & 1), -1.0, 1.0))


def oracle(op):
    """Diagonal phase applied after the X string, assembled from gates."""
    n = op.n
    m = np.eye(2**n)
    for q in op.x_support:
        m = on(n, q, X) @ m
    d = np.eye(2**n) * (-1) ** op.sign
    for q in op.z_support:
        d = on(n, q, Z) @ d
    for i, j in op.cz:
        d = cz(n, i, j) @ d
    return d @ m


def random_op(rng, n):
    pairs = [tuple(rng.choice(n, 2, replace=False)) for _ in range(rng.integers(0, 4))]
    return PhasePolyOp.build(
        n,
        x=np.flatnonzero(rng.integers(0, 2, n)),
        z=np.flatnonzero(rng.integers(0, 2, n)),
        cz=pairs,
        sign=int(rng.integers(0, 2)),
    )


def test_matrix_agrees_with_gate_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        op = random_op(rng, 4)
        assert np.allclose(op.to_matrix(), oracle(op))


def test_multiply_inverse_commutator():
    rng = np.random.default_rng(1)
    for _ in range(40):
        p, q = random_op(rng, 5), random_op(rng, 5)
        P, Q = oracle(p), oracle(q)
        assert np.allclose(oracle(multiply(p, q)), P @ Q)
        assert np.allclose(oracle(p.inverse()), np.linalg.inv(P))
        assert np.allclose(oracle(commutator(p, q)), P @ Q @ np.linalg.inv(P) @ np.linalg.inv(Q))


def test_build_folds_repeated_cz():
    op = PhasePolyOp.build(3, cz=[(1, 1), (0, 2), (2, 0)])
    assert op.z_support == [1] and not op.cz
    with pytest.raises(ValueError):
        multiply(PhasePolyOp.identity(2), PhasePolyOp.identity(3))


@pytest.mark.parametrize("L", [2, 3])
def test_untwisted_group_commutes(rep_code, L):
    stabs = untwisted_stabilizers(rep_code(L))
    ops = [g.op for g in stabs.generators]
    for i, p in enumerate(ops):
        for q in ops[i + 1 :]:
            assert commutator(p, q).is_identity


@pytest.mark.parametrize("L", [2, 3])
def test_dressed_closure(rep_code, L):
    report = closure_report(twisted_stabilizers(rep_code(L)))
    assert report.pairs_checked > 0
    assert report.ok


@pytest.mark.parametrize("rule", ["min-index-bare", "symmetrized"])
def test_closure_negative_controls(rep_code, rule):
    assert not closure_report(twisted_stabilizers(rep_code(2, rule))).ok


@pytest.mark.parametrize("L", [2, 3])
def test_charge_parity_is_diagonal(rep_code, L):
    tc = rep_code(L)
    stabs = twisted_stabilizers(tc)
    for copy, hb in (("g", tc.green0), ("r", tc.red0), ("b", tc.blue0)):
        for v in hb.cocycle_reps:
            op = charge_parity(tc, copy, v, stabs)
            assert op.x == 0
    gamma = charge_parity(tc, "g", tc.green0.cocycle_reps[0], stabs)
    assert gamma.cz, "the green charge parity should leave a CZ layer on red and blue"
    with pytest.raises(NotACocycleError):
        charge_parity(tc, "g", np.eye(tc.Xg.size(0), dtype=np.uint8)[0], stabs)


@pytest.mark.parametrize("L", [2, 3])
def test_entangler_round_trip(rep_code, L):
    assert entangler(rep_code(L)).ok


def test_entangler_rejects_symmetrized(rep_code):
    ent = entangler(rep_code(2, "symmetrized"))
    assert not ent.conjugation_ok


def test_logicals_pair_up(tc2):
    logs = logical_operators(tc2)
    for copy in ("r", "b"):
        for i, zbar in enumerate(logs.zbars[copy]):
            for j, desc in enumerate(logs.xbars[copy]):
                xbar = PhasePolyOp.build(tc2.total_qubits, x=desc["x"])
                anti = not commutator(zbar, xbar).is_identity
                assert anti == (i == j)
    assert logs.xbars["r"][tc2.active_red()[0]]["projectors"] == [0]

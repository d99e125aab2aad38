import numpy as np
import pytest

from twistedhgp.f2core import (
    BitMatrix,
    BitVector,
    ContainmentError,
    Echelon,
    kernel_basis,
    quotient_basis,
    rank,
    rref,
    solve,
)


def span_size(m):
    """Brute force: number of distinct GF(2) combinations of the rows."""
    rows = [int("".join(map(str, r)) or "0", 2) for r in np.asarray(m)]
    seen = {0}
    for r in rows:
        seen |= {s ^ r for s in seen}
    return len(seen)


def naive_rank(m):
    a = [list(r) for r in np.asarray(m, dtype=int)]
    r = 0
    for c in range(len(a[0]) if a else 0):
        p = next((i for i in range(r, len(a)) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        for i in range(len(a)):
            if i != r and a[i][c]:
                a[i] = [x ^ y for x, y in zip(a[i], a[r])]
        r += 1
    return r


@pytest.mark.parametrize("n", [0, 1, 63, 64, 65, 130])
def test_vector_roundtrip(n):
    bits = np.random.default_rng(n).integers(0, 2, n).astype(np.uint8)
    v = BitVector.from_array(bits)
    assert np.array_equal(v.to_array(), bits)
    assert v.weight() == bits.sum()
    assert v.support() == list(np.flatnonzero(bits))
    assert BitVector.from_int(n, v.to_int()) == v


def test_vector_ops():
    a = BitVector.from_support(70, [0, 5, 69])
    b = BitVector.from_support(70, [5, 6])
    assert (a ^ b).support() == [0, 6, 69]
    assert (a & b).support() == [5]
    assert a.dot(b) == 1
    assert a[69] == 1 and a[68] == 0
    with pytest.raises(ValueError):
        a ^ BitVector.zeros(3)


@pytest.mark.parametrize("shape", [(1, 1), (5, 9), (9, 5), (12, 12), (3, 70)])
def test_rank_against_span_enumeration(shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(5):
        m = rng.integers(0, 2, shape).astype(np.uint8)
        r = rank(m)
        assert 2**r == span_size(m)
        assert r == naive_rank(m)


def test_rank_edge_cases():
    assert rank(np.zeros((4, 4), dtype=np.uint8)) == 0
    assert rank(BitMatrix.identity(100)) == 100
    assert rank(np.zeros((0, 5), dtype=np.uint8)) == 0
    m = np.ones((3, 3), dtype=np.uint8)
    assert rank(m) == 1


def test_matmul_matches_integer_product():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 2, (7, 130)).astype(np.uint8)
    b = rng.integers(0, 2, (130, 9)).astype(np.uint8)
    got = (BitMatrix.from_array(a) @ BitMatrix.from_array(b)).to_array()
    assert np.array_equal(got, (a.astype(int) @ b) % 2)
    v = rng.integers(0, 2, 130).astype(np.uint8)
    assert np.array_equal((BitMatrix.from_array(a) @ BitVector.from_array(v)).to_array(), (a.astype(int) @ v) % 2)


def test_rref_is_reduced_and_spans_same_rows():
    rng = np.random.default_rng(2)
    m = rng.integers(0, 2, (8, 12)).astype(np.uint8)
    red, piv = rref(m)
    r = red.to_array()
    assert len(piv) == rank(m)
    for i, p in enumerate(piv):
        assert r[i, p] == 1 and r[:, p].sum() == 1
        assert not r[i, :p].any()
    assert rank(np.vstack([m, r])) == rank(m)


def test_kernel_basis():
    rng = np.random.default_rng(3)
    for shape in [(4, 10), (10, 4), (6, 6)]:
        m = rng.integers(0, 2, shape).astype(np.uint8)
        ker = kernel_basis(m)
        assert len(ker) == shape[1] - rank(m)
        for v in ker:
            assert not ((m.astype(int) @ v.to_array()) % 2).any()
        if ker:
            assert rank(np.array([v.to_array() for v in ker])) == len(ker)


def test_solve():
    rng = np.random.default_rng(4)
    m = rng.integers(0, 2, (6, 9)).astype(np.uint8)
    x0 = rng.integers(0, 2, 9)
    b = BitVector.from_array((m.astype(int) @ x0) % 2)
    x = solve(m, b)
    assert np.array_equal((m.astype(int) @ x.to_array()) % 2, b.to_array())
    # rows 0 and 1 equal but right-hand sides differ
    bad = np.array([[1, 0], [1, 0]], dtype=np.uint8)
    assert solve(bad, BitVector.from_array([1, 0])) is None
    with pytest.raises(ValueError):
        solve(m, BitVector.zeros(5))


def test_echelon_and_quotient():
    e = Echelon(8)
    assert e.add(0b1100) and e.add(0b0110)
    assert not e.add(0b1010)
    assert e.contains(0b1010) and not e.contains(0b0001)
    z = [BitVector.from_int(4, v) for v in (0b0011, 0b0110, 0b0101)]
    b = [BitVector.from_int(4, 0b0011)]
    q = quotient_basis(z, b)
    assert len(q) == 1
    with pytest.raises(ContainmentError):
        quotient_basis(z, [BitVector.from_int(4, 0b1000)])

import numpy as np
import pytest

from twistedhgp.complexes import (
    ChainComplex,
    DimensionError,
    align,
    betti,
    homology_basis,
    pairing_matrix,
    tensor_product,
    time_complex,
    validate,
)
from twistedhgp.f2core import BitMatrix, BitVector

from conftest import rep


def test_circle_betti():
    c = time_complex(5)
    assert [betti(c, k) for k in (0, 1)] == [1, 1]
    seg = time_complex(5, closed=False)
    assert [betti(seg, k) for k in (0, 1)] == [1, 0]


def test_validate_flags_bad_composition():
    d1 = np.array([[1, 1]], dtype=np.uint8)
    d2 = np.array([[1], [0]], dtype=np.uint8)
    c = ChainComplex.from_maps([d1, d2])
    assert validate(c).failures() == [2]
    c.boundary[2] = BitMatrix.from_array(np.ones((3, 1), dtype=np.uint8))
    with pytest.raises(DimensionError):
        validate(c)


@pytest.mark.parametrize("seed", range(4))
def test_kunneth(seed):
    rng = np.random.default_rng(seed)
    a = ChainComplex.from_maps([rng.integers(0, 2, (4, 6))], "A", "A")
    b = ChainComplex.from_maps([rng.integers(0, 2, (5, 3))], "B", "B")
    p = tensor_product(a, b)
    assert validate(p).ok
    ba = [betti(a, k) for k in range(2)]
    bb = [betti(b, k) for k in range(2)]
    expect = [sum(ba[i] * bb[k - i] for i in range(2) if 0 <= k - i < 2) for k in range(3)]
    assert [betti(p, k) for k in range(3)] == expect


def test_toric_homology_pairs_to_identity():
    a = ChainComplex.from_maps([rep(3)], "A", "A")
    p = tensor_product(a, a)
    hb = homology_basis(p, 1)
    assert len(hb) == 2
    assert np.array_equal(hb.pairing.to_array(), np.eye(2, dtype=np.uint8))
    for z in hb.cycle_reps:
        assert not (p.bd(1).astype(int) @ z.to_array() % 2).any()
    for w in hb.cocycle_reps:
        assert not (p.cobd(1).astype(int) @ w.to_array() % 2).any()


def test_block_layout():
    a = ChainComplex.from_maps([rep(2)], "A", "A")
    b = ChainComplex.from_maps([rep(3)], "B", "B")
    p = tensor_product(a, b)
    assert list(p.blocks[1]) == [(1, 0), (0, 1)]
    assert p.blocks[1][(0, 1)] == 2 * 3
    assert p.cells[1][0].index == ((1, 0), (0, 0))


def test_pairing_and_align_errors():
    with pytest.raises(DimensionError):
        pairing_matrix([BitVector.zeros(3)], [BitVector.zeros(4)])
    z = [BitVector.from_array([1, 1, 0]), BitVector.from_array([0, 1, 1])]
    w = [BitVector.from_array([1, 0, 0]), BitVector.from_array([0, 0, 1])]
    aligned = align(z, w)
    assert np.array_equal(pairing_matrix(z, aligned).to_array(), np.eye(2, dtype=np.uint8))
    with pytest.raises(DimensionError):
        homology_basis(time_complex(3), 4)

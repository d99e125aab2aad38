from itertools import product

import numpy as np
import pytest

from twistedhgp.pathintegral import (
    WindingConfig,
    logical_action,
    projector_identity_check,
    projector_product,
    weight,
)
from twistedhgp.skeleton import intersection_tensor


def test_weight_signs():
    T = np.zeros((1, 1, 1), dtype=np.uint8)
    T[0, 0, 0] = 1
    assert weight(WindingConfig.of([1], [1], [1], [0]), T) == -1
    assert weight(WindingConfig.of([1], [1], [1], [1]), T) == 1
    assert weight(WindingConfig.of([1], [0], [1], [1]), T) == -1
    with pytest.raises(ValueError):
        weight(WindingConfig.of([1, 0], [1], [1], [0]), T)


@pytest.mark.parametrize("seed", range(6))
def test_sum_equals_projector_product(seed):
    rng = np.random.default_rng(seed)
    T = rng.integers(0, 2, (2, 3, 3)).astype(np.uint8)
    for rho in product((0, 1), repeat=3):
        assert projector_identity_check(T, rho).ok


def test_corrupted_tensor_is_caught():
    T = np.zeros((2, 2, 1), dtype=np.uint8)
    T[1, 0, 0] = 1
    bad = T.copy()
    bad[0, 1, 0] = 1
    report = projector_identity_check(T, [0], projector_tensor=bad)
    assert not report.ok and report.mismatches


def test_two_qubit_cz_oracle(tc2):
    """One active pair: the action is (1 ± CZ)/2 on that pair, identity elsewhere."""
    T = intersection_tensor(tc2)
    cz = np.diag([1, 1, 1, -1])
    a = tc2.active_red()[0]
    plus = np.ones(4) / 2
    for rho, expect_p in ((0, 0.75), (1, 0.25)):
        proj = (np.eye(4) + (-1) ** rho * cz) / 2
        assert plus @ proj @ plus == pytest.approx(expect_p)
        diag = logical_action(T, [rho]).normalized()
        for i, n in enumerate(product((0, 1), repeat=2)):
            for j, m in enumerate(product((0, 1), repeat=2)):
                pair = 2 * n[a] + m[0]
                assert diag[i, j] == proj[pair, pair]


def test_projector_scale():
    T = np.ones((1, 1, 2), dtype=np.uint8)
    P = projector_product(T, [0, 1])
    # n = m = 1 gives phase -1 on both γ; ρ = (0, 1) then kills it
    assert P.tolist() == [[0, 0], [0, 0]]
    assert projector_product(T, [0, 0]).tolist() == [[4, 4], [4, 0]]

"""Class-level path-integral weights and the diagonal logical action they induce."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "LogicalAction",
    "ProjectorReport",
    "WindingConfig",
    "logical_action",
    "projector_identity_check",
    "projector_product",
    "weight",
]


def _bits(v, size: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=np.int64).ravel() & 1
    if size is not None and arr.size != size:
        raise ValueError(f"expected {size} entries, got {arr.size}")
    return arr


@dataclass(frozen=True)
class WindingConfig:
    n: tuple[int, ...]
    m: tuple[int, ...]
    l: tuple[int, ...]
    rho: tuple[int, ...]

    @classmethod
    def of(cls, n, m, l, rho) -> WindingConfig:
        return cls(*(tuple(int(b) & 1 for b in np.ravel(v)) for v in (n, m, l, rho)))


def _exponent(T: np.ndarray, n, m) -> np.ndarray:
    """Per-γ parity of Σ_{α,β} n_α m_β T[α, β, γ]."""
    return np.einsum("a,b,abg->g", n, m, T.astype(np.int64)) & 1


def weight(cfg: WindingConfig, T: np.ndarray) -> int:
    """Signed weight of one winding sector."""
    T = np.asarray(T)
    a, b, g = T.shape
    n, m = _bits(cfg.n, a), _bits(cfg.m, b)
    l, rho = _bits(cfg.l, g), _bits(cfg.rho, g)
    e = (int(rho @ l) + int(_exponent(T, n, m) @ l)) & 1
    return -1 if e else 1


def _labels(k: int) -> list[tuple[int, ...]]:
    return list(product((0, 1), repeat=k))


@dataclass
class LogicalAction:
    """Diagonal of the unnormalized logical action for one outcome vector ρ.

    ``diagonal[i, j]`` is the entry for the i-th red label and j-th blue label,
    both enumerated in lexicographic order of their bit tuples.
    """

    rho: tuple[int, ...]
    diagonal: np.ndarray
    n_gamma: int

    def normalized(self) -> np.ndarray:
        return self.diagonal / float(2**self.n_gamma)

    def entry(self, n, m) -> int:
        i = int("".join(map(str, n)) or "0", 2)
        j = int("".join(map(str, m)) or "0", 2)
        return int(self.diagonal[i, j])

    def to_json(self) -> dict:
        return {"rho": "".join(map(str, self.rho)), "diagonal": self.diagonal.tolist()}


def logical_action(T: np.ndarray, rho) -> LogicalAction:
    """Sum the weights over all green windings l, exactly in integers."""
    T = np.asarray(T, dtype=np.int64)
    a, b, g = T.shape
    rho = _bits(rho, g)
    ls = np.array(_labels(g), dtype=np.int64).reshape(-1, g)
    out = np.zeros((2**a, 2**b), dtype=np.int64)
    for i, n in enumerate(_labels(a)):
        for j, m in enumerate(_labels(b)):
            e = (ls @ ((_exponent(T, np.array(n, dtype=np.int64), np.array(m, dtype=np.int64)) + rho) & 1)) & 1
            out[i, j] = int(np.sum(1 - 2 * e))
    return LogicalAction(tuple(rho.tolist()), out, g)


def projector_product(T: np.ndarray, rho) -> np.ndarray:
    """∏_γ (1 + (-1)^{ρ_γ} CZ̄_γ)/2 on the logical computational basis, scaled by 2^{|γ|}.

    ``CZ̄_γ`` multiplies the basis state |n, m> by (-1)^{Σ n_α m_β T[α, β, γ]}.
    Returned as exact integers.
    """
    T = np.asarray(T, dtype=np.int64)
    a, b, g = T.shape
    rho = _bits(rho, g)
    out = np.zeros((2**a, 2**b), dtype=np.int64)
    for i, n in enumerate(_labels(a)):
        for j, m in enumerate(_labels(b)):
            phases = 1 - 2 * _exponent(T, np.array(n, dtype=np.int64), np.array(m, dtype=np.int64))
            signs = 1 - 2 * rho
            out[i, j] = int(np.prod(1 + signs * phases))
    return out


@dataclass
class ProjectorReport:
    rho: tuple[int, ...]
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def projector_identity_check(T: np.ndarray, rho, projector_tensor: np.ndarray | None = None) -> ProjectorReport:
    """Compare the summed action with the projector product entry by entry.

    ``projector_tensor`` lets the right-hand side use a different tensor, which
    is how a corrupted entry is exercised.
    """
    lhs = logical_action(T, rho)
    rhs = projector_product(T if projector_tensor is None else projector_tensor, rho)
    report = ProjectorReport(lhs.rho)
    for i, j in np.argwhere(lhs.diagonal != rhs):
        report.mismatches.append({"n": int(i), "m": int(j), "sum": int(lhs.diagonal[i, j]), "projector": int(rhs[i, j])})
    return report

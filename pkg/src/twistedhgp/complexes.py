"""Graded chain complexes over GF(2), their (co)homology and tensor products."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .f2core import BitMatrix, BitVector, kernel_basis, quotient_basis, rank, solve

__all__ = [
    "CellLabel",
    "ChainComplex",
    "DimensionError",
    "HomologyBasis",
    "ValidationReport",
    "align",
    "betti",
    "homology_basis",
    "invert",
    "pairing_matrix",
    "tensor_product",
    "time_complex",
    "validate",
]


class DimensionError(ValueError):
    """Raised when matrix shapes do not agree with the declared cells."""


@dataclass(frozen=True)
class CellLabel:
    """Where a cell came from.

    Factor cells carry a single tag such as ``"X"`` and ``index=(i,)``.  Product
    cells carry a pair of tags and ``index=((p, i), (q, j))``, the degree and
    position of each factor cell.
    """

    origin: str | tuple
    index: tuple

    def __str__(self) -> str:
        return f"{self.origin}:{self.index}"


@dataclass
class ChainComplex:
    """Cells per degree ``0..grades`` and boundary maps ``C_k -> C_{k-1}``.

    ``boundary[k]`` is defined for ``1 <= k <= grades``; ``boundary[0]`` is a
    placeholder ``0 x |C_0|`` matrix so indexing by degree always works.
    """

    cells: list[list[CellLabel]]
    boundary: list[BitMatrix]
    name: str = ""
    blocks: list = field(default_factory=list, repr=False, compare=False)
    _dense: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def grades(self) -> int:
        return len(self.cells) - 1

    def size(self, k: int) -> int:
        return len(self.cells[k]) if 0 <= k <= self.grades else 0

    def bd(self, k: int) -> np.ndarray:
        """Dense uint8 boundary map C_k -> C_{k-1}; empty outside the grading."""
        if k not in self._dense:
            if 1 <= k <= self.grades:
                self._dense[k] = self.boundary[k].to_array()
            else:
                self._dense[k] = np.zeros((self.size(k - 1), self.size(k)), dtype=np.uint8)
        return self._dense[k]

    def cobd(self, k: int) -> np.ndarray:
        """Dense coboundary d^k: C^k -> C^{k+1}."""
        return np.ascontiguousarray(self.bd(k + 1).T)

    @cached_property
    def index(self) -> list[dict[CellLabel, int]]:
        return [{label: i for i, label in enumerate(cells)} for cells in self.cells]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "grades": self.grades,
            "cells": [[str(c) for c in cells] for cells in self.cells],
            "boundary": {str(k): self.boundary[k].coo() for k in range(1, self.grades + 1)},
        }

    @classmethod
    def from_maps(cls, maps: Sequence, origin: str = "C", name: str = "") -> ChainComplex:
        """Build from dense boundary maps ``[d1, d2, ...]`` with generic labels."""
        mats = [BitMatrix.from_array(np.asarray(m, dtype=np.uint8)) for m in maps]
        sizes = [mats[0].rows] + [m.cols for m in mats]
        cells = [[CellLabel(origin, (k, i)) for i in range(n)] for k, n in enumerate(sizes)]
        return cls(cells, [BitMatrix(0, sizes[0])] + mats, name=name)


@dataclass
class ValidationReport:
    per_grade: dict[int, bool]

    @property
    def ok(self) -> bool:
        return all(self.per_grade.values())

    def failures(self) -> list[int]:
        return [k for k, good in self.per_grade.items() if not good]


def validate(c: ChainComplex) -> ValidationReport:
    """Check shapes and that consecutive boundaries compose to zero."""
    for k in range(1, c.grades + 1):
        m = c.boundary[k]
        if m.shape != (c.size(k - 1), c.size(k)):
            raise DimensionError(
                f"grade {k}: boundary is {m.shape}, cells give {(c.size(k - 1), c.size(k))}"
            )
    per_grade = {1: True} if c.grades >= 1 else {}
    for k in range(2, c.grades + 1):
        per_grade[k] = not (c.boundary[k - 1] @ c.boundary[k]).any()
    return ValidationReport(per_grade)


def betti(c: ChainComplex, k: int) -> int:
    return c.size(k) - rank(c.bd(k)) - rank(c.bd(k + 1))


def pairing_matrix(cycles: Sequence[BitVector], cocycles: Sequence[BitVector]) -> BitMatrix:
    """Entry (i, j) is the mod-2 overlap of cycle i with cocycle j."""
    lengths = {len(v) for v in [*cycles, *cocycles]}
    if len(lengths) > 1:
        raise DimensionError(f"mixed vector lengths {sorted(lengths)}")
    if not cycles or not cocycles:
        return BitMatrix(len(cycles), len(cocycles))
    z = np.array([v.to_array() for v in cycles], dtype=np.int64)
    w = np.array([v.to_array() for v in cocycles], dtype=np.int64)
    return BitMatrix.from_array((z @ w.T) & 1)


def invert(m: np.ndarray) -> np.ndarray:
    """Inverse of a square invertible 0/1 matrix over GF(2)."""
    m = np.asarray(m, dtype=np.uint8)
    n = m.shape[0]
    cols = []
    for j in range(n):
        x = solve(m, BitVector.from_support(n, [j]))
        if x is None:
            raise np.linalg.LinAlgError("matrix is singular over GF(2)")
        cols.append(x.to_array())
    return np.array(cols, dtype=np.uint8).T.reshape(n, n)


def align(cycles: Sequence[BitVector], cocycles: Sequence[BitVector]) -> list[BitVector]:
    """Recombine cocycles so that pairing with ``cycles`` becomes the identity."""
    if not cycles:
        return []
    p = pairing_matrix(cycles, cocycles).to_array()
    mix = invert(p).T
    w = np.array([v.to_array() for v in cocycles], dtype=np.int64)
    return [BitVector.from_array(row) for row in (mix.astype(np.int64) @ w) & 1]


@dataclass
class HomologyBasis:
    """Aligned cycle and cocycle representatives in one degree."""

    degree: int
    cycle_reps: list[BitVector]
    cocycle_reps: list[BitVector]
    tags: list[str] = field(default_factory=list)

    @property
    def pairing(self) -> BitMatrix:
        return pairing_matrix(self.cycle_reps, self.cocycle_reps)

    def __len__(self) -> int:
        return len(self.cycle_reps)


def _columns(m: np.ndarray) -> list[BitVector]:
    return [BitVector.from_array(col) for col in np.asarray(m).T]


def cycle_space(c: ChainComplex, k: int) -> list[BitVector]:
    return kernel_basis(c.bd(k)) if c.size(k) else []


def cocycle_space(c: ChainComplex, k: int) -> list[BitVector]:
    return kernel_basis(c.cobd(k)) if c.size(k) else []


def homology_basis(c: ChainComplex, k: int) -> HomologyBasis:
    """Representatives of H_k and H^k with identity pairing."""
    if not 0 <= k <= c.grades:
        raise DimensionError(f"degree {k} outside 0..{c.grades}")
    cycles = quotient_basis(cycle_space(c, k), _columns(c.bd(k + 1)))
    cocycles = quotient_basis(cocycle_space(c, k), _columns(c.cobd(k - 1)) if k else [])
    if len(cycles) != len(cocycles):
        raise DimensionError(f"dim H_{k} = {len(cycles)} but dim H^{k} = {len(cocycles)}")
    return HomologyBasis(k, cycles, align(cycles, cocycles))


def _factor_blocks(a: ChainComplex, b: ChainComplex, k: int) -> list[tuple[int, int]]:
    """(p, q) with p + q = k, ordered by descending first-factor degree."""
    return [(p, k - p) for p in range(min(k, a.grades), -1, -1) if 0 <= k - p <= b.grades]


def tensor_product(a: ChainComplex, b: ChainComplex, name: str = "") -> ChainComplex:
    """Product complex with boundary ∂a ⊗ 1 + 1 ⊗ ∂b.

    Degree-k cells are grouped in blocks (p, k - p) by descending p; within a
    block the order is row-major in (first index, second index).
    """
    grades = a.grades + b.grades
    offsets: list[dict[tuple[int, int], int]] = []
    cells: list[list[CellLabel]] = []
    tag_a = a.name or "A"
    tag_b = b.name or "B"
    for k in range(grades + 1):
        offs, labels = {}, []
        for p, q in _factor_blocks(a, b, k):
            offs[(p, q)] = len(labels)
            labels.extend(
                CellLabel((tag_a, tag_b), ((p, i), (q, j)))
                for i in range(a.size(p))
                for j in range(b.size(q))
            )
        offsets.append(offs)
        cells.append(labels)

    boundary = [BitMatrix(0, len(cells[0]))]
    for k in range(1, grades + 1):
        m = np.zeros((len(cells[k - 1]), len(cells[k])), dtype=np.uint8)
        for (p, q), col0 in offsets[k].items():
            width = a.size(p) * b.size(q)
            if p >= 1 and (p - 1, q) in offsets[k - 1]:
                row0 = offsets[k - 1][(p - 1, q)]
                blk = np.kron(a.bd(p), np.eye(b.size(q), dtype=np.uint8))
                m[row0 : row0 + blk.shape[0], col0 : col0 + width] ^= blk
            if q >= 1 and (p, q - 1) in offsets[k - 1]:
                row0 = offsets[k - 1][(p, q - 1)]
                blk = np.kron(np.eye(a.size(p), dtype=np.uint8), b.bd(q))
                m[row0 : row0 + blk.shape[0], col0 : col0 + width] ^= blk
        boundary.append(BitMatrix.from_array(m))
    return ChainComplex(cells, boundary, name=name or f"{tag_a}*{tag_b}", blocks=offsets)


def time_complex(steps: int, closed: bool = True) -> ChainComplex:
    """One-dimensional time direction: a circle of ``steps`` edges, or an interval."""
    nv = steps if closed else steps + 1
    d = np.zeros((nv, steps), dtype=np.uint8)
    for t in range(steps):
        d[t, t] ^= 1
        d[(t + 1) % nv, t] ^= 1
    return ChainComplex.from_maps([d], origin="I", name="I")

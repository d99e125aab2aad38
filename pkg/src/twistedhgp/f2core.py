"""Linear algebra over GF(2) on word-packed bit rows.

Rows are stored as ``uint64`` words, least significant bit first, so column
``j`` lives in word ``j // 64`` at bit ``j % 64``.  Padding bits past the last
column are always zero.  Elimination pivots on the lowest available row and
column index, which makes every derived basis reproducible.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

WORD = 64

__all__ = [
    "BitMatrix",
    "BitVector",
    "ContainmentError",
    "Echelon",
    "kernel_basis",
    "quotient_basis",
    "rank",
    "rref",
    "solve",
]


class ContainmentError(ValueError):
    """Raised when a claimed subspace is not contained in the ambient span."""


def _nwords(n: int) -> int:
    return (n + WORD - 1) // WORD


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a 2D 0/1 array along its last axis into little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8) & 1
    rows, cols = bits.shape
    nw = _nwords(cols)
    if rows == 0 or nw == 0:
        return np.zeros((rows, nw), dtype=np.uint64)
    padded = np.zeros((rows, nw * WORD), dtype=np.uint8)
    padded[:, :cols] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(rows, nw)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    rows = words.shape[0]
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=np.uint8)
    as_bytes = words.view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, count=cols, bitorder="little")


class BitVector:
    """Immutable packed vector over GF(2)."""

    __slots__ = ("_len", "_words")

    def __init__(self, length: int, words: np.ndarray | None = None):
        self._len = int(length)
        if words is None:
            words = np.zeros(_nwords(self._len), dtype=np.uint64)
        self._words = np.asarray(words, dtype=np.uint64)
        self._words.setflags(write=False)

    @classmethod
    def from_array(cls, bits: Sequence[int] | np.ndarray) -> BitVector:
        arr = np.asarray(bits, dtype=np.uint8).ravel()
        return cls(arr.size, _pack(arr[None, :])[0])

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> BitVector:
        arr = np.zeros(length, dtype=np.uint8)
        idx = np.fromiter(support, dtype=np.int64)
        np.bitwise_xor.at(arr, idx, 1)
        return cls.from_array(arr)

    @classmethod
    def from_int(cls, length: int, value: int) -> BitVector:
        return cls(length, np.frombuffer(value.to_bytes(_nwords(length) * 8, "little"), dtype=np.uint64))

    @classmethod
    def zeros(cls, length: int) -> BitVector:
        return cls(length)

    @property
    def words(self) -> np.ndarray:
        return self._words

    def __len__(self) -> int:
        return self._len

    def to_array(self) -> np.ndarray:
        return _unpack(self._words[None, :], self._len)[0]

    def __array__(self, dtype=None, copy=None):
        arr = self.to_array()
        return arr if dtype is None else arr.astype(dtype)

    def to_int(self) -> int:
        return int.from_bytes(self._words.tobytes(), "little")

    def support(self) -> list[int]:
        return np.flatnonzero(self.to_array()).tolist()

    def weight(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def any(self) -> bool:
        return bool(self._words.any())

    def dot(self, other: BitVector) -> int:
        self._check(other)
        return int(np.bitwise_count(self._words & other._words).sum()) & 1

    def __getitem__(self, i: int) -> int:
        if not -self._len <= i < self._len:
            raise IndexError(i)
        i %= self._len
        return int(self._words[i // WORD] >> np.uint64(i % WORD)) & 1

    def __xor__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self._len, self._words ^ other._words)

    __add__ = __xor__

    def __and__(self, other: BitVector) -> BitVector:
        self._check(other)
        return BitVector(self._len, self._words & other._words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._len == other._len and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._len, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector({''.join(map(str, self.to_array()))})"

    def _check(self, other: BitVector) -> None:
        if self._len != other._len:
            raise ValueError(f"length mismatch: {self._len} vs {other._len}")


class BitMatrix:
    """Packed dense matrix over GF(2); rows are stored as uint64 words."""

    __slots__ = ("rows", "cols", "_words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        self.rows, self.cols = int(rows), int(cols)
        if words is None:
            words = np.zeros((self.rows, _nwords(self.cols)), dtype=np.uint64)
        self._words = np.asarray(words, dtype=np.uint64).reshape(self.rows, _nwords(self.cols))
        self._words.setflags(write=False)

    @classmethod
    def from_array(cls, bits) -> BitMatrix:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim == 1:
            arr = arr[None, :]
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BitMatrix:
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> BitMatrix:
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_rows(cls, vectors: Sequence[BitVector], cols: int) -> BitMatrix:
        if not vectors:
            return cls(0, cols)
        return cls(len(vectors), cols, np.stack([v.words for v in vectors]))

    @classmethod
    def from_coo(cls, rows: int, cols: int, entries: Iterable[tuple[int, int]]) -> BitMatrix:
        arr = np.zeros((rows, cols), dtype=np.uint8)
        for r, c in entries:
            arr[r, c] ^= 1
        return cls.from_array(arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_array(self) -> np.ndarray:
        return _unpack(self._words, self.cols)

    def __array__(self, dtype=None, copy=None):
        arr = self.to_array()
        return arr if dtype is None else arr.astype(dtype)

    def coo(self) -> list[tuple[int, int]]:
        """Sparse coordinate view, row-major."""
        r, c = np.nonzero(self.to_array())
        return list(zip(r.tolist(), c.tolist()))

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self._words[i].copy())

    def row_vectors(self) -> list[BitVector]:
        return [self.row(i) for i in range(self.rows)]

    def col_vectors(self) -> list[BitVector]:
        return self.T.row_vectors()

    @property
    def T(self) -> BitMatrix:
        return BitMatrix.from_array(self.to_array().T)

    def any(self) -> bool:
        return bool(self._words.any())

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            if len(other) != self.cols:
                raise ValueError(f"shape mismatch: {self.shape} @ {len(other)}")
            parity = np.bitwise_count(self._words & other.words).sum(axis=1) & 1
            return BitVector.from_array(parity.astype(np.uint8))
        if isinstance(other, BitMatrix):
            if other.rows != self.cols:
                raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
            prod = self.to_array().astype(np.int64) @ other.to_array().astype(np.int64)
            return BitMatrix.from_array(prod & 1)
        return NotImplemented

    def __xor__(self, other: BitMatrix) -> BitMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")
        return BitMatrix(self.rows, self.cols, self._words ^ other._words)

    __add__ = __xor__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def _as_matrix(m) -> BitMatrix:
    return m if isinstance(m, BitMatrix) else BitMatrix.from_array(m)


def _eliminate(words: np.ndarray, cols: int, reduced: bool) -> tuple[np.ndarray, list[int]]:
    """Row-reduce packed rows in place; return (rows, pivot columns)."""
    a = words
    nrows = a.shape[0]
    pivots: list[int] = []
    r = 0
    for col in range(cols):
        if r == nrows:
            break
        w = col // WORD
        mask = np.uint64(1) << np.uint64(col % WORD)
        hits = np.flatnonzero(a[r:, w] & mask)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        targets = r + hits[1:]
        if reduced and r:
            above = np.flatnonzero(a[:r, w] & mask)
            targets = np.concatenate([above, targets])
        if targets.size:
            a[targets, w:] ^= a[r, w:]
        pivots.append(col)
        r += 1
    return a, pivots


def rank(m) -> int:
    """Rank over GF(2); the input is not modified."""
    m = _as_matrix(m)
    if m.rows == 0 or m.cols == 0:
        return 0
    _, pivots = _eliminate(m.words.copy(), m.cols, reduced=False)
    return len(pivots)


def rref(m) -> tuple[BitMatrix, list[int]]:
    """Reduced row echelon form (nonzero rows only) and its pivot columns."""
    m = _as_matrix(m)
    a, pivots = _eliminate(m.words.copy(), m.cols, reduced=True)
    return BitMatrix(len(pivots), m.cols, a[: len(pivots)]), pivots


def kernel_basis(m) -> list[BitVector]:
    """Basis of the right null space, one vector per free column in ascending order."""
    m = _as_matrix(m)
    reduced, pivots = rref(m)
    dense = reduced.to_array()
    pivot_set = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivot_set:
            continue
        v = np.zeros(m.cols, dtype=np.uint8)
        v[free] = 1
        for i, p in enumerate(pivots):
            if dense[i, free]:
                v[p] = 1
        basis.append(BitVector.from_array(v))
    return basis


def solve(m, b: BitVector) -> BitVector | None:
    """Return some x with m @ x = b, free variables set to zero, or None."""
    m = _as_matrix(m)
    if len(b) != m.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {m.rows}")
    aug = np.concatenate([m.to_array(), b.to_array()[:, None]], axis=1)
    reduced, pivots = rref(aug)
    if pivots and pivots[-1] == m.cols:
        return None
    dense = reduced.to_array()
    x = np.zeros(m.cols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = dense[i, m.cols]
    return BitVector.from_array(x)


class Echelon:
    """Incrementally grown span with lowest-bit pivots, backed by Python ints."""

    def __init__(self, length: int):
        self.length = length
        self._rows: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._rows)

    def reduce(self, v: int) -> int:
        for p in sorted(self._rows):
            if v >> p & 1:
                v ^= self._rows[p]
        return v

    def add(self, v: int | BitVector) -> bool:
        """Insert ``v``; return True when it enlarged the span."""
        if isinstance(v, BitVector):
            v = v.to_int()
        v = self.reduce(v)
        if not v:
            return False
        self._rows[(v & -v).bit_length() - 1] = v
        return True

    def contains(self, v: int | BitVector) -> bool:
        if isinstance(v, BitVector):
            v = v.to_int()
        return self.reduce(v) == 0


def quotient_basis(cycles: Sequence[BitVector], boundaries: Sequence[BitVector]) -> list[BitVector]:
    """Pick cycles that form a basis of span(cycles) / span(boundaries).

    Cycles are scanned in the given order and kept when independent of the
    boundaries plus the cycles already kept, so representatives are input vectors.
    """
    vectors = list(cycles) + list(boundaries)
    if not vectors:
        return []
    length = len(vectors[0])
    span_z = Echelon(length)
    for z in cycles:
        span_z.add(z)
    for b in boundaries:
        if not span_z.contains(b):
            raise ContainmentError("boundary vector lies outside the span of the cycles")
    span = Echelon(length)
    for b in boundaries:
        span.add(b)
    return [z for z in cycles if span.add(z)]

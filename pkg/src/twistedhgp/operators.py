"""Phase-polynomial operators and the stabilizers built from them.

An operator is stored as ``(-1)^c (-1)^{Σ_Q z_i z_j + L·z} X^x`` with the X
string acting first.  Products stay in this class because moving an X string
past a quadratic phase only shifts its linear part and constant.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .f2core import BitVector, Echelon
from .skeleton import COPIES, Cochain, TripleCode, coboundary

__all__ = [
    "Entangler",
    "Generator",
    "NotACocycleError",
    "PhasePolyOp",
    "StabilizerSet",
    "charge_parity",
    "closure_report",
    "commutator",
    "entangler",
    "logical_operators",
    "multiply",
    "twisted_stabilizers",
    "untwisted_stabilizers",
]


class NotACocycleError(ValueError):
    """A 0-cochain passed as a symmetry generator is not closed."""


def _mask(support) -> int:
    out = 0
    for q in support:
        out ^= 1 << int(q)
    return out


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _pair(i: int, j: int) -> tuple[int, int]:
    i, j = int(i), int(j)
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class PhasePolyOp:
    n: int
    x: int = 0
    z: int = 0
    cz: frozenset = field(default_factory=frozenset)
    sign: int = 0

    @classmethod
    def build(cls, n: int, x=(), z=(), cz=(), sign: int = 0) -> PhasePolyOp:
        pairs: set[tuple[int, int]] = set()
        lin = _mask(z)
        for i, j in cz:
            if i == j:
                lin ^= 1 << int(i)  # CZ on a repeated qubit is Z
                continue
            pairs ^= {_pair(i, j)}
        return cls(n, _mask(x), lin, frozenset(pairs), int(sign) & 1)

    @classmethod
    def identity(cls, n: int) -> PhasePolyOp:
        return cls(n)

    @property
    def x_support(self) -> list[int]:
        return _bits(self.x)

    @property
    def z_support(self) -> list[int]:
        return _bits(self.z)

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    @property
    def is_identity(self) -> bool:
        return not (self.x or self.z or self.cz or self.sign)

    def shifted_phase(self, a: int) -> tuple[int, int]:
        """Linear part and constant of the phase evaluated at ``z ⊕ a``."""
        lin, const = self.z, self.sign ^ (bin(self.z & a).count("1") & 1)
        for i, j in self.cz:
            ai, aj = a >> i & 1, a >> j & 1
            if aj:
                lin ^= 1 << i
            if ai:
                lin ^= 1 << j
            const ^= ai & aj
        return lin, const

    def __matmul__(self, other: PhasePolyOp) -> PhasePolyOp:
        return multiply(self, other)

    def inverse(self) -> PhasePolyOp:
        lin, const = self.shifted_phase(self.x)
        return PhasePolyOp(self.n, self.x, lin, self.cz, const)

    def phase(self, zbits: np.ndarray) -> np.ndarray:
        """±1 phase on computational basis rows ``zbits`` (shape (..., n))."""
        zbits = np.asarray(zbits, dtype=np.int64)
        e = np.full(zbits.shape[:-1], self.sign, dtype=np.int64)
        for q in self.z_support:
            e ^= zbits[..., q]
        for i, j in self.cz:
            e ^= zbits[..., i] & zbits[..., j]
        return 1 - 2 * e

    def to_matrix(self) -> np.ndarray:
        """Dense matrix, for small n only."""
        if self.n > 12:
            raise ValueError("dense matrices are limited to 12 qubits")
        dim = 1 << self.n
        basis = np.arange(dim)
        zbits = (basis[:, None] >> np.arange(self.n)) & 1
        m = np.zeros((dim, dim))
        m[basis ^ self.x, basis] = self.phase(zbits[basis ^ self.x])
        return m

    def to_json(self) -> dict:
        return {
            "sign": -1 if self.sign else 1,
            "x": self.x_support,
            "z": self.z_support,
            "cz": sorted([list(p) for p in self.cz]),
        }


def multiply(p: PhasePolyOp, q: PhasePolyOp) -> PhasePolyOp:
    """Normal-ordered product ``p q``."""
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n}")
    lin, const = q.shifted_phase(p.x)
    return PhasePolyOp(p.n, p.x ^ q.x, p.z ^ lin, p.cz ^ q.cz, p.sign ^ const)


def commutator(p: PhasePolyOp, q: PhasePolyOp) -> PhasePolyOp:
    """Group commutator ``p q p⁻¹ q⁻¹``."""
    return multiply(multiply(p, q), multiply(p.inverse(), q.inverse()))


@dataclass(frozen=True)
class Generator:
    role: str
    cell: int
    op: PhasePolyOp
    sign: int = 1

    def to_json(self) -> dict:
        out = {"role": self.role, "cell": self.cell, **self.op.to_json()}
        out["sign"] *= self.sign
        return out


@dataclass
class StabilizerSet:
    n: int
    generators: list[Generator]

    def by_role(self, role: str) -> list[Generator]:
        return [g for g in self.generators if g.role == role]

    def to_json(self) -> list[dict]:
        return [g.to_json() for g in self.generators]


def _flux(tc: TripleCode, copy: str) -> list[Generator]:
    P, off, n = tc.complex(copy), tc.offsets[copy], tc.total_qubits
    return [
        Generator(f"B{copy}", f, PhasePolyOp.build(n, z=off + np.flatnonzero(col)))
        for f, col in enumerate(P.bd(2).T)
    ]


def _bare_x(tc: TripleCode, copy: str, cell: int) -> np.ndarray:
    return tc.offsets[copy] + np.flatnonzero(tc.complex(copy).cobd(0)[:, cell])


def untwisted_stabilizers(tc: TripleCode) -> StabilizerSet:
    """Vertex-type X generators and face-type Z generators on each copy."""
    n = tc.total_qubits
    gens = []
    for copy in COPIES:
        gens += [
            Generator(f"A{copy}", s, PhasePolyOp.build(n, x=_bare_x(tc, copy, s)))
            for s in range(tc.complex(copy).size(0))
        ]
    for copy in COPIES:
        gens += _flux(tc, copy)
    return StabilizerSet(n, gens)


# For each copy, the site degrees where that copy sits in degree 0 and the
# other two copies whose 1-cells receive the CZ pairs.
_DRESSING = {"r": ((0, 1, 1), 0, (1, 2)), "b": ((1, 0, 1), 1, (0, 2)), "g": ((1, 1, 0), 2, (0, 1))}


def dressing_pairs(tc: TripleCode, copy: str) -> dict[int, list[tuple[int, int]]]:
    """CZ pairs (global qubit ids) dressing each 0-cell's X generator."""
    degs, own, others = _DRESSING[copy]
    sites = tc.sites.get(degs, np.zeros((0, 3), dtype=np.int64))
    ca, cb = (COPIES[k] for k in others)
    pairs: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for row in sites:
        pairs[int(row[own])].append((tc.qubit(ca, int(row[others[0]])), tc.qubit(cb, int(row[others[1]]))))
    return pairs


def twisted_stabilizers(tc: TripleCode) -> StabilizerSet:
    """Bare X generators dressed by CZ layers on the other two copies."""
    n = tc.total_qubits
    gens = []
    for copy in COPIES:
        pairs = dressing_pairs(tc, copy)
        gens += [
            Generator(f"A~{copy}", s, PhasePolyOp.build(n, x=_bare_x(tc, copy, s), cz=pairs.get(s, ())))
            for s in range(tc.complex(copy).size(0))
        ]
    for copy in COPIES:
        gens += _flux(tc, copy)
    return StabilizerSet(n, gens)


@dataclass
class ClosureReport:
    pairs_checked: int
    failures: list = field(default_factory=list)
    involution_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and not self.involution_failures


def flux_span(stabs: StabilizerSet) -> Echelon:
    span = Echelon(stabs.n)
    for g in stabs.generators:
        if g.role.startswith("B"):
            span.add(g.op.z)
    return span


def in_flux_group(op: PhasePolyOp, span: Echelon) -> bool:
    """Whether ``op`` is a product of flux generators (pure Z strings, sign +1)."""
    return op.x == 0 and not op.cz and op.sign == 0 and span.contains(op.z)


def closure_report(stabs: StabilizerSet) -> ClosureReport:
    """Check that every pair of dressed X generators commutes up to flux generators."""
    span = flux_span(stabs)
    xs = [g for g in stabs.generators if not g.role.startswith("B")]
    report = ClosureReport(len(xs) * (len(xs) - 1) // 2)
    for g in xs:
        if not multiply(g.op, g.op).is_identity:
            report.involution_failures.append((g.role, g.cell))
    for g, h in combinations(xs, 2):
        c = commutator(g.op, h.op)
        if not c.is_identity and not in_flux_group(c, span):
            report.failures.append({"a": (g.role, g.cell), "b": (h.role, h.cell), "diagonal": c.x == 0})
    return report


def charge_parity(tc: TripleCode, copy: str, eta, stabs: StabilizerSet | None = None) -> PhasePolyOp:
    """Product of the dressed generators of ``copy`` over the support of a 0-cocycle."""
    if not isinstance(eta, Cochain):
        eta = Cochain(copy, 0, eta if isinstance(eta, BitVector) else BitVector.from_array(eta))
    if coboundary(tc, eta).values.any():
        raise NotACocycleError(f"0-cochain on copy {copy} has a nonzero coboundary")
    stabs = stabs or twisted_stabilizers(tc)
    ops = {g.cell: g.op for g in stabs.by_role(f"A~{copy}")}
    out = PhasePolyOp.identity(tc.total_qubits)
    for s in eta.values.support():
        out = multiply(out, ops[s])
    return out


@dataclass
class LogicalSet:
    zbars: dict[str, list[PhasePolyOp]]
    xbars: dict[str, list[dict]]


def logical_operators(tc: TripleCode) -> LogicalSet:
    """Z strings on basis cycles, and bare X supports on basis cocycles.

    The X descriptors also list the green classes whose charge-parity
    projectors must decorate them in the dressed code.
    """
    from .skeleton import intersection_tensor

    n = tc.total_qubits
    T = intersection_tensor(tc)
    zbars, xbars = {}, {}
    for copy, hb in (("r", tc.red), ("b", tc.blue), ("g", tc.green1)):
        off = tc.offsets[copy]
        zbars[copy] = [PhasePolyOp.build(n, z=off + np.array(v.support(), dtype=int)) for v in hb.cycle_reps]
        descs = []
        for i, w in enumerate(hb.cocycle_reps):
            if copy == "r":
                proj = sorted(set(np.argwhere(T[i])[:, 1].tolist()))
            elif copy == "b":
                proj = sorted(set(np.argwhere(T[:, i])[:, 1].tolist()))
            else:
                proj = []
            descs.append({"x": (off + np.array(w.support(), dtype=int)).tolist(), "tag": list(hb.tags[i]), "projectors": proj})
        xbars[copy] = descs
    return LogicalSet(zbars, xbars)


@dataclass
class Entangler:
    """CCZ layer on 0-cell matter qubits and the round-trip checks."""

    offsets: dict[str, int]
    ccz: list[tuple[int, int, int]]
    conjugation_ok: bool
    gauss_ok: bool
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.conjugation_ok and self.gauss_ok


def _site_matrix(tc: TripleCode, copy: str, cell: int) -> np.ndarray:
    """Dressing of one 0-cell generator as a 0/1 matrix between the two other copies' 1-cells."""
    degs, own, others = _DRESSING[copy]
    a, b = (COPIES[k] for k in others)
    m = np.zeros((tc.complex(a).size(1), tc.complex(b).size(1)), dtype=np.int64)
    sites = tc.sites.get(degs, np.zeros((0, 3), dtype=np.int64))
    for row in sites[sites[:, own] == cell]:
        m[row[others[0]], row[others[1]]] ^= 1
    return m


def entangler(tc: TripleCode) -> Entangler:
    """CCZ layer on matter qubits and its round trip to the dressed generators.

    Matter qubits sit on the 0-cells of each copy.  The layer puts a CCZ on
    (σr, σb, σg) when the triple cup of σr with the coboundaries of σb and σg
    is odd.  Checks:

    * conjugating a matter X by the layer leaves a CZ layer equal to the
      dressing of the matching generator pulled back through the coboundaries;
    * with matter and gauge registers side by side, the minimally coupled
      terms commute with every Gauss operator up to flux generators, and
      multiplying a term by its Gauss operator gives the dressed generator.
    """
    sizes = {c: tc.complex(c).size(0) for c in COPIES}
    offsets = {"r": 0, "b": sizes["r"], "g": sizes["r"] + sizes["b"]}
    nm = sum(sizes.values())
    D = {c: tc.complex(c).cobd(0).astype(np.int64) for c in COPIES}

    ccz = []
    for s in range(sizes["r"]):
        M = (D["b"].T @ _site_matrix(tc, "r", s) @ D["g"]) & 1
        ccz += [(offsets["r"] + s, offsets["b"] + int(i), offsets["g"] + int(j)) for i, j in np.argwhere(M)]

    legs: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for t in ccz:
        for k, q in enumerate(t):
            legs[q].append(t[:k] + t[k + 1 :])

    witnesses = []
    conj_ok = True
    for copy in COPIES:
        _, _, others = _DRESSING[copy]
        a, b = (COPIES[k] for k in others)
        for s in range(sizes[copy]):
            q = offsets[copy] + s
            # X_q moved through each CCZ on q leaves a CZ on the other two legs
            layer = PhasePolyOp.build(nm, cz=legs.get(q, ()))
            pulled = (D[a].T @ _site_matrix(tc, copy, s) @ D[b]) & 1
            expect = PhasePolyOp.build(nm, cz=[(offsets[a] + i, offsets[b] + j) for i, j in np.argwhere(pulled)])
            if layer != expect:
                conj_ok = False
                witnesses.append({"check": "conjugation", "copy": copy, "cell": s})

    # Minimal coupling: each gauge 1-cell u of copy a enters through the
    # covariant difference (d y_a)_u + u, with y_a the matter variables.
    stabs = twisted_stabilizers(tc)
    ng = tc.total_qubits
    n = nm + ng

    def covariant(copy: str, cell: int) -> list[int]:
        return [nm + tc.qubit(copy, cell)] + [offsets[copy] + int(t) for t in np.flatnonzero(D[copy][cell])]

    terms, gauss, dressed = [], [], []
    for copy in COPIES:
        _, _, others = _DRESSING[copy]
        a, b = (COPIES[k] for k in others)
        for g in stabs.by_role(f"A~{copy}"):
            q = offsets[copy] + g.cell
            pairs = []
            for u, v in np.argwhere(_site_matrix(tc, copy, g.cell)):
                pairs += [(i, j) for i in covariant(a, int(u)) for j in covariant(b, int(v))]
            terms.append(PhasePolyOp.build(n, x=[q], cz=pairs))
            gauss.append(PhasePolyOp.build(n, x=[q, *(nm + _bare_x(tc, copy, g.cell))]))
            dressed.append(g.op)

    gauss_ok = True
    matter = (1 << nm) - 1
    for i, t in enumerate(terms):
        for j, g in enumerate(gauss):
            if not commutator(t, g).is_identity:
                gauss_ok = False
                witnesses.append({"check": "gauss", "term": i, "gauss": j})
        # on the gauge-invariant sector the matter flip of a term equals its
        # Gauss operator; fixing matter to |0...0> leaves the dressed generator
        fixed = multiply(t, gauss[i])
        assert not fixed.x & matter
        reduced = PhasePolyOp(
            ng,
            fixed.x >> nm,
            (fixed.z & ~matter) >> nm,
            frozenset((u - nm, v - nm) for u, v in fixed.cz if u >= nm and v >= nm),
            fixed.sign,
        )
        if reduced != dressed[i]:
            gauss_ok = False
            witnesses.append({"check": "substitution", "term": i})
    return Entangler(offsets, sorted(ccz), conj_ok, gauss_ok, witnesses)

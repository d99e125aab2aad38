"""Factor complexes of a classical code, the three product copies, and triple cups.

A parity-check matrix ``H`` (checks x bits) gives four small complexes:

* ``X``: bits are 1-cells, checks are 0-cells, boundary ``H``;
* ``Xdual``: checks are 1-cells, bits are 0-cells, boundary ``H^T``;
* ``XR``: the checks joined by a path over each bit's incident checks;
* ``XRdual``: the transpose of ``XR``.

The copies are ``Xr = X ⊗ X*``, ``Xb = X* ⊗ XR`` and ``Xg = XR ⊗ X``, with the
first factor built from ``Hx`` and the second from ``Hy``.  Triple cups are sums
over evaluation sites ``(r-cell, b-cell, g-cell)``, and each site is a product
of one site of the x factor and one site of the y factor.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .complexes import (
    CellLabel,
    ChainComplex,
    HomologyBasis,
    homology_basis,
    tensor_product,
    validate,
)
from .f2core import BitMatrix, BitVector

__all__ = [
    "ADJACENCY_RULES",
    "SPATIAL_DEGREES",
    "Cochain",
    "ConstructionError",
    "FactorFamily",
    "TripleCode",
    "UnsupportedDegreeError",
    "cup_eval_triple",
    "factor_family",
    "factor_sites",
    "intersection_tensor",
    "invariance_check",
    "stokes_check",
    "triple_code",
]

# "min-index" completes the XR 1-cochain slot by transport along a spanning
# tree so that the factor form obeys the Leibniz rule; "min-index-bare" drops
# that slot entirely; "symmetrized" sums over all incident checks.
ADJACENCY_RULES = ("min-index", "min-index-bare", "symmetrized")
SPATIAL_DEGREES = ((1, 1, 0), (0, 1, 1), (1, 0, 1))
COPIES = ("r", "b", "g")


class ConstructionError(ValueError):
    """The input matrix cannot produce the factor complexes."""


class UnsupportedDegreeError(ValueError):
    """Cochain degrees outside the evaluated triples."""


@dataclass
class FactorFamily:
    H: BitMatrix
    X: ChainComplex
    Xdual: ChainComplex
    XR: ChainComplex
    XRdual: ChainComplex
    adjacency: list[list[int]]
    edges: list[tuple[int, int, int]]
    tree_parent: dict[int, tuple[int, int]]
    tree_depth: dict[int, int]
    loops: list[BitVector]
    loop_duals: list[BitVector]

    @property
    def n_checks(self) -> int:
        return self.H.rows

    @property
    def n_bits(self) -> int:
        return self.H.cols

    @cached_property
    def h0(self) -> HomologyBasis:
        return homology_basis(self.X, 0)

    @cached_property
    def h1(self) -> HomologyBasis:
        return homology_basis(self.X, 1)

    def basis(self, which: str, k: int) -> HomologyBasis:
        """Aligned basis of ``which`` in degree ``k``.

        The dual complex reuses the bases of ``X`` with cycles and cocycles
        swapped, so the pairings stay the identity by construction.
        """
        if which == "X":
            return self.h0 if k == 0 else self.h1
        if which == "Xdual":
            src = self.h1 if k == 0 else self.h0
            return HomologyBasis(k, src.cocycle_reps, src.cycle_reps)
        if which == "XR":
            if k == 0:
                pt = BitVector.from_support(self.n_checks, [0])
                ones = BitVector.from_array(np.ones(self.n_checks, dtype=np.uint8))
                return HomologyBasis(0, [pt], [ones])
            return HomologyBasis(1, list(self.loops), list(self.loop_duals))
        raise KeyError(which)

    def complex(self, which: str) -> ChainComplex:
        return getattr(self, which)

    def tree_path(self, u: int, v: int) -> list[int]:
        """Edges on the spanning-tree path between checks ``u`` and ``v``."""
        path: list[int] = []
        while u != v:
            if self.tree_depth[u] >= self.tree_depth[v]:
                u, e = self.tree_parent[u]
            else:
                v, e = self.tree_parent[v]
            path.append(e)
        return sorted(path)


def factor_family(H) -> FactorFamily:
    """Build X, X*, XR and XR* from a parity-check matrix (checks x bits)."""
    H = H if isinstance(H, BitMatrix) else BitMatrix.from_array(np.asarray(H, dtype=np.uint8))
    if H.rows == 0 or H.cols == 0 or not H.any():
        raise ConstructionError(f"parity-check matrix {H.shape} is empty or zero")
    h = H.to_array()
    m, n = h.shape
    adjacency = [np.flatnonzero(h[:, b]).tolist() for b in range(n)]
    edges = [(b, cs[i], cs[i + 1]) for b, cs in enumerate(adjacency) for i in range(len(cs) - 1)]

    checks = [CellLabel("X", (c,)) for c in range(m)]
    bits = [CellLabel("X", (b,)) for b in range(n)]
    X = ChainComplex([checks, bits], [BitMatrix(0, m), H], name="X")
    Xdual = ChainComplex(
        [[CellLabel("Xdual", (b,)) for b in range(n)], [CellLabel("Xdual", (c,)) for c in range(m)]],
        [BitMatrix(0, n), H.T],
        name="Xdual",
    )
    dR = np.zeros((m, len(edges)), dtype=np.uint8)
    for e, (_, u, v) in enumerate(edges):
        dR[u, e] ^= 1
        dR[v, e] ^= 1
    XR = ChainComplex(
        [[CellLabel("XR", (c,)) for c in range(m)], [CellLabel("XR", (b, u, v)) for b, u, v in edges]],
        [BitMatrix(0, m), BitMatrix.from_array(dR)],
        name="XR",
    )
    XRdual = ChainComplex(
        [[CellLabel("XRdual", (b, u, v)) for b, u, v in edges], [CellLabel("XRdual", (c,)) for c in range(m)]],
        [BitMatrix(0, len(edges)), BitMatrix.from_array(dR.T)],
        name="XRdual",
    )

    incident: list[list[int]] = [[] for _ in range(m)]
    for e, (_, u, v) in enumerate(edges):
        incident[u].append(e)
        incident[v].append(e)
    parent: dict[int, tuple[int, int]] = {}
    depth = {0: 0}
    queue = deque([0])
    tree_edges = set()
    while queue:
        u = queue.popleft()
        for e in incident[u]:
            _, a, b = edges[e]
            w = b if a == u else a
            if w not in depth:
                depth[w] = depth[u] + 1
                parent[w] = (u, e)
                tree_edges.add(e)
                queue.append(w)
    if len(depth) != m:
        raise ConstructionError(
            f"Tanner graph splits the checks into several components ({m - len(depth)} checks unreached)"
        )

    fam = FactorFamily(H, X, Xdual, XR, XRdual, adjacency, edges, parent, depth, [], [])
    for e in range(len(edges)):
        if e in tree_edges:
            continue
        _, u, v = edges[e]
        cycle = fam.tree_path(u, v) + [e]
        fam.loops.append(BitVector.from_support(len(edges), cycle))
        fam.loop_duals.append(BitVector.from_support(len(edges), [e]))
    for c in (X, Xdual, XR, XRdual):
        if not validate(c).ok:
            raise ConstructionError(f"{c.name} fails boundary composition")
    return fam


def factor_sites(fam: FactorFamily, adjacency: str = "min-index") -> list[tuple]:
    """Nonzero sites of the factor form ``tau(X-arg, X*-arg, XR-arg)``.

    Each site is ``((deg, idx) in X, (deg, idx) in X*, (deg, idx) in XR)`` and
    the form is the mod-2 count of sites on which all three arguments are 1.
    """
    if adjacency not in ADJACENCY_RULES:
        raise ValueError(f"unknown adjacency rule {adjacency!r}; choose from {ADJACENCY_RULES}")
    counts: Counter = Counter()
    for c in range(fam.n_checks):
        counts[((0, c), (1, c), (0, c))] += 1
    for b, cs in enumerate(fam.adjacency):
        if not cs:
            continue
        targets = cs if adjacency == "symmetrized" else cs[:1]
        for c in targets:
            counts[((1, b), (0, b), (0, c))] += 1
        if adjacency == "min-index":
            for c in cs[1:]:
                for e in fam.tree_path(cs[0], c):
                    counts[((0, c), (0, b), (1, e))] += 1
    return sorted(site for site, k in counts.items() if k % 2)


@dataclass
class Cochain:
    """Coefficients on the degree-``degree`` cells of one copy."""

    copy: str
    degree: int
    values: BitVector

    @classmethod
    def indicator(cls, tc: TripleCode, copy: str, degree: int, cell: int) -> Cochain:
        return cls(copy, degree, BitVector.from_support(tc.complex(copy).size(degree), [cell]))

    @classmethod
    def zero(cls, tc: TripleCode, copy: str, degree: int) -> Cochain:
        return cls(copy, degree, BitVector.zeros(tc.complex(copy).size(degree)))


@dataclass
class TripleCode:
    fx: FactorFamily
    fy: FactorFamily
    Xr: ChainComplex
    Xb: ChainComplex
    Xg: ChainComplex
    adjacency: str
    sites: dict[tuple[int, int, int], np.ndarray] = field(repr=False)
    red: HomologyBasis = field(repr=False)
    blue: HomologyBasis = field(repr=False)
    green0: HomologyBasis = field(repr=False)
    green1: HomologyBasis = field(repr=False)
    red0: HomologyBasis = field(repr=False)
    blue0: HomologyBasis = field(repr=False)

    def complex(self, copy: str) -> ChainComplex:
        return {"r": self.Xr, "b": self.Xb, "g": self.Xg}[copy]

    @property
    def n_qubits(self) -> dict[str, int]:
        return {c: self.complex(c).size(1) for c in COPIES}

    @property
    def offsets(self) -> dict[str, int]:
        n = self.n_qubits
        return {"r": 0, "b": n["r"], "g": n["r"] + n["b"]}

    @property
    def total_qubits(self) -> int:
        return sum(self.n_qubits.values())

    def qubit(self, copy: str, cell: int) -> int:
        """Global qubit id of a 1-cell of a copy."""
        return self.offsets[copy] + cell

    def qubits(self, copy: str) -> range:
        off = self.offsets[copy]
        return range(off, off + self.n_qubits[copy])

    def active_red(self) -> list[int]:
        """Red classes whose cocycles have the form (X 0-cocycle) ⊗ (X* 1-cocycle)."""
        return [i for i, t in enumerate(self.red.tags) if t[0] == "active"]

    def to_json(self) -> dict:
        def bits(v: BitVector) -> str:
            return "".join(map(str, v.to_array()))

        def basis(hb: HomologyBasis) -> dict:
            return {
                "degree": hb.degree,
                "cycles": [bits(v) for v in hb.cycle_reps],
                "cocycles": [bits(v) for v in hb.cocycle_reps],
                "tags": [list(t) for t in hb.tags],
            }

        return {
            "adjacency": self.adjacency,
            "qubits": {c: {"offset": self.offsets[c], "count": self.n_qubits[c]} for c in COPIES},
            "complexes": {c: self.complex(c).to_json() for c in COPIES},
            "bases": {
                "red": basis(self.red),
                "blue": basis(self.blue),
                "green0": basis(self.green0),
                "green1": basis(self.green1),
                "red0": basis(self.red0),
                "blue0": basis(self.blue0),
            },
        }


def _place(P: ChainComplex, k: int, p: int, u: BitVector, v: BitVector) -> BitVector:
    """Embed the product u ⊗ v of factor cochains into block (p, k - p) of P."""
    out = np.zeros(P.size(k), dtype=np.uint8)
    off = P.blocks[k][(p, k - p)]
    blk = np.kron(u.to_array(), v.to_array())
    out[off : off + blk.size] = blk
    return BitVector.from_array(out)


def _product_basis(P, fa, which_a, fb, which_b, k, namer) -> HomologyBasis:
    cycles, cocycles, tags = [], [], []
    for p in range(k, -1, -1):
        q = k - p
        if (p, q) not in P.blocks[k]:
            continue
        ha, hb = fa.basis(which_a, p), fb.basis(which_b, q)
        for i in range(len(ha)):
            for j in range(len(hb)):
                cycles.append(_place(P, k, p, ha.cycle_reps[i], hb.cycle_reps[j]))
                cocycles.append(_place(P, k, p, ha.cocycle_reps[i], hb.cocycle_reps[j]))
                tags.append((namer(p, q), i, j))
    return HomologyBasis(k, cycles, cocycles, tags)


def _global_sites(fy: FactorFamily, parts, sx, sy) -> dict[tuple[int, int, int], np.ndarray]:
    """Combine x and y factor sites into copy-level sites grouped by degrees.

    In the x factor the X, X* and XR slots belong to red, blue and green; in
    the y factor they belong to green, red and blue.
    """
    layout = list(zip(parts, (fy.Xdual, fy.XR, fy.X)))
    groups: dict[tuple[int, int, int], Counter] = {}
    for rx, bx, gx in sx:
        for gy, ry, by in sy:
            degs, idx = [], []
            for (P, second), a, b in zip(layout, (rx, bx, gx), (ry, by, gy)):
                k = a[0] + b[0]
                degs.append(k)
                idx.append(P.blocks[k][(a[0], b[0])] + a[1] * second.size(b[0]) + b[1])
            groups.setdefault(tuple(degs), Counter())[tuple(idx)] += 1
    return {
        key: np.array(sorted(s for s, n in cnt.items() if n % 2), dtype=np.int64).reshape(-1, 3)
        for key, cnt in groups.items()
    }


def triple_code(Hx, Hy, adjacency: str = "min-index") -> TripleCode:
    """Assemble Xr = X⊗X*, Xb = X*⊗XR, Xg = XR⊗X with aligned bases and cup sites."""
    fx, fy = factor_family(Hx), factor_family(Hy)
    Xr = tensor_product(fx.X, fy.Xdual, name="Xr")
    Xb = tensor_product(fx.Xdual, fy.XR, name="Xb")
    Xg = tensor_product(fx.XR, fy.X, name="Xg")
    for P in (Xr, Xb, Xg):
        if not validate(P).ok:
            raise ConstructionError(f"{P.name} fails boundary composition")

    red = _product_basis(Xr, fx, "X", fy, "Xdual", 1, lambda p, q: "active" if p == 0 else "mixed")
    blue = _product_basis(Xb, fx, "Xdual", fy, "XR", 1, lambda p, q: "real" if p == 1 else "spurious")
    green0 = _product_basis(Xg, fx, "XR", fy, "X", 0, lambda p, q: "gamma")
    green1 = _product_basis(Xg, fx, "XR", fy, "X", 1, lambda p, q: "spurious" if p == 1 else "codeword")
    red0 = _product_basis(Xr, fx, "X", fy, "Xdual", 0, lambda p, q: "charge")
    blue0 = _product_basis(Xb, fx, "Xdual", fy, "XR", 0, lambda p, q: "charge")

    sx = factor_sites(fx, adjacency)
    sy = factor_sites(fy, adjacency)
    sites = _global_sites(fy, (Xr, Xb, Xg), sx, sy)
    return TripleCode(fx, fy, Xr, Xb, Xg, adjacency, sites, red, blue, green0, green1, red0, blue0)


def _evaluate(tc: TripleCode, u: Cochain, v: Cochain, w: Cochain) -> int:
    key = (u.degree, v.degree, w.degree)
    s = tc.sites.get(key)
    if s is None or s.size == 0:
        return 0
    a, b, c = u.values.to_array(), v.values.to_array(), w.values.to_array()
    return int(np.sum(a[s[:, 0]] & b[s[:, 1]] & c[s[:, 2]])) & 1


def _check(tc: TripleCode, *cochains: Cochain) -> None:
    for ch, copy in zip(cochains, COPIES):
        if ch.copy != copy:
            raise ValueError(f"expected a cochain on copy {copy!r}, got {ch.copy!r}")
        if len(ch.values) != tc.complex(copy).size(ch.degree):
            raise ValueError(f"cochain length {len(ch.values)} does not match copy {copy} degree {ch.degree}")


def cup_eval_triple(tc: TripleCode, u: Cochain, v: Cochain, w: Cochain) -> int:
    """Integral of u ∪ v ∪ w over the spatial sites, for u on Xr, v on Xb, w on Xg."""
    key = (u.degree, v.degree, w.degree)
    if key not in SPATIAL_DEGREES:
        raise UnsupportedDegreeError(f"degrees {key} not in {SPATIAL_DEGREES}")
    _check(tc, u, v, w)
    return _evaluate(tc, u, v, w)


def _basis_cochains(tc: TripleCode) -> tuple[list[Cochain], list[Cochain], list[Cochain]]:
    return (
        [Cochain("r", 1, v) for v in tc.red.cocycle_reps],
        [Cochain("b", 1, v) for v in tc.blue.cocycle_reps],
        [Cochain("g", 0, v) for v in tc.green0.cocycle_reps],
    )


def intersection_tensor(tc: TripleCode, reps=None) -> np.ndarray:
    """T[α, β, γ] over the red, blue and green basis cocycles (or given reps)."""
    R, B, G = reps if reps is not None else _basis_cochains(tc)
    T = np.zeros((len(R), len(B), len(G)), dtype=np.uint8)
    if not (len(R) and len(B) and len(G)):
        return T
    s = tc.sites.get((1, 1, 0))
    if s is None or s.size == 0:
        return T
    r = np.array([x.values.to_array() for x in R], dtype=np.int64)[:, s[:, 0]]
    b = np.array([x.values.to_array() for x in B], dtype=np.int64)[:, s[:, 1]]
    g = np.array([x.values.to_array() for x in G], dtype=np.int64)[:, s[:, 2]]
    return (np.einsum("is,js,ks->ijk", r, b, g) & 1).astype(np.uint8)


def coboundary(tc: TripleCode, ch: Cochain) -> Cochain:
    P = tc.complex(ch.copy)
    d = P.cobd(ch.degree).astype(np.int64)
    return Cochain(ch.copy, ch.degree + 1, BitVector.from_array((d @ ch.values.to_array()) & 1))


def shift(tc: TripleCode, ch: Cochain, rng: np.random.Generator) -> Cochain:
    """Add a uniformly random coboundary to a cochain."""
    if ch.degree == 0:
        return ch
    P = tc.complex(ch.copy)
    lam = Cochain(ch.copy, ch.degree - 1, BitVector.from_array(rng.integers(0, 2, P.size(ch.degree - 1))))
    return Cochain(ch.copy, ch.degree, ch.values ^ coboundary(tc, lam).values)


def invariance_check(tc: TripleCode, shifts: int = 100, seed: int = 0) -> list[int]:
    """Indices of random coboundary shifts that changed any tensor entry."""
    rng = np.random.default_rng(seed)
    base = intersection_tensor(tc)
    reps = _basis_cochains(tc)
    bad = []
    for t in range(shifts):
        moved = tuple([shift(tc, ch, rng) for ch in group] for group in reps)
        if not np.array_equal(intersection_tensor(tc, moved), base):
            bad.append(t)
    return bad


@dataclass
class StokesReport:
    trials: int
    leibniz_failures: list = field(default_factory=list)
    shift_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.leibniz_failures and not self.shift_failures


def _random_cochain(tc: TripleCode, copy: str, degree: int, rng) -> Cochain:
    n = tc.complex(copy).size(degree)
    return Cochain(copy, degree, BitVector.from_array(rng.integers(0, 2, n, dtype=np.uint8)))


def stokes_check(tc: TripleCode, trials: int = 50, seed: int = 0) -> StokesReport:
    """Randomized Leibniz and coboundary-shift tests of the cup sites.

    For cochains of total degree 1 the three terms with one coboundary applied
    must cancel mod 2.  For basis cocycles, random coboundary shifts must leave
    the spatial triple sums unchanged.
    """
    rng = np.random.default_rng(seed)
    report = StokesReport(trials)
    low = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    for t in range(trials):
        degs = low[t % 3]
        x, y, z = (_random_cochain(tc, c, d, rng) for c, d in zip(COPIES, degs))
        total = (
            _evaluate(tc, coboundary(tc, x), y, z)
            + _evaluate(tc, x, coboundary(tc, y), z)
            + _evaluate(tc, x, y, coboundary(tc, z))
        )
        if total % 2:
            report.leibniz_failures.append({"trial": t, "degrees": degs})

    R, B, G = _basis_cochains(tc)
    closed0 = {
        "r": [Cochain("r", 0, v) for v in tc.red0.cocycle_reps],
        "b": [Cochain("b", 0, v) for v in tc.blue0.cocycle_reps],
    }
    G1 = [Cochain("g", 1, v) for v in tc.green1.cocycle_reps]
    combos = [
        (R, B, G),
        (closed0["r"], B, G1),
        (R, closed0["b"], G1),
    ]
    for t in range(trials):
        for a_list, b_list, c_list in combos:
            for a in a_list:
                for b in b_list:
                    for c in c_list:
                        base = _evaluate(tc, a, b, c)
                        moved = _evaluate(tc, shift(tc, a, rng), shift(tc, b, rng), shift(tc, c, rng))
                        if base != moved:
                            report.shift_failures.append(
                                {"trial": t, "degrees": (a.degree, b.degree, c.degree)}
                            )
    return report

"""Rates, ground-space counts and minimum-weight logical searches."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .complexes import ChainComplex, HomologyBasis
from .f2core import kernel_basis
from .operators import StabilizerSet, twisted_stabilizers, untwisted_stabilizers
from .skeleton import COPIES, TripleCode

__all__ = [
    "BudgetExhausted",
    "CodeReport",
    "DistanceResult",
    "PairingError",
    "SPURIOUS_THRESHOLD",
    "class_weights",
    "dense_ground_space",
    "distance_report",
    "min_weight_logical",
    "rate_report",
    "subsystem_distance",
]

SPURIOUS_THRESHOLD = 4
DEFAULT_BUDGET = 5_000_000


class PairingError(ValueError):
    """Chosen cycle and cocycle representatives do not pair as the identity."""


class BudgetExhausted(RuntimeError):
    def __init__(self, lower_bound: int):
        super().__init__(f"search budget exhausted; distance is at least {lower_bound}")
        self.lower_bound = lower_bound


@dataclass
class DistanceResult:
    """``weight`` is None when no logical exists; ``exhausted`` marks a lower bound."""

    weight: int | None
    representative: list[int] | None = None
    exhausted: bool = False
    checked: int = 0

    def to_json(self) -> dict:
        if self.exhausted:
            return {"weight": None, "lower_bound": self.weight, "budget_exhausted": True}
        return {"weight": self.weight if self.weight is not None else "inf", "representative": self.representative}


@dataclass
class CodeReport:
    n: dict[str, int]
    k: dict[str, int]
    n_gamma: int
    k_untwisted: int
    k_tilde: int
    k_tilde_rb: int
    distances: dict = field(default_factory=dict)
    spurious: dict = field(default_factory=dict)
    dense: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "n_gamma": self.n_gamma,
            "k_untwisted": self.k_untwisted,
            "k_tilde": self.k_tilde,
            "k_tilde_rb": self.k_tilde_rb,
            "distances": self.distances,
            "spurious": self.spurious,
            "dense": self.dense,
        }

    def table(self) -> str:
        rows = [f"{'copy':<6}{'n':>6}{'k':>4}{'d_Z':>8}{'d_X':>8}  spurious"]
        for c in COPIES:
            d = self.distances.get(c, {})
            rows.append(
                f"{c:<6}{self.n[c]:>6}{self.k[c]:>4}{_cell(d.get('Z')):>8}{_cell(d.get('X')):>8}  "
                + ",".join(map(str, self.spurious.get(c, [])))
            )
        rows.append(f"|gamma| = {self.n_gamma}  k = {self.k_untwisted}  k~ = {self.k_tilde}  k~(r,b) = {self.k_tilde_rb}")
        return "\n".join(rows)


def _cell(d: dict | None) -> str:
    if d is None:
        return "-"
    if d.get("budget_exhausted"):
        return f">={d['lower_bound']}"
    return str(d["weight"])


def rate_report(tc: TripleCode) -> CodeReport:
    """Homology dimensions per copy and the twisted count k~ = k - |γ|.

    ``k_tilde`` uses every untwisted logical, green included.  ``k_tilde_rb``
    drops green and matches the count when the green copy encodes nothing.
    """
    k = {"r": len(tc.red), "b": len(tc.blue), "g": len(tc.green1)}
    ng = len(tc.green0)
    total = sum(k.values())
    return CodeReport(dict(tc.n_qubits), k, ng, total, total - ng, k["r"] + k["b"] - ng)


def dense_ground_space(tc: TripleCode, stabs: StabilizerSet | None = None, probes: int = 256, seed: int = 0) -> int:
    """log2 of the joint +1 eigenspace dimension, computed numerically.

    Works inside the zero-flux subspace, where every X-type generator acts as a
    signed permutation of flux-free configurations, and takes the rank of the
    product of projectors applied to random probe vectors.
    """
    stabs = twisted_stabilizers(tc) if stabs is None else stabs
    n = tc.total_qubits
    flux = [g.op.z for g in stabs.generators if g.role.startswith("B")]
    fm = np.array([[z >> q & 1 for q in range(n)] for z in flux], dtype=np.uint8).reshape(-1, n)
    K = np.array([v.to_array() for v in kernel_basis(fm)], dtype=np.int64)
    m = len(K)
    if m > 22:
        raise MemoryError(f"flux-free subspace has 2^{m} configurations")
    coords = (np.arange(2**m)[:, None] >> np.arange(m)) & 1
    configs = (coords @ K) & 1
    packed = configs @ (1 << np.arange(n, dtype=np.int64))
    order = np.argsort(packed)
    sorted_keys = packed[order]
    vecs = np.random.default_rng(seed).standard_normal((2**m, probes))
    for g in stabs.generators:
        if g.role.startswith("B"):
            continue
        op = g.op
        pos = np.searchsorted(sorted_keys, packed ^ op.x)
        if np.any(sorted_keys[np.minimum(pos, len(pos) - 1)] != packed ^ op.x):
            raise ValueError(f"generator {g.role}{g.cell} leaves the flux-free subspace")
        vecs = 0.5 * (vecs + op.phase(configs)[:, None] * vecs[order[pos]])
    s = np.linalg.svd(vecs, compute_uv=False)
    r = int(np.sum(s > 1e-8 * s[0])) if s.size and s[0] > 0 else 0
    if r >= probes:
        raise ValueError("ground space is at least as large as the probe count")
    return int(round(np.log2(r))) if r else -1


# ---------------------------------------------------------------------------
# minimum-weight search


def _columns_as_ints(m: np.ndarray) -> list[int]:
    weights = 1 << np.arange(m.shape[0], dtype=object)
    return [int(np.dot(col.astype(object), weights)) if m.shape[0] else 0 for col in m.T]


def _search(checks: np.ndarray, duals: list, accept, budget: int) -> DistanceResult:
    """Smallest support S with checks·S = 0 and accept(class bits of S).

    Meet in the middle on the check syndrome: supports of weight w are split
    into halves of sizes ceil(w/2) and floor(w/2) with matching syndromes.  A
    collision with overlapping halves would expose a lighter solution, so the
    first accepted collision at weight w is a minimum.
    """
    n = checks.shape[1]
    syn = _columns_as_ints(checks)
    dual = np.array([v.to_array() for v in duals], dtype=np.int64).reshape(len(duals), n)
    cls = [int(np.dot(dual[:, q].astype(object), 1 << np.arange(len(duals), dtype=object))) if len(duals) else 0 for q in range(n)]
    tables: dict[int, dict[int, list[tuple[tuple[int, ...], int]]]] = {}
    checked = 0

    def table(size: int):
        nonlocal checked
        if size not in tables:
            t: dict[int, list] = {}
            for sub in combinations(range(n), size):
                s = c = 0
                for q in sub:
                    s ^= syn[q]
                    c ^= cls[q]
                t.setdefault(s, []).append((sub, c))
            checked += comb(n, size)
            tables[size] = t
        return tables[size]

    for w in range(1, n + 1):
        a, b = (w + 1) // 2, w // 2
        if comb(n, a) + (comb(n, b) if b != a else 0) + checked > budget:
            return DistanceResult(w, exhausted=True, checked=checked)
        ta, tb = table(a), table(b)
        best = None
        for s, left in ta.items():
            right = tb.get(s)
            if not right:
                continue
            for sa, ca in left:
                for sb, cb in right:
                    if set(sa) & set(sb) or not accept(ca ^ cb):
                        continue
                    supp = tuple(sorted(sa + sb))
                    if best is None or supp < best:
                        best = supp
        if best is not None:
            return DistanceResult(w, list(best), checked=checked)
    return DistanceResult(None, checked=checked)


def min_weight_logical(
    c: ChainComplex,
    degree: int,
    basis: HomologyBasis,
    budget: int = DEFAULT_BUDGET,
    kind: str = "cycle",
    classes: list[int] | None = None,
    exact_class: int | None = None,
) -> DistanceResult:
    """Minimum weight of a nontrivial cycle (kind="cycle") or cocycle.

    A cycle's class is read off by pairing with the cocycle representatives, and
    vice versa.  ``classes`` restricts nontriviality to those coordinates; with
    ``exact_class`` only members of that single class are accepted.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if kind not in ("cycle", "cocycle"):
        raise ValueError(f"unknown kind {kind!r}")
    if not len(basis):
        return DistanceResult(None)
    checks = c.bd(degree) if kind == "cycle" else c.cobd(degree)
    duals = basis.cocycle_reps if kind == "cycle" else basis.cycle_reps
    if exact_class is not None:
        target = 1 << exact_class
        accept = target.__eq__
    else:
        mask = sum(1 << i for i in (range(len(basis)) if classes is None else classes))
        accept = lambda bits: bool(bits & mask)  # noqa: E731
    res = _search(np.asarray(checks), list(duals), accept, budget)
    if res.representative is not None:
        v = np.zeros(checks.shape[1], dtype=np.int64)
        v[res.representative] = 1
        assert not ((checks.astype(np.int64) @ v) & 1).any()
    return res


def subsystem_distance(
    c: ChainComplex,
    degree: int,
    basis: HomologyBasis,
    chosen: list[int] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> dict:
    """min(d_Z, d_X) over the chosen classes, the rest treated as gauge."""
    chosen = list(range(len(basis))) if chosen is None else list(chosen)
    p = basis.pairing.to_array()
    if p.size and not np.array_equal(p[np.ix_(chosen, chosen)], np.eye(len(chosen), dtype=p.dtype)):
        raise PairingError("chosen representatives do not pair as the identity")
    dz = min_weight_logical(c, degree, basis, budget, "cycle", chosen)
    dx = min_weight_logical(c, degree, basis, budget, "cocycle", chosen)
    return {"Z": dz.to_json(), "X": dx.to_json(), "d": _combine(dz, dx)}


def _combine(*results: DistanceResult):
    if any(r.exhausted for r in results):
        return {"lower_bound": min(r.weight for r in results), "budget_exhausted": True}
    weights = [r.weight for r in results if r.weight is not None]
    return min(weights) if weights else "inf"


def class_weights(c: ChainComplex, degree: int, basis: HomologyBasis, budget: int = DEFAULT_BUDGET) -> list[dict]:
    """Minimal cycle and cocycle weight inside each single basis class."""
    out = []
    for i in range(len(basis)):
        z = min_weight_logical(c, degree, basis, budget, "cycle", exact_class=i)
        x = min_weight_logical(c, degree, basis, budget, "cocycle", exact_class=i)
        out.append({"Z": z.to_json(), "X": x.to_json(), "min": _combine(z, x)})
    return out


def _is_short(entry: dict, threshold: int) -> bool:
    m = entry["min"]
    return isinstance(m, int) and m <= threshold


def distance_report(
    tc: TripleCode,
    budget: int = DEFAULT_BUDGET,
    threshold: int = SPURIOUS_THRESHOLD,
    copies=COPIES,
    dense: bool = False,
) -> CodeReport:
    """Rates plus per-copy distances, with short classes flagged and excluded."""
    rep = rate_report(tc)
    bases = {"r": tc.red, "b": tc.blue, "g": tc.green1}
    for copy in copies:
        cx, hb = tc.complex(copy), bases[copy]
        full = subsystem_distance(cx, 1, hb, None, budget)
        entry = {"Z": full["Z"], "X": full["X"], "d": full["d"]}
        if copy == "g" and len(hb):
            per = class_weights(cx, 1, hb, budget)
            flagged = [i for i, e in enumerate(per) if _is_short(e, threshold)]
            rep.spurious[copy] = flagged
            keep = [i for i in range(len(hb)) if i not in flagged]
            entry["per_class"] = per
            entry["tags"] = [list(t) for t in hb.tags]
            entry["subsystem"] = subsystem_distance(cx, 1, hb, keep, budget)["d"] if keep else "inf"
        rep.distances[copy] = entry
    if dense:
        rep.dense = {
            "log_gsd_twisted": dense_ground_space(tc),
            "log_gsd_untwisted": dense_ground_space(tc, untwisted_stabilizers(tc)),
        }
    return rep

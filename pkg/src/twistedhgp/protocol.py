"""Gauging-measurement protocol: fountain planning, a symbolic ledger and a dense simulator.

The dense backend keeps one real amplitude per computational basis state with
qubit ``i`` on array axis ``i``.  All dressed generators are real, so float64
states are exact up to rounding.  Measurement of every green dressed generator
is explored as an exact branch tree whose conditional probabilities are cached;
seeded trials then sample through the tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .f2core import BitVector, solve
from .operators import (
    PhasePolyOp,
    charge_parity,
    multiply,
    twisted_stabilizers,
    untwisted_stabilizers,
)
from .pathintegral import projector_product
from .skeleton import TripleCode, intersection_tensor

__all__ = [
    "DenseProtocol",
    "DenseState",
    "FountainError",
    "InconsistentOutcomeError",
    "InitPlan",
    "LedgerEntry",
    "LogicalState",
    "NontrivialClassError",
    "ProtocolTranscript",
    "SizeError",
    "SubspaceError",
    "apply_op",
    "certify",
    "crosscheck",
    "extract_logical",
    "plan_all",
    "plan_fountain",
    "run_dense",
    "run_ledger",
]

MAX_DENSE_QUBITS = 26
MAGIC = np.array([1.0, 1.0, 1.0, 0.0]) / math.sqrt(3.0)  # (|00> + |01> + |10>)/√3
ELEVEN = np.array([0.0, 0.0, 0.0, 1.0])


class FountainError(ValueError):
    """No red classes of product form, so no fountain plan exists."""


class InconsistentOutcomeError(ValueError):
    """Supplied green outcomes are not a cocycle."""


class NontrivialClassError(ValueError):
    """Green outcomes form a cocycle that is not a coboundary."""


class SizeError(ValueError):
    """The instance exceeds the dense qubit budget."""


class SubspaceError(ValueError):
    """A state expected in the code space has weight outside it."""


# ---------------------------------------------------------------------------
# planning


@dataclass
class InitPlan:
    red: list[str]
    blue: list[str]
    clusters: dict[int, list[int]]
    pairs: list[tuple[int, int, int]] = field(default_factory=list)
    certificate: dict = field(default_factory=dict)

    def key(self) -> tuple:
        return tuple(self.red), tuple(self.blue)

    def to_json(self) -> dict:
        return {
            "red": self.red,
            "blue": self.blue,
            "clusters": {str(k): v for k, v in self.clusters.items()},
            "pairs": [list(p) for p in self.pairs],
            "certificate": self.certificate,
        }


def _clusters(tc: TripleCode) -> dict[int, list[int]]:
    out: dict[int, list[int]] = {}
    for a in tc.active_red():
        out.setdefault(tc.red.tags[a][1], []).append(a)
    return out


def certify(tc: TripleCode, plan: InitPlan, T: np.ndarray | None = None) -> dict:
    """List the (α, β, γ) hyperedges left active by a plan and test their disjointness."""
    T = intersection_tensor(tc) if T is None else T
    plus_r = [a for a, s in enumerate(plan.red) if s == "+"]
    plus_b = [b for b, s in enumerate(plan.blue) if s == "+"]
    per_gamma = {
        g: [(a, b) for a in plus_r for b in plus_b if T[a, b, g]] for g in range(T.shape[2])
    }
    pairs = [(ab[0][0], ab[0][1], g) for g, ab in per_gamma.items() if len(ab) == 1]
    crowded = [g for g, ab in per_gamma.items() if len(ab) > 1]
    used_a = [p[0] for p in pairs]
    used_b = [p[1] for p in pairs]
    disjoint = len(set(used_a)) == len(used_a) and len(set(used_b)) == len(used_b)
    return {
        "ok": disjoint and not crowded,
        "pairs": pairs,
        "crowded_gammas": crowded,
        "disjoint": disjoint,
    }


def plan_fountain(tc: TripleCode) -> InitPlan:
    """One |+> red logical per cluster, every real blue logical |+>, the rest |0>.

    Clusters group product-form red classes by their first label.  Within a
    cluster the member is chosen so that different clusters use different
    second labels where possible.
    """
    clusters = _clusters(tc)
    if not clusters:
        raise FountainError("no product-form red classes to plan on")
    red = ["0"] * len(tc.red)
    used: set[int] = set()
    for i in sorted(clusters):
        members = clusters[i]
        pick = next((a for a in members if tc.red.tags[a][2] not in used), members[0])
        used.add(tc.red.tags[pick][2])
        red[pick] = "+"
    blue = ["+" if t[0] == "real" else "0" for t in tc.blue.tags]
    plan = InitPlan(red, blue, clusters)
    plan.certificate = certify(tc, plan)
    plan.pairs = plan.certificate["pairs"]
    return plan


def plan_all(tc: TripleCode, red: str = "+", blue: str = "+") -> InitPlan:
    """Uniform plan, used for channel tomography and trivial controls."""
    plan = InitPlan([red] * len(tc.red), [blue] * len(tc.blue), _clusters(tc))
    plan.certificate = certify(tc, plan)
    plan.pairs = plan.certificate["pairs"]
    return plan


# ---------------------------------------------------------------------------
# symbolic ledger


@dataclass(frozen=True)
class LedgerEntry:
    label: str
    index: int
    sign: int = 1
    note: str = ""


@dataclass
class ProtocolTranscript:
    plan: InitPlan
    seed: int | None
    mu: list[int]
    rho: list[int]
    z_mu: list[int]
    correction: list[int]
    backend: str
    order: list[int] = field(default_factory=list)
    logical: LogicalState | None = None
    stages: dict[str, list[LedgerEntry]] = field(default_factory=dict)
    probability: float | None = None

    def to_json(self) -> dict:
        out = {
            "seed": self.seed,
            "backend": self.backend,
            "plan": self.plan.to_json(),
            "mu": self.mu,
            "rho": self.rho,
            "z_mu": self.z_mu,
            "correction": self.correction,
            "logical_state": {"pairs": []},
        }
        if self.logical is not None:
            out["logical_state"] = self.logical.to_json()
        return out


def _gamma_matrix(tc: TripleCode) -> np.ndarray:
    if not len(tc.green0):
        return np.zeros((0, tc.Xg.size(0)), dtype=np.int64)
    return np.array([v.to_array() for v in tc.green0.cocycle_reps], dtype=np.int64)


def rho_from_mu(tc: TripleCode, mu) -> list[int]:
    """ρ_γ is the parity of μ over the support of γ."""
    return ((_gamma_matrix(tc) @ np.asarray(mu, dtype=np.int64)) & 1).tolist()


def solve_correction(tc: TripleCode, eta) -> list[int]:
    """A 0-cochain V on the green copy with dV equal to the measured green pattern."""
    eta = np.asarray(eta, dtype=np.uint8)
    d0 = tc.Xg.cobd(0)
    d1 = tc.Xg.cobd(1).astype(np.int64)
    if ((d1 @ eta) & 1).any():
        raise InconsistentOutcomeError("green outcomes violate a flux constraint")
    v = solve(d0, BitVector.from_array(eta))
    if v is None:
        raise NontrivialClassError("green outcomes form a cocycle outside the coboundaries")
    return v.support()


def _logical_entries(plan: InitPlan) -> list[LedgerEntry]:
    out = []
    for copy, states in (("r", plan.red), ("b", plan.blue)):
        for i, s in enumerate(states):
            out.append(LedgerEntry(f"Xbar^{copy}" if s == "+" else f"Zbar^{copy}", i))
    return out


def ledger_stages(tc: TripleCode, plan: InitPlan, mu, rho, eta) -> dict[str, list[LedgerEntry]]:
    Pr, Pb, Pg = tc.Xr, tc.Xb, tc.Xg

    def block(label, count, signs=None, note=""):
        return [LedgerEntry(label, i, 1 if signs is None else (-1) ** signs[i], note) for i in range(count)]

    rb = (
        block("A^r", Pr.size(0)) + block("B^r", Pr.size(2)) + block("A^b", Pb.size(0)) + block("B^b", Pb.size(2))
    )
    xi = [LedgerEntry("Zbar^g", i, 1, tc.green1.tags[i][0]) for i in range(len(tc.green1))]
    diag_logicals = [e for e in _logical_entries(plan) if e.label.startswith("Z")]
    charge = [LedgerEntry("CZ~_gamma", g, (-1) ** rho[g]) for g in range(len(rho))]
    s1 = rb + block("Z^g", Pg.size(1)) + block("B^g", Pg.size(2)) + xi + _logical_entries(plan)
    s2 = rb + block("A~^g", Pg.size(0), mu) + block("B^g", Pg.size(2)) + xi + diag_logicals + charge
    s3 = rb + block("Z^g", Pg.size(1), eta) + charge + diag_logicals
    s4 = rb + block("Z^g", Pg.size(1)) + charge + diag_logicals
    return {"S1": s1, "S2": s2, "S3": s3, "S4": s4}


def _plan_amplitudes(plan: InitPlan) -> np.ndarray:
    """Product input over all red then blue logicals, first class most significant."""
    vec = np.ones(1)
    for s in [*plan.red, *plan.blue]:
        vec = np.kron(vec, np.array([1.0, 1.0]) / math.sqrt(2) if s == "+" else np.array([1.0, 0.0]))
    return vec


def logical_born(tc: TripleCode, plan: InitPlan, T: np.ndarray | None = None) -> dict[tuple[int, ...], float]:
    """P(ρ) from the normalized class-level projectors acting on the plan's input."""
    T = intersection_tensor(tc) if T is None else T
    amps = _plan_amplitudes(plan)
    g = T.shape[2]
    out = {}
    for bits in np.ndindex(*(2,) * g):
        k = projector_product(T, bits).ravel() / 2.0**g
        out[tuple(int(b) for b in bits)] = float(np.sum((k * amps) ** 2))
    return out


def run_ledger(tc: TripleCode, plan: InitPlan, outcomes: dict | None = None, seed: int | None = 0) -> ProtocolTranscript:
    """Symbolic run of the four stages.

    ``outcomes`` may fix ``mu`` (green generator outcomes) and/or ``z_mu``
    (green single-qubit Z outcomes).  Missing pieces are sampled: ρ from the
    class-level Born rule, μ uniformly among patterns with that ρ, and the Z
    pattern as the coboundary of a uniform 0-cochain.
    """
    rng = np.random.default_rng(seed)
    outcomes = outcomes or {}
    n0 = tc.Xg.size(0)
    G = _gamma_matrix(tc)
    if "mu" in outcomes:
        mu = [int(b) & 1 for b in outcomes["mu"]]
        rho = rho_from_mu(tc, mu)
    else:
        probs = logical_born(tc, plan)
        keys = list(probs)
        rho = list(keys[rng.choice(len(keys), p=np.array([probs[k] for k in keys]))])
        mu = rng.integers(0, 2, n0).tolist()
        # shift onto the affine space G μ = ρ
        if G.shape[0]:
            fix = solve(G.astype(np.uint8), BitVector.from_array((np.array(rho) + G @ mu) & 1))
            mu = ((np.array(mu) + fix.to_array()) & 1).tolist()
    if "z_mu" in outcomes:
        eta = [int(b) & 1 for b in outcomes["z_mu"]]
    else:
        v = rng.integers(0, 2, n0)
        eta = ((tc.Xg.cobd(0).astype(np.int64) @ v) & 1).tolist()
    correction = solve_correction(tc, eta)
    t = ProtocolTranscript(plan, seed, mu, rho, eta, correction, "ledger")
    t.stages = ledger_stages(tc, plan, mu, rho, eta)
    return t


# ---------------------------------------------------------------------------
# dense backend


@dataclass
class DenseState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n > MAX_DENSE_QUBITS:
            raise SizeError(f"{self.n} qubits exceed the dense cap of {MAX_DENSE_QUBITS}")

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def normalized(self) -> DenseState:
        return DenseState(self.n, self.amplitudes / self.norm)


def _phase_array(op: PhasePolyOp, n: int, fixed: dict[int, int] | None = None) -> tuple[np.ndarray, list[int]]:
    """±1 array over the qubits touched by the phase of ``op``, shaped for broadcasting."""
    fixed = fixed or {}
    touched = sorted({q for q in op.z_support} | {q for p in op.cz for q in p})
    free = [q for q in touched if q not in fixed]
    grid = np.indices((2,) * len(free), dtype=np.int64) if free else np.zeros((0,), dtype=np.int64)
    pos = {q: i for i, q in enumerate(free)}

    def var(q):
        return fixed[q] if q in fixed else grid[pos[q]]

    e = np.full((2,) * len(free), op.sign, dtype=np.int64)
    for q in op.z_support:
        e = e ^ var(q)
    for i, j in op.cz:
        e = e ^ (var(i) & var(j))
    sign = (1 - 2 * e).astype(np.float64)
    shape = [1] * n
    for q in free:
        shape[q] = 2
    return sign.reshape(shape), free


def apply_op(op: PhasePolyOp, psi: np.ndarray) -> np.ndarray:
    """(op ψ)(z) = phase(z) ψ(z ⊕ x) on a state of shape (2,)*n."""
    n = psi.ndim
    out = np.flip(psi, axis=tuple(op.x_support)) if op.x else psi
    if op.z or op.cz or op.sign:
        sign, _ = _phase_array(op, n)
        out = out * sign
    elif out is psi:
        out = psi.copy()
    return out


def _restrict(op: PhasePolyOp, n: int) -> PhasePolyOp:
    """Phase of ``op`` on the first n qubits with the rest fixed to 0; the X part is dropped."""
    keep = (1 << n) - 1
    return PhasePolyOp(n, 0, op.z & keep, frozenset(p for p in op.cz if p[1] < n), op.sign)


@dataclass
class LogicalState:
    amplitudes: np.ndarray
    labels: list[tuple[str, int]]
    pairs: list[dict] = field(default_factory=list)
    in_code_weight: float = 1.0

    def reduced(self, keep: list[int]) -> np.ndarray:
        """Density matrix of the logicals at positions ``keep`` (first is most significant)."""
        k = len(self.labels)
        psi = self.amplitudes.reshape((2,) * k)
        rest = [i for i in range(k) if i not in keep]
        psi = np.transpose(psi, keep + rest).reshape(2 ** len(keep), -1)
        return psi @ psi.conj().T

    def to_json(self) -> dict:
        return {
            "labels": [list(l) for l in self.labels],
            "amplitudes": self.amplitudes.tolist(),
            "pairs": self.pairs,
            "in_code_weight": self.in_code_weight,
        }


class DenseProtocol:
    """Exact dense run of the protocol for one plan and one measurement order."""

    def __init__(self, tc: TripleCode, plan: InitPlan, order: list[int] | None = None, correct: bool = True):
        if tc.total_qubits > MAX_DENSE_QUBITS:
            raise SizeError(
                f"{tc.total_qubits} qubits exceed the dense cap of {MAX_DENSE_QUBITS}; use the ledger backend"
            )
        self.tc = tc
        self.plan = plan
        self.n = tc.total_qubits
        self.n_rb = tc.offsets["g"]
        self.n_g = tc.n_qubits["g"]
        self.stabs = twisted_stabilizers(tc)
        self.bare = untwisted_stabilizers(tc)
        self.green = {g.cell: g.op for g in self.stabs.by_role("A~g")}
        self.order = list(range(len(self.green))) if order is None else list(order)
        self.correct = correct  # False leaves the green pattern uncorrected, as a control
        self.T = intersection_tensor(tc)
        self._leaves: dict[tuple[int, ...], dict] | None = None
        self._cond: dict[tuple[int, ...], float] = {}

    # --- code-space helpers on the red+blue register ---------------------

    def _rb_ops(self, role: str) -> list[PhasePolyOp]:
        return [_restrict(g.op, self.n_rb) for g in self.bare.generators if g.role == role]

    def _project_code(self, phi: np.ndarray) -> np.ndarray:
        for role in ("Ar", "Ab"):
            for op in self._rb_ops(role):
                phi = 0.5 * (phi + apply_op(op, phi))
        return phi

    def _xbar(self, copy: str, i: int) -> PhasePolyOp:
        hb = self.tc.red if copy == "r" else self.tc.blue
        off = self.tc.offsets[copy]
        return PhasePolyOp.build(self.n_rb, x=[off + q for q in hb.cocycle_reps[i].support()])

    @cached_property
    def labels(self) -> list[tuple[str, int]]:
        return [("r", i) for i in range(len(self.tc.red))] + [("b", i) for i in range(len(self.tc.blue))]

    @cached_property
    def logical_basis(self) -> np.ndarray:
        """Rows are encoded |n, m> built by flipping the encoded all-zero state."""
        zero = np.zeros((2,) * self.n_rb)
        zero[(0,) * self.n_rb] = 1.0
        zero = self._project_code(zero)
        zero /= np.linalg.norm(zero)
        rows = []
        for bits in np.ndindex(*(2,) * len(self.labels)):
            v = zero
            for b, (copy, i) in zip(bits, self.labels):
                if b:
                    v = apply_op(self._xbar(copy, i), v)
            rows.append(v.ravel())
        return np.array(rows)

    def initial_rb(self) -> np.ndarray:
        """Red+blue input from projectors: code space, then X-bar for |+> logicals."""
        phi = np.zeros((2,) * self.n_rb)
        phi[(0,) * self.n_rb] = 1.0
        phi = self._project_code(phi)
        for (copy, i), s in zip(self.labels, [*self.plan.red, *self.plan.blue]):
            if s == "+":
                phi = 0.5 * (phi + apply_op(self._xbar(copy, i), phi))
        return phi / np.linalg.norm(phi)

    def initial_state(self) -> np.ndarray:
        psi = np.zeros((2 ** self.n_rb, 2 ** self.n_g))
        psi[:, 0] = self.initial_rb().ravel()
        return psi.reshape((2,) * self.n)

    # --- branch tree ------------------------------------------------------

    def _explore(self) -> None:
        leaves: dict[tuple[int, ...], dict] = {}
        stack = [((), self.initial_state())]
        while stack:
            prefix, psi = stack.pop()
            depth = len(prefix)
            if depth == len(self.order):
                leaves[prefix] = self._finish(prefix, psi)
                continue
            flipped = apply_op(self.green[self.order[depth]], psi)
            plus = 0.5 * (psi + flipped)
            flipped -= psi
            flipped *= -0.5  # (ψ - Ãψ)/2
            del psi
            for bit, child in ((1, flipped), (0, plus)):
                p = float(np.vdot(child, child))
                self._cond[prefix + (bit,)] = p
                if p > 1e-12:
                    stack.append((prefix + (bit,), child))
            del plus, flipped, child
        self._leaves = leaves

    @property
    def leaves(self) -> dict[tuple[int, ...], dict]:
        if self._leaves is None:
            self._explore()
        return self._leaves

    def outcome_distribution(self) -> dict[tuple[int, ...], float]:
        """Exact P(μ) keyed by μ in measurement order."""
        return {k: v["p"] for k, v in self.leaves.items()}

    def _mu_by_cell(self, prefix: tuple[int, ...]) -> list[int]:
        mu = [0] * len(self.green)
        for cell, bit in zip(self.order, prefix):
            mu[cell] = bit
        return mu

    def _finish(self, prefix: tuple[int, ...], psi: np.ndarray) -> dict:
        p_mu = float(np.vdot(psi, psi))
        flat = psi.reshape(2 ** self.n_rb, 2 ** self.n_g)
        marg = np.einsum("ij,ij->j", flat, flat)
        mu = self._mu_by_cell(prefix)
        rho = rho_from_mu(self.tc, mu)
        branches = {}
        for col in np.flatnonzero(marg > 1e-12 * p_mu):
            eta = [int(b) for b in np.binary_repr(int(col), width=self.n_g)]
            phi = flat[:, col].reshape((2,) * self.n_rb)
            correction = solve_correction(self.tc, eta)
            fixed = self._apply_correction(phi, correction) if self.correct else phi
            fixed = fixed / np.linalg.norm(fixed)
            branch = {"p": float(marg[col]) / p_mu, "correction": correction, "checks": self._final_checks(fixed, rho)}
            branch["checks"]["green_z_violations"] = self._green_residual(eta, correction)
            try:
                branch["logical"] = self._logical(fixed)
            except SubspaceError as e:
                branch["logical"], branch["error"] = None, str(e)
            branches[tuple(eta)] = branch
        return {"p": p_mu, "mu": mu, "rho": rho, "branches": branches}

    def _green_residual(self, eta: list[int], cells: list[int]) -> int:
        """Green qubits still reading 1 once the correction's X part (if applied) has acted."""
        flips = 0
        if self.correct:
            for c in cells:
                flips ^= self.green[c].x
        off = self.tc.offsets["g"]
        return sum(b ^ (flips >> (off + q) & 1) for q, b in enumerate(eta))

    def _apply_correction(self, phi: np.ndarray, cells: list[int]) -> np.ndarray:
        op = PhasePolyOp.identity(self.n)
        for c in cells:
            op = multiply(op, self.green[c])
        # the X part resets green to |0...0>; the phase is read with green = 0
        return apply_op(_restrict(op, self.n_rb), phi)

    def _logical(self, phi: np.ndarray) -> LogicalState:
        B = self.logical_basis
        amps = B @ phi.ravel()
        weight = float(np.sum(amps**2))
        if abs(weight - 1.0) > 1e-9:
            raise SubspaceError(f"state has weight {1 - weight:.3e} outside the code space")
        state = LogicalState(amps, self.labels, in_code_weight=weight)
        for a, b, g in self.plan.pairs:
            rho2 = state.reduced([a, len(self.tc.red) + b])
            state.pairs.append(
                {
                    "qubits": [["r", a], ["b", b]],
                    "gamma": g,
                    "fidelity_magic": float(MAGIC @ rho2 @ MAGIC),
                    "fidelity_11": float(ELEVEN @ rho2 @ ELEVEN),
                    "purity": float(np.trace(rho2 @ rho2).real),
                }
            )
        return state

    def _final_checks(self, phi: np.ndarray, rho: list[int]) -> dict:
        worst = 0.0
        for role in ("Ar", "Ab", "Br", "Bb"):
            for op in self._rb_ops(role):
                worst = max(worst, abs(float(np.vdot(phi, apply_op(op, phi))) - 1.0))
        for g, v in enumerate(self.tc.green0.cocycle_reps):
            cz = _restrict(charge_parity(self.tc, "g", v, self.stabs), self.n_rb)
            worst = max(worst, abs(float(np.vdot(phi, apply_op(cz, phi))) - (-1) ** rho[g]))
        return {"max_deviation": worst}

    # --- sampling ---------------------------------------------------------

    def sample(self, rng: np.random.Generator) -> tuple[tuple[int, ...], tuple[int, ...]]:
        leaves = self.leaves
        prefix: tuple[int, ...] = ()
        total = 1.0
        for _ in self.order:
            p1 = self._cond.get(prefix + (1,), 0.0) / total
            bit = int(rng.random() < p1)
            total = self._cond[prefix + (bit,)]
            prefix += (bit,)
        branches = leaves[prefix]["branches"]
        keys = sorted(branches)
        probs = np.array([branches[k]["p"] for k in keys])
        eta = keys[rng.choice(len(keys), p=probs / probs.sum())]
        return prefix, eta

    def transcript(self, prefix, eta, seed) -> ProtocolTranscript:
        leaf = self.leaves[prefix]
        br = leaf["branches"][eta]
        t = ProtocolTranscript(
            self.plan, seed, leaf["mu"], leaf["rho"], list(eta), br["correction"], "dense", self.order
        )
        t.logical = br["logical"]
        t.probability = leaf["p"] * br["p"]
        t.stages = ledger_stages(self.tc, self.plan, leaf["mu"], leaf["rho"], list(eta))
        return t

    def rho_distribution(self) -> dict[tuple[int, ...], float]:
        out: dict[tuple[int, ...], float] = {}
        for leaf in self.leaves.values():
            key = tuple(leaf["rho"])
            out[key] = out.get(key, 0.0) + leaf["p"]
        return out

    def channel(self) -> dict[tuple[int, ...], np.ndarray]:
        """Unnormalized logical output density matrices per ρ."""
        out: dict[tuple[int, ...], np.ndarray] = {}
        for leaf in self.leaves.values():
            key = tuple(leaf["rho"])
            for br in leaf["branches"].values():
                a = br["logical"].amplitudes
                out[key] = out.get(key, 0.0) + leaf["p"] * br["p"] * np.outer(a, a)
        return out


_ENGINES: dict = {}


def _engine(tc: TripleCode, plan: InitPlan, order=None) -> DenseProtocol:
    key = (id(tc), plan.key(), tuple(order) if order is not None else None)
    if key not in _ENGINES:
        _ENGINES.clear()  # each engine holds cached leaves; keep one at a time
        _ENGINES[key] = DenseProtocol(tc, plan, order)
    return _ENGINES[key]


def run_dense(tc: TripleCode, plan: InitPlan, seed: int = 0, order: list[int] | None = None) -> ProtocolTranscript:
    """One seeded dense trial (the branch tree is computed once and reused)."""
    eng = _engine(tc, plan, order)
    prefix, eta = eng.sample(np.random.default_rng(seed))
    return eng.transcript(prefix, eta, seed)


def extract_logical(state: DenseState, tc: TripleCode, plan: InitPlan | None = None) -> LogicalState:
    """Logical amplitudes of a red+blue state (green already reset)."""
    plan = plan or plan_all(tc, "0", "0")
    eng = DenseProtocol(tc, plan)
    phi = state.amplitudes.reshape((2,) * eng.n_rb)
    return eng._logical(phi / np.linalg.norm(phi))


def _sigma_ok(count: int, trials: int, p: float, k: float = 3.0) -> bool:
    sd = math.sqrt(max(p * (1 - p), 1e-300) / trials)
    return abs(count / trials - p) <= k * sd + 1e-12


@dataclass
class CrosscheckReport:
    trials: int
    state_ok: bool
    ledger_ok: bool
    order_ok: bool
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.state_ok and self.ledger_ok and self.order_ok


def crosscheck(tc: TripleCode, plan: InitPlan, trials: int = 200, seed: int = 0, orders: list | None = None) -> CrosscheckReport:
    """Dense versus projector formula, ledger versus dense statistics, and order invariance."""
    eng = _engine(tc, plan)
    T = eng.T
    amps = _plan_amplitudes(plan)
    worst_fid = 1.0
    for leaf in eng.leaves.values():
        expect = projector_product(T, leaf["rho"]).ravel() / 2.0 ** T.shape[2] * amps
        expect /= np.linalg.norm(expect)
        for br in leaf["branches"].values():
            worst_fid = min(worst_fid, float(np.dot(expect, br["logical"].amplitudes)) ** 2)
    state_ok = worst_fid >= 1 - 1e-9

    rng = np.random.default_rng(seed)
    dense_rho = eng.rho_distribution()
    ledger_counts: dict[tuple[int, ...], int] = {}
    for t in range(trials):
        r = tuple(run_ledger(tc, plan, seed=int(rng.integers(2**32))).rho)
        ledger_counts[r] = ledger_counts.get(r, 0) + 1
    ledger_ok = all(_sigma_ok(ledger_counts.get(k, 0), trials, p) for k, p in dense_rho.items())

    base = {tuple(eng._mu_by_cell(k)): v for k, v in eng.outcome_distribution().items()}
    orders = orders or [list(reversed(eng.order))]
    order_ok = True
    order_details = []
    for order in orders:
        other = DenseProtocol(tc, plan, order)
        dist = {tuple(other._mu_by_cell(k)): v for k, v in other.outcome_distribution().items()}
        exact = max(abs(dist.get(k, 0.0) - base.get(k, 0.0)) for k in set(dist) | set(base))
        counts: dict[tuple[int, ...], int] = {}
        for t in range(trials):
            prefix, _ = other.sample(rng)
            key = tuple(other._mu_by_cell(prefix))
            counts[key] = counts.get(key, 0) + 1
        sampled = all(_sigma_ok(counts.get(k, 0), trials, p) for k, p in base.items())
        order_ok &= exact < 1e-9 and sampled
        order_details.append({"order": order, "max_abs_diff": exact, "within_3_sigma": sampled})
        del other
    return CrosscheckReport(
        trials,
        state_ok,
        ledger_ok,
        order_ok,
        {"worst_fidelity": worst_fid, "dense_rho": dense_rho, "ledger_counts": ledger_counts, "orders": order_details},
    )

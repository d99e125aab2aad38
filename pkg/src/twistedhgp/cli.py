"""Command-line entry point and parity-check file formats."""

from __future__ import annotations

import argparse
import json
import sys
from itertools import product
from pathlib import Path

import numpy as np

from .complexes import validate
from .metrics import distance_report
from .operators import (
    charge_parity,
    closure_report,
    entangler,
    twisted_stabilizers,
    untwisted_stabilizers,
)
from .pathintegral import projector_identity_check
from .protocol import (
    MAX_DENSE_QUBITS,
    DenseProtocol,
    FountainError,
    InconsistentOutcomeError,
    NontrivialClassError,
    SizeError,
    plan_all,
    plan_fountain,
    run_ledger,
)
from .skeleton import (
    ADJACENCY_RULES,
    COPIES,
    ConstructionError,
    TripleCode,
    intersection_tensor,
    invariance_check,
    stokes_check,
    triple_code,
)

EXIT_OK, EXIT_VERIFY, EXIT_IO, EXIT_BUDGET = 0, 1, 2, 3
FORMATS = ("alist", "dense01", "json")


class ParseError(ValueError):
    def __init__(self, path, line: int, col: int, msg: str):
        super().__init__(f"{path}:{line}:{col}: {msg}")
        self.line, self.col = line, col


# ---------------------------------------------------------------------------
# formats


def _ints(path, lineno: int, text: str) -> list[int]:
    out, col = [], 1
    for tok in text.split():
        col = text.index(tok, col - 1) + 1
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(path, lineno, col, f"expected an integer, got {tok!r}") from None
        col += len(tok)
    return out


def read_alist(text: str, path="<alist>") -> np.ndarray:
    """MacKay alist: sizes, max weights, weight lists, then 1-based column and row lists."""
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if len(lines) < 4:
        raise ParseError(path, len(text.splitlines()) + 1, 1, "truncated header")
    (l0, t0), (l1, t1), (l2, t2), (l3, t3) = lines[:4]
    head = _ints(path, l0, t0)
    if len(head) != 2:
        raise ParseError(path, l0, 1, "first line must hold the column and row counts")
    n, m = head
    _ints(path, l1, t1)
    col_w, row_w = _ints(path, l2, t2), _ints(path, l3, t3)
    if len(col_w) != n:
        raise ParseError(path, l2, 1, f"{len(col_w)} column weights for {n} columns")
    if len(row_w) != m:
        raise ParseError(path, l3, 1, f"{len(row_w)} row weights for {m} rows")
    body = lines[4:]
    if len(body) < n + m:
        where = body[-1][0] + 1 if body else l3 + 1
        raise ParseError(path, where, 1, f"expected {n + m} adjacency lines, found {len(body)}")
    H = np.zeros((m, n), dtype=np.uint8)
    for j, (ln, t) in enumerate(body[:n]):
        idx = [v for v in _ints(path, ln, t) if v]
        if len(idx) != col_w[j]:
            raise ParseError(path, ln, 1, f"column {j + 1} lists {len(idx)} rows, weight says {col_w[j]}")
        for v in idx:
            if not 1 <= v <= m:
                raise ParseError(path, ln, t.index(str(v)) + 1, f"row index {v} out of range")
            H[v - 1, j] = 1
    H2 = np.zeros_like(H)
    for i, (ln, t) in enumerate(body[n : n + m]):
        idx = [v for v in _ints(path, ln, t) if v]
        if len(idx) != row_w[i]:
            raise ParseError(path, ln, 1, f"row {i + 1} lists {len(idx)} columns, weight says {row_w[i]}")
        for v in idx:
            if not 1 <= v <= n:
                raise ParseError(path, ln, t.index(str(v)) + 1, f"column index {v} out of range")
            H2[i, v - 1] = 1
    if not np.array_equal(H, H2):
        raise ParseError(path, body[n][0], 1, "row lists disagree with column lists")
    return H


def write_alist(H: np.ndarray) -> str:
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    cols = [np.flatnonzero(H[:, j]) + 1 for j in range(n)]
    rows = [np.flatnonzero(H[i]) + 1 for i in range(m)]
    cw, rw = max((len(c) for c in cols), default=0), max((len(r) for r in rows), default=0)

    def pad(v, w):
        return " ".join(map(str, list(v) + [0] * (w - len(v))))

    out = [f"{n} {m}", f"{cw} {rw}", " ".join(str(len(c)) for c in cols), " ".join(str(len(r)) for r in rows)]
    out += [pad(c, cw) for c in cols] + [pad(r, rw) for r in rows]
    return "\n".join(out) + "\n"


def read_dense01(text: str, path="<dense01>") -> np.ndarray:
    rows = []
    for i, ln in enumerate(text.splitlines(), 1):
        s = ln.split("#", 1)[0]
        if not s.strip():
            continue
        row = []
        for j, ch in enumerate(s, 1):
            if ch in "01":
                row.append(int(ch))
            elif not ch.isspace():
                raise ParseError(path, i, j, f"unexpected character {ch!r}")
        if rows and len(row) != len(rows[0][1]):
            raise ParseError(path, i, 1, f"row has {len(row)} entries, expected {len(rows[0][1])}")
        rows.append((i, row))
    if not rows:
        raise ParseError(path, 1, 1, "no rows")
    return np.array([r for _, r in rows], dtype=np.uint8)


def write_dense01(H: np.ndarray) -> str:
    return "".join("".join(map(str, r)) + "\n" for r in np.asarray(H, dtype=np.uint8))


def read_json(text: str, path="<json>") -> np.ndarray:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, e.colno, e.msg) from None
    if isinstance(data, dict):
        data = data.get("H")
    arr = np.array(data) if isinstance(data, list) else None
    if arr is None or arr.ndim != 2 or not np.isin(arr, (0, 1)).all():
        raise ParseError(path, 1, 1, "expected a 0/1 matrix or an object with key 'H'")
    return arr.astype(np.uint8)


def write_json(H: np.ndarray) -> str:
    return json.dumps({"H": np.asarray(H, dtype=int).tolist()}) + "\n"


READERS = {"alist": read_alist, "dense01": read_dense01, "json": read_json}
WRITERS = {"alist": write_alist, "dense01": write_dense01, "json": write_json}


def guess_format(path: str) -> str:
    suffix = Path(path).suffix.lower()
    return {".alist": "alist", ".json": "json"}.get(suffix, "dense01")


def load_matrix(path: str, fmt: str | None = None) -> np.ndarray:
    fmt = fmt or guess_format(path)
    return READERS[fmt](Path(path).read_text(), path)


# ---------------------------------------------------------------------------
# output


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else "".join(map(str, k)): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def emit(args, name: str, obj) -> None:
    text = dumps(obj)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _code(args) -> TripleCode:
    hx = load_matrix(args.x, args.format)
    hy = load_matrix(args.y or args.x, args.format)
    return triple_code(hx, hy, args.adjacency)


def cmd_build(args) -> int:
    tc = _code(args)
    emit(args, "code.json", {"seed": args.seed, "code": tc.to_json()})
    return EXIT_OK


def cmd_stabilizers(args) -> int:
    tc = _code(args)
    emit(
        args,
        "stabilizers.json",
        {"seed": args.seed, "untwisted": untwisted_stabilizers(tc).to_json(), "twisted": twisted_stabilizers(tc).to_json()},
    )
    return EXIT_OK


def verify_code(tc: TripleCode, seed: int = 0, shifts: int = 100) -> dict:
    """Every structural check with a pass flag and witnesses."""
    out: dict = {}
    out["complexes"] = {"ok": all(validate(tc.complex(c)).ok for c in COPIES)}
    st = stokes_check(tc, seed=seed)
    moved = invariance_check(tc, shifts, seed)
    out["cohomology_invariance"] = {
        "ok": st.ok and not moved,
        "leibniz_failures": len(st.leibniz_failures),
        "shift_failures": len(st.shift_failures),
        "tensor_shifts_changed": moved,
    }
    stabs = twisted_stabilizers(tc)
    cl = closure_report(stabs)
    out["closure"] = {
        "ok": cl.ok,
        "pairs_checked": cl.pairs_checked,
        "failures": cl.failures[:20],
        "involution_failures": cl.involution_failures,
    }
    bases = [("g", "gamma", tc.green0), ("r", "alpha0", tc.red0), ("b", "beta0", tc.blue0)]
    if not len(tc.green0):
        out["charge_parity"] = {"ok": True, "skipped": True}
    else:
        bad = [
            [name, i]
            for copy, name, hb in bases
            for i, v in enumerate(hb.cocycle_reps)
            if charge_parity(tc, copy, v, stabs).x
        ]
        out["charge_parity"] = {"ok": not bad, "x_left": bad}
    ent = entangler(tc)
    out["entangler"] = {"ok": ent.ok, "conjugation": ent.conjugation_ok, "gauss": ent.gauss_ok}
    T = intersection_tensor(tc)
    if T.shape[2] <= 10 and T.size:
        mism = [
            list(rho)
            for rho in product((0, 1), repeat=T.shape[2])
            if not projector_identity_check(T, rho).ok
        ]
        out["projector_identity"] = {"ok": not mism, "failing_rho": mism}
    else:
        out["projector_identity"] = {"ok": True, "skipped": True}
    out["ok"] = all(v["ok"] for v in out.values() if isinstance(v, dict))
    return out


def cmd_verify(args) -> int:
    tc = _code(args)
    report = verify_code(tc, args.seed)
    emit(args, "verify.json", {"seed": args.seed, "adjacency": args.adjacency, "checks": report})
    for k, v in report.items():
        if isinstance(v, dict):
            tag = "skip" if v.get("skipped") else ("pass" if v["ok"] else "FAIL")
            print(f"{tag:<5}{k}", file=sys.stderr)
    return EXIT_OK if report["ok"] else EXIT_VERIFY


def cmd_intersections(args) -> int:
    tc = _code(args)
    T = intersection_tensor(tc)
    entries = [
        {"red": [a, *tc.red.tags[a]], "blue": [b, *tc.blue.tags[b]], "gamma": [g, *tc.green0.tags[g]]}
        for a, b, g in np.argwhere(T)
    ]
    emit(args, "intersections.json", {"seed": args.seed, "shape": list(T.shape), "nonzero": entries})
    return EXIT_OK


def _exhausted(obj) -> bool:
    if isinstance(obj, dict):
        return bool(obj.get("budget_exhausted")) or any(_exhausted(v) for v in obj.values())
    if isinstance(obj, list):
        return any(_exhausted(v) for v in obj)
    return False


def cmd_distance(args) -> int:
    tc = _code(args)
    rep = distance_report(tc, budget=args.budget)
    emit(args, "distance.json", {"seed": args.seed, "report": rep.to_json()})
    print(rep.table(), file=sys.stderr)
    return EXIT_BUDGET if _exhausted(rep.distances) else EXIT_OK


def _plan(tc, kind: str):
    if kind == "fountain":
        return plan_fountain(tc)
    return plan_all(tc, "+" if kind == "plus" else "0", "+" if kind == "plus" else "0")


def cmd_fountain(args) -> int:
    tc = _code(args)
    plan = plan_fountain(tc)
    emit(args, "fountain.json", {"seed": args.seed, "plan": plan.to_json()})
    return EXIT_OK if plan.certificate["ok"] else EXIT_VERIFY


def cmd_simulate(args) -> int:
    tc = _code(args)
    plan = _plan(tc, args.plan)
    backend = args.backend
    if backend == "dense" and tc.total_qubits > args.dense_cap:
        raise SizeError(f"{tc.total_qubits} qubits exceed --dense-cap {args.dense_cap}; rerun with --backend ledger")
    replay = json.loads(Path(args.outcomes).read_text()) if args.outcomes else None
    rng = np.random.default_rng(args.seed)
    eng = DenseProtocol(tc, plan) if backend == "dense" else None
    transcripts = []
    for t in range(1 if replay else args.trials):
        seed = int(rng.integers(2**31))
        if eng is None:
            tr = run_ledger(tc, plan, replay, seed)
        elif replay:
            prefix = tuple(int(replay["mu"][c]) for c in eng.order)
            eta = tuple(int(b) for b in replay["z_mu"])
            if prefix not in eng.leaves or eta not in eng.leaves[prefix]["branches"]:
                raise InconsistentOutcomeError("replayed outcomes have probability zero")
            tr = eng.transcript(prefix, eta, replay.get("seed"))
        else:
            tr = eng.transcript(*eng.sample(np.random.default_rng(seed)), seed)
        transcripts.append(tr.to_json())
    good = sum(1 for tr in transcripts for g in range(len(tr["rho"])) if any(p[2] == g for p in plan.pairs) and not tr["rho"][g])
    slots = len(transcripts) * len(plan.pairs)
    fids = [p["fidelity_magic"] for tr in transcripts for p in tr["logical_state"].get("pairs", [])]
    summary = {
        "seed": args.seed,
        "backend": backend,
        "trials": len(transcripts),
        "magic_yield": good / slots if slots else None,
        "pairs_per_trial": len(plan.pairs),
        "min_fidelity_on_success": min(
            (p["fidelity_magic"] for tr in transcripts for p in tr["logical_state"].get("pairs", []) if not tr["rho"][p["gamma"]]),
            default=None,
        ),
        "fidelities_recorded": len(fids),
    }
    emit(args, "simulate.json", {"summary": summary, "transcripts": transcripts})
    return EXIT_OK


def cmd_report(args) -> int:
    tc = _code(args)
    rep = distance_report(tc, budget=args.budget, dense=tc.total_qubits <= min(args.dense_cap, 24))
    checks = verify_code(tc, args.seed)
    emit(args, "report.json", {"seed": args.seed, "rates": rep.to_json(), "verify": checks})
    print(rep.table(), file=sys.stderr)
    if not checks["ok"]:
        return EXIT_VERIFY
    return EXIT_BUDGET if _exhausted(rep.distances) else EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "stabilizers": cmd_stabilizers,
    "verify": cmd_verify,
    "intersections": cmd_intersections,
    "distance": cmd_distance,
    "simulate": cmd_simulate,
    "fountain": cmd_fountain,
    "report": cmd_report,
}


def _cap(text: str) -> int:
    v = int(text)
    if not 1 <= v <= MAX_DENSE_QUBITS:
        raise argparse.ArgumentTypeError(f"must lie in 1..{MAX_DENSE_QUBITS}")
    return v


def _budget(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--x", required=True, help="parity-check matrix for the first factor")
    common.add_argument("--y", help="second factor (defaults to --x)")
    common.add_argument("--format", choices=FORMATS, help="input format (guessed from the suffix)")
    common.add_argument("--adjacency", choices=ADJACENCY_RULES, default="min-index")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--dense-cap", type=_cap, default=24)
    common.add_argument("--budget", type=_budget, default=5_000_000, help="distance search budget")
    common.add_argument("--out", help="output directory (stdout when omitted)")

    p = argparse.ArgumentParser(prog="twistedhgp", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "simulate":
            sp.add_argument("--trials", type=int, default=1)
            sp.add_argument("--backend", choices=("dense", "ledger"), default="dense")
            sp.add_argument("--plan", choices=("fountain", "plus", "zero"), default="fountain")
            sp.add_argument("--outcomes", help="transcript JSON whose mu and z_mu are replayed")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ParseError, ConstructionError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (InconsistentOutcomeError, NontrivialClassError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except SizeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except FountainError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())

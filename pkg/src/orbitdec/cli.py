"""Command-line front end.

Exit codes: 0 YES, 1 NO, 2 UNKNOWN or OVERFLOW, 64 usage error, 65 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from .coset_enum import CipCertificate, parse_presentation, todd_coxeter
from .decision import Answer, Decision, OverflowBudget
from .extension import ExtensionSpec, GElement, OrbitLiftWitness, cp_extension
from .gl2 import OrbitWitness, cip_gl2, format_kernel_word, od_gl2_subgroup
from .lattice import IntMatrix, od_cyclic_matrix, od_gcd_full, tcp_zn
from .stallings import aut_invert, cip_free, core_graph, index_or_infinite, membership_express
from .undecidable import (CandidateRejected, gl4_block_embedding, mihailova_generators, mihailova_membership,
                          miller_data, pinned_gl4_embedding, wp_abelian, wp_finite, wp_free)
from .whitehead import same_aut_orbit
from .words import FreeAutomorphism, FreeWord, WordSyntaxError, format_word, parse_word

EXIT = {Answer.YES: 0, Answer.NO: 1, Answer.UNKNOWN: 2, Answer.OVERFLOW: 2}
EX_USAGE, EX_DATAERR = 64, 65


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which means UNKNOWN here
        raise UsageError(message)


# ---------------------------------------------------------------- parsing


def parse_matrix(text: str) -> IntMatrix:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as e:
        raise DataError(f"bad matrix {text!r}: {e.msg} at position {e.pos}") from None
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise DataError(f"bad matrix {text!r}: expected a list of rows")
    if any(not isinstance(x, int) or isinstance(x, bool) for r in rows for x in r):
        raise DataError(f"bad matrix {text!r}: entries must be integers")
    try:
        return IntMatrix.of(rows)
    except ValueError as e:
        raise DataError(f"bad matrix {text!r}: {e}") from None


def parse_vector(text: str) -> tuple[int, ...]:
    s = text.strip()
    if not s.startswith("["):
        s = f"[{s}]"
    try:
        v = json.loads(s)
    except json.JSONDecodeError as e:
        raise DataError(f"bad vector {text!r}: {e.msg} at position {e.pos}") from None
    if not isinstance(v, list) or any(not isinstance(x, int) or isinstance(x, bool) for x in v):
        raise DataError(f"bad vector {text!r}: expected integers")
    return tuple(v)


def format_matrix(M: IntMatrix) -> str:
    return json.dumps(M.tolist(), separators=(",", ":"))


def _word(text: str, names: Sequence[str] | None, rank: int | None) -> FreeWord:
    try:
        return parse_word(text, names, rank)
    except WordSyntaxError as e:
        raise DataError(f"bad word {text!r}: {e}") from None


def _split_list(items: Sequence[str] | None) -> list[str]:
    out: list[str] = []
    for item in items or ():
        out.extend(p for p in (s.strip() for s in item.split(",")) if p)
    return out


def _infer_rank(texts: Sequence[str]) -> int:
    rank = 1
    for t in texts:
        if t.strip():
            w = _word(t, None, None)
            rank = max(rank, w.rank)
    return rank


# ---------------------------------------------------------------- output


def to_json(obj: Any, names: Sequence[str] | None = None) -> Any:
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, FreeWord):
        return format_word(obj, names)
    if isinstance(obj, IntMatrix):
        return obj.tolist()
    if isinstance(obj, GElement):
        tnames = ["t"] if obj.h.rank == 1 else [f"t{i}" for i in range(1, obj.h.rank + 1)]
        f = list(obj.f) if isinstance(obj.f, tuple) else format_word(obj.f)
        return {"t": format_word(obj.h, tnames), "f": f}
    if isinstance(obj, CipCertificate):
        return {"element": to_json(obj.element, names), "a_expr": to_json(obj.a_expr), "b_expr": to_json(obj.b_expr)}
    if isinstance(obj, OrbitWitness):
        return {"matrix": obj.matrix.tolist(), "word": list(obj.word)}
    if isinstance(obj, OrbitLiftWitness):
        return {"representative": to_json(obj.representative), "word": list(obj.word), "inner": to_json(obj.inner)}
    if isinstance(obj, FreeAutomorphism):
        return obj.format(names)
    if isinstance(obj, (list, tuple)):
        return [to_json(x, names) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_json(v, names) for k, v in obj.items()}
    return str(obj)


class Report:
    def __init__(self, decision: Decision | None = None, names: Sequence[str] | None = None,
                 extra: dict | None = None, exit_code: int | None = None):
        self.decision = decision
        self.names = names
        self.extra = extra or {}
        self._exit = exit_code

    @property
    def exit_code(self) -> int:
        if self._exit is not None:
            return self._exit
        return EXIT[self.decision.answer] if self.decision else 0

    def payload(self) -> dict:
        out: dict[str, Any] = {}
        if self.decision is not None:
            d = self.decision
            out.update(answer=d.answer.value, witness=to_json(d.witness, self.names),
                       certificate_checked=d.certificate_checked)
            if d.note:
                out["note"] = d.note
        out.update({k: to_json(v, self.names) for k, v in self.extra.items()})
        return out


def _print_human(payload: dict) -> None:
    if "answer" in payload:
        print(payload["answer"].upper())
    for k, v in payload.items():
        if k == "answer" or v is None:
            continue
        if isinstance(v, str) and "\n" in v:
            print(f"{k}:")
            print(v)
        else:
            print(f"{k}: {json.dumps(v) if not isinstance(v, str) else v}")


# ---------------------------------------------------------------- commands


def _load_spec(text: str) -> ExtensionSpec:
    p = Path(text)
    try:
        raw = json.loads(p.read_text() if p.exists() else text)
    except json.JSONDecodeError as e:
        raise DataError(f"bad spec: {e.msg} at position {e.pos}") from None
    try:
        fiber = raw["fiber"]
        kind, n = fiber["type"], int(fiber["n"])
        if kind == "free_abelian":
            action = [IntMatrix.of(m) for m in raw["action"]]
        elif kind == "free":
            action = []
            for a in raw["action"]:
                imgs = [_word(s, None, n) for s in (a["images"] if isinstance(a, dict) else a)]
                action.append(aut_invert(FreeAutomorphism(n, imgs)))
        else:
            raise DataError(f"unknown fiber type {kind!r}")
        return ExtensionSpec(kind, n, action, od=raw.get("od", "cyclic"), tcp=raw.get("tcp", "zn_linear"),
                             assume_transitive=bool(raw.get("assume_transitive", False)))
    except (KeyError, TypeError) as e:
        raise DataError(f"bad spec: missing or malformed field {e}") from None


def parse_element(spec: ExtensionSpec, text: str) -> GElement:
    s = text.strip()
    if s.startswith("{"):
        try:
            raw = json.loads(s)
        except json.JSONDecodeError as e:
            raise DataError(f"bad element {text!r}: {e.msg}") from None
        t, f = raw.get("t", ""), raw.get("f")
    else:
        t, _, f = s.partition(":")
    tnames = [f"t{i}" for i in range(1, spec.m + 1)]
    if spec.m == 1:
        t = " ".join("t1" if tok == "t" else tok.replace("t^", "t1^") for tok in str(t).split())
    h = _word(str(t), tnames, spec.m) if str(t).strip() else FreeWord.identity(spec.m)
    if spec.fiber == "free_abelian":
        fv = tuple(f) if isinstance(f, list) else (parse_vector(f) if f not in (None, "") else (0,) * spec.n)
        if len(fv) != spec.n:
            raise DataError(f"fiber of {text!r} must have length {spec.n}")
        return GElement(h, fv)
    return GElement(h, _word(str(f or ""), None, spec.n))


def cmd_cp_ext(a) -> Report:
    spec = _load_spec(a.spec)
    return Report(cp_extension(spec, parse_element(spec, a.g), parse_element(spec, a.gp)))


def cmd_tcp_zn(a) -> Report:
    return Report(tcp_zn(parse_matrix(a.matrix), parse_vector(a.u), parse_vector(a.v)))


def cmd_od(a) -> Report:
    mats = [parse_matrix(m) for m in a.matrix or ()]
    u, v = parse_vector(a.u), parse_vector(a.v)
    if a.strategy == "cyclic":
        if len(mats) != 1:
            raise UsageError("cyclic strategy takes exactly one --matrix")
        return Report(od_cyclic_matrix(mats[0], u, v))
    if a.strategy == "gcd":
        return Report(od_gcd_full(u, v))
    if not mats:
        raise UsageError("gl2 strategy needs at least one --matrix")
    return Report(od_gl2_subgroup(mats, u, v))


def cmd_cip_free(a) -> Report:
    A, B = _split_list(a.A), _split_list(a.B)
    rank = a.rank or _infer_rank([a.x, a.y] + A + B)
    x, y = _word(a.x, None, rank), _word(a.y, None, rank)
    return Report(cip_free(x, [_word(w, None, rank) for w in A], y, [_word(w, None, rank) for w in B]))


def cmd_cip_gl2(a) -> Report:
    A = [parse_matrix(m) for m in a.A or ()]
    B = [parse_matrix(m) for m in a.B or ()]
    return Report(cip_gl2(parse_matrix(a.x), A, parse_matrix(a.y), B))


def cmd_whitehead(a) -> Report:
    rank = a.rank or _infer_rank([a.u, a.v])
    return Report(same_aut_orbit(_word(a.u, None, rank), _word(a.v, None, rank), budget=a.search_budget))


def cmd_stallings(a) -> Report:
    gens = _split_list(a.gens)
    rank = a.rank or _infer_rank(gens + ([a.member] if a.member else []))
    g = core_graph([_word(w, None, rank) for w in gens], rank)
    idx = index_or_infinite(g)
    extra = {"vertices": g.num_vertices, "rank": g.subgroup_rank(), "index": idx if idx is not None else "infinite",
             "basis": g.basis(), "graph": g.dump()}
    if a.member is None:
        return Report(None, extra=extra)
    return Report(membership_express(g, _word(a.member, None, rank)), extra=extra)


def cmd_todd_coxeter(a) -> Report:
    p = parse_presentation(a.presentation)
    subs = [p.word(w) for w in _split_list(a.subgroup)]
    try:
        t = todd_coxeter(p, subs, max_cosets=a.max_cosets)
    except OverflowBudget as e:
        return Report(Decision.overflow(str(e)))
    reps = [p.format(r) for r in t.representatives]
    return Report(None, extra={"index": t.index, "representatives": reps, "table": t.dump_tsv()})


def cmd_miller_gen(a) -> Report:
    H = parse_presentation(a.presentation)
    md = miller_data(H)
    extra = {
        "presentation": str(md.presentation),
        "generators": list(md.presentation.generators),
        "relators": [md.presentation.format(r) for r in md.presentation.relators],
        "alphas": [phi.format(md.fiber_names) for phi in md.alphas],
        "betas": [phi.format(md.fiber_names) for phi in md.betas],
    }
    return Report(None, extra=extra)


def cmd_mihailova(a) -> Report:
    H = parse_presentation(a.presentation)
    left, sep, right = a.pair.partition("|")
    if not sep:
        raise DataError("pair must look like 'x|y'")
    x, y = _word(left, H.generators, H.rank), _word(right, H.generators, H.rank)
    oracle = {"abelian": wp_abelian, "free": wp_free, "finite": wp_finite}[a.wp](H)
    return Report(mihailova_membership(mihailova_generators(H), (x, y), oracle), names=H.generators)


def cmd_gl4_embed(a) -> Report:
    names = ("P", "Q")
    try:
        if a.p is None and a.q is None:
            e = pinned_gl4_embedding()
        elif a.p is None or a.q is None:
            raise UsageError("give both --p and --q, or neither")
        else:
            e = gl4_block_embedding(_word(a.p, names, 2), _word(a.q, names, 2))
    except CandidateRejected as ex:
        return Report(Decision.no(ex.condition))
    extra = {"p_word": format_kernel_word(e.p_word), "q_word": format_kernel_word(e.q_word),
             "generators": [g.tolist() for g in e.generators], "v": list(e.v)}
    return Report(Decision.yes(None), extra=extra)


COMMANDS = {
    "cp-ext": cmd_cp_ext,
    "tcp-zn": cmd_tcp_zn,
    "od": cmd_od,
    "cip-free": cmd_cip_free,
    "cip-gl2": cmd_cip_gl2,
    "whitehead-orbit": cmd_whitehead,
    "stallings": cmd_stallings,
    "todd-coxeter": cmd_todd_coxeter,
    "miller-gen": cmd_miller_gen,
    "mihailova": cmd_mihailova,
    "gl4-embed": cmd_gl4_embed,
}


def _positive(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if k <= 0:
        raise argparse.ArgumentTypeError("budget must be positive")
    return k


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--search-budget", type=_positive, default=10**6)
    p = _Parser(prog="orbitdec", description="Conjugacy, orbit and coset decision procedures.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("cp-ext", parents=[common], help="conjugacy in an extension of F_m")
    s.add_argument("--spec", required=True, help="JSON spec or a path to one")
    s.add_argument("--g", required=True)
    s.add_argument("--gp", required=True)

    s = sub.add_parser("tcp-zn", parents=[common], help="twisted conjugacy in Z^n")
    s.add_argument("--matrix", required=True)
    s.add_argument("--u", required=True)
    s.add_argument("--v", required=True)

    s = sub.add_parser("od", parents=[common], help="orbit problem for a matrix group")
    s.add_argument("--strategy", choices=("cyclic", "gcd", "gl2"), required=True)
    s.add_argument("--matrix", action="append")
    s.add_argument("--u", required=True)
    s.add_argument("--v", required=True)

    s = sub.add_parser("cip-free", parents=[common], help="is xA ∩ yB empty in a free group")
    for name in ("x", "y"):
        s.add_argument(f"--{name}", required=True)
    s.add_argument("--A", action="append")
    s.add_argument("--B", action="append")
    s.add_argument("--rank", type=_positive)

    s = sub.add_parser("cip-gl2", parents=[common], help="is xA ∩ yB empty in GL_2(Z)")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--A", action="append")
    s.add_argument("--B", action="append")

    s = sub.add_parser("whitehead-orbit", parents=[common], help="same Aut(F_n)-orbit of conjugacy classes")
    s.add_argument("--rank", type=_positive)
    s.add_argument("--u", required=True)
    s.add_argument("--v", required=True)

    s = sub.add_parser("stallings", parents=[common], help="core graph and membership")
    s.add_argument("--gens", action="append", required=True)
    s.add_argument("--member")
    s.add_argument("--rank", type=_positive)

    s = sub.add_parser("todd-coxeter", parents=[common], help="coset enumeration")
    s.add_argument("--presentation", required=True)
    s.add_argument("--subgroup", action="append")
    s.add_argument("--max-cosets", type=_positive, default=10**5)

    s = sub.add_parser("miller-gen", parents=[common], help="Miller group presentation")
    s.add_argument("--presentation", required=True)

    s = sub.add_parser("mihailova", parents=[common], help="Mihailova subgroup membership")
    s.add_argument("--presentation", default="<a,b | [a,b]>")
    s.add_argument("--pair", required=True, help="'x|y'")
    s.add_argument("--wp", choices=("abelian", "free", "finite"), default="abelian")

    s = sub.add_parser("gl4-embed", parents=[common], help="verified F2 x F2 block embedding into GL_4(Z)")
    s.add_argument("--p")
    s.add_argument("--q")

    s = sub.add_parser("batch", parents=[common], help="one JSON query per line")
    s.add_argument("file", nargs="?", default="-")
    s.add_argument("--jobs", type=_positive, default=1)
    return p


def _emit(payload: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload))
    else:
        _print_human(payload)


def run(argv: Sequence[str]) -> tuple[int, dict]:
    """Parse and dispatch one query; returns the exit code and the report payload."""
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(list(argv))
        if args.command is None:
            raise UsageError("missing subcommand")
        if args.command == "batch":
            raise UsageError("batch cannot be nested")
        random.seed(args.seed)
        report = COMMANDS[args.command](args)
        code, payload = report.exit_code, report.payload()
    except UsageError as e:
        code, payload = EX_USAGE, {"error": f"usage: {e}"}
    except OverflowBudget as e:
        code, payload = 2, {"answer": Answer.OVERFLOW.value, "witness": None, "certificate_checked": False,
                            "note": str(e)}
    except (DataError, WordSyntaxError, ValueError, KeyError, TypeError) as e:
        code, payload = EX_DATAERR, {"error": str(e)}
    payload["elapsed_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    return code, payload


def _batch_argv(query: dict) -> list[str]:
    if "argv" in query:
        return [str(x) for x in query["argv"]]
    q = dict(query)
    argv = [str(q.pop("command"))]
    for k, v in q.items():
        flag = "--" + k.replace("_", "-")
        # a list of strings repeats the flag; any other value is passed as JSON
        items = v if isinstance(v, list) and all(isinstance(x, str) for x in v) else [v]
        for item in items:
            if item is True:
                argv.append(flag)
            elif item is not False and item is not None:
                argv += [flag, item if isinstance(item, str) else json.dumps(item)]
    return argv


def _batch_one(line: str) -> dict:
    try:
        query = json.loads(line)
        argv = _batch_argv(query)
    except (json.JSONDecodeError, KeyError, AttributeError, TypeError) as e:
        return {"exit": EX_DATAERR, "error": f"bad batch line: {e}"}
    code, payload = run(argv)
    payload["exit"] = code
    return payload


def run_batch(args) -> int:
    stream = sys.stdin if args.file == "-" else open(args.file)
    with stream:
        lines = [ln for ln in stream if ln.strip()]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=min(args.jobs, os.cpu_count() or 1)) as ex:
            results = list(ex.map(_batch_one, lines))
    else:
        results = [_batch_one(ln) for ln in lines]
    for r in results:
        print(json.dumps(r))
    return 0 if all(r.get("exit") in (0, 1, 2) for r in results) else EX_DATAERR


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "batch":
        try:
            args = build_parser().parse_args(argv)
        except UsageError as e:
            print(f"usage error: {e}", file=sys.stderr)
            return EX_USAGE
        try:
            return run_batch(args)
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EX_DATAERR
    code, payload = run(argv)
    as_json = "--json" in argv
    if "error" in payload:
        print(payload["error"], file=sys.stderr)
        if as_json:
            print(json.dumps(payload))
    else:
        _emit(payload, as_json)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

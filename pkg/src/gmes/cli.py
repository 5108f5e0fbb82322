"""Command-line interface.  Every command prints one JSON report on stdout.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
validation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from . import __version__
from . import algebra as A
from . import certify as C
from . import core
from . import quotients as Q
from . import theta as T
from . import words as W
from .corpus import coherence, corpus
from .datum import DatumError, GroupDatum, classify, load


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    command: str
    fingerprint: str | None
    params: dict
    seed: int | None = None
    results: dict = field(default_factory=dict)
    passed: bool = True
    timings: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"command": self.command, "version": __version__, "fingerprint": self.fingerprint,
                "params": self.params, "seed": self.seed, "passed": self.passed,
                "results": self.results, "timings": self.timings}


def _datum(args) -> GroupDatum:
    path = getattr(args, "datum", None) or getattr(args, "datum_file", None)
    if not path:
        raise UsageError("a datum file is required (--datum FILE)")
    try:
        return load(path)
    except OSError as exc:
        raise UsageError(f"cannot read datum: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed datum JSON: {exc}") from exc


def _word(d: GroupDatum, text: str) -> W.ReducedWord:
    return W.parse(d, text)


# Commands ---------------------------------------------------------------------

def cmd_validate(args, d, rep):
    rep.results = {"valid": True, "datum": d.to_json(), "ranks": list(d.ranks)}


def cmd_classify(args, d, rep):
    rep.results = classify(d, args.family).to_json()


def cmd_portrait(args, d, rep):
    rep.results = {"word": args.word, "portrait": W.portrait(_word(d, args.word), args.depth).to_json()}


def cmd_act(args, d, rep):
    w = _word(d, args.word)
    u = core.parse_address(args.vertex, d.p)
    f = W.portrait(w, len(u))
    rep.results = {"word": args.word, "vertex": args.vertex, "image": core.format_address(core.act(f, u), d.p)}


def cmd_order(args, d, rep):
    k = W.element_order(_word(d, args.word), args.cap)
    rep.results = {"word": args.word, "order": k}
    rep.passed = k is not None


def cmd_theta_trace(args, d, rep):
    z = _word(d, args.word)
    trace = T.reduce_to_terminal(z, d, args.max_steps, args.family)
    rep.results = trace.to_json()
    rep.passed = trace.aborted is None
    if args.check_depth:
        checks = [T.check_theta_derivations(d, s.input, args.check_depth, args.family).passed for s in trace.steps]
        rep.results["derivations_hold"] = all(checks)
        rep.passed = rep.passed and all(checks)


def _certificate(rep, cert: C.Certificate, extra=None):
    rep.results = cert.to_json()
    if extra:
        rep.results.update(extra)
    rep.passed = cert.overall


def cmd_certify(args, d, rep):
    if args.kind == "gamma3":
        _certificate(rep, C.gamma3_branch_certificate(d, args.depth))
    elif args.kind == "derived":
        _certificate(rep, C.derived_branch_certificate(d, args.depth))
    elif args.kind == "csp":
        m = args.quotient_level or args.n + 1
        witness, cert = C.csp_witness(d, args.n, m)
        _certificate(rep, cert, {"witness": witness.to_json()})
    else:
        if not (args.u and args.uprime and args.v):
            raise UsageError("certify dagger needs --u, --uprime and --v")
        word, cert = C.dagger_witness(d, args.u, args.uprime, args.v)
        _certificate(rep, cert, {"word": str(word)})


def cmd_quotient(args, d, rep):
    q = Q.build_quotient(d, args.level, args.seed or 0)
    out = {"level": args.level, "points": q.degree}
    if args.query == "order":
        out["order"] = q.order()
    elif args.query == "abelian-rank":
        out["abelian_rank"] = q.abelian_rank()
    elif args.query == "derived-index":
        out["derived_index"] = q.derived_index()
    else:
        if not args.word:
            raise UsageError("quotient contains needs a word")
        out["word"] = args.word
        out["contains"] = q.contains(_word(d, args.word))
        out["in_derived"] = q.in_derived(_word(d, args.word))
    rep.results = out


def cmd_algebra(args, d, rep):
    n = args.level
    if args.query == "astar-check":
        r = A.astar_check(d, n)
    elif args.query == "xpowers":
        r = A.x_power_check(d, n, args.max_j)
    elif args.query == "nilindex":
        r = A.nilindex_report(d, n)
    elif args.query == "phi-check":
        r = A.phi_check(d, n, args.samples, args.seed or 0)
    elif args.query == "conjugation-check":
        r = A.conjugation_check(d, n, args.samples, args.seed or 0)
    else:
        r = A.rho_identity_check(d, n)
    rep.results = r.to_json()
    if args.export:
        rep.results["matrix"] = _export(d, args, n)
    rep.passed = r.passed or r.skipped is not None


def _export(d, args, n):
    gen = A.designated_generator(d)
    if args.export == "a_star":
        v = A.a_star(d, n)
    elif args.export == "b_star":
        v = A.b_star(d, gen, n)
    else:
        v = A.b_star(d, gen, n) * A.a_star(d, n)
    return v.to_triplets()


def cmd_corpus(args, d, rep):
    words = corpus(args.seed, d, args.size, args.max_length, args.in_derived)
    rep.results = {"words": [str(w) for w in words]}
    if args.in_derived:
        ok = all(W.in_kernel(w) for w in words)
        rep.results["all_in_kernel"] = ok
        rep.passed = ok
    if args.coherence:
        rows = [coherence(w) for w in words]
        bad = [r for r in rows if not r["agree"]]
        rep.results["coherence"] = {"checked": len(rows), "disagreements": bad,
                                    "trivial": sum(r["solver"] for r in rows)}
        rep.passed = rep.passed and not bad


COMMANDS = {
    "validate": cmd_validate, "classify": cmd_classify, "portrait": cmd_portrait, "act": cmd_act,
    "order": cmd_order, "theta-trace": cmd_theta_trace, "certify": cmd_certify, "quotient": cmd_quotient,
    "algebra": cmd_algebra, "corpus": cmd_corpus,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gmes", description="Spinal groups on the p-adic tree: words, certificates, quotients, algebra.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, positional_datum=False):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--datum", help="datum JSON file")
        if positional_datum:
            sp.add_argument("datum_file", nargs="?", help="datum JSON file")
        return sp

    add("validate", "check a datum file", True)
    sp = add("classify", "report the datum's structural flags", True)
    sp.add_argument("--family", type=int)

    sp = add("portrait", "portrait of a word")
    sp.add_argument("--word", required=True)
    sp.add_argument("--depth", type=int, default=3)

    sp = add("act", "image of a vertex")
    sp.add_argument("--word", required=True)
    sp.add_argument("--vertex", required=True, help="address such as 1 2 3 or 123")

    sp = add("order", "order of a word")
    sp.add_argument("--word", required=True)
    sp.add_argument("--cap", type=int, default=5000)

    sp = add("theta-trace", "length reduction by the theta maps")
    sp.add_argument("--word", required=True)
    sp.add_argument("--max-steps", type=int)
    sp.add_argument("--family", type=int)
    sp.add_argument("--check-depth", type=int, default=0, help="also check the derivations at this depth")

    sp = add("certify", "branch, congruence and (dagger) certificates")
    sp.add_argument("kind", choices=["gamma3", "derived", "csp", "dagger"])
    sp.add_argument("--depth", type=int, default=C.DEFAULT_DEPTH)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--quotient-level", type=int)
    sp.add_argument("--u")
    sp.add_argument("--uprime")
    sp.add_argument("--v")

    sp = add("quotient", "finite quotient G/Stab(m)")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("query", choices=["order", "abelian-rank", "contains", "derived-index"])
    sp.add_argument("word", nargs="?")

    sp = add("algebra", "identities in the level-n algebra truncation")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("query", choices=["astar-check", "xpowers", "nilindex", "phi-check", "conjugation-check",
                                      "rho-check"])
    sp.add_argument("--max-j", type=int, default=3)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--export", choices=["a_star", "b_star", "X"], help="include a matrix as sparse triplets")

    sp = add("corpus", "reproducible random words")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--max-length", type=int, default=8)
    sp.add_argument("--in-derived", action="store_true")
    sp.add_argument("--coherence", action="store_true", help="compare the three triviality tests on each word")
    return parser


def run(argv=None) -> tuple[int, dict]:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "size", 0) and args.size < 0:
            raise UsageError("--size must be non-negative")
        d = _datum(args)
    except (UsageError, DatumError) as exc:
        return 2, {"error": str(exc)}
    params = {k: v for k, v in vars(args).items() if k not in ("command", "datum", "datum_file")}
    rep = RunReport(args.command, d.fingerprint(), params, seed=getattr(args, "seed", None))
    start = time.perf_counter()
    try:
        COMMANDS[args.command](args, d, rep)
    except (UsageError, C.CertifyError, T.ThetaError, A.AlgebraError, Q.QuotientTooLarge,
            core.PortraitError, ValueError) as exc:
        return 2, {"command": args.command, "fingerprint": d.fingerprint(), "error": str(exc)}
    rep.timings["total_seconds"] = round(time.perf_counter() - start, 4)
    return (0 if rep.passed else 1), rep.to_json()


def main(argv=None) -> int:
    code, out = run(argv)
    stream = sys.stdout if code != 2 else sys.stderr
    print(json.dumps(out, indent=2, sort_keys=True, default=str), file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())

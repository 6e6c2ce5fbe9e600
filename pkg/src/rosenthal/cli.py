"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical check fails
(a witness is printed), 2 on input or parse errors.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import amalgam as am
from .basisnorm import NOT_BASIC, basis_constant
from .ell1 import FnWindow, build_l1_trees, rank
from .embed import (PreconditionError, check_propnew, check_srce1,
                    extract_2K_equivalence, monotone_map_iv)
from .families import (HereditaryFamily, schreier_restricted, uniform_family,
                       verify_hereditary_claim)
from .polylin import fmt
from .seqtree import glue, order
from .stepfn import AtomSpace, StepFn

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}")


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"{path}: {e}")


def _load_window(path: str) -> FnWindow:
    try:
        return FnWindow.from_json(_load_json(path))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: {e}")


class Report:
    """Collects output lines; written to stdout and optionally to a file."""

    def __init__(self, out_path=None):
        self.lines: list[str] = []
        self.out_path = out_path

    def __call__(self, line: str = "") -> None:
        self.lines.append(line)

    def check(self, name: str, ok: bool) -> bool:
        self(f"[{'PASS' if ok else 'FAIL'}] {name}")
        return ok

    def flush(self, payload: str = None) -> None:
        text = "\n".join(self.lines) + "\n"
        sys.stdout.write(text)
        if self.out_path:
            Path(self.out_path).write_text(payload if payload is not None else text)


def _vec(v) -> str:
    return "(" + ", ".join(fmt(x) for x in v) + ")"


def cmd_family(args) -> int:
    rep = Report(args.out)
    if args.source == "schreier":
        if len(args.params) != 1:
            raise InputError("usage: family schreier N")
        F = schreier_restricted(int(args.params[0]))
    elif args.source == "uniform":
        if len(args.params) != 2:
            raise InputError("usage: family uniform N k")
        F = uniform_family(int(args.params[0]), int(args.params[1]))
    else:
        if len(args.params) != 1:
            raise InputError("usage: family file PATH")
        try:
            F = HereditaryFamily.from_text(Path(args.params[0]).read_text())
        except (OSError, ValueError) as e:
            raise InputError(f"{args.params[0]}: {e}")
    if not F.has_singletons:
        raise InputError("family must contain every singleton of its ground set")
    r = verify_hereditary_claim(F, args.max_len)
    d = r.details
    rep(f"family: ground 0..{F.ground}, {len(F)} members")
    rep(f"order(T_F) = {d['order_family_tree']}")
    rep(f"order(T^2) = {d['order_T2']}  (tuples up to length {d['T2_max_len']})")
    for t, (lo, up) in d["member_constants"].items():
        rep(f"  {{{','.join(map(str, t))}}}: lower {fmt(lo)}, upper {fmt(up)}")
    for t in d.get("missing", []):
        rep(f"  member {t} is NOT in T^2")
    rep.check("every member is 2-equivalent to the l1 basis; identity is monotone T_F -> T^2", r.passed)
    rep.flush()
    return EXIT_OK if r.passed else EXIT_FAIL


def cmd_rank(args) -> int:
    rep = Report(args.out)
    w = _load_window(args.window)
    D = int(args.d)
    if D < 1:
        raise InputError("--d must be >= 1")
    max_len = args.max_len if args.max_len is not None else len(w)
    trees = build_l1_trees(w, range(1, D + 1), max_len)
    prev = None
    monotone = True
    for d, T in trees.items():
        rep(f"T^{fmt(d)}: {len(T)} nodes, order {order(T)}")
        for t in T.sorted():
            rep(f"  {t}")
        if prev is not None:
            monotone &= prev.nodes <= T.nodes
        prev = T
    G = glue({int(d): T for d, T in trees.items()})
    rep(f"glued rank (d = 1..{D}, length <= {max_len}): {order(G)}")
    ok = rep.check("T^d increases with d", monotone)
    rep.flush()
    return EXIT_OK if ok else EXIT_FAIL


def _embed_inputs(args):
    if args.bundle:
        members, out = am.bundle_from_json(_load_json(args.bundle))
        if args.member is None or not 0 <= args.member < len(members):
            raise InputError("--member must index a member of the bundle")
        g, e = members[args.member]
        L = am.select_chain(out, args.member, len(g))
        return g, out.window(), [l - 1 for l in L], (args.eps if args.eps is not None else e)
    if not (args.g and args.f):
        raise InputError("give G.json and F.json, or --bundle")
    g, f = _load_window(args.g), _load_window(args.f)
    sel = list(range(len(g))) if args.select is None else [int(x) for x in args.select.split(",")]
    if args.eps is None:
        raise InputError("--eps is required")
    if any(not 0 <= l < len(f) for l in sel):
        raise InputError("selection indexes outside the f window")
    return g, f, sel, args.eps


def cmd_embed(args) -> int:
    rep = Report(args.out)
    g, f, sel, eps = _embed_inputs(args)
    if len(sel) != len(g):
        raise InputError(f"selection has {len(sel)} indices for a g window of length {len(g)}")
    f_sel = f.select(sel)
    cert = check_srce1(g, f_sel, eps, sel)
    rep(f"eps = {fmt(eps)}, selection = {sel}")
    ok = rep.check("prefix-max(g) <= comb(f_L) + eps*slack", cert.upper.passed)
    ok &= rep.check("comb(f_L) <= prefix-max(g) + eps*slack", cert.lower.passed)
    if cert.witness is not None:
        w = cert.witness
        bad = cert.upper if not cert.upper.passed else cert.lower
        rep(f"witness a = {_vec(w)}: lhs {fmt(bad.details['lhs'])} > rhs {fmt(bad.details['rhs'])}")
    try:
        if args.extract_2k and ok:
            r = extract_2K_equivalence(g, f_sel, eps)
            ok &= rep.check(f"2K-equivalence: C = {fmt(r.best)} <= 2K = {fmt(r.bound)}", r.within_bound)
        if args.iv is not None and ok:
            m = monotone_map_iv(g, f, sel, eps, args.iv)
            ok &= rep.check(f"monotone map T^{fmt(args.iv)}_g -> T^{fmt(2 * args.iv)}_f: "
                            f"orders {m.source_order} <= {m.target_order}", m.monotone)
        if args.propnew and ok:
            r = check_propnew(g, f_sel, eps)
            ok &= rep.check(f"X_g basis vs f_L: C = {fmt(r.best)} <= 1+eps = {fmt(r.bound)} "
                            f"(certified at eps' = {fmt(r.details['certified_eps'])})", r.within_bound)
    except PreconditionError as e:
        ok = rep.check(f"precondition: {e}", False)
    rep.flush(cert.to_text())
    return EXIT_OK if ok else EXIT_FAIL


def _load_members(path: str, eps_override):
    obj = _load_json(path)
    items = obj["members"] if isinstance(obj, dict) else obj
    members = []
    try:
        for m in items:
            eps = eps_override if eps_override is not None else m.get("eps")
            if eps is None:
                raise InputError("member without eps and no --eps given")
            members.append((FnWindow.from_json(m["window"]), Fraction(eps)))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: {e}")
    return members


def _verify_amalgam(rep: Report, members, out) -> tuple[bool, dict, dict, dict]:
    ok = True
    sels, certs, idents = {}, {}, {}
    try:
        out.check_invariants()
        rep.check("structure: phi mirrors the tree, enumeration extends it, f_n distinct in the unit ball", True)
    except AssertionError as e:
        ok = rep.check(f"structure: {e}", False)
    for i, (g, eps) in enumerate(members):
        L = am.select_chain(out, i, len(g), eps, g)
        sels[i] = L
        idents[i] = am.verify_norm_identity(out, L)
        ok &= rep.check(f"member {i}: norm identity along chain {L}", idents[i].passed)
        if idents[i].witness is not None:
            rep(f"  witness a = {_vec(idents[i].witness)}")
        certs[i] = am.verify_member_strong_embedding(out, i, g, eps)
        ok &= rep.check(f"member {i}: strong-embedding inequality at eps = {fmt(eps)}", certs[i].holds)
        if certs[i].witness is not None:
            rep(f"  witness a = {_vec(certs[i].witness)}")
    return ok, sels, certs, idents


def cmd_amalgam(args) -> int:
    rep = Report(args.out)
    if args.action == "build":
        members = _load_members(args.path, args.eps)
        if args.depth is None:
            raise InputError("--depth is required")
        try:
            if args.dense:
                dense = am.DenseWindow.from_json(_load_json(args.dense))
            else:
                dense = am.dense_window_for(members, args.depth)
            tree = am.encode_members(members, dense, args.depth)
        except am.EncodingError as e:
            rep.check(f"encoding: {e}", False)
            rep.flush()
            return EXIT_FAIL
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(str(e))
        out = am.build_amalgam(tree, dense)
        rep(f"pair-tree: {len(tree.nodes)} nodes, depth {tree.depth}; f_n on "
            f"dyadic({out.level}) x dyadic({dense.space.level})")
        ok, sels, certs, idents = _verify_amalgam(rep, members, out)
        bundle = am.bundle_to_json(members, out, sels, certs, idents)
        rep.flush(am.bundle_text(bundle))
        return EXIT_OK if ok else EXIT_FAIL
    try:
        members, out = am.bundle_from_json(_load_json(args.path))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{args.path}: {e}")
    ok, *_ = _verify_amalgam(rep, members, out)
    rep.flush()
    return EXIT_OK if ok else EXIT_FAIL


def _random_window(rng: random.Random, n: int, level: int) -> FnWindow:
    vals = [Fraction(v, 4) for v in range(-4, 5)]
    fns = []
    while len(fns) < n:
        f = StepFn(AtomSpace.dyadic(level), [rng.choice(vals) for _ in range(2 ** level)])
        if not f.is_zero() and f not in fns:
            fns.append(f)
    return FnWindow(fns)


def cmd_selftest(args) -> int:
    rep = Report(args.out)
    rng = random.Random(args.seed)
    ok = True
    r = verify_hereditary_claim(schreier_restricted(9))
    ok &= rep.check(f"hereditary claim on schreier(9): order {r.details['order_family_tree']}",
                    r.passed and r.details["order_family_tree"] == 6)
    members = [(_random_window(rng, 3, 3), Fraction(1, 4)) for _ in range(2)]
    dense = am.dense_window_for(members, 8)
    out = am.build_amalgam(am.encode_members(members, dense, 8), dense)
    good, *_ = _verify_amalgam(rep, members, out)
    ok &= good
    w = _random_window(rng, 3, 2)
    K = basis_constant(w)
    rep(f"random window basis constant: {'not basic' if K == NOT_BASIC else fmt(K)}")
    rep(f"random window glued rank (d = 1..2): {rank(w, [1, 2])}")
    rep.flush()
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rosenthal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("family", help="hereditary family: T_F versus T^2 of the projections")
    f.add_argument("source", choices=["schreier", "uniform", "file"])
    f.add_argument("params", nargs="*")
    f.add_argument("--max-len", type=int, default=None)
    f.add_argument("--out")
    f.set_defaults(fn=cmd_family)

    r = sub.add_parser("rank", help="l1-trees and glued rank of a function window")
    r.add_argument("window")
    r.add_argument("--d", type=_rational, default=Fraction(2), help="largest d (trees for d = 1..D)")
    r.add_argument("--max-len", type=int, default=None)
    r.add_argument("--out")
    r.set_defaults(fn=cmd_rank)

    e = sub.add_parser("embed", help="certify the strong-embedding inequality")
    e.add_argument("g", nargs="?")
    e.add_argument("f", nargs="?")
    e.add_argument("--select", help="comma-separated indices into the f window")
    e.add_argument("--bundle", help="take g and the chain selection from an amalgam bundle")
    e.add_argument("--member", type=int)
    e.add_argument("--eps", type=_rational)
    e.add_argument("--extract-2k", action="store_true")
    e.add_argument("--iv", type=_rational, metavar="D", help="monotone map T^D_g -> T^2D_f")
    e.add_argument("--propnew", action="store_true")
    e.add_argument("--out")
    e.set_defaults(fn=cmd_embed)

    a = sub.add_parser("amalgam", help="build or verify the universal sequence")
    a.add_argument("action", choices=["build", "verify"])
    a.add_argument("path")
    a.add_argument("--dense")
    a.add_argument("--depth", type=int)
    a.add_argument("--eps", type=_rational)
    a.add_argument("--out")
    a.set_defaults(fn=cmd_amalgam)

    s = sub.add_parser("selftest", help="quick end-to-end run")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

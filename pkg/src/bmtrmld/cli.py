"""Command-line front end.

Exit status: 0 success, 1 mathematical mismatch (formula != certified degree
or a failed structural check), 2 usage or parse error, 3 file I/O error,
4 resource cap exceeded or degenerate slice.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import __version__
from .exact import P1, P2, QQ
from .groebner import GroebnerResourceError
from .mle import NotPositiveDefiniteError, newton_fit, read_covariance_csv
from .model import build_design_A, build_path_B
from .rmld import DegenerateSliceError, rmld_certify, rmld_formula, star_origin_check
from .toric import all_gluings, binomial_polys, pair_ring, tfp_kernel_check, tree_binomials
from .trees import TreeError, enumerate_topologies, glue, load_tree

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_IO, EXIT_RESOURCE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _emit(obj, fmt, out):
    if fmt == "json":
        out.write(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    elif fmt == "csv":
        rows = obj if isinstance(obj, list) else [obj]
        if not rows:
            return
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
        out.write(buf.getvalue())
    else:
        rows = obj if isinstance(obj, list) else [obj]
        for r in rows:
            out.write(" ".join(f"{k}={v}" for k, v in r.items()) + "\n")


def _primes(args):
    if args.rational:
        return None
    return args.prime if args.prime else [P1, P2]


def cmd_rmld(args, out):
    t = load_tree(args.tree)
    value = rmld_formula(t)
    if args.format == "text":
        out.write(f"{value}\n")
    else:
        _emit({"tree": t.newick(), "rmld": value, "seed": args.seed}, args.format, out)
    return EXIT_OK


def cmd_certify(args, out):
    t = load_tree(args.tree)
    primes = _primes(args)
    rep = rmld_certify(
        t,
        seed=args.seed,
        primes=primes or (P1,),
        rational=primes is None,
        max_pairs=args.max_pairs,
        max_leaves=args.max_leaves,
    )
    d = rep.to_dict(timing=not args.no_timing)
    d["seed"] = args.seed
    if args.format == "text":
        out.write(
            f"tree={rep.newick} certified={rep.certified_degree} formula={rep.formula_value} "
            f"match={str(rep.match).lower()} degrees={rep.degrees} seed={args.seed}\n"
        )
    elif args.format == "csv":
        rows = [dict(tree=rep.newick, formula=rep.formula_value, **r) for r in d["runs"]]
        _emit(rows, "csv", out)
    else:
        _emit(d, "json", out)
    return EXIT_OK if rep.match else EXIT_MISMATCH


def cmd_matrices(args, out):
    t = load_tree(args.tree)
    mats = {"A": build_design_A(t), "B": build_path_B(t), "Bstar": build_path_B(t, starred=True)}
    which = list(mats) if args.which == "all" else [args.which]
    if args.format == "json":
        _emit({"tree": t.newick(), "seed": args.seed, **{k: mats[k].to_dict() for k in which}}, "json", out)
    else:
        for k in which:
            if len(which) > 1:
                out.write(f"# {k}\n")
            out.write(mats[k].to_csv())
    return EXIT_OK


def cmd_ideal(args, out):
    t = load_tree(args.tree)
    ring = pair_ring(t, QQ)
    polys = [str(p) for p in binomial_polys(tree_binomials(t), ring)]
    if args.format == "json":
        _emit({"tree": t.newick(), "seed": args.seed, "variables": list(ring.names), "generators": polys}, "json", out)
    else:
        for p in polys:
            out.write(p + "\n")
    return EXIT_OK


def cmd_fit(args, out):
    t = load_tree(args.tree)
    s = read_covariance_csv(args.covariance)
    fit = newton_fit(t, s, tol=args.tol, max_iter=args.max_iter)
    d = fit.to_dict()
    d["seed"] = args.seed
    if args.format == "text":
        t_str = ",".join(f"{v}:{x:.12g}" for v, x in fit.t.items())
        out.write(
            f"t={t_str} objective={fit.objective:.15g} residual={fit.residual:.3e} "
            f"iterations={fit.iterations} converged={str(fit.converged).lower()} seed={args.seed}\n"
        )
    else:
        _emit(d, args.format, out)
    return EXIT_OK if fit.converged else EXIT_MISMATCH


def _tfp_row(g, args, cache):
    rep = tfp_kernel_check(g, ideal_check_max_leaves=args.ideal_max_leaves)
    row = rep.to_dict()
    if not args.no_degrees:
        from .rmld import certified_degree

        def cert(t):
            key = t.newick()
            if key not in cache:
                cache[key] = certified_degree(t, seed=args.seed, prime=(args.prime or [P1])[0], max_pairs=args.max_pairs)
            return cache[key]

        dg, dp, ds = cert(g.tree), cert(g.t_prime), cert(g.star)
        row.update(certified_glued=dg, certified_t_prime=dp, certified_star=ds, multiplicative=dg == dp * ds)
    row["seed"] = args.seed
    ok = rep.passed and row.get("multiplicative", True)
    return row, ok


def cmd_check_tfp(args, out):
    if args.tree:
        if args.leaf is None or args.m is None:
            raise UsageError("check-tfp TREE needs LEAF and M")
        gluings = [glue(load_tree(args.tree), args.leaf, args.m)]
    else:
        gluings = all_gluings(args.max_leaves)
    cache = {}
    rows, ok = [], True
    for g in gluings:
        row, good = _tfp_row(g, args, cache)
        rows.append(row)
        ok &= good
    _emit(rows if len(rows) != 1 or not args.tree else rows[0], args.format, out)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_enumerate(args, out):
    trees = enumerate_topologies(args.max_leaves, labeled=args.labeled)
    primes = _primes(args)
    rows, ok = [], True
    for t in trees:
        start = time.perf_counter()
        rep = rmld_certify(
            t, seed=args.seed, primes=primes or (P1,), rational=primes is None,
            max_pairs=args.max_pairs, max_leaves=args.max_leaves,
        )
        row = {
            "tree": rep.newick,
            "leaves": t.n + 1,
            "formula": rep.formula_value,
            "certified": rep.certified_degree,
            "degrees": rep.degrees,
            "match": rep.match,
            "seed": args.seed,
        }
        if not args.no_timing:
            row["seconds"] = round(time.perf_counter() - start, 3)
        rows.append(row)
        ok &= rep.match
    _emit(rows, args.format, out)
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_star_origin(args, out):
    res = star_origin_check(args.n, prime=None if args.rational else (args.prime or [P1])[0], max_pairs=args.max_pairs)
    if args.format == "text":
        out.write(f"{str(res).lower()}\n")
    else:
        _emit({"n": args.n, "origin_only": res, "seed": args.seed}, args.format, out)
    return EXIT_OK if res else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--prime", type=int, action="append", help="field characteristic (repeatable)")
    common.add_argument("--rational", action="store_true", help="compute over Q instead of F_p")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--max-iter", type=int, default=100)
    common.add_argument("--max-pairs", type=int, default=None, help="Buchberger pair-reduction cap")
    common.add_argument("--format", choices=["text", "json", "csv"], default="text")
    common.add_argument("--no-timing", action="store_true", help="omit timings for byte-stable output")

    p = argparse.ArgumentParser(prog="bmt-rmld", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rmld", parents=[common], help="closed-form reciprocal ML-degree")
    s.add_argument("tree")
    s.set_defaults(func=cmd_rmld)

    s = sub.add_parser("certify", parents=[common], help="Groebner certification of the degree")
    s.add_argument("tree")
    s.add_argument("--max-leaves", type=int, default=7)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("matrices", parents=[common], help="export A_T, B_T, B_T*")
    s.add_argument("tree")
    s.add_argument("--which", choices=["A", "B", "Bstar", "all"], default="all")
    s.set_defaults(func=cmd_matrices)

    s = sub.add_parser("ideal", parents=[common], help="quartet binomial generators")
    s.add_argument("tree")
    s.set_defaults(func=cmd_ideal)

    s = sub.add_parser("fit", parents=[common], help="reciprocal MLE from a CSV covariance")
    s.add_argument("tree")
    s.add_argument("covariance")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("check-tfp", parents=[common], help="toric fiber product checks")
    s.add_argument("tree", nargs="?")
    s.add_argument("leaf", nargs="?", type=int)
    s.add_argument("m", nargs="?", type=int)
    s.add_argument("--max-leaves", type=int, default=6)
    s.add_argument("--ideal-max-leaves", type=int, default=7)
    s.add_argument("--no-degrees", action="store_true", help="skip degree multiplicativity")
    s.set_defaults(func=cmd_check_tfp)

    s = sub.add_parser("enumerate", parents=[common], help="formula vs certified degree over all topologies")
    s.add_argument("--max-leaves", type=int, default=6)
    s.add_argument("--labeled", action="store_true", help="every leaf labelling, not one per shape")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("star-origin", parents=[common], help="origin-only intersection for the star tree")
    s.add_argument("n", type=int)
    s.set_defaults(func=cmd_star_origin)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (UsageError, TreeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, UnicodeDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GroebnerResourceError, DegenerateSliceError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, NotPositiveDefiniteError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()

"""Command line interface.

Node indices on the command line are 1-based.  Exit status is 0 on success,
2 for an unreadable or inadmissible model, 3 for a numerical failure.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from .acyclic import bound_sweep, sigma_acyclic, variance_lower_bound
from .exceptions import LyapTrekError, ModelError, NumericalError
from .lyapunov import solve_lyapunov
from .modelfile import dumps_model, cyclic_example, factor_model_file, path_model_file, read_model, write_model
from .series import d_coefficient, sigma_series
from .treks import enumerate_base_treks, trek_table, trek_weight
from .graph import from_matrices

EXIT_OK, EXIT_MODEL, EXIT_NUMERIC = 0, 2, 3


def _fmt(x, places=8):
    return f"{x:.{places}f}"


def _print_matrix(S, out):
    cells = [[_fmt(v) for v in row] for row in S]
    width = max(len(c) for row in cells for c in row)
    for row in cells:
        out.write("  ".join(c.rjust(width) for c in row) + "\n")


def cmd_solve(args, out):
    model = read_model(args.model)
    extra = {}
    if args.method == "kron":
        S = solve_lyapunov(model.M, model.C).sigma
    elif args.method == "series":
        res = sigma_series(model.M, model.C, tol=args.tol)
        S = res.sigma
        extra = {"terms_used": res.terms_used, "tail_bound": res.tail_bound, "scale_applied": res.scale_applied}
    else:
        S = sigma_acyclic(model.M, model.C, tol=args.tol)
    if args.format == "json":
        out.write(json.dumps({"method": args.method, "sigma": S.tolist(), **extra}) + "\n")
    elif args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerows([repr(float(v)) for v in row] for row in S)
        for key, value in extra.items():
            out.write(f"# {key}={value!r}\n")
    else:
        _print_matrix(S, out)
        for key, value in extra.items():
            out.write(f"{key}: {value}\n")
    return EXIT_OK


def _trek_rows(M, C, i, j, max_len, tol):
    """``(trek, omega, factors, l, n, term)`` for every base trek, any negative diagonal."""
    if np.all(np.diag(M) == -1.0):
        return trek_table(M, C, i, j, max_len, exact=True)
    treks = enumerate_base_treks(from_matrices(M, C), i, j, max_len)
    lambdas = np.diag(M) + 1.0
    each = tol / max(len(treks), 1)
    rows = []
    for t in treks:
        i0, j0 = t.top
        factors = [M[b, a] for a, b in t.directed_edges()]
        factors = tuple(factors[: t.n] + [C[i0, j0]] + factors[t.n:])
        w = trek_weight(M, C, t)
        rows.append((t, w, factors, t.l, t.n, math.ldexp(d_coefficient(lambdas, t, each), -t.l - 1) * w))
    return rows


def cmd_treks(args, out):
    model = read_model(args.model)
    rows = _trek_rows(model.M, model.C, args.source, args.target, args.max_len, args.tol)
    total = math.fsum(r[5] for r in rows)
    if not args.table:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["trek", "omega", "l", "n", "term"])
        for t, w, _, l, n, term in rows:  # noqa: E741
            writer.writerow([str(t), repr(w), l, n, repr(term)])
        return EXIT_OK
    header = ("trek", "omega", "factorization", "l", "n", "term")
    body = [
        (str(t), _fmt(w), " * ".join(repr(float(f)) for f in factors), str(l), str(n), _fmt(term))
        for t, w, factors, l, n, term in rows  # noqa: E741
    ]
    widths = [max(len(r[k]) for r in [header, *body]) for k in range(len(header))]
    line = lambda cells: "  ".join(c.ljust(wd) if k < 3 else c.rjust(wd) for k, (c, wd) in enumerate(zip(cells, widths)))  # noqa: E731
    out.write(line(header).rstrip() + "\n")
    out.write("-" * (sum(widths) + 2 * (len(widths) - 1)) + "\n")
    for r in body:
        out.write(line(r).rstrip() + "\n")
    out.write(f"total ({len(rows)} treks): {_fmt(total)}\n")
    return EXIT_OK


def cmd_bound(args, out):
    model = read_model(args.model)
    if args.sweep:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["d", "sigma_dd", "bound"])
        for k, s, b in bound_sweep(model.M, model.C):
            writer.writerow([k, repr(s), repr(b)])
        return EXIT_OK
    bound = variance_lower_bound(model.M, model.C)
    s_dd = float(solve_lyapunov(model.M, model.C).sigma[-1, -1])
    out.write(f"sigma_dd: {_fmt(s_dd, 12)}\nbound:    {_fmt(bound, 12)}\nslack:    {_fmt(s_dd - bound, 12)}\n")
    return EXIT_OK


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ModelError(f"not a comma-separated list of numbers: {text!r}") from exc


def cmd_gen(args, out):
    if args.kind == "example13":
        model = cyclic_example()
    elif args.kind == "path":
        if args.d is None or args.d < 1:
            raise ModelError("path model needs --d >= 1")
        if args.gamma < 0:
            raise ModelError("gamma must be nonnegative")
        model = path_model_file(args.d, args.zeta, args.gamma)
    else:
        if args.m_diag is None or args.loadings is None or args.c_diag is None:
            raise ModelError("factor model needs --m-diag, --loadings and --c-diag")
        m, a, c = _float_list(args.m_diag), _float_list(args.loadings), _float_list(args.c_diag)
        if any(v < 0 for v in c):
            raise ModelError("c_diag must be nonnegative")
        model = factor_model_file(m, a, c)
    if args.out:
        write_model(model, args.out)
    else:
        out.write(dumps_model(model) + "\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="lyaptrek", description="Stationary covariances of linear SDEs via Lyapunov solves and trek sums.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve for the stationary covariance")
    s.add_argument("model")
    s.add_argument("--method", choices=("kron", "series", "acyclic"), default="kron")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--format", choices=("json", "csv", "pretty"), default="pretty")
    s.set_defaults(func=cmd_solve)

    t = sub.add_parser("treks", help="list base treks between two nodes (1-based)")
    t.add_argument("model")
    t.add_argument("--from", dest="source", type=int, required=True)
    t.add_argument("--to", dest="target", type=int, required=True)
    t.add_argument("--max-len", type=int, required=True)
    t.add_argument("--table", action="store_true", help="pretty table instead of csv")
    t.add_argument("--tol", type=float, default=1e-12)
    t.set_defaults(func=cmd_treks)

    b = sub.add_parser("bound", help="lower bound on the last marginal variance")
    b.add_argument("model")
    b.add_argument("--sweep", action="store_true", help="csv of (d, sigma_dd, bound) over leading sub-models")
    b.set_defaults(func=cmd_bound)

    g = sub.add_parser("gen", help="write a stock model file")
    g.add_argument("kind", choices=("path", "factor", "example13"))
    g.add_argument("--d", type=int)
    g.add_argument("--zeta", type=float, default=1.0)
    g.add_argument("--gamma", type=float, default=1.0)
    g.add_argument("--m-diag")
    g.add_argument("--loadings")
    g.add_argument("--c-diag")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except NumericalError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_NUMERIC
    except (ModelError, LyapTrekError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())


def main_entry():
    sys.exit(main())

"""Command-line front end.

Every subcommand writes JSON (default) or CSV to stdout or ``--output``.
Exit status: 0 on success, 1 when a verification fails or a computation
breaks down, 2 on invalid flags or parameters outside an operation's domain.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bvp, fracops, green, lyapunov, special, verify
from .errors import DomainError, KPrabhakarError
from .fracops import Interval, SampledFunction
from .serialize import csv_text, dumps, format_float
from .special import OperatorParams

TOL_ENV = "KPRABHAKAR_TOL"

_EXPR_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh", "tanh",
                 "arcsin", "arccos", "arctan", "pi", "e", "ones_like", "zeros_like", "where",
                 "minimum", "maximum")
}

_PARAM_HELP = (
    "Operator parameters: --k > 0 (deformation), --rho > 0, --beta > 0, --gamma "
    "(Prabhakar exponent, default 0), --omega (ML argument scale, default 0); "
    "--classical sets (1, 1, 2, 0, 0)."
)
_BVP_HELP = (
    "Boundary-value gate: requires 1 < beta/k <= 2, omega >= 0 and gamma >= 0 "
    "on an interval a < b."
)


class UsageError(Exception):
    """Raised for flag combinations argparse cannot express."""


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw.strip() == "":
        return special.DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError as exc:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from exc
    if not (value > 0.0 and math.isfinite(value)):
        raise UsageError(f"{TOL_ENV} must be positive, got {raw!r}")
    return value


def _add_params(p: argparse.ArgumentParser, *, omega: bool = True) -> None:
    g = p.add_argument_group("operator parameters", _PARAM_HELP)
    g.add_argument("--k", type=float, help="deformation parameter k > 0")
    g.add_argument("--rho", type=float, help="inner exponent scale rho > 0")
    g.add_argument("--beta", type=float, help="order parameter beta > 0 (order is beta/k)")
    g.add_argument("--gamma", type=float, default=None, help="Prabhakar exponent gamma (default 0)")
    if omega:
        g.add_argument("--omega", type=float, default=None, help="ML argument scale omega (default 0)")
    g.add_argument("--classical", action="store_true", help="use (k, rho, beta, gamma, omega) = (1, 1, 2, 0, 0)")


def _add_interval(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("interval")
    g.add_argument("--a", type=float, default=0.0, help="left endpoint (default 0)")
    g.add_argument("--b", type=float, default=1.0, help="right endpoint, b > a (default 1)")


def _add_common(p: argparse.ArgumentParser, *, n_default: int | None = None) -> None:
    g = p.add_argument_group("numerics and output")
    g.add_argument("--tol", type=float, default=None,
                   help=f"series truncation tolerance (default 1e-14, or ${TOL_ENV})")
    if n_default is not None:
        g.add_argument("--n", type=int, default=n_default,
                       help=f"grid cells on [a, b] (default {n_default})")
    g.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    g.add_argument("--threads", type=int, default=1,
                   help="worker threads for grid scans (default 1, reproducible)")


def _params(args) -> OperatorParams:
    if args.classical:
        given = [name for name in ("k", "rho", "beta", "gamma", "omega")
                 if getattr(args, name, None) is not None]
        if given:
            raise UsageError(f"--classical cannot be combined with --{', --'.join(given)}")
        return OperatorParams.classical()
    missing = [name for name in ("k", "rho", "beta") if getattr(args, name) is None]
    if missing:
        raise UsageError(f"missing --{', --'.join(missing)} (or pass --classical)")
    gamma = 0.0 if args.gamma is None else args.gamma
    omega = 0.0 if getattr(args, "omega", None) is None else args.omega
    return OperatorParams(args.k, args.rho, args.beta, gamma, omega)


def _tol(args) -> float:
    tol = default_tol() if args.tol is None else args.tol
    if not (tol > 0.0 and math.isfinite(tol)):
        raise UsageError(f"--tol must be positive, got {tol!r}")
    return tol


def _interval(args) -> Interval:
    return Interval(args.a, args.b)


def _sampled(source: str, iv: Interval, n: int, flag: str) -> SampledFunction:
    """A function given as an expression in ``t`` or as a CSV file with columns ``t,value``."""
    path = Path(source)
    if source.lower().endswith(".csv") or path.is_file():
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except (OSError, ValueError) as exc:
            raise UsageError(f"{flag}: cannot read {source!r}: {exc}") from exc
        if data.shape[1] < 2:
            raise UsageError(f"{flag}: {source!r} needs two columns t,value")
        t, v = data[:, 0], data[:, 1]
        grid = Interval(float(t[0]), float(t[-1])).grid(t.shape[0] - 1) if t.shape[0] > 1 else t
        slack = 1e-9 * iv.length
        if (abs(t[0] - iv.a) > slack or abs(t[-1] - iv.b) > slack
                or np.max(np.abs(grid - t)) > slack):
            raise DomainError(f"{flag}: {source!r} is not a uniform grid on [{iv.a!r}, {iv.b!r}]")
        return SampledFunction(iv, v)
    t = iv.grid(n)
    try:
        values = eval(source, {"__builtins__": {}}, {**_EXPR_NAMES, "t": t})  # noqa: S307
    except Exception as exc:  # any failure in user text is a usage error
        raise UsageError(f"{flag}: cannot evaluate {source!r}: {exc}") from exc
    return SampledFunction(iv, np.broadcast_to(np.asarray(values, dtype=np.float64), t.shape))


def _table(header, columns, fmt):
    if fmt == "csv":
        return csv_text(header, columns)
    return dumps({name: np.asarray(col, dtype=np.float64) for name, col in zip(header, columns)})


def _record(data: dict, fmt: str) -> str:
    if fmt == "csv":
        keys = list(data)
        vals = []
        for key in keys:
            v = data[key]
            if isinstance(v, (bool, np.bool_)):
                vals.append("true" if v else "false")
            elif isinstance(v, (float, np.floating)):
                vals.append(format_float(v))
            else:
                vals.append(str(v))
        return ",".join(keys) + "\n" + ",".join(vals) + "\n"
    return dumps(data)


# subcommand handlers return (text, exit_code)

def cmd_ml(args):
    p = _params(args)
    res = special.ml_k(p, args.z, _tol(args))
    return _record({"value": res.value, "terms_used": res.terms_used,
                    "tail_bound": res.tail_bound}, args.format), 0


def cmd_gammak(args):
    if args.poch is not None:
        value = special.k_pochhammer(args.x, args.poch, args.k)
        return _record({"pochhammer": value}, args.format), 0
    return _record({"value": special.k_gamma(args.x, args.k)}, args.format), 0


def cmd_kernel(args):
    p = _params(args)
    tol = _tol(args)
    if args.t is not None:
        return _record({"t": args.t, "value": fracops.prabhakar_kernel(p, args.t, tol)},
                       args.format), 0
    iv = _interval(args)
    t = iv.grid(args.n)
    vals = [fracops.prabhakar_kernel(p, float(x - iv.a), tol) for x in t]
    return _table(["t", "kernel"], [t, vals], args.format), 0


def cmd_integral(args):
    p = _params(args)
    iv = _interval(args)
    tol = _tol(args)
    f = _sampled(args.f, iv, args.n, "--f")
    if args.x is not None:
        value = fracops.prabhakar_integral(p, f, args.x, args.subdiv, tol)
        return _record({"x": args.x, "value": value}, args.format), 0
    vals = fracops.integral_at_nodes(p, f, args.subdiv, tol)
    return _table(["t", "integral"], [f.nodes, vals], args.format), 0


def cmd_derivative(args):
    p = _params(args)
    iv = _interval(args)
    tol = _tol(args)
    f = _sampled(args.f, iv, args.n, "--f")
    if args.x is not None:
        value = fracops.prabhakar_derivative(p, f, args.x, args.subdiv, tol,
                                             homogeneous=args.homogeneous)
        return _record({"x": args.x, "value": value}, args.format), 0
    idx, vals = fracops.derivative_at_nodes(p, f, args.subdiv, tol, homogeneous=args.homogeneous)
    return _table(["t", "derivative"], [f.nodes[idx], vals], args.format), 0


def cmd_laplace(args):
    p = _params(args)
    c = fracops.laplace_numeric(p, args.s, args.horizon, args.subdiv, _tol(args))
    return _record({
        "s": c.s, "numeric": c.numeric, "closed_form": c.closed_form,
        "relative_error": c.relative_error, "convergence_margin": c.convergence_margin,
        "tail_bound": c.tail_bound, "horizon": c.horizon, "subdiv": c.subdiv,
        "slow_convergence": c.slow_convergence,
    }, args.format), 0


def cmd_green(args):
    p = _params(args)
    iv = _interval(args)
    tol = _tol(args)
    value = green.green_eval(p, iv, args.t, args.u, tol, allow_signs=args.allow_signs)
    return _record({"t": args.t, "u": args.u, "G": value}, args.format), 0


def cmd_green_scan(args):
    p = _params(args)
    iv = _interval(args)
    tol = _tol(args)
    g = green.green_scan(p, iv, args.n, tol, threads=args.threads, allow_signs=args.allow_signs)
    if args.format == "csv":
        return g.to_csv(), 0
    loc, value = green.green_max_closed_form(p, iv, tol, allow_signs=args.allow_signs)
    nodes = g.nodes
    return dumps({
        "n": g.n,
        "min_entry": g.min_entry,
        "nonnegative": bool(g.min_entry >= -green.ZERO_FLOOR),
        "positivity_checked": g.positivity_checked,
        "max_column_offset": int(g.column_offsets().max()),
        "diagonal_argmax": float(nodes[g.diag_argmax]),
        "grid_max": g.grid_max,
        "closed_form_location": loc,
        "closed_form_max": value,
        "max_relative_error": abs(g.grid_max - value) / value,
    }), 0


def cmd_bound(args):
    p = _params(args)
    iv = _interval(args)
    tol = _tol(args)
    bound = lyapunov.lyapunov_bound(p, iv, tol)
    loc, value = green.green_max_closed_form(p, iv, tol)
    return _record({"bound": bound, "green_max": value, "green_max_location": loc},
                   args.format), 0


def cmd_certify(args):
    p = _params(args)
    iv = _interval(args)
    q = _sampled(args.q, iv, args.n, "--q")
    return _record(lyapunov.certify(p, iv, q, _tol(args)).to_dict(), args.format), 0


def cmd_eigen(args):
    p = _params(args)
    iv = _interval(args)
    tol = _tol(args)
    q = _sampled(args.q, iv, args.n, "--q")
    system = bvp.assemble(p, iv, q, args.n, tol, threads=args.threads, rule=args.rule)
    rep = bvp.spectral_radius(system, args.max_iter)
    if args.format == "csv":
        return rep.eigenvector_csv(), 0 if rep.converged else 1
    return dumps(rep.to_dict()), 0 if rep.converged else 1


def cmd_critical_q(args):
    p = _params(args)
    iv = _interval(args)
    rep = bvp.critical_report(p, iv, args.n, _tol(args), threads=args.threads, rule=args.rule)
    return _record(rep.to_dict(), args.format), 0


def cmd_verify_all(args):
    report = verify.run_all(threads=args.threads)
    text = dumps(report)
    if not report["passed"]:
        print("violations: " + ",".join(report["violations"]), file=sys.stderr)
    return text, 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kprabhakar",
        description="k-Prabhakar operators, Green's function and Lyapunov-type bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ml", help="k-Mittag-Leffler function at z",
                       description="Evaluate E^gamma_{k,rho,beta}(z); omega is not used.")
    _add_params(p, omega=False)
    p.add_argument("--z", type=float, required=True, help="argument z (any real)")
    _add_common(p)
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("gammak", help="k-Gamma function or Pochhammer k-symbol",
                       description="Gamma_k(x) for x > 0, k > 0; with --poch N, (x)_{N,k}.")
    p.add_argument("--x", type=float, required=True, help="argument x > 0 (or g >= 0 with --poch)")
    p.add_argument("--k", type=float, required=True, help="k > 0")
    p.add_argument("--poch", type=int, default=None, help="return the Pochhammer k-symbol (x)_{N,k}")
    _add_common(p)
    p.set_defaults(func=cmd_gammak)

    p = sub.add_parser("kernel", help="Prabhakar kernel at t or on a grid",
                       description="t^(beta/k-1)/k E(omega t^(rho/k)) for t > 0, 0 otherwise. "
                                   "Without --t, tabulates the kernel at t - a on the grid.")
    _add_params(p)
    _add_interval(p)
    p.add_argument("--t", type=float, default=None, help="kernel argument (same units as a, b)")
    _add_common(p, n_default=64)
    p.set_defaults(func=cmd_kernel)

    for name, fn, what in (("integral", cmd_integral, "k-Prabhakar integral P f"),
                           ("derivative", cmd_derivative, "k-Prabhakar derivative D f")):
        p = sub.add_parser(name, help=what,
                           description=f"{what} with lower terminal a. --f is an expression in t "
                                       "(numpy functions allowed) or a CSV file t,value on a "
                                       "uniform grid of [a, b]. Without --x, every node is reported.")
        _add_params(p)
        _add_interval(p)
        p.add_argument("--f", required=True, help="expression in t or CSV file")
        p.add_argument("--x", type=float, default=None, help="evaluation point in [a, b]")
        p.add_argument("--subdiv", type=int, default=1, help="quadratic refinement factor (default 1)")
        if name == "derivative":
            p.add_argument("--homogeneous", action="store_true",
                           help="correct for powers carried by boundary-value solutions")
        _add_common(p, n_default=128)
        p.set_defaults(func=fn)

    p = sub.add_parser("laplace-check", help="numeric vs closed-form Laplace transform of the kernel",
                       description="Requires |omega k (k s)^(-rho/k)| < 1; margins >= 0.5 are flagged.")
    _add_params(p)
    p.add_argument("--s", type=float, required=True, help="Laplace variable s > 0")
    p.add_argument("--horizon", type=float, default=None, help="truncation point (default 40/(s - s0))")
    p.add_argument("--subdiv", type=int, default=None, help="cells on [0, horizon] (default automatic)")
    _add_common(p)
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("green", help="Green's function G(t, u)", description=_BVP_HELP)
    _add_params(p)
    _add_interval(p)
    p.add_argument("--t", type=float, required=True, help="t in [a, b]")
    p.add_argument("--u", type=float, required=True, help="u in [a, b]")
    p.add_argument("--allow-signs", action="store_true", help="accept omega < 0 or gamma < 0")
    _add_common(p)
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("green-scan", help="G on an (n+1)^2 grid with extremal statistics",
                       description=_BVP_HELP + " CSV output lists t,u,G row by row.")
    _add_params(p)
    _add_interval(p)
    p.add_argument("--allow-signs", action="store_true",
                   help="accept omega < 0 or gamma < 0 (positivity then unchecked)")
    _add_common(p, n_default=128)
    p.set_defaults(func=cmd_green_scan)

    p = sub.add_parser("bound", help="Lyapunov-type bound", description=_BVP_HELP)
    _add_params(p)
    _add_interval(p)
    _add_common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("certify", help="nonexistence certificate for a potential q",
                       description=_BVP_HELP + " --q is an expression in t or a CSV file t,value.")
    _add_params(p)
    _add_interval(p)
    p.add_argument("--q", required=True, help="potential q: expression in t or CSV file")
    _add_common(p, n_default=128)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("eigen", help="dominant eigenvalue of the Nyström matrix",
                       description=_BVP_HELP + " n must be even, 16 <= n <= 512.")
    _add_params(p)
    _add_interval(p)
    p.add_argument("--q", default="1", help="potential q (default 1)")
    p.add_argument("--rule", choices=bvp.RULES, default="simpson", help="quadrature rule")
    p.add_argument("--max-iter", type=int, default=10_000, help="power iteration cap")
    _add_common(p, n_default=128)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("critical-q", help="smallest constant q admitting a nontrivial solution",
                       description=_BVP_HELP + " n must be even, 16 <= n <= 512.")
    _add_params(p)
    _add_interval(p)
    p.add_argument("--rule", choices=bvp.RULES, default="simpson", help="quadrature rule")
    _add_common(p, n_default=128)
    p.set_defaults(func=cmd_critical_q)

    p = sub.add_parser("verify-all", help="run the full property sweep",
                       description="Writes a JSON report; exits 1 and lists violated checks "
                                   "on stderr if any fails.")
    p.add_argument("--output", "-o", default=None, help="write the report to this file")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for grid scans (default 1, reproducible)")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, code = args.func(args)
    except UsageError as exc:
        print(f"kprabhakar {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"kprabhakar {args.command}: domain error: {exc}", file=sys.stderr)
        return 2
    except KPrabhakarError as exc:
        print(f"kprabhakar {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

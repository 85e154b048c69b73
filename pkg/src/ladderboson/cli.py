"""Command-line front end.

Every subcommand writes CSV or JSON once, atomically, to ``--out`` or stdout.
Floats are printed with 17 significant digits so identical runs produce
identical bytes.  Exit codes: 0 success, 1 usage or invalid input,
2 numerical failure (including a failed ``validate`` suite).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from typing import Sequence

from .errors import DomainError, NumericalFailure, ResourceLimitError
from .models import ModelSpec, beta_sequence
from .pump import evolve_ensemble, fidelity_vs_parametric, max_subspace_index, truncate_pump
from .reference import parametric_error_report
from .series import DEFAULT_THETA, build_gtable, evaluate_gamma

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_json(obj) -> str:
    """Deterministic JSON with fixed float formatting; non-finite floats become null."""
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if hasattr(obj, "tolist"):
        return to_json(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_csv(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def write_output(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ladderboson-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _model(args) -> ModelSpec:
    if not args.k:
        raise UsageError("--k is required (repeat it once per signal mode)")
    return ModelSpec(args.m, tuple(args.k))


def _subspace(args, model):
    if args.M is None:
        raise UsageError("--M is required")
    ell = args.ell if args.ell else [0] * model.S
    return model.subspace(args.M, tuple(ell))


def _require(args, name):
    if getattr(args, name) is None:
        raise UsageError(f"--{name.replace('_', '-')} is required")
    return getattr(args, name)


def _model_record(model):
    return {"m": model.m, "k": list(model.signal_powers)}


def _subspace_record(model, sub):
    return {"M": sub.M, "ell": list(sub.offsets), "N": model.top_index(sub)}


def cmd_betas(args) -> str:
    model = _model(args)
    sub = _subspace(args, model)
    beta = beta_sequence(model, sub)
    if args.format == "csv":
        return to_csv(["n", "beta_n"], enumerate(beta.values))
    return to_json(
        {"model": _model_record(model), "subspace": _subspace_record(model, sub), "beta": list(beta.values)}
    ) + "\n"


def cmd_gtable(args) -> str:
    model = _model(args)
    sub = _subspace(args, model)
    depth = _require(args, "depth")
    if depth < 0:
        raise UsageError("--depth must be non-negative")
    table = build_gtable(beta_sequence(model, sub), depth)
    rows = table.rows()
    if args.format == "csv":
        return to_csv(["l", "n", "g"], ((l, n, v) for l, row in enumerate(rows) for n, v in enumerate(row)))
    return to_json(
        {"model": _model_record(model), "subspace": _subspace_record(model, sub), "depth": depth, "g": rows}
    ) + "\n"


def _check_common(args):
    if args.eps is not None and not args.eps > 0:
        raise UsageError("--eps must be positive")
    if not 0 < args.weight_eps < 1:
        raise UsageError("--weight-eps must lie strictly between 0 and 1")
    if args.theta is not None and not args.theta > 0:
        raise UsageError("--theta must be positive")


def cmd_evolve(args) -> str:
    model = _model(args)
    sub = _subspace(args, model)
    tau = _require(args, "tau")
    beta = beta_sequence(model, sub)
    st = evaluate_gamma(beta, tau, args.eps, theta=args.theta, fallback=args.fallback)
    if args.format == "csv":
        return to_csv(
            ["n", "gamma", "psi_re", "psi_im"],
            ((n, float(g), float(p.real), float(p.imag)) for n, (g, p) in enumerate(zip(st.gamma, st.psi))),
        )
    return to_json(
        {
            "model": _model_record(model),
            "subspace": _subspace_record(model, sub),
            "tau": float(tau),
            "method": st.method,
            "terms_used": [int(t) for t in st.terms_used],
            "gamma": [float(g) for g in st.gamma],
            "psi": {"re": [float(p.real) for p in st.psi], "im": [float(p.imag) for p in st.psi]},
            "norm": st.norm,
            "tail_estimate": float(st.tail_estimate),
        }
    ) + "\n"


def cmd_pump(args) -> str:
    model = _model(args)
    alpha = _require(args, "alpha")
    tau = _require(args, "tau")
    if any(args.ell or []):
        raise UsageError("a coherent pump with vacuum signal only populates ell = 0")
    cap = None if args.max_dim is None else args.max_dim - 1
    ens = truncate_pump(alpha, args.weight_eps, max_N=cap)
    report = evolve_ensemble(
        ens, model, tau, args.eps, theta=args.theta, fallback=args.fallback, workers=args.workers
    )
    fidelity = None
    if model.m == 1 and model.signal_powers == (2,):
        fidelity = fidelity_vs_parametric(ens, tau, args.eps, model=model, report=report)
    record = {
        "model": _model_record(model),
        "alpha": float(alpha),
        "tau": float(tau),
        "weight_eps": float(args.weight_eps),
        "window": {"N_min": ens.pump_numbers[0], "N_max": ens.pump_numbers[-1], "count": len(ens.pump_numbers)},
        "retained_mass": report.retained_mass,
        "signal_mean": list(report.signal_mean),
        "pump_mean": report.pump_mean,
        "norm": report.norm,
        "fidelity_vs_parametric": fidelity,
    }
    if args.format == "csv":
        rows = [("retained_mass", report.retained_mass), ("pump_mean", report.pump_mean), ("norm", report.norm)]
        rows += [(f"signal_mean_{s}", v) for s, v in enumerate(report.signal_mean)]
        if fidelity is not None:
            rows.append(("fidelity_vs_parametric", fidelity))
        return to_csv(["quantity", "value"], rows)
    return to_json(record) + "\n"


def cmd_compare_parametric(args) -> str:
    alpha = _require(args, "alpha")
    if args.r is None and args.tau is None:
        raise UsageError("give --r or --tau")
    r = args.r if args.r is not None else 2.0 * alpha * args.tau
    cap = max_subspace_index(None if args.max_dim is None else args.max_dim - 1)
    rep = parametric_error_report(alpha, r, args.threshold, n_max=args.n_max, max_N=cap)
    rows = [(n, float(e), float(p), float(x)) for n, e, p, x in rep.rows()]
    if args.format == "csv":
        return to_csv(["n", "gamma_exact", "gamma_param", "rel_err"], rows)
    return to_json(
        {
            "alpha": float(alpha),
            "r": float(r),
            "N": rep.N,
            "threshold": float(args.threshold),
            "rows": [{"n": n, "gamma_exact": e, "gamma_param": p, "rel_err": x} for n, e, p, x in rows],
            "n_c_empirical": rep.n_c_empirical,
            "n_c_prediction": rep.n_c_prediction,
            "validity_scale": rep.validity_scale,
        }
    ) + "\n"


def cmd_validate(args):
    from .validation import run_suites

    results = run_suites(args.suite, args.tolerance)
    text = "".join(r.line() + "\n" for r in results)
    return text, all(r.passed for r in results)


def build_parser() -> argparse.ArgumentParser:
    from .validation import SUITES

    common = _Parser(add_help=False)
    common.add_argument("--m", type=int, default=1, help="pump power of the ladder operator")
    common.add_argument("--k", type=int, action="append", help="signal power; repeat per signal mode")
    common.add_argument("--M", type=int, help="pump photons of the top state")
    common.add_argument("--ell", type=int, action="append", help="signal offset; repeat per signal mode")
    common.add_argument("--tau", type=float)
    common.add_argument("--eps", type=float, default=1e-12, help="absolute amplitude accuracy")
    common.add_argument("--weight-eps", type=float, default=1e-12, help="discarded Poisson mass")
    common.add_argument("--theta", type=float, default=DEFAULT_THETA, help="cancellation threshold")
    common.add_argument("--fallback", choices=("propagator", "extended"), default="propagator")
    common.add_argument("--max-dim", type=int, help="largest subspace dimension (overrides LADDERBOSON_MAX_DIM)")
    common.add_argument("--format", choices=("csv", "json"), default="json")
    common.add_argument("--out", help="output file (default stdout)")

    parser = _Parser(prog="ladderboson", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("betas", parents=[common], help="squared ladder matrix elements")
    g = sub.add_parser("gtable", parents=[common], help="integer series coefficients")
    g.add_argument("--depth", type=int, default=4)
    sub.add_parser("evolve", parents=[common], help="evolve the top state of one subspace")
    p = sub.add_parser("pump", parents=[common], help="coherent-pump ensemble observables")
    p.add_argument("--alpha", type=float)
    p.add_argument("--workers", type=int, default=None)
    c = sub.add_parser("compare-parametric", parents=[common], help="exact vs squeezed-state coefficients")
    c.add_argument("--alpha", type=float)
    c.add_argument("--r", type=float, help="squeezing parameter (default 2 alpha tau)")
    c.add_argument("--threshold", type=float, default=1e-2, help="relative error defining the crossing n")
    c.add_argument("--n-max", type=int, default=20)
    v = sub.add_parser("validate", parents=[common], help="run the self-check suites")
    v.add_argument("--suite", action="append", choices=sorted(SUITES))
    v.add_argument("--tolerance", type=float, help="override every float tolerance")
    return parser


_COMMANDS = {
    "betas": cmd_betas,
    "gtable": cmd_gtable,
    "evolve": cmd_evolve,
    "pump": cmd_pump,
    "compare-parametric": cmd_compare_parametric,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _check_common(args)
        if args.command == "validate":
            text, ok = cmd_validate(args)
            write_output(text, args.out)
            return EXIT_OK if ok else EXIT_NUMERICAL
        write_output(_COMMANDS[args.command](args), args.out)
    except (UsageError, DomainError, ResourceLimitError) as exc:
        print(f"ladderboson {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"ladderboson {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

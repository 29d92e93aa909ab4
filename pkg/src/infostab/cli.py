"""Command-line front end.

    infostab entropy   --alpha -1 --p 0.5,0.25,0.25
    infostab defect    --alpha -1 --fn family:1,0:+1e-3sin --m 100 --h 1e-3
    infostab probe     --alpha -1 --margins 1e-2,1e-3,1e-4,1e-5
    infostab search    --alpha -1 --eps 1e-3
    infostab recursion --alpha -1 --kernel family:1,0 --n-max 8 --eps 1e-3

Every subcommand accepts --seed, --json PATH, --csv PATH and --quiet. The
JSON document has top-level keys ``manifest`` and ``result``; ``--json -``
writes it to stdout. Exit codes: 0 ok, 2 usage or domain error, 3 numeric
failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import re
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__, _kernels
from .analysis import SearchConfig, counterexample_search
from .defect import fe_defect_sup, scaling_exponent
from .domain import GridSpec, SimplexPoint, check_alpha
from .errors import (
    BudgetViolation,
    DomainViolation,
    EmptyGrid,
    SingularDesign,
    SlopeUndefined,
)
from .measures import (
    BasisPerturbed,
    Family,
    JParams,
    Sampled,
    SolutionParams,
    entropy_alpha,
    eval_J,
    params_from_fit,
)
from .recursive import EpsilonBudget, MeasureSequence, SimplexPerturbation, thm32_check

SCHEMA_VERSION = 1

_TERM = re.compile(r"([+-])\s*([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*\*?\s*sin(\d*)")


class UsageError(Exception):
    pass


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None
    if not vals:
        raise UsageError(f"empty {what}")
    return vals


def _sine_suffix(text: str) -> tuple:
    """Parse ``+1e-3sin-2e-4sin3`` into a theta tuple (index j -> sin(j pi x))."""
    pos, theta = 0, {}
    text = text.strip()
    for mt in _TERM.finditer(text):
        if mt.start() != pos:
            break
        sign = -1.0 if mt.group(1) == "-" else 1.0
        j = int(mt.group(3) or 1)
        if j < 1:
            raise UsageError("sine index must be >= 1")
        theta[j] = theta.get(j, 0.0) + sign * float(mt.group(2))
        pos = mt.end()
    if pos != len(text) or not theta:
        raise UsageError(f"cannot parse perturbation suffix {text!r}")
    out = [0.0] * max(theta)
    for j, v in theta.items():
        out[j - 1] = v
    return tuple(out)


def parse_function(spec: str, alpha: float):
    """Mini-grammar: ``family:c,d[:suffix]``, ``perturbed:c,d:t1,t2,...``, ``sampled:path``."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "sampled":
        if not rest:
            raise UsageError("sampled: needs a CSV path")
        return Sampled.from_csv(rest)
    if kind not in ("family", "perturbed"):
        raise UsageError(f"unknown function kind {kind!r}")
    parts = rest.split(":")
    cd = _floats(parts[0], "family parameters")
    if len(cd) != 2:
        raise UsageError("family parameters must be 'c,d'")
    base = Family(SolutionParams(cd[0], cd[1]), alpha)
    if len(parts) == 1:
        if kind == "perturbed":
            raise UsageError("perturbed: needs a coefficient list")
        return base
    if len(parts) > 2:
        raise UsageError(f"cannot parse function spec {spec!r}")
    suffix = parts[1].strip()
    if suffix.startswith(("+", "-")) and "sin" in suffix:
        theta = _sine_suffix(suffix)
    else:
        theta = tuple(_floats(suffix, "perturbation coefficients"))
    return BasisPerturbed(base, theta)


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def manifest(command: str, args: argparse.Namespace) -> dict:
    config = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("json", "csv", "quiet", "handler", "command")
    }
    return {
        "command": command,
        "config": config,
        "seed": args.seed,
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "backend": _kernels.backend_name(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def dumps(document: dict) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(_clean(document), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(args, command: str, result: dict, lines: Sequence[str]) -> None:
    doc = {"manifest": manifest(command, args), "result": result}
    if args.json == "-":
        sys.stdout.write(dumps(doc))
    else:
        if args.json:
            Path(args.json).write_text(dumps(doc), encoding="utf-8")
        if not args.quiet:
            for line in lines:
                print(line)


def _write_csv(path: str, header: Sequence[str], rows, footer: Optional[str] = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        if footer:
            fh.write(footer + "\n")


# -- subcommands -----------------------------------------------------------------

def cmd_entropy(args) -> int:
    alpha = check_alpha(args.alpha)
    if args.uniform is not None:
        if args.uniform < 2:
            raise DomainViolation("--uniform needs n >= 2")
        p = SimplexPoint(tuple([1.0 / args.uniform] * args.uniform))
    elif args.p is not None:
        p = SimplexPoint(tuple(_floats(args.p, "distribution")))
    else:
        raise UsageError("give --p or --uniform")
    h = entropy_alpha(alpha, p)
    result = {"alpha": alpha, "p": list(p.p), "n": p.n, "entropy": h}
    lines = [f"H_{p.n}^alpha = {h!r}"]
    if args.a is not None or args.b is not None:
        jp = JParams(args.a or 0.0, args.b or 0.0)
        j = eval_J(jp, alpha, p)
        result["J"] = {"a": jp.a, "b": jp.b, "value": j}
        lines.append(f"J_{p.n} = {j!r}")
    _emit(args, "entropy", result, lines)
    return 0


def cmd_defect(args) -> int:
    alpha = check_alpha(args.alpha)
    f = parse_function(args.fn, alpha)
    spec = GridSpec(args.m, args.h)
    report = fe_defect_sup(f, alpha, spec, per_point=bool(args.csv))
    result = report.to_dict()
    result["function"] = args.fn
    if args.csv:
        pp = report.per_point
        _write_csv(args.csv, ["x", "y", "defect", "local_scale"],
                   zip(pp["x"], pp["y"], pp["defect"], pp["scale"]))
    lines = [
        f"sup_defect   = {report.sup_defect!r}",
        f"sup_relative = {report.sup_relative!r}",
        f"mean_defect  = {report.mean_defect!r}",
        f"argmax       = ({report.argmax.x!r}, {report.argmax.y!r})",
        f"grid         = m={spec.m} h={spec.h!r} ({report.n_points} points)",
    ]
    if report.extrapolated:
        lines.append("warning: sampled function was extrapolated beyond its nodes")
    _emit(args, "defect", result, lines)
    return 0


def cmd_probe(args) -> int:
    alpha = check_alpha(args.alpha)
    margins = _floats(args.margins, "margins")
    base = _floats(args.base, "base parameters")
    if len(base) != 2:
        raise UsageError("--base must be 'c,d'")
    g = parse_function(f"perturbed:0,0:{args.perturb}" if not args.perturb.startswith(("+", "-"))
                       else f"family:0,0:{args.perturb}", alpha)
    res = scaling_exponent(SolutionParams(*base), g, args.delta, alpha, margins, args.m)
    footer = f"# slope={res.slope!r} fitted_margins={','.join(repr(h) for h in res.fitted)}"
    if args.csv:
        _write_csv(args.csv, ["h", "sup_defect"], res.table, footer)
    lines = ["h,sup_defect"] + [f"{h!r},{s!r}" for h, s in res.table] + [footer]
    _emit(args, "probe", res.to_dict(), lines)
    return 0


def cmd_search(args) -> int:
    cfg = SearchConfig(
        alpha=args.alpha,
        eps=args.eps,
        grid=GridSpec(args.m, args.h),
        basis_size=args.basis,
        optimizer=args.optimizer,
        max_iters=args.max_iters,
        seed=args.seed,
        penalty_weight=args.penalty,
        restarts=args.restarts,
    )
    rep = counterexample_search(cfg)
    result = rep.to_dict()
    result["config"] = cfg.to_dict()
    if args.csv:
        _write_csv(args.csv, ["eval", "distance", "defect"], rep.history)
    lines = [
        f"best_distance = {rep.best_distance!r}",
        f"best_defect   = {rep.best_defect!r}",
        f"distance/eps  = {rep.ratio!r}",
        f"iterations    = {rep.iterations} converged={rep.converged}",
    ]
    _emit(args, "search", result, lines)
    return 0


def cmd_recursion(args) -> int:
    alpha = check_alpha(args.alpha)
    kernel = parse_function(args.kernel, alpha)
    if args.budgets:
        levels = tuple(_floats(args.budgets, "budgets"))
    else:
        levels = tuple([args.eps] * max(args.n_max - 2, 0))
    budget = EpsilonBudget(levels)
    perts = {n: SimplexPerturbation(n, budget.eps(n - 1))
             for n in range(3, args.n_max + 1) if budget.eps(n - 1) > 0}
    seq = MeasureSequence(kernel, alpha, perts, budget)
    if args.a is not None or args.b is not None:
        jp = JParams(args.a or 0.0, args.b or 0.0)
    elif isinstance(kernel, Family):
        jp = params_from_fit(kernel.params.c, kernel.params.d, alpha)
    else:
        raise UsageError("give --a/--b when the kernel is not a plain family member")
    rows = thm32_check(seq, jp, args.n_max, args.m)
    if args.csv:
        _write_csv(args.csv, ["n", "max_gap", "bound", "ok"],
                   [(r.n, r.max_gap, r.bound, r.ok) for r in rows])
    result = {
        "a": jp.a,
        "b": jp.b,
        "levels": [r.to_dict() for r in rows],
        "all_ok": all(r.ok for r in rows),
    }
    lines = ["n,max_gap,bound,ok"] + [f"{r.n},{r.max_gap!r},{r.bound!r},{r.ok}" for r in rows]
    _emit(args, "recursion", result, lines)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    common.add_argument("--csv", metavar="PATH", help="write the CSV projection here")
    common.add_argument("--quiet", action="store_true", help="suppress the text summary")

    p = argparse.ArgumentParser(prog="infostab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("entropy", parents=[common], help="entropy of degree alpha (and J_n)")
    e.add_argument("--alpha", type=float, required=True)
    e.add_argument("--p", help="comma-separated probabilities")
    e.add_argument("--uniform", type=int, metavar="N", help="uniform distribution on N points")
    e.add_argument("--a", type=float, default=None)
    e.add_argument("--b", type=float, default=None)
    e.set_defaults(handler=cmd_entropy)

    d = sub.add_parser("defect", parents=[common], help="defect sweep over the triangle lattice")
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--fn", required=True, help="family:c,d[:+1e-3sin] | perturbed:c,d:t1,.. | sampled:path")
    d.add_argument("--m", type=int, default=200)
    d.add_argument("--h", type=float, default=1e-3)
    d.set_defaults(handler=cmd_defect)

    pr = sub.add_parser("probe", parents=[common], help="sup defect vs margin and log-log slope")
    pr.add_argument("--alpha", type=float, required=True)
    pr.add_argument("--base", default="0,0", help="c,d of the family member (default 0,0)")
    pr.add_argument("--perturb", default="1", help="sine coefficients t1,t2,.. or a +..sin suffix")
    pr.add_argument("--delta", type=float, default=1e-3)
    pr.add_argument("--margins", default="1e-2,1e-3,1e-4,1e-5")
    pr.add_argument("--m", type=int, default=100)
    pr.set_defaults(handler=cmd_probe)

    s = sub.add_parser("search", parents=[common], help="penalised counterexample search")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--eps", type=float, default=1e-3)
    s.add_argument("--m", type=int, default=150)
    s.add_argument("--h", type=float, default=1e-3)
    s.add_argument("--basis", type=int, default=6)
    s.add_argument("--optimizer", choices=["nelder-mead", "coordinate"], default="nelder-mead")
    s.add_argument("--max-iters", type=int, default=600)
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--penalty", type=float, default=10.0)
    s.set_defaults(handler=cmd_search)

    r = sub.add_parser("recursion", parents=[common], help="recursive measures vs the (a, b) family")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--kernel", default="family:1,0")
    r.add_argument("--n-max", type=int, default=8)
    r.add_argument("--m", type=int, default=24)
    r.add_argument("--eps", type=float, default=0.0, help="per-level perturbation budget")
    r.add_argument("--budgets", help="explicit eps_2,eps_3,... (overrides --eps)")
    r.add_argument("--a", type=float, default=None)
    r.add_argument("--b", type=float, default=None)
    r.set_defaults(handler=cmd_recursion)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (UsageError, DomainViolation, EmptyGrid, BudgetViolation) as exc:
        print(f"infostab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (SlopeUndefined, SingularDesign, FloatingPointError, ZeroDivisionError,
            np.linalg.LinAlgError) as exc:
        print(f"infostab {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

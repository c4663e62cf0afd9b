"""Command-line surface: validate, rate, dist, simulate, table, verify.

Every artifact starts with a provenance header (law, parameters, seed,
version) so runs are reproducible from the output alone. CSV numeric
columns carry both a decimal string and (mantissa, exponent2) so tails far
below float underflow survive serialization. Exit codes: 2 usage, 3 law
validation, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__, montecarlo, oracle, rates, verification, walk_model
from .errors import LawValidationError, RecdevError
from .walk_model import StepLaw

USAGE_EXIT = 2
VALIDATION_EXIT = 3
VERIFY_EXIT = 4


def _resolve_law(spec: str) -> StepLaw:
    try:
        return walk_model.builtin_law(spec)
    except LawValidationError:
        pass
    path = Path(spec)
    if path.exists():
        with path.open() as fh:
            return walk_model.validate_law(json.load(fh))
    raise LawValidationError(
        f"{spec!r} is neither a builtin law name nor an existing JSON file"
    )


def _max_workers(requested: int) -> int:
    cap = os.environ.get("RD_THREADS")
    if cap:
        return max(1, min(requested, int(cap)))
    return requested


class _Writer:
    def __init__(self, out_path: str | None):
        self.out_path = out_path

    def write(self, text: str) -> None:
        if self.out_path in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(self.out_path).write_text(text)


def _meta(args, law_spec: str, **extra) -> dict:
    meta = {"version": __version__, "command": args.command, "law": law_spec}
    meta.update(extra)
    return meta


def _emit(writer: _Writer, fmt: str, meta: dict, headers: list[str], rows: list[list], payload_key: str = "rows"):
    if fmt == "json":
        body = {"meta": meta, payload_key: [dict(zip(headers, row)) for row in rows]}
        writer.write(json.dumps(body, indent=2) + "\n")
        return
    lines = [f"# {key}: {value}" for key, value in meta.items()]
    lines.append(",".join(headers))
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    writer.write("\n".join(lines) + "\n")


def _cmd_validate(args) -> int:
    law = _resolve_law(args.law)
    if args.emit_json:
        _Writer(args.output).write(json.dumps(walk_model.law_to_json(law), indent=2) + "\n")
        return 0
    report = {
        "side": law.side.value,
        "kind": law.kind.value,
        "q": law.q,
        "phi_prime_1": walk_model.pgf_eval(law, 1.0, 1),
        "mean_step": walk_model.mean_step(law),
    }
    if law.kind is walk_model.Kind.FINITE:
        report["p"] = list(law.p)
        report["sigma2"] = walk_model.pgf_eval(law, 1.0, 2)
    else:
        report["gamma"] = law.gamma
        report["beta"] = law.beta
    hp = rates.assumption_h_exact(law)
    report["alpha"] = hp.alpha
    report["c"] = hp.c
    report["scaling_source"] = hp.source.value
    meta = _meta(args, args.law)
    if args.format == "json":
        _Writer(args.output).write(json.dumps({"meta": meta, "law": report}, indent=2) + "\n")
    else:
        rows = [[k, v] for k, v in report.items()]
        _emit(_Writer(args.output), "csv", meta, ["field", "value"], rows)
    return 0


def _cmd_rate(args) -> int:
    law = _resolve_law(args.law)
    if args.regime == "ldp":
        result = rates.ldp_rate(law, args.x)
        extra = {}
    else:
        hp = rates.assumption_h_fit(law) if args.fit else rates.assumption_h_exact(law)
        result = rates.mdp_rate(law, args.x, hp)
        extra = {"alpha": hp.alpha, "c": hp.c, "scaling_source": hp.source.value}
        if hp.fit_r2 is not None:
            extra["fit_r2"] = hp.fit_r2
    meta = _meta(args, args.law, x=args.x)
    headers = ["value", "regime", "side", "n_exponent", "cn_exponent", *extra.keys()]
    row = [result.value, result.regime.value, result.side.value, *result.threshold_exponents, *extra.values()]
    _emit(_Writer(args.output), args.format, meta, headers, [row], payload_key="rate")
    return 0


def _cmd_dist(args) -> int:
    law = _resolve_law(args.law)
    table = oracle.record_tail_exact(law, args.n, kmax=args.kmax)
    meta = _meta(args, args.law, n=args.n, kmax=table.kmax, mass_defect=table.mass_defect)
    headers = ["k", "mantissa", "exponent2", "probability"]
    rows = []
    full = table.kmax == table.n
    if full:
        headers += ["pmf_mantissa", "pmf_exponent2", "pmf"]
        pmf = table.pmf()
    for k in range(table.kmax + 1):
        tail = table.tail(k)
        row = [k, tail.mantissa, tail.exponent2, tail.decimal()]
        if full:
            row += [pmf[k].mantissa, pmf[k].exponent2, pmf[k].decimal()]
        rows.append(row)
    _emit(_Writer(args.output), args.format, meta, headers, rows, payload_key="tail")
    return 0


def _cmd_simulate(args) -> int:
    law = _resolve_law(args.law)
    cfg = montecarlo.SimConfig(
        law=law,
        n=args.n,
        paths=args.paths,
        seed=args.seed,
        workers=_max_workers(args.workers),
    )
    result = montecarlo.empirical_pmf(cfg)
    meta = _meta(
        args,
        args.law,
        n=args.n,
        paths=args.paths,
        seed=args.seed,
        workers=cfg.workers,
        violations=result.violations,
        tv_distance_to_oracle=result.tv_distance,
    )
    support = [k for k in range(args.n + 1) if result.histogram[k]]
    kmax = (max(support) + 1) if support else 1
    if args.format == "json":
        estimates = []
        for k in range(kmax + 1):
            est = montecarlo.estimate_tail(cfg, k, result=result)
            estimates.append(
                {"k": k, "tail_estimate": est.estimate, "lower": est.lower, "upper": est.upper}
            )
        body = {
            "meta": meta,
            "histogram": [
                {"k": k, "count": int(result.histogram[k])} for k in range(kmax)
            ],
            "tail_estimates": estimates,
        }
        _Writer(args.output).write(json.dumps(body, indent=2) + "\n")
        return 0
    rows = []
    for k in range(kmax):
        est = montecarlo.estimate_tail(cfg, k, result=result)
        rows.append(
            [k, int(result.histogram[k]), result.histogram[k] / args.paths,
             est.estimate, est.lower, est.upper]
        )
    _emit(
        _Writer(args.output), "csv", meta,
        ["k", "count", "frequency", "tail_estimate", "tail_lower", "tail_upper"], rows,
    )
    return 0


def _cmd_table(args) -> int:
    law = _resolve_law(args.law)
    n_list = [int(v) for v in args.n_list.split(",") if v]
    if not n_list:
        raise LawValidationError("--n-list must contain at least one horizon")
    rows_out = []
    for row in oracle.convergence_table(law, args.x, n_list):
        rows_out.append(
            [row.n, row.k, row.prob.mantissa, row.prob.exponent2, row.prob.decimal(),
             row.rate_estimate, row.rate_limit]
        )
    meta = _meta(args, args.law, x=args.x, n_list=args.n_list)
    _emit(
        _Writer(args.output), args.format, meta,
        ["n", "k", "mantissa", "exponent2", "probability", "rate_estimate", "ldp_rate"],
        rows_out, payload_key="table",
    )
    return 0


def _cmd_verify(args) -> int:
    laws = [_resolve_law(args.law)] if args.law else None
    results = verification.run_suite(
        laws=laws, quick=args.quick, only=args.only, progress=print
    )
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return VERIFY_EXIT if failed or not results else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recdev",
        description="Deviation rates and exact distributions for weak record "
        "counts of skip-free random walks. Thresholds 'count >= x n' use the "
        "ceiling convention k = ceil(x n).",
    )
    parser.add_argument("--version", action="version", version=f"recdev {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--law", required=True, help="builtin name or JSON file path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default="-", help="output path, '-' for stdout")

    p = sub.add_parser("validate", help="validate a law and report its parameters")
    common(p)
    p.add_argument("--emit-json", action="store_true", help="emit the canonical law JSON")

    p = sub.add_parser("rate", help="LDP/MDP rate constants")
    p.add_argument("regime", choices=("ldp", "mdp"))
    common(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--fit", action="store_true", help="estimate (alpha, c) numerically")

    p = sub.add_parser("dist", help="exact record-count tail table")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, default=None)

    p = sub.add_parser("simulate", help="Monte Carlo record-count histogram")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1, help="capped by RD_THREADS")

    p = sub.add_parser("table", help="diagnostic tables")
    p.add_argument("kind", choices=("ldp-convergence",))
    common(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--n-list", required=True, help="comma-separated horizons")

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--law", default=None, help="restrict law-specific checks to one law")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", default=None, help="substring filter on check names")
    return parser


_HANDLERS = {
    "validate": _cmd_validate,
    "rate": _cmd_rate,
    "dist": _cmd_dist,
    "simulate": _cmd_simulate,
    "table": _cmd_table,
    "verify": _cmd_verify,
}


def execute(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except LawValidationError as exc:
        print(f"law validation error: {exc}", file=sys.stderr)
        return VALIDATION_EXIT
    except RecdevError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


def main() -> None:
    sys.exit(execute())

"""Command-line front end: ``extremal-lab <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 configuration or schema
error. ``continue`` additionally returns 3 for ConstraintHit and 4 for
StepLimit. Options can come from an INI-style file (``--config``, section
``[run]``); flags on the command line win.
"""
from __future__ import annotations

import argparse
import configparser
import contextlib
import math
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import io as eio
from .discretize import SINGULAR_RULES, Grid, assemble, pv_apply
from .errors import ExtremalLabError, InfeasibleStart, NumericalFailure
from .kernel import SpectralKernel
from .special_fn import (gelfand_gamma_criterion, gelfand_gamma_margin, gelfand_crossover,
                         lane_emden_crossover, lane_emden_gamma_criterion,
                         lane_emden_gamma_margin, lane_emden_singular_A, gelfand_singular_lambda,
                         lane_emden_singular_lambda, nedev_bootstrap, threshold_gelfand,
                         threshold_lane_emden, threshold_mems, threshold_report)
from .systems import SystemSpec

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
STATUS_EXIT = {"FoldFound": 0, "ConstraintHit": 3, "StepLimit": 4}
THREADS_ENV = "EXTREMAL_LAB_THREADS"
CHECKS = ("residual", "monotone", "stability", "corollary", "estimates")


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------- config


def _floats(text) -> List[float]:
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:  # start:stop:step, stop inclusive
        a, b, c = (float(x) for x in text.split(":"))
        if c <= 0:
            raise ConfigError(f"range step must be positive in {text!r}")
        k = int(math.floor((b - a) / c + 1e-9))
        return [a + i * c for i in range(k + 1)] if b >= a else []
    return [float(x) for x in text.replace(",", " ").split()]


def _read_config(path: Optional[str]) -> Dict[str, str]:
    if not path:
        return {}
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if "run" not in cp:
        raise ConfigError(f"config {path!r} has no [run] section")
    return {k.replace("-", "_"): v for k, v in cp["run"].items()}


DEFAULTS = {
    "family": "gelfand", "p": None, "q": None, "s": 0.5, "sigma": 1.0, "N": 400, "R": 1.0,
    "singular_rule": "cell_exact", "kernel_family": "fractional_laplacian", "weight": 1.0,
    "resolution": 1e-4, "tol": 1e-10, "max_steps": 1000, "seed": 0,
}


def _resolve(args: argparse.Namespace, keys: Sequence[str]) -> dict:
    file_cfg = _read_config(getattr(args, "config", None))
    out = {}
    for k in keys:
        val = getattr(args, k, None)
        if val is None:
            val = file_cfg.get(k, DEFAULTS.get(k))
        out[k] = val
    return out


def _typed(cfg: dict) -> dict:
    conv = {"p": float, "q": float, "s": float, "sigma": float, "R": float, "weight": float,
            "resolution": float, "tol": float, "N": int, "max_steps": int, "seed": int}
    out = {}
    for k, v in cfg.items():
        if v is None or k not in conv:
            out[k] = v
            continue
        try:
            out[k] = conv[k](v)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{k}={v!r} is not a valid {conv[k].__name__}") from exc
    return out


def validate_run_config(cfg: dict) -> dict:
    cfg = _typed(cfg)
    if cfg["family"] not in ("gelfand", "lane_emden", "mems", "gradient"):
        raise ConfigError(f"unknown family {cfg['family']!r}")
    if cfg["family"] in ("lane_emden", "mems", "gradient"):
        if cfg["p"] is None or not cfg["p"] > 1:
            raise ConfigError(f"family {cfg['family']} needs p > 1")
    if cfg["family"] == "gradient":
        cfg["q"] = cfg["p"] if cfg["q"] is None else cfg["q"]
        if not cfg["q"] > 1:
            raise ConfigError("gradient family needs q > 1")
    if not 0 < cfg["s"] < 1:
        raise ConfigError(f"s={cfg['s']!r} must lie in (0, 1)")
    if not cfg["sigma"] > 0:
        raise ConfigError("sigma must be positive")
    if cfg["N"] < 1:
        raise ConfigError(f"N={cfg['N']!r} must be >= 1")
    if not cfg["R"] > 0:
        raise ConfigError("R must be positive")
    if cfg["singular_rule"] not in SINGULAR_RULES:
        raise ConfigError(f"singular_rule must be one of {SINGULAR_RULES}")
    if cfg["kernel_family"] not in ("fractional_laplacian", "weighted_even"):
        raise ConfigError("kernel_family must be fractional_laplacian or weighted_even")
    if not cfg["weight"] > 0:
        raise ConfigError("kernel weight must be positive (ellipticity)")
    if not 0 < cfg["resolution"] < 1:
        raise ConfigError("resolution must lie in (0, 1)")
    return cfg


def build_system(cfg: dict) -> SystemSpec:
    fam = cfg["family"]
    if fam == "gelfand":
        return SystemSpec.gelfand()
    if fam == "lane_emden":
        return SystemSpec.lane_emden(cfg["p"])
    if fam == "mems":
        return SystemSpec.mems(cfg["p"])
    return SystemSpec.gradient_power(cfg["p"], cfg["q"])


def build_operator(cfg: dict):
    if cfg["kernel_family"] == "weighted_even":
        kernel = SpectralKernel.weighted_even(cfg["s"], cfg["weight"])
    else:
        kernel = SpectralKernel.fractional_laplacian(cfg["s"])
    return assemble(kernel, Grid(cfg["N"], cfg["R"]), cfg["singular_rule"])


# ----------------------------------------------------------------- output


def _write(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(path, "w") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


def _report_doc(command: str, seed: int, passed: bool, results: list, **extra) -> dict:
    doc = {"schema_version": eio.SCHEMA_VERSION, "kind": "report", "command": command,
           "seed": int(seed), "passed": bool(passed), "results": results}
    doc.update(extra)
    eio.validate(doc, eio.REPORT_SCHEMA)
    return doc


@contextlib.contextmanager
def _thread_limit():
    val = os.environ.get(THREADS_ENV)
    if not val:
        yield
        return
    from threadpoolctl import threadpool_limits
    try:
        n = int(val)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV}={val!r} is not an integer") from exc
    with threadpool_limits(limits=n):
        yield


# ----------------------------------------------------------------- commands


def cmd_thresholds(args) -> int:
    ns, ss, ps = _floats(args.n), _floats(args.s), _floats(args.p)
    rows = []
    for n in ns:
        for s in ss:
            for p in ps:
                try:
                    rep = threshold_report(n, s, p, args.q)
                except ExtremalLabError as exc:
                    rows.append({"n": n, "s": s, "p": p, "notes": str(exc)})
                    continue
                rows.append({
                    "n": n, "s": s, "p": p,
                    "gelfand_bound": rep.gelfand_bound, "lane_emden_bound": rep.lane_emden_bound,
                    "mems_bound": rep.mems_bound, "gradient_bound": rep.gradient_bound,
                    "classical_gelfand": threshold_gelfand(1.0),
                    "classical_lane_emden": threshold_lane_emden(1.0, p),
                    "classical_mems": threshold_mems(1.0, p),
                    "gelfand_gamma_ok": rep.gelfand_gamma_ok, "lane_emden_gamma_ok": rep.lane_emden_gamma_ok,
                    "singular_lambda": rep.singular_lambda, "singular_A": rep.singular_A,
                    "notes": "; ".join(rep.notes),
                })
    cols = ("n", "s", "p", "gelfand_bound", "lane_emden_bound", "mems_bound", "gradient_bound",
            "classical_gelfand", "classical_lane_emden", "classical_mems", "gelfand_gamma_ok",
            "lane_emden_gamma_ok", "singular_lambda", "singular_A", "notes")
    if args.csv:
        _write(args.csv, eio.table_csv(rows, cols))
    _write(args.out, eio.dumps(_report_doc("thresholds", 0, True, rows)))
    return EXIT_OK


def cmd_criterion(args) -> int:
    if args.family == "gelfand":
        verdict = gelfand_gamma_criterion(args.n, args.s)
        margin = gelfand_gamma_margin(args.n, args.s)
        cross = gelfand_crossover(args.s) if args.crossover else None
    else:
        if args.p is None:
            raise ConfigError("lane_emden criterion needs --p")
        verdict = lane_emden_gamma_criterion(args.n, args.s, args.p)
        margin = lane_emden_gamma_margin(args.n, args.s, args.p)
        cross = lane_emden_crossover(args.s, args.p) if args.crossover else None
    res = {"family": args.family, "n": args.n, "s": args.s, "p": args.p,
           "verdict": verdict.value, "log_margin": margin, "crossover_n": cross}
    _write(args.out, eio.dumps(_report_doc("criterion", 0, True, [res])))
    return EXIT_OK


def cmd_continue(args) -> int:
    from .solve import StepPolicy, continue_branch
    keys = ("family", "p", "q", "s", "sigma", "N", "R", "singular_rule", "kernel_family",
            "weight", "resolution", "tol", "max_steps", "seed")
    cfg = validate_run_config(_resolve(args, keys))
    system = build_system(cfg)
    opr = build_operator(cfg)
    policy = StepPolicy(resolution=cfg["resolution"], tol=cfg["tol"], max_steps=cfg["max_steps"])
    try:
        branch = continue_branch(opr, system, cfg["sigma"], policy,
                                 compute_stability=not args.no_stability)
    except InfeasibleStart as exc:
        print(f"infeasible start: {exc}", file=sys.stderr)
        return EXIT_FAIL
    config = {k: cfg[k] for k in ("family", "p", "q", "s", "N", "R", "singular_rule",
                                  "kernel_family", "weight", "resolution", "tol")}
    doc = eio.branch_to_doc(branch, config, seed=cfg["seed"])
    text = eio.dumps(doc)
    eio.validate(eio.loads(text), eio.BRANCH_SCHEMA)
    _write(args.out, text)
    if args.csv:
        _write(args.csv, eio.branch_csv(doc))
    print(f"{branch.status}: lambda* in [{branch.lambda_lower:.10g}, {branch.lambda_upper:.10g}]"
          f" ({len(branch.records)} records)", file=sys.stderr)
    return STATUS_EXIT[branch.status]


def load_branch(path: str):
    """Parse and validate a branch file; returns (doc, operator, system, records)."""
    from .solve import BranchRecord
    try:
        with open(path) as fh:
            doc = eio.loads(fh.read())
    except (OSError, ValueError) as exc:
        raise eio.SchemaError(f"cannot read branch file {path!r}: {exc}") from exc
    eio.validate(doc, eio.BRANCH_SCHEMA)
    cfg = dict(DEFAULTS)
    cfg.update(doc["config"])
    cfg["sigma"] = doc["sigma"]
    try:
        cfg = validate_run_config(cfg)
    except ConfigError as exc:
        raise eio.SchemaError(str(exc)) from exc
    opr = build_operator(cfg)
    records = []
    for r in doc["records"]:
        u, v = np.asarray(r["u"], dtype=float), np.asarray(r["v"], dtype=float)
        if u.shape != (opr.N,) or v.shape != (opr.N,):
            raise eio.SchemaError("record length does not match N")
        records.append(BranchRecord(r["lambda"], r["gamma"], u, v, r["newton_iters"],
                                    r["residual"], r["stability_indicator"]))
    return doc, opr, build_system(cfg), records


def run_checks(opr, system, records, checks: Sequence[str], t: Optional[float] = None,
               residual_tol: float = 1e-8) -> list:
    from .solve import _residual
    from .verify import (StabilityForm, check_corollary_inequality, check_integral_estimates,
                         stability_indicator)
    results = []
    for i, rec in enumerate(records):
        if "residual" in checks:
            try:
                _, _, res = _residual(opr.matrix, rec.lam, rec.gam, system, rec.u, rec.v)
            except ExtremalLabError:
                res = math.inf
            results.append({"record": i, "check": "residual", "value": res,
                            "pass": bool(res <= residual_tol)})
        if "monotone" in checks and i > 0:
            prev = records[i - 1]
            d = min(float(np.min(rec.u - prev.u)), float(np.min(rec.v - prev.v)))
            results.append({"record": i, "check": "monotone", "value": d,
                            "pass": bool(d >= -1e-8 * max(rec.sup_u, rec.sup_v, 1.0))})
        if "stability" in checks:
            try:
                mu = stability_indicator(StabilityForm.at(opr, system, rec))
            except ExtremalLabError:
                mu = -math.inf
            results.append({"record": i, "check": "stability", "value": mu, "pass": bool(mu > 0)})
        if "corollary" in checks:
            rep = check_corollary_inequality(opr, system, rec)
            results.append({"record": i, "check": "corollary", **rep.to_dict()})
        if "estimates" in checks:
            for rep in check_integral_estimates(opr, system, rec, t):
                results.append({"record": i, "check": "estimates", **rep.to_dict()})
    return results


def cmd_verify(args) -> int:
    checks = [c.strip() for c in (args.checks if args.checks is not None else ",".join(CHECKS)).split(",")
              if c.strip()]
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise ConfigError(f"unknown checks {sorted(unknown)}; choose from {CHECKS}")
    doc, opr, system, records = load_branch(args.branch)
    results = run_checks(opr, system, records, checks, args.t) if checks else []
    passed = all(r["pass"] for r in results)
    _write(args.out, eio.dumps(_report_doc("verify", doc["seed"], passed, results)))
    return EXIT_OK if passed else EXIT_FAIL


def singular_check(family: str, s: float, points: Sequence[float], p: Optional[float] = None,
                   tol: float = 1e-4) -> list:
    kernel = SpectralKernel.fractional_laplacian(s)
    if family == "gelfand":
        lam = gelfand_singular_lambda(1, s)
        prof = lambda y: -2 * s * math.log(abs(y)) if y != 0 else 0.0
        rhs = lambda x: lam * abs(x) ** (-2 * s)
    elif family == "lane_emden":
        if p is None:
            raise ConfigError("lane_emden singular check needs p")
        A = lane_emden_singular_A(1, s, p)
        beta = 2 * s / (p - 1)
        lam = lane_emden_singular_lambda(s)
        prof = lambda y: A * abs(y) ** (-beta) if y != 0 else 0.0
        rhs = lambda x: lam * (A * abs(x) ** (-beta)) ** p
    else:
        raise ConfigError(f"singular check supports gelfand and lane_emden, not {family!r}")
    out = []
    for x in points:
        row = {"x": x, "expected": rhs(x)}
        try:
            val = pv_apply(kernel, prof, x, singular_points=(0.0,))
            err = abs(val / row["expected"] - 1)
            row.update(value=val, rel_error=err, **{"pass": bool(err <= tol)})
        except ExtremalLabError as exc:
            row.update(value=None, rel_error=None, error=str(exc), **{"pass": False})
        out.append(row)
    return out


def cmd_singular_check(args) -> int:
    if args.n != 1:
        raise ConfigError("the principal-value quadrature is one-dimensional (n = 1)")
    pts = _floats(args.points)
    if any(not 0 < x < 1 for x in pts):
        raise ConfigError("points must lie in (0, 1)")
    rows = singular_check(args.family, args.s, pts, args.p, args.tol)
    passed = all(r["pass"] for r in rows)
    _write(args.out, eio.dumps(_report_doc("singular-check", 0, passed, rows)))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_bootstrap(args) -> int:
    tr = nedev_bootstrap(args.n, args.s, args.p0, max_steps=args.max_steps, replay_stages=args.replay)
    res = {"n": args.n, "s": args.s, "p0": args.p0, "verdict": tr.verdict.value, "steps": tr.steps,
           "final_exponent": tr.exponents[-1], "stages": tr.stages}
    _write(args.out, eio.dumps(_report_doc("bootstrap", 0, True, [res])))
    return EXIT_OK


def cmd_inequalities(args) -> int:
    from .verify import elementary_inequalities
    res = elementary_inequalities(samples=args.samples, seed=args.seed)
    rows = [{"name": r.name, "samples": r.samples, "violations": r.violations,
             "witness": list(r.witness) if r.witness else None, "worst_slack": r.worst_slack,
             "pass": r.passed} for r in res]
    passed = all(r.passed for r in res)
    _write(args.out, eio.dumps(_report_doc("inequalities", args.seed, passed, rows)))
    return EXIT_OK if passed else EXIT_FAIL


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="extremal-lab",
                                 description="Extremal solutions of nonlocal elliptic systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="JSON output path (default stdout)")
        return p

    p = common(sub.add_parser("thresholds", help="dimension thresholds table"))
    p.add_argument("--n", default="1:10:1", help="list 'a b c' or range 'start:stop:step'")
    p.add_argument("--s", default="0.5")
    p.add_argument("--p", default="2")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_thresholds)

    p = common(sub.add_parser("criterion", help="Gamma-function regularity criteria"))
    p.add_argument("--family", choices=("gelfand", "lane_emden"), default="gelfand")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--crossover", action="store_true", help="also locate the n-crossover")
    p.set_defaults(func=cmd_criterion)

    p = common(sub.add_parser("continue", help="minimal branch up to the fold"))
    p.add_argument("--config", default=None, help="INI file with a [run] section")
    p.add_argument("--family", default=None)
    p.add_argument("--p", default=None)
    p.add_argument("--q", default=None)
    p.add_argument("--s", default=None)
    p.add_argument("--sigma", default=None)
    p.add_argument("--N", default=None)
    p.add_argument("--R", default=None)
    p.add_argument("--singular-rule", dest="singular_rule", default=None)
    p.add_argument("--kernel-family", dest="kernel_family", default=None)
    p.add_argument("--weight", default=None)
    p.add_argument("--resolution", default=None)
    p.add_argument("--tol", default=None)
    p.add_argument("--max-steps", dest="max_steps", default=None)
    p.add_argument("--seed", default=None)
    p.add_argument("--csv", default=None)
    p.add_argument("--no-stability", action="store_true")
    p.set_defaults(func=cmd_continue)

    p = common(sub.add_parser("verify", help="run checks on a branch file"))
    p.add_argument("branch")
    p.add_argument("--checks", default=None, help=f"comma list from {','.join(CHECKS)}")
    p.add_argument("--t", type=float, default=None, help="exponent for the X-Y relations")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("singular-check", help="principal value vs singular solutions"))
    p.add_argument("--family", choices=("gelfand", "lane_emden"), default="gelfand")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--s", type=float, default=0.3)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--points", default="0.25 0.5 0.75")
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_singular_check)

    p = common(sub.add_parser("bootstrap", help="integrability bootstrap"))
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--p0", type=float, default=1.5)
    p.add_argument("--max-steps", dest="max_steps", type=int, default=10_000)
    p.add_argument("--replay", action="store_true")
    p.set_defaults(func=cmd_bootstrap)

    p = common(sub.add_parser("inequalities", help="property-test the pointwise inequalities"))
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_inequalities)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        with _thread_limit():
            return args.func(args)
    except (ConfigError, eio.SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"verification failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ExtremalLabError as exc:
        # domain errors in the inputs are configuration problems
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

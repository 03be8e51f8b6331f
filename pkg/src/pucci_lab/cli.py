"""Command-line front end: ``pucci-lab <command> --config run.json [--out DIR]``.

Exit codes: 0 all asserted checks passed, 1 an asserted check failed,
2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any

from . import __version__
from .constructions import (
    FAMILIES,
    ParamsN2,
    ParamsN3,
    ParamsSmallNorm,
    build,
    classify_coefficient,
    g1_annulus,
    params_from_dict,
    reference_g1_measure,
    validate_params,
)
from .eigen import BracketError, empirical_bound_report, principal_eigenvalue
from .norms import (
    QUAD_MIN_EPS,
    BoundConfig,
    DomainBall,
    closed_norm_n3,
    closed_norm_small_bound,
    lp_norm,
    lyapunov_bounds,
    n2_l1_bound,
    residual_verify,
    sweep,
)
from .pucci import EllipticityPair
from .quadrature import QuadratureError
from .radial import InducedCoefficientError, positive_part

log = logging.getLogger("pucci_lab")

COMMANDS = ("verify", "sweep", "bounds", "eigen", "classify")
EXIT_OK, EXIT_ASSERT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

RESIDUAL_TOL = 1e-9
C0_TOL = 1e-10
BOUNDARY_TOL = 1e-12
CLOSED_FORM_RTOL = 1e-8

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class ConfigError(ValueError):
    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


def _number(cfg: dict, key: str, errors: list[str], *, positive=False, minimum=None, integer=False,
            required=True, where: str = "") -> Any:
    name = f"{where}{key}"
    if key not in cfg:
        if required:
            errors.append(f"{name}: required field missing")
        return None
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{name}: expected a number, got {v!r}")
        return None
    if not math.isfinite(v):
        errors.append(f"{name}: must be finite")
        return None
    if integer and int(v) != v:
        errors.append(f"{name}: expected an integer, got {v!r}")
        return None
    if positive and not v > 0:
        errors.append(f"{name}: must be positive, got {v!r}")
    if minimum is not None and v < minimum:
        errors.append(f"{name}: must be >= {minimum}, got {v!r}")
    return int(v) if integer else float(v)


def _family_params(cfg: dict, errors: list[str]):
    fam = cfg.get("family")
    if fam not in FAMILIES:
        errors.append(f"family: expected one of {sorted(FAMILIES)}, got {fam!r}")
        return None, None
    params = cfg.get("params")
    if not isinstance(params, dict):
        errors.append("params: expected an object")
        return fam, None
    try:
        return fam, params_from_dict(fam, params)
    except KeyError as err:
        errors.append(f"params.{err.args[0]}: required field missing")
    except (TypeError, ValueError) as err:
        errors.append(f"params: {err}")
    return fam, None


def _ball(cfg: dict, errors: list[str]) -> DomainBall | None:
    b = cfg.get("ball")
    if not isinstance(b, dict):
        errors.append("ball: expected an object with N and R")
        return None
    N = _number(b, "N", errors, integer=True, minimum=2, where="ball.")
    R = _number(b, "R", errors, positive=True, where="ball.")
    if N is None or R is None or errors:
        return None
    return DomainBall(N, R)


def validate_config(command: str, cfg: Any) -> dict:
    """Check every field the command reads; raise ``ConfigError`` listing all problems."""
    if not isinstance(cfg, dict):
        raise ConfigError(["<root>: expected a JSON object"])
    errors: list[str] = []
    out: dict[str, Any] = {}
    if "seed" in cfg:
        out["seed"] = _number(cfg, "seed", errors, integer=True, minimum=0)
    if command in ("verify", "classify"):
        out["family"], out["params"] = _family_params(cfg, errors)
        out["p"] = _number(cfg, "p", errors, minimum=1, required=False)
        out["samples"] = _number(cfg, "samples", errors, integer=True, minimum=2, required=False) or 200
    elif command == "sweep":
        fam = cfg.get("family")
        if fam not in FAMILIES:
            errors.append(f"family: expected one of {sorted(FAMILIES)}, got {fam!r}")
        out["family"] = fam
        out["p"] = _number(cfg, "p", errors, minimum=1)
        out["C1"] = _number(cfg, "C1", errors, positive=True, required=False)
        base = cfg.get("params")
        if not isinstance(base, dict):
            errors.append("params: expected an object of fixed parameters")
        else:
            for key in ("lam", "Lam"):
                _number(base, key, errors, positive=True, where="params.")
            if fam in ("n3", "small"):
                _number(base, "N", errors, integer=True, minimum=2, where="params.")
            if fam == "n3":
                _number(base, "epsilon", errors, positive=True, where="params.")
        out["base"] = base
        grid = cfg.get("grid")
        if not isinstance(grid, list) or not grid:
            errors.append("grid: expected a nonempty list of numbers")
        elif not all(isinstance(g, (int, float)) and not isinstance(g, bool) for g in grid):
            errors.append("grid: every entry must be a number")
        else:
            inc = all(b > a for a, b in zip(grid, grid[1:]))
            dec = all(b < a for a, b in zip(grid, grid[1:]))
            if not (inc or dec):
                errors.append("grid: must be strictly monotone")
        out["grid"] = grid
    elif command == "bounds":
        out["ball"] = _ball(cfg, errors)
        out["C1"] = _number(cfg, "C1", errors, positive=True)
        out["p"] = _number(cfg, "p", errors, minimum=1)
    elif command == "eigen":
        out["ball"] = _ball(cfg, errors)
        params = cfg.get("params")
        if not isinstance(params, dict):
            errors.append("params: expected an object with lam and Lam")
        else:
            lam = _number(params, "lam", errors, positive=True, where="params.")
            Lam = _number(params, "Lam", errors, positive=True, where="params.")
            if lam is not None and Lam is not None:
                try:
                    out["e"] = EllipticityPair(lam, Lam, oracle=lam == Lam)
                except ValueError as err:
                    errors.append(f"params: {err}")
        out["tol"] = _number(cfg, "tol", errors, minimum=1e-10, required=False) or 1e-10
        out["p"] = _number(cfg, "p", errors, minimum=1, required=False)
    else:
        errors.append(f"command: unknown command {command!r}")
    if errors:
        raise ConfigError(errors)
    return out


# ---------------------------------------------------------------------------
# commands


def _closed_form_check(params, inst, p: float) -> dict | None:
    """Quadrature of ``a+`` against the family's closed norm, when the exponent allows one."""
    ap = positive_part(inst.a)
    if isinstance(params, ParamsN3):
        if not 1 <= p < params.N / 2:
            return None
        closed = closed_norm_n3(params, p)
        quad = lp_norm(ap, p, region=(params.epsilon, 1.0))
        return {"kind": "equal", "closed_form": closed, "quadrature": quad,
                "ok": abs(quad - closed) <= CLOSED_FORM_RTOL * closed}
    if isinstance(params, ParamsSmallNorm):
        if not 1 <= p < params.N:
            return None
        closed = closed_norm_small_bound(params, p)
        quad = lp_norm(ap, p)
        return {"kind": "upper_bound", "closed_form": closed, "quadrature": quad, "ok": quad <= closed + 1e-9}
    if isinstance(params, ParamsN2):
        if p != 1 or params.epsilon < QUAD_MIN_EPS:
            return None
        closed = n2_l1_bound(params)
        quad = lp_norm(inst.a, 1)
        return {"kind": "upper_bound", "closed_form": closed, "quadrature": quad, "ok": quad <= closed + 1e-6}
    return None


def cmd_verify(cfg: dict, out: Path, args) -> int:
    params = cfg["params"]
    validity = validate_params(params)
    report: dict[str, Any] = {"validity": validity.to_json(), "findings": list(validity.findings)}
    try:
        inst = build(params)
    except InducedCoefficientError as err:
        report["asserted"] = {"construction": {"ok": False, "radius": err.radius, "message": str(err)}}
        _write_json(out / "report.json", report)
        log.error("construction failed: %s", err)
        return EXIT_ASSERT
    _write_json(out / "instance.json", inst.to_json())
    plus = residual_verify(inst, samples=cfg["samples"], sign="plus")
    minus = residual_verify(inst, samples=cfg["samples"], sign="minus", negate=True)
    iface = plus.interfaces
    asserted = {
        "residual_plus": {"value": plus.max_residual, "ok": plus.max_residual <= RESIDUAL_TOL},
        "residual_minus_negated": {"value": minus.max_residual, "ok": minus.max_residual <= RESIDUAL_TOL},
        "c0_gap": {"value": iface.max_relative_gap, "absolute": iface.max_value_gap,
                   "ok": iface.max_relative_gap <= C0_TOL},
        "boundary_value": {"value": plus.boundary_value, "ok": abs(plus.boundary_value) <= BOUNDARY_TOL},
    }
    if cfg.get("p") is not None:
        check = _closed_form_check(params, inst, cfg["p"])
        if check is not None:
            asserted["closed_form"] = check
    report["asserted"] = asserted
    report["residual"] = plus.to_json()
    report["residual_minus_negated"] = minus.to_json()
    for rec in iface.kinks():
        report["findings"].append(f"{rec.kink_class} kink at r={rec.radius!r}")
    _write_json(out / "report.json", report)
    ok = all(v["ok"] for v in asserted.values())
    log.info("verify %s: %s", inst.family, "ok" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_sweep(cfg: dict, out: Path, args) -> int:
    table = sweep(cfg["family"], cfg["grid"], cfg["p"], cfg["base"], C1=cfg.get("C1"))
    (out / "sweep.csv").write_text(table.to_csv())
    ok = True
    for row in table.rows:
        if row.closed_form is None or row.quadrature is None:
            continue
        if table.family == "n3":
            ok &= abs(row.quadrature - row.closed_form) <= CLOSED_FORM_RTOL * row.closed_form
        elif table.family == "small":
            ok &= row.quadrature <= row.closed_form + 1e-9
        else:
            ok &= row.quadrature <= row.closed_form + 1e-6
    summary = {"family": table.family, "param": table.param_name, "p": table.exponent,
               "closed_form_decreasing": table.strictly_decreasing("closed_form"),
               "quadrature_decreasing": table.strictly_decreasing("quadrature"),
               "loglog_slope_closed_form": table.loglog_slope("closed_form"),
               "loglog_slope_quadrature": table.loglog_slope("quadrature"),
               "notes": [f"{r.param!r}: {r.note}" for r in table.rows if r.note],
               "quadrature_consistent": bool(ok)}
    _write_json(out / "sweep_summary.json", summary)
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_bounds(cfg: dict, out: Path, args) -> int:
    rep = lyapunov_bounds(cfg["ball"], BoundConfig(cfg["C1"], cfg["p"]))
    _write_json(out / "bounds.json", rep.to_json())
    return EXIT_OK


def cmd_eigen(cfg: dict, out: Path, args) -> int:
    ball, e = cfg["ball"], cfg["e"]
    res = principal_eigenvalue(e, ball.dim, ball.radius, cfg["tol"])
    doc = {"result": res.to_json()}
    doc["asserted"] = {
        "self_consistency": {"value": abs(res.first_zero - res.R), "ok": abs(res.first_zero - res.R) <= 1e-8 * res.R},
        "richardson": {"value": res.richardson_error, "ok": res.richardson_error <= 1e-7},
    }
    if cfg.get("p") is not None:
        doc["bound_report"] = empirical_bound_report(res, cfg["p"])
    _write_json(out / "eigen.json", doc)
    if args.trajectory:
        from .eigen import STEPS_PER_RADIUS, shoot

        state = shoot(e, ball.dim, res.mu1, 2.0 * ball.radius, ball.radius / STEPS_PER_RADIUS)
        (out / "trajectory.csv").write_text(state.trajectory_csv())
    return EXIT_OK if all(v["ok"] for v in doc["asserted"].values()) else EXIT_ASSERT


def cmd_classify(cfg: dict, out: Path, args) -> int:
    params = cfg["params"]
    try:
        inst = build(params)
    except InducedCoefficientError as err:
        _write_json(out / "classification.json", {"error": str(err), "radius": err.radius})
        return EXIT_ASSERT
    rep = classify_coefficient(inst.a)
    doc: dict[str, Any] = {"classification": rep.to_json(), "findings": []}
    if isinstance(params, ParamsSmallNorm):
        reference = reference_g1_measure(params)
        lo, hi = g1_annulus(params)
        doc["g1_annulus_symbolic"] = [lo, hi]
        doc["reference_g1_measure"] = reference
        doc["g1_ratio_computed_to_reference"] = rep.g1_measure / reference
        if abs(rep.g1_measure / reference - 1.0) > 1e-8:
            doc["findings"].append(
                f"computed |G1| is {rep.g1_measure / reference!r} times the reference value (expected 1/N = {1 / params.N!r})")
    _write_json(out / "classification.json", doc)
    return EXIT_OK


HANDLERS = {"verify": cmd_verify, "sweep": cmd_sweep, "bounds": cmd_bounds, "eigen": cmd_eigen,
            "classify": cmd_classify}


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n")


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("TOOL_LOG", "quiet").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pucci-lab", description="Pucci-operator constructions, norms and bounds.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, type=Path, help="path to a JSON run configuration")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    ap.add_argument("--trajectory", action="store_true", help="eigen: also write trajectory.csv")
    return ap


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        raw = json.loads(args.config.read_text())
    except OSError as err:
        print(f"config: cannot read {args.config}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as err:
        print(f"config: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = validate_config(args.command, raw)
    except ConfigError as err:
        for d in err.diagnostics:
            print(f"config error: {d}", file=sys.stderr)
        return EXIT_CONFIG
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        return HANDLERS[args.command](cfg, args.out, args)
    except (QuadratureError, BracketError, FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

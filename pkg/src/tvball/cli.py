"""Command line entry point: ``tvball report|field|phase|verify --config F --out DIR``."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .energy import EnergyParams
from .errors import ConfigParseError, TVBallError
from .field import write_csv, write_pgm16
from .solver import level_schedule, minimizer, rasterize_u
from .svg import level_lines_svg
from .thresholds import breakpoints

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON: fixed key order, floats with 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return '"nan"'
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return f"{v:.17g}"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _write(path: Path, text: str) -> None:
    path.write_text(text)


def build_report(rc: RunConfig) -> dict:
    cfg = rc.two_ball()
    T = breakpoints(cfg)
    rows = []
    for lam in rc.lambdas:
        sch = level_schedule(cfg, T, lam)
        rows.append(
            {
                "lambda": lam,
                "regime": sch.regime,
                "s1": sch.s1,
                "s2": sch.s2,
                "s_a": sch.s_a,
                "s_b": sch.s_b,
                "s_c": sch.s_c,
                "plateau": sch.plateau,
            }
        )
    return {
        "config": {"r1": cfg.r1, "r2": cfg.r2, "d": cfg.d},
        "interacting": T.interacting,
        "case_flag": T.case_flag,
        "R_c": T.R_c,
        "R1": T.R1,
        "R2": T.R2,
        "lambda1": T.lambda1,
        "lambda2": T.lambda2,
        "lambda3": T.lambda3,
        "dual_norm": T.dual_norm,
        "hull_perimeter": T.hull_perimeter,
        "lambda2_multiple_roots": T.lambda2_multiple_roots,
        "regimes": rows,
    }


def cmd_report(rc: RunConfig, out: Path) -> int:
    doc = to_json(build_report(rc)) + "\n"
    _write(out / "report.json", doc)
    sys.stdout.write(doc)
    return EXIT_OK


def cmd_field(rc: RunConfig, out: Path) -> int:
    cfg = rc.two_ball()
    T = breakpoints(cfg)
    box = rc.grid_box(cfg)
    for k, lam in enumerate(rc.lambdas):
        stem = f"field_{k:02d}"
        u = rasterize_u(cfg, T, lam, box, rc.h)
        if "csv" in rc.formats:
            write_csv(u, out / f"{stem}.csv")
        if "pgm" in rc.formats:
            write_pgm16(u, out / f"{stem}.pgm")
        if "svg" in rc.formats:
            items = [(s, minimizer(cfg, T, EnergyParams(s, lam)).region) for s in rc.levels]
            _write(out / f"{stem}.svg", level_lines_svg(items, box))
        print(f"{stem}: lambda={lam:.17g} max={float(u.values.max()):.17g}")
    return EXIT_OK


def cmd_phase(rc: RunConfig, out: Path) -> int:
    """Minimizer kind and regime on a (lambda, s) grid, written as CSV."""
    cfg = rc.two_ball()
    T = breakpoints(cfg)
    lam_max = 1.1 * T.lambda3
    lams = np.linspace(lam_max / rc.phase_lambda_points, lam_max, rc.phase_lambda_points)
    ss = np.linspace(0.0, 1.0, rc.phase_s_points)
    lines = ["lambda,s,regime,kind,energy"]
    for lam in lams:
        for s in ss:
            dec = minimizer(cfg, T, EnergyParams(float(s), float(lam)))
            lines.append(f"{lam:.17g},{s:.17g},{dec.regime},{dec.region.kind.value},{dec.energy:.17g}")
    _write(out / "phase.csv", "\n".join(lines) + "\n")
    print(f"phase.csv: {len(lams)} x {len(ss)} points")
    return EXIT_OK


def cmd_verify(rc: RunConfig, out: Path) -> int:
    from .verify import run_checks

    checks = run_checks(rc, log=lambda line: print(line, flush=True))
    passed = all(c.passed for c in checks)
    doc = {
        "passed": passed,
        "failed": [c.name for c in checks if not c.passed],
        "checks": [c.as_dict() for c in checks],
    }
    _write(out / "verify.json", to_json(doc) + "\n")
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {"report": cmd_report, "field": cmd_field, "phase": cmd_phase, "verify": cmd_verify}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="tvball", description="Exact ROF solutions for the indicator of two disjoint balls.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="flat key = value configuration file")
    ap.add_argument("--out", default=".", help="output directory (created if missing)")
    args = ap.parse_args(argv)
    from .tv import set_threads

    try:
        set_threads()
    except ValueError:
        print("error: TVBALL_THREADS must be an integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rc = load_config(args.config)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](rc, out)
    except TVBallError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

"""`freetransport` command-line driver.

Exit codes: 0 every assertion passed, 1 an assertion failed (or a run aborted on
a numerical diagnostic), 2 usage or configuration error.  FREETRANSPORT_THREADS
caps the BLAS thread pools when set before the first numerical import.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

_threads = os.environ.get("FREETRANSPORT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .config import ConfigError, load_config, load_json_object, resolve, validate, write_resolved  # noqa: E402

REQUIRED = {"certify-convexity": "potential", "sample": "potential", "sde": "fam", "semigroup": "fam", "transport": "fam"}


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; explicit flags override its values")
    p.add_argument("--out", help="output directory (default runs/<command>)")
    p.add_argument("--seed", type=int)
    p.add_argument("--svg", action="store_true", default=None, help="also write SVG figures")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freetransport", description="Transport between free Gibbs states at matrix scale.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-identities", help="random symbolic identity suite")
    _add_common(p)
    p.add_argument("--n", type=int, help="maximum number of letters")
    p.add_argument("--deg", type=int, help="maximum degree")
    p.add_argument("--trials", type=int)
    p.add_argument("--names", nargs="*")

    p = sub.add_parser("certify-convexity", help="convexity certificate for a potential file")
    _add_common(p)
    p.add_argument("potential", nargs="?", help="potential JSON file")
    p.add_argument("--N", type=int, help="matrix size for the numeric Hessian check")
    p.add_argument("--tuples", type=int)

    p = sub.add_parser("sample", help="Langevin/MALA ensemble of μ_{V,N}")
    _add_common(p)
    p.add_argument("--potential")
    for name in ("N", "count", "burnin", "thin", "chains"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("--step", type=float)
    p.add_argument("--ula", dest="mala", action="store_false", default=None, help="unadjusted Langevin")
    p.add_argument("--sd-tol", dest="sd_tol", type=float)
    p.add_argument("--ks-tol", dest="ks_tol", type=float)

    p = sub.add_parser("sde", help="coupled-path contraction of the free SDE")
    _add_common(p)
    p.add_argument("--fam")
    p.add_argument("--alpha", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)

    p = sub.add_parser("semigroup", help="Monte-Carlo semigroup φ_t(P)")
    _add_common(p)
    p.add_argument("--fam")
    p.add_argument("--alpha", type=float)
    p.add_argument("--poly")
    p.add_argument("--N", type=int)
    p.add_argument("--paths", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--t", type=_floats, help="comma-separated times")

    p = sub.add_parser("transport", help="α-flow of an ensemble along the interpolation family")
    _add_common(p)
    p.add_argument("--fam")
    for name in ("N", "count", "paths"):
        p.add_argument(f"--{name}", type=int)
    for name in ("T", "dt", "d_alpha", "alpha_max"):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    p.add_argument("--scheme", choices=["heun", "rk4"])
    p.add_argument("--grid", choices=["uniform", "graded"])
    p.add_argument("--richardson", action="store_true", default=None)
    p.add_argument("--single", action="store_true", default=None)

    p = sub.add_parser("onevar", help="equilibrium measures and the classical 1-d transport")
    _add_common(p)
    p.add_argument("--V", type=_floats, help="ascending coefficients of V (use --V=-1,0,1 when the list starts with a minus)")
    p.add_argument("--W", type=_floats, help="ascending coefficients of W")
    p.add_argument("--grid", type=_floats, help="lo,hi,points, e.g. --grid=-6,6,2048")
    p.add_argument("--alpha-steps", dest="alpha_steps", type=int)
    p.add_argument("--ensemble", help="HMT1 ensemble for a spectral KS comparison")

    p = sub.add_parser("report", help="consolidate run directories into markdown and SVG")
    p.add_argument("runs", nargs="*")
    p.add_argument("--out", default="report")
    return ap


def _overrides(args: argparse.Namespace) -> dict:
    skip = {"command", "config"}
    d = {k: v for k, v in vars(args).items() if k not in skip}
    if args.command == "onevar" and d.get("grid") is not None and len(d["grid"]) != 3:
        raise ConfigError("--grid takes lo,hi,points")
    return d


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) if e.code in (0, None) else 2
    if args.command == "report":
        from .report import build_report

        ok, path = build_report([Path(r) for r in args.runs], Path(args.out))
        print(f"report written to {path}")
        return 0 if ok else 1

    from .commands import COMMANDS, DEFAULTS, write_json

    try:
        file_cfg = load_config(args.config, args.command) if args.config else None
        cfg = resolve({**DEFAULTS[args.command], "svg": False, "out": f"runs/{args.command}"}, file_cfg, _overrides(args))
        cfg["command"] = args.command
        key = REQUIRED.get(args.command)
        if key:
            if cfg.get(key) is None:
                raise ConfigError(f"missing required setting '{key}' (flag or config)")
            # inline referenced files so the emitted config is self-contained
            base = Path(args.config).resolve().parent if args.config else None
            cfg[key] = load_json_object(cfg[key], base)
        validate(cfg, args.command)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    out = Path(cfg["out"])
    write_resolved(out, cfg)
    try:
        passed, summary = COMMANDS[args.command](cfg, out)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except (RuntimeError, FloatingPointError) as e:
        # numerical aborts (divergence, blow-up, tail bound, non-convergence) count as failed assertions
        summary, passed = {"error": f"{type(e).__name__}: {e}", "checks": []}, False
    summary["passed"] = bool(passed)
    summary["command"] = args.command
    write_json(out / "summary.json", summary)
    for row in summary.get("checks", []):
        print(f"[{'PASS' if row['passed'] else 'FAIL'}] {row['name']}: {row['value']} (limit {row['limit']})")
    if "error" in summary:
        print(f"[FAIL] {summary['error']}")
    print(json.dumps({"command": args.command, "passed": summary["passed"], "out": str(out)}))
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

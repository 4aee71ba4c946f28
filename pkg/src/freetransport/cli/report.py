"""Consolidated markdown report over completed run directories."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import List, Tuple

EXPECTED = {
    "check-identities": ["identities.csv"],
    "certify-convexity": ["certificate.json"],
    "sample": ["ensemble.hmt1", "moments.csv", "sd.csv"],
    "sde": ["contraction.csv"],
    "semigroup": ["semigroup.csv"],
    "transport": ["flowed.hmt1", "diagnostics.csv", "moments.csv"],
    "onevar": ["density.csv"],
}


def _read_csv(path: Path) -> List[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _fmt(v) -> str:
    try:
        x = float(v)
    except (TypeError, ValueError):
        return str(v)
    return f"{x:.6g}"


def _table(rows: List[dict], cols: List[str] | None = None) -> List[str]:
    if not rows:
        return ["(no rows)", ""]
    cols = cols or list(rows[0].keys())
    out = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    out += ["| " + " | ".join(_fmt(r.get(c, "")) for c in cols) + " |" for r in rows]
    return out + [""]


def _figures(run: Path, cmd: str, out: Path, tag: str) -> List[str]:
    from .plots import density_overlay, lines

    lines_md = []
    if cmd in ("sample", "transport"):
        from ..matrep.ensemble import Ensemble
        from ..ncalg.potential import PotentialSpec, poly_coeffs_1d
        from ..onevar import EquilibriumError, equilibrium_measure

        name = "ensemble.hmt1" if cmd == "sample" else "flowed.hmt1"
        ens = Ensemble.load(run / name)
        if ens.n == 1:
            mu = None
            summary = json.loads((run / "summary.json").read_text())
            eq = summary.get("equilibrium")
            if eq is None and cmd == "sample":
                cfg = json.loads((run / "config.json").read_text())
                try:
                    mu = equilibrium_measure(poly_coeffs_1d(PotentialSpec.from_dict(cfg["potential"]).to_ncpoly()))
                except (EquilibriumError, ValueError, KeyError):
                    mu = None
            elif eq is not None:
                mu = equilibrium_measure(eq["V"])
            f = density_overlay(out / f"{tag}_density.svg", ens.spectrum(0), mu, run.name)
            lines_md.append(f"![density]({f.name})")
    if cmd == "sde":
        rows = _read_csv(run / "contraction.csv")
        t = [float(r["t"]) for r in rows]
        f = lines(out / f"{tag}_contraction.svg", t, [[float(r["dist_fro"]) for r in rows]], ["Frobenius distance"], "t", "distance", logy=True)
        lines_md.append(f"![contraction]({f.name})")
    if cmd == "transport":
        rows = _read_csv(run / "diagnostics.csv")
        a = [float(r["alpha"]) for r in rows]
        f = lines(out / f"{tag}_moments.svg", a, [[float(r["m2"]) for r in rows], [float(r["m4"]) for r in rows]], ["m2", "m4"], "α", "moment")
        lines_md.append(f"![moments]({f.name})")
    return lines_md


def build_report(runs: List[Path], out: Path) -> Tuple[bool, Path]:
    """Write report.md (+ SVGs) for the given run directories; missing artifacts are listed and fail the report."""
    out.mkdir(parents=True, exist_ok=True)
    md = ["# Run report", ""]
    ok = True
    if not runs:
        md.append("No runs given.")
    for k, run in enumerate(runs):
        tag = f"run{k:02d}"
        cfg_p, sum_p = run / "config.json", run / "summary.json"
        missing = [p.name for p in (cfg_p, sum_p) if not p.exists()]
        if missing:
            md += [f"## {run}", "", "Missing artifacts: " + ", ".join(missing), ""]
            ok = False
            continue
        cfg = json.loads(cfg_p.read_text())
        summary = json.loads(sum_p.read_text())
        cmd = cfg.get("command", summary.get("command", "?"))
        md += [f"## {run.name} ({cmd})", "", f"Status: {'passed' if summary.get('passed') else 'FAILED'}", ""]
        missing = [name for name in EXPECTED.get(cmd, []) if not (run / name).exists()]
        if missing:
            md += ["Missing artifacts: " + ", ".join(missing), ""]
            ok = False
        if summary.get("error"):
            md += [f"Error: `{summary['error']}`", ""]
        if summary.get("checks"):
            md += ["### Checks", ""] + _table(summary["checks"], ["name", "value", "limit", "passed"])
        for name, title in (("moments.csv", "Moments"), ("diagnostics.csv", "Per-α diagnostics"), ("sd.csv", "Schwinger–Dyson residuals"), ("semigroup.csv", "Semigroup estimates"), ("identities.csv", "Identities")):
            if (run / name).exists():
                md += [f"### {title}", ""] + _table(_read_csv(run / name))
        if cmd == "sde" and "slope_fro" in summary:
            md += [f"Contraction slope (Frobenius): {_fmt(summary['slope_fro'])}; operator: {_fmt(summary['slope_op'])}", ""]
        if not missing:
            md += _figures(run, cmd, out, tag) + [""]
    path = out / "report.md"
    path.write_text("\n".join(md) + "\n")
    return ok, path

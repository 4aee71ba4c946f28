"""Subcommand bodies.  Each takes a resolved config and an output directory and
returns (passed, summary); the summary lists every assertion that was made."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import load_json_object

Result = Tuple[bool, dict]


# ---------------------------------------------------------------------------
# shared helpers


def write_csv(path: Path, rows: List[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        if rows:
            w = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)
    return path


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


class Checks:
    def __init__(self):
        self.rows: List[dict] = []

    def add(self, name: str, value, limit, passed: bool) -> bool:
        self.rows.append({"name": name, "value": value, "limit": limit, "passed": bool(passed)})
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.rows)


def _potential(ref, base: Optional[Path] = None):
    from ..ncalg.potential import PotentialSpec

    return PotentialSpec.from_dict(load_json_object(ref, base))


def _family(ref, base: Optional[Path] = None):
    from ..freesde import PotentialFamily, quadratic_family

    d = load_json_object(ref, base)
    if "quadratic_c" in d:
        return quadratic_family(float(d["quadratic_c"]), int(d.get("n", 1)))
    return PotentialFamily.from_dict(d)


def quadratic_scale(P) -> Optional[float]:
    """c when P = (c/2)ΣXᵢ² exactly, else None."""
    n = P.n
    items = list(P.items())
    if len(items) != n:
        return None
    cs = set()
    for w, c in items:
        if len(w) != 2 or w[0] != w[1]:
            return None
        cs.add(complex(c))
    if len(cs) != 1 or {w[0] for w, _ in items} != set(range(n)):
        return None
    c = cs.pop()
    return 2 * c.real if abs(c.imag) == 0 and c.real > 0 else None


def _one_var_measure(V):
    """Equilibrium measure when V is a one-letter polynomial potential, else None."""
    from ..ncalg.potential import poly_coeffs_1d
    from ..onevar import EquilibriumError, equilibrium_measure

    if V.n != 1:
        return None
    try:
        return equilibrium_measure(poly_coeffs_1d(V))
    except (EquilibriumError, ValueError):
        return None


def _moment_rows(ens, kmax: int = 4) -> List[dict]:
    rows = []
    for i in range(ens.n):
        for k in range(1, kmax + 1):
            m = ens.moments(k, i)
            se = float(np.std(m, ddof=1) / math.sqrt(len(m))) if len(m) > 1 else float("nan")
            rows.append({"letter": i + 1, "k": k, "mean": float(np.mean(m)), "stderr": se})
    return rows


# ---------------------------------------------------------------------------
# subcommands


def check_identities(cfg: dict, out: Path) -> Result:
    from ..identities import check_all

    res = check_all(trials=cfg["trials"], max_n=cfg["n"], max_deg=cfg["deg"], seed=cfg["seed"], names=cfg.get("names"))
    rows = [r.to_dict() for r in res]
    write_json(out / "identities.json", rows)
    write_csv(out / "identities.csv", [{k: v for k, v in r.items() if k != "failures"} for r in rows])
    checks = Checks()
    for r in res:
        checks.add(r.name, r.max_numeric_err, "symbolic equality and numeric ≤ 1e-9", r.passed)
    return checks.passed, {"checks": checks.rows}


def certify_convexity(cfg: dict, out: Path) -> Result:
    from ..matrep.convexity import certify_convexity as certify
    from ..matrep.evaluate import random_hermitian
    from ..matrep.hessian import hessian_min_eig

    spec = _potential(cfg["potential"])
    cert = certify(spec)
    rng = np.random.default_rng(cfg["seed"])
    mins = []
    for _ in range(cfg["tuples"]):
        X = random_hermitian(rng, (spec.n,), cfg["N"])
        mins.append(float(hessian_min_eig(spec.to_ncpoly(), X).value))
    checks = Checks()
    checks.add("certified", cert.c, "certificate found", cert.certified)
    if cert.certified:
        checks.add("hessian_min_eig ≥ c − tol", min(mins), cert.c - cfg["tol"], min(mins) >= cert.c - cfg["tol"])
    summary = {"certificate": cert.to_dict(), "hessian_min_eig": mins, "checks": checks.rows}
    write_json(out / "certificate.json", summary)
    return checks.passed, summary


def sample(cfg: dict, out: Path) -> Result:
    from ..matrep.sd import monomial_battery, sd_residual
    from ..onevar import spectral_ks
    from ..sampler import ChainConfig, sample_ensemble

    spec = _potential(cfg["potential"])
    cc = ChainConfig(
        N=cfg["N"], n=spec.n, target=spec, step=cfg["step"], burnin=cfg["burnin"], thin=cfg["thin"], count=cfg["count"],
        mala=cfg["mala"], seed=cfg["seed"], chains=cfg.get("chains"), adapt=cfg["adapt"],
    )
    ens = sample_ensemble(cc)
    ens.save(out / "ensemble.hmt1")
    write_csv(out / "moments.csv", _moment_rows(ens))
    V = spec.to_ncpoly()
    sd = [r.to_dict() for r in sd_residual(ens.samples, V, monomial_battery(spec.n, 4))]
    write_csv(out / "sd.csv", sd)
    checks = Checks()
    if cfg.get("sd_tol") is not None:
        worst = max(abs(r["mean"]) for r in sd)
        checks.add("max |SD residual|", worst, cfg["sd_tol"], worst <= cfg["sd_tol"])
    mu = _one_var_measure(V)
    summary = {k: ens.meta[k] for k in ("acceptance", "step_used", "iat_tau_x1sq", "max_op_norm", "steps")}
    if mu is not None:
        ks = spectral_ks(ens, mu)
        summary["ks"] = ks
        summary["equilibrium"] = mu.to_dict()
        if cfg.get("ks_tol") is not None:
            checks.add("spectral KS", ks, cfg["ks_tol"], ks <= cfg["ks_tol"])
        if cfg["svg"]:
            from .plots import density_overlay

            density_overlay(out / "density.svg", ens.spectrum(0), mu, f"N={ens.N}, {ens.count} samples")
    summary["checks"] = checks.rows
    return checks.passed, summary


def sde(cfg: dict, out: Path) -> Result:
    from ..freesde import coupled_contraction
    from ..noise import gue, stream

    fam = _family(cfg["fam"])
    N, n = cfg["N"], fam.n
    X0 = gue(stream(cfg["seed"], 0), (n,), N)
    Y0 = gue(stream(cfg["seed"], 1), (n,), N)
    res = coupled_contraction(X0, Y0, fam, cfg["alpha"], cfg["T"], cfg["dt"], seed=cfg["seed"], record_every=cfg["record_every"])
    rows = [{"t": float(t), "dist_fro": float(a), "dist_op": float(b)} for t, a, b in zip(res.times, res.dist_fro, res.dist_op)]
    write_csv(out / "contraction.csv", rows)
    checks = Checks()
    c = fam.c_alpha(cfg["alpha"])
    if c is not None:
        bound = -0.5 * c * cfg["slope_factor"]
        checks.add("fitted slope ≤ −(c/2)·factor", res.slope_fro, bound, res.slope_fro <= bound)
    if cfg["svg"]:
        from .plots import lines

        lines(out / "contraction.svg", res.times, [res.dist_fro, res.dist_op], ["Frobenius", "operator"], "t", "distance", logy=True)
    summary = {**res.to_dict(), "c_alpha": c, "checks": checks.rows}
    return checks.passed, summary


def semigroup(cfg: dict, out: Path) -> Result:
    from ..freesde import semigroup_eval
    from ..matrep.evaluate import random_hermitian
    from ..ncalg.potential import parse_poly

    fam = _family(cfg["fam"])
    N, n = cfg["N"], fam.n
    P = parse_poly(cfg["poly"], n)
    rng = np.random.default_rng(cfg["seed"])
    X0 = random_hermitian(rng, (n,), N)
    A = random_hermitian(rng, (), N)
    E00 = np.zeros((N, N), dtype=complex)
    E00[0, 0] = N
    tests = [np.eye(N, dtype=complex), A, E00]
    est = semigroup_eval(P, X0, fam, cfg["alpha"], cfg["t"], cfg["paths"], cfg["dt"], seed=cfg["seed"], richardson=cfg["richardson"], tests=tests)
    names = ["identity", "random_hermitian", "N_E00"]
    rows = []
    checks = Checks()
    Va = fam.V_alpha(cfg["alpha"])
    c = quadratic_scale(Va)
    oracle = c is not None and P == parse_poly("X1^2", n)
    for k, t in enumerate(est.times):
        for j, nm in enumerate(names):
            row = {"t": float(t), "test": nm, "mean": float(np.real(est.tested_mean[k, j])), "stderr": float(est.tested_stderr[k, j])}
            if oracle:
                # φ_t(X²) = e^{−ct}X₀² + (1 − e^{−ct})/c · I for the Ornstein–Uhlenbeck drift −(c/2)X
                exact_M = math.exp(-c * t) * X0[0] @ X0[0] + (1 - math.exp(-c * t)) / c * np.eye(N)
                ex = float(np.real(np.trace(exact_M @ tests[j]) / N))
                row["exact"] = ex
                z = (row["mean"] - ex) / row["stderr"] if row["stderr"] > 0 else float("inf")
                rel = abs(row["mean"] - ex) / max(abs(ex), 1e-12)
                row["z"], row["rel"] = z, rel
                checks.add(f"t={t:g} {nm} |z|", abs(z), cfg["z_tol"], abs(z) <= cfg["z_tol"])
                checks.add(f"t={t:g} {nm} relative", rel, cfg["rel_tol"], rel <= cfg["rel_tol"])
            rows.append(row)
    write_csv(out / "semigroup.csv", rows)
    return checks.passed, {"oracle": "ornstein_uhlenbeck" if oracle else None, "checks": checks.rows}


def transport(cfg: dict, out: Path) -> Result:
    from ..matrep.sd import monomial_battery, sd_residual
    from ..onevar import spectral_ks
    from ..sampler import ChainConfig, gaussian_ensemble, sample_ensemble
    from ..transport import TransportConfig, flow_transport

    fam = _family(cfg["fam"])
    n = fam.n
    c0 = quadratic_scale(fam.V)
    if c0 is not None:
        ens0 = gaussian_ensemble(cfg["N"], n, cfg["count"], seed=cfg["seed"], c=c0)
    else:
        sc = dict(cfg.get("sampler") or {})
        ens0 = sample_ensemble(ChainConfig(N=cfg["N"], n=n, target=fam.V_spec or fam.V, count=cfg["count"], seed=cfg["seed"], **sc))
    tc = TransportConfig(
        fam, T=cfg["T"], dt=cfg["dt"], paths=cfg["paths"], d_alpha=cfg["d_alpha"], alpha_max=cfg["alpha_max"], mode=cfg["mode"],
        seed=cfg["seed"] + 1, antithetic=cfg["antithetic"], noise=cfg["noise"], tail_tol=cfg["tail_tol"], scheme=cfg["scheme"],
        grid=cfg["grid"], grid_power=cfg["grid_power"], richardson=cfg["richardson"], single=cfg["single"],
    )
    res = flow_transport(ens0, tc)
    res.ensemble.save(out / "flowed.hmt1")
    diag_rows = []
    for d in res.diagnostics:
        dd = d.to_dict()
        row = {"alpha": dd["alpha"]}
        row.update({f"m{k + 1}": v for k, v in enumerate(dd["moments"])})
        row.update({k: dd[k] for k in ("max_op_norm", "sd_max_abs", "dg_stderr", "tail_bound")})
        diag_rows.append(row)
    write_csv(out / "diagnostics.csv", diag_rows)
    write_csv(out / "moments.csv", _moment_rows(res.ensemble))
    checks = Checks()
    summary: Dict = {"alpha_max": cfg["alpha_max"]}
    a = cfg["alpha_max"]
    Va = fam.V_alpha(a)
    ca = quadratic_scale(Va)
    if c0 is not None and ca is not None:
        # closed form F_α = (c₀/c_α)^{1/2}·X
        target = math.sqrt(c0 / ca) * ens0.samples
        err = np.max(np.abs(res.ensemble.samples - target), axis=(1, 2, 3)) / np.max(np.abs(target), axis=(1, 2, 3))
        checks.add("per-sample relative sup error vs closed form", float(err.max()), cfg["map_tol"], err.max() <= cfg["map_tol"])
        m2 = res.ensemble.moments(2, 0)
        se = float(np.std(m2, ddof=1) / math.sqrt(len(m2)))
        z = abs(float(m2.mean()) - 1 / ca) / se
        checks.add("pushed m2 vs 1/c_alpha (z)", z, 3.0, z <= 3.0)
        summary["closed_form"] = {"c0": c0, "c_alpha": ca, "max_rel_err": float(err.max()), "m2": float(m2.mean()), "m2_stderr": se}
    mu = _one_var_measure(Va)
    if mu is not None and ca is None:
        ks = spectral_ks(res.ensemble, mu)
        checks.add("spectral KS vs equilibrium measure", ks, cfg["ks_tol"], ks <= cfg["ks_tol"])
        sd = [r.to_dict() for r in sd_residual(res.ensemble.samples, Va, monomial_battery(1, 4))]
        write_csv(out / "sd.csv", sd)
        worst = max(abs(r["mean"]) for r in sd)
        checks.add("max |SD residual| of flowed ensemble", worst, cfg["sd_tol"], worst <= cfg["sd_tol"])
        summary["ks"] = ks
        summary["equilibrium"] = mu.to_dict()
        if cfg["svg"]:
            from .plots import density_overlay

            density_overlay(out / "density.svg", res.ensemble.spectrum(0), mu, f"flowed to α={a:g}")
    if cfg["svg"]:
        from .plots import lines

        al = [r["alpha"] for r in diag_rows]
        lines(out / "moments.svg", al, [[r["m2"] for r in diag_rows], [r["m4"] for r in diag_rows]], ["m2", "m4"], "α", "moment")
    summary["checks"] = checks.rows
    return checks.passed, summary


def onevar(cfg: dict, out: Path) -> Result:
    from numpy.polynomial import Polynomial

    from ..onevar import (
        GibbsDensity,
        classical_transport_1d,
        equilibrium_measure,
        quantile_transport,
        sd_quadrature_residual,
        spectral_ks,
    )

    V = Polynomial(cfg["V"])
    W = Polynomial(cfg["W"]) if cfg.get("W") else None
    checks = Checks()
    summary: Dict = {}
    measures = {"V": equilibrium_measure(V)}
    if W is not None:
        measures["V+W"] = equilibrium_measure(V + W)
    for name, mu in measures.items():
        res = [sd_quadrature_residual(mu, np.eye(4)[k]) for k in range(4)]
        worst = max(abs(r) for r in res)
        checks.add(f"SD quadrature residual ({name})", worst, cfg["sd_tol"], worst <= cfg["sd_tol"])
        summary[f"equilibrium_{name}"] = {**mu.to_dict(), "sd_residuals": res, "m2": mu.moment(2), "m4": mu.moment(4)}
    lo, hi, pts = cfg["grid"]
    x = np.linspace(lo, hi, int(pts))
    dens_rows = [{"x": float(xi), **{f"density_{k}": float(m.density(xi)) for k, m in measures.items()}} for xi in np.linspace(min(m.a for m in measures.values()), max(m.b for m in measures.values()), 401)]
    write_csv(out / "density.csv", dens_rows)
    if W is not None:
        ct = classical_transport_1d(V, W, x, alpha_steps=cfg["alpha_steps"], s_horizon=cfg["s_horizon"], ds=cfg["ds"], refine=cfg["refine"])
        T = quantile_transport(GibbsDensity(V), GibbsDensity(V + W), x)
        err = ct.F.sup_diff(T)
        checks.add("classical map vs quantile oracle (sup)", err, cfg["map_tol"], err <= cfg["map_tol"])
        checks.add("classical map monotone", bool(ct.F.is_monotone()), True, ct.F.is_monotone())
        write_csv(out / "map.csv", [{"x": float(a), "classical": float(b), "quantile": float(c)} for a, b, c in zip(x, ct.F.values, T.values)])
        summary["map_sup_error"] = err
        summary["max_tail_bound"] = ct.max_tail_bound
        if cfg["svg"]:
            from .plots import lines

            lines(out / "map.svg", x, [ct.F.values, T.values], ["classical flow", "quantile oracle"], "x", "F(x)")
    if cfg.get("ensemble"):
        from ..matrep.ensemble import Ensemble

        ens = Ensemble.load(cfg["ensemble"])
        summary["ks"] = {k: spectral_ks(ens, m) for k, m in measures.items()}
    if cfg["svg"]:
        from .plots import lines

        xs = [r["x"] for r in dens_rows]
        lines(out / "density.svg", xs, [[r[f"density_{k}"] for r in dens_rows] for k in measures], list(measures), "x", "density")
    summary["checks"] = checks.rows
    return checks.passed, summary


COMMANDS = {
    "check-identities": check_identities,
    "certify-convexity": certify_convexity,
    "sample": sample,
    "sde": sde,
    "semigroup": semigroup,
    "transport": transport,
    "onevar": onevar,
}

DEFAULTS: Dict[str, dict] = {
    "check-identities": {"n": 2, "deg": 4, "trials": 100, "seed": 0, "names": None},
    "certify-convexity": {"N": 4, "tuples": 20, "tol": 1e-6, "seed": 0},
    "sample": {"N": 32, "count": 100, "burnin": 500, "thin": 10, "step": 0.1, "mala": True, "chains": None, "adapt": True, "seed": 0, "sd_tol": None, "ks_tol": None},
    "sde": {"alpha": 0.0, "N": 16, "T": 6.0, "dt": 1e-3, "record_every": 10, "slope_factor": 0.85, "seed": 0},
    "semigroup": {"alpha": 0.0, "poly": "X1^2", "N": 32, "paths": 10000, "dt": 0.05, "t": [0.5, 1.0, 2.0], "richardson": True, "rel_tol": 0.02, "z_tol": 3.0, "seed": 0},
    "transport": {
        "N": 64, "count": 100, "T": 20.0, "dt": 0.02, "paths": 2, "d_alpha": 0.02, "alpha_max": 1.0, "mode": "adjoint",
        "scheme": "heun", "grid": "uniform", "grid_power": 2.0, "richardson": False, "single": False, "tail_tol": 1e-2,
        "antithetic": True, "noise": "auto", "sampler": None, "map_tol": 1e-2, "ks_tol": 0.05, "sd_tol": 0.05, "seed": 0,
    },
    "onevar": {
        "V": [0.0, 0.0, 0.5], "W": None, "grid": [-6.0, 6.0, 2048], "alpha_steps": 12, "s_horizon": 20.0, "ds": 0.01,
        "refine": 2, "map_tol": 1e-3, "sd_tol": 1e-8, "ensemble": None, "seed": 0,
    },
}

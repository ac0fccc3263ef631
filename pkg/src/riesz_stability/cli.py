"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 input or configuration error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, fields

import numpy as np

from .families import EPS_MAX, FAMILIES, make_family
from .functionals import DeficitReport, deficit
from .funk_hecke import beta_direct, beta_table
from .jsonio import dumps, format_float
from .riesz_kernel import KernelParams, QuadratureError, ball_energy, ball_potential, potential_slope_fd
from .sphere_math import unit_ball_volume, unit_sphere_area
from .star_sets import RaySet
from .surgery import DEFAULT_C, surgery_reduce

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
MULTIPLIER_TOL = 1e-8
# reduction residual tolerances: P1 absolute, P2 relative to |B^n|, P4 relative to |A|
P1_TOL, P2_TOL, P4_TOL = 1e-9, 1e-6, 1e-9


class InputError(ValueError):
    """Invalid command-line configuration."""


@dataclass(frozen=True)
class ScanConfig:
    n: int
    lam: float
    family: str = "ring"
    eps_min: float = 0.005
    eps_max: float = 0.05
    eps_steps: int = 8
    seed: int = 0
    out: str | None = None
    fmt: str = "csv"
    tol: float = 3.0

    def __post_init__(self):
        if not 2 <= self.n <= 8:
            raise InputError(f"n must lie in 2..8, got {self.n}")
        if not 1.0 < self.lam < self.n:
            raise InputError(f"lambda must lie in (1, n), got {self.lam}")
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        if self.fmt not in ("csv", "json"):
            raise InputError(f"unknown format {self.fmt!r}")
        if self.eps_steps < 1:
            raise InputError("eps-steps must be positive")
        grid = self.eps_grid
        if not (grid[0] > 0.0 and grid[-1] <= EPS_MAX and np.all(np.diff(grid) > 0.0)):
            raise InputError(f"eps grid must be strictly increasing in (0, {EPS_MAX}]")

    @property
    def eps_grid(self) -> np.ndarray:
        if self.eps_steps == 1:
            return np.array([self.eps_min])
        return np.geomspace(self.eps_min, self.eps_max, self.eps_steps)


# formatting


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if v is None:
        return ""
    return str(v)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(row[h]) for h in header])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _render(rows, header, fmt, extra=None) -> str:
    if fmt == "csv":
        return _csv(rows, header)
    doc = {"rows": rows}
    if extra:
        doc.update(extra)
    return dumps(doc, indent=1) + "\n"


# commands


def cmd_multipliers(n: int, lam: float, K: int):
    """Rows (k, beta, beta_direct, diff) and whether every diff is below tolerance."""
    if K < 0:
        raise InputError("K must be non-negative")
    KernelParams(n, lam).require_stability_range()
    beta = beta_table(n, lam, K).beta
    rows = []
    for k in range(K + 1):
        direct = beta_direct(n, lam, k)
        rows.append({"k": k, "beta": float(beta[k]), "beta_direct": direct, "abs_diff": abs(float(beta[k]) - direct)})
    ok = max(r["abs_diff"] for r in rows) < MULTIPLIER_TOL
    return rows, ok


def cmd_ball(n: int, lam: float) -> dict:
    """Ball constants with their check residuals."""
    params = KernelParams(n, lam)
    params.require_stability_range()
    beta = beta_table(n, lam, 1).beta
    phi = ball_potential(params, 1.0)
    phi_direct = ball_potential(params, 1.0, direct=True)
    slope = potential_slope_fd(params)
    return {
        "n": n,
        "lam": lam,
        "phi_sphere": phi,
        "phi_sphere_err": abs(phi - phi_direct),
        "grad_sphere": float(beta[1]),
        "grad_fd_residual": abs(-slope - float(beta[1])),
        "energy": ball_energy(params),
        "identity_residual": abs(lam * phi - (float(beta[0]) - float(beta[1]))),
    }


def _loglog_fit(eps, delta):
    """Least-squares fit log delta = p log eps + log c: (p, c, stderr of p)."""
    x, y = np.log(eps), np.log(delta)
    A = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    dof = max(len(x) - 2, 1)
    s2 = float(res[0]) / dof if res.size else 0.0
    cov = s2 * np.linalg.inv(A.T @ A)
    return float(coef[0]), float(np.exp(coef[1])), float(np.sqrt(cov[0, 0]))


REPORT_FIELDS = [f.name for f in fields(DeficitReport)]


def cmd_scan(cfg: ScanConfig):
    """One DeficitReport per eps plus a log-log fit of delta against eps."""
    params = KernelParams(cfg.n, cfg.lam)
    reports = []
    for eps in cfg.eps_grid:
        A = make_family(cfg.family, cfg.n, float(eps), seed=cfg.seed)
        reports.append(deficit(A, params, family=cfg.family, eps=float(eps), seed=cfg.seed))
    eps = np.array([r.eps for r in reports])
    delta = np.array([r.delta for r in reports])
    err = np.array([r.error for r in reports])
    fit = None
    if np.all(delta > 0.0) and len(eps) >= 2:
        p, c, sp = _loglog_fit(eps, delta)
        fit = {"exponent": p, "exponent_err": sp, "prefactor": c}
    ok = bool(np.all(delta >= -cfg.tol * err))
    return reports, fit, ok


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(trial,)).generate_state(1)[0])


def cmd_verify(n: int, lam: float, trials: int, seed: int, eps_grid, constant=None, tol: float = 3.0):
    """Random zonal trials over the eps grid against delta >= C alpha^2 - tol * error."""
    params = KernelParams(n, lam)
    params.require_stability_range()
    beta = beta_table(n, lam, 2).beta
    area = unit_sphere_area(n)
    C = (beta[1] - beta[2]) / (4.0 * area) if constant is None else float(constant)
    rows = []
    skipped = 0
    for trial in range(trials):
        s = _trial_seed(seed, trial)
        for eps in eps_grid:
            rep = deficit(make_family("random_zonal", n, float(eps), seed=s), params, "random_zonal", float(eps), seed=s)
            if rep.alpha == 0.0:
                skipped += 1
                continue
            bound = C * rep.alpha**2
            rows.append(
                {
                    "trial": trial,
                    "eps": float(eps),
                    "alpha": rep.alpha,
                    "delta": rep.delta,
                    "error": rep.error,
                    "bound": bound,
                    "ratio": rep.delta / rep.alpha**2,
                    "ok": bool(rep.delta >= bound - tol * rep.error),
                }
            )
    ring = deficit(make_family("ring", n, float(eps_grid[0])), params, "ring", float(eps_grid[0]))
    summary = {
        "n": n,
        "lam": lam,
        "trials": trials,
        "seed": seed,
        "constant": float(C),
        "checked": len(rows),
        "skipped": skipped,
        "violations": sum(not r["ok"] for r in rows),
        "min_ratio": min((r["ratio"] for r in rows), default=float("nan")),
        "ring_ratio": ring.delta / ring.alpha**2,
        "ring_ratio_centered": ring.delta / ring.alpha_centered**2,
        "ring_ratio_model": float(beta[1] / (2.0 * area)),
    }
    summary["pass"] = summary["violations"] == 0
    return rows, summary


def cmd_reduce(A: RaySet, params: KernelParams, C: float = DEFAULT_C):
    At, eps, rep = surgery_reduce(A, params, C=C, report=True)
    d = {f.name: getattr(rep, f.name) for f in fields(rep)}
    return At, d


# argument handling


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riesz-stability", description="Riesz-energy stability experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, lam_default=2.0):
        sp.add_argument("--n", type=int, default=3)
        sp.add_argument("--lambda", dest="lam", type=float, default=lam_default)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("multipliers", help="beta_k by recursion and by quadrature")
    common(sp)
    sp.add_argument("--K", type=int, default=10)

    sp = sub.add_parser("ball", help="potential, gradient and energy of the unit ball")
    common(sp)

    for name in ("scan", "verify"):
        sp = sub.add_parser(name, help="family scan with exponent fit" if name == "scan" else "stability sweep")
        common(sp)
        sp.add_argument("--eps-min", type=float, default=0.005)
        sp.add_argument("--eps-max", type=float, default=0.05)
        sp.add_argument("--eps-steps", type=int, default=8)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=3.0, help="allowed slack in units of the error estimate")
        if name == "scan":
            sp.add_argument("--family", choices=FAMILIES, default="ring")
        else:
            sp.add_argument("--trials", type=int, default=50)
            sp.add_argument("--constant-C", dest="constant", type=float, default=None)

    sp = sub.add_parser("reduce", help="reduction surgery on a RaySet JSON file")
    common(sp)
    sp.add_argument("input")
    sp.add_argument("--constant-C", dest="constant", type=float, default=DEFAULT_C)
    sp.add_argument("--report", default=None, help="write the property report here instead of stdout")
    return p


def _run(args) -> int:
    if args.command == "multipliers":
        rows, ok = cmd_multipliers(args.n, args.lam, args.K)
        _emit(_render(rows, ["k", "beta", "beta_direct", "abs_diff"], args.fmt, {"pass": ok}), args.out)
        return EXIT_OK if ok else EXIT_FAIL

    if args.command == "ball":
        row = cmd_ball(args.n, args.lam)
        ok = row["grad_fd_residual"] < 1e-5 and row["identity_residual"] < 1e-10
        _emit(_render([row], list(row), args.fmt, {"pass": ok}), args.out)
        return EXIT_OK if ok else EXIT_FAIL

    if args.command == "scan":
        cfg = ScanConfig(
            args.n, args.lam, args.family, args.eps_min, args.eps_max, args.eps_steps, args.seed, args.out, args.fmt, args.tol
        )
        reports, fit, ok = cmd_scan(cfg)
        rows = [r.to_dict() for r in reports]
        for row, r in zip(rows, reports):
            row["error"] = r.error
        _emit(_render(rows, REPORT_FIELDS + ["error"], cfg.fmt, {"fit": fit, "pass": ok}), cfg.out)
        if fit is not None:
            sys.stderr.write(
                f"fit: exponent {fit['exponent']:.4f} +- {fit['exponent_err']:.2g}, prefactor {fit['prefactor']:.6g}\n"
            )
        return EXIT_OK if ok else EXIT_FAIL

    if args.command == "verify":
        cfg = ScanConfig(args.n, args.lam, "random_zonal", args.eps_min, args.eps_max, args.eps_steps, args.seed, args.out, args.fmt, args.tol)
        if args.trials < 1:
            raise InputError("trials must be positive")
        rows, summary = cmd_verify(cfg.n, cfg.lam, args.trials, cfg.seed, cfg.eps_grid, args.constant, cfg.tol)
        header = ["trial", "eps", "alpha", "delta", "error", "bound", "ratio", "ok"]
        _emit(_render(rows, header, cfg.fmt, {"summary": summary}), cfg.out)
        verdict = "PASS" if summary["pass"] else "FAIL"
        sys.stderr.write(
            f"verify: {verdict} checked={summary['checked']} skipped={summary['skipped']} "
            f"violations={summary['violations']} min delta/alpha^2={summary['min_ratio']:.6g}\n"
        )
        return EXIT_OK if summary["pass"] else EXIT_FAIL

    if args.command == "reduce":
        try:
            with open(args.input, encoding="utf-8") as fh:
                A = RaySet.from_json(fh.read())
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise InputError(f"cannot read RaySet from {args.input}: {exc}") from exc
        if A.n != args.n:
            raise InputError(f"input has n={A.n}, but --n {args.n} was given")
        At, rep = cmd_reduce(A, KernelParams(args.n, args.lam), args.constant)
        _emit(At.to_json() + "\n", args.out)
        text = dumps(rep, indent=1) + "\n"
        if args.report:
            _emit(text, args.report)
        else:
            sys.stderr.write(text)
        ok = (
            rep["P3"]
            and (rep["P1"] is None or rep["P1"] <= P1_TOL)
            and abs(rep["P2"]) <= P2_TOL * unit_ball_volume(A.n)
            and abs(rep["P4"]) <= P4_TOL
        )
        return EXIT_OK if ok else EXIT_FAIL
    raise InputError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except (QuadratureError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"error: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

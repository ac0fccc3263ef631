"""Monte Carlo check of E(B) - E(A) = V - W on every family."""

import sys
from dataclasses import dataclass

from _common import Timer, parse_config, write_outputs

from riesz_stability.families import FAMILIES, make_family
from riesz_stability.functionals import _first_variation, second_variation
from riesz_stability.mc import mc_energy
from riesz_stability.riesz_kernel import KernelParams, ball_energy


@dataclass(frozen=True)
class Config:
    """Decomposition identity; passes when each residual is within z_max combined errors."""

    n: int = 3
    lams: tuple = (1.5, 2.0)
    eps: tuple = (0.02, 0.05)
    samples: int = 2_000_000
    seed: int = 100
    z_max: float = 3.0
    out_dir: str = "results/consistency"


def main(argv=None):
    cfg = parse_config(Config, argv)
    rows = []
    with Timer() as t:
        for lam in cfg.lams:
            params = KernelParams(cfg.n, lam)
            e_ball = ball_energy(params)
            for i, fam in enumerate(FAMILIES):
                for j, eps in enumerate(cfg.eps):
                    A = make_family(fam, cfg.n, eps, seed=17)
                    V, v_err = _first_variation(A, params)
                    W = second_variation(A, params)
                    E = mc_energy(A, params, samples=cfg.samples, seed=cfg.seed + 10 * i + j)
                    err = v_err + W.error + E.stderr
                    resid = (e_ball - E.value) - (V - W.value)
                    rows.append({"lam": lam, "family": fam, "eps": eps, "lhs": e_ball - E.value, "rhs": V - W.value, "residual": resid, "error": err, "z": abs(resid) / err})
    worst = float(max(r["z"] for r in rows))
    write_outputs(cfg.out_dir, "consistency", rows, {"max_z": worst, "pass": bool(worst <= cfg.z_max), "seconds": t.elapsed}, cfg)
    return 0 if worst <= cfg.z_max else 1


if __name__ == "__main__":
    sys.exit(main())

"""Random zonal trials checking delta >= C alpha^2 at several (n, lambda)."""

import sys
from dataclasses import dataclass

from _common import Timer, parse_config, write_outputs

from riesz_stability.cli import ScanConfig, cmd_verify


@dataclass(frozen=True)
class Config:
    """Verification sweep; C defaults to (beta_1 - beta_2)/(4|S|)."""

    dims: tuple = (2, 3, 3, 4)
    lams: tuple = (1.5, 1.5, 2.0, 2.5)
    trials: int = 50
    seed: int = 0
    eps_min: float = 0.005
    eps_max: float = 0.05
    eps_steps: int = 8
    out_dir: str = "results/verify"


def main(argv=None):
    cfg = parse_config(Config, argv)
    rows, summaries = [], []
    with Timer() as t:
        for n, lam in zip(cfg.dims, cfg.lams):
            grid = ScanConfig(n, lam, eps_min=cfg.eps_min, eps_max=cfg.eps_max, eps_steps=cfg.eps_steps).eps_grid
            r, s = cmd_verify(n, lam, cfg.trials, cfg.seed, grid)
            rows += [{"n": n, "lam": lam, **row} for row in r]
            summaries.append(s)
    write_outputs(cfg.out_dir, "verify", rows, {"pairs": summaries, "seconds": t.elapsed}, cfg)
    return 0 if all(s["pass"] for s in summaries) else 1


if __name__ == "__main__":
    sys.exit(main())

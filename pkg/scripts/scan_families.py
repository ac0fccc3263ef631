"""Deficit scans over the test families with log-log fits of delta against eps."""

import sys
from dataclasses import dataclass

import numpy as np
from _common import Timer, parse_config, write_outputs

from riesz_stability.cli import ScanConfig, cmd_scan
from riesz_stability.funk_hecke import beta_table


@dataclass(frozen=True)
class Config:
    """Scan every family at each (n, lambda) pair."""

    dims: tuple = (2, 3, 4)
    lams: tuple = (1.5, 2.0, 2.5)
    families: tuple = ("translate", "dilate", "ring", "squeeze", "random_zonal")
    eps_min: float = 0.005
    eps_max: float = 0.05
    eps_steps: int = 8
    seed: int = 0
    out_dir: str = "results/scans"


def main(argv=None):
    cfg = parse_config(Config, argv)
    rows, fits = [], []
    with Timer() as t:
        for n in cfg.dims:
            for lam in cfg.lams:
                if not 1.0 < lam < n:
                    continue
                beta = beta_table(n, lam, 2).beta
                for fam in cfg.families:
                    scan = ScanConfig(n, lam, fam, cfg.eps_min, cfg.eps_max, cfg.eps_steps, seed=cfg.seed)
                    reports, fit, ok = cmd_scan(scan)
                    rows += [r.to_dict() for r in reports]
                    fits.append(
                        {
                            "n": n,
                            "lam": lam,
                            "family": fam,
                            "ok": ok,
                            "exponent": fit["exponent"] if fit else np.nan,
                            "prefactor": fit["prefactor"] if fit else np.nan,
                            "beta1": float(beta[1]),
                            "beta1_minus_beta2": float(beta[1] - beta[2]),
                        }
                    )
    write_outputs(cfg.out_dir, "scan", rows, {"fits": fits, "seconds": t.elapsed}, cfg)


if __name__ == "__main__":
    sys.exit(main())

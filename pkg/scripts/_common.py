"""Shared helpers for the experiment scripts: dataclass configs as CLI flags."""

import argparse
import csv
import dataclasses
import json
import time
from pathlib import Path

from riesz_stability.jsonio import dumps


def _parse_list(kind):
    def parse(text):
        return tuple(kind(x) for x in text.split(","))

    return parse


def parse_config(cls, argv=None):
    """Build a cls instance from --field flags; tuple fields take comma lists."""
    parser = argparse.ArgumentParser(description=cls.__doc__)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        if isinstance(default, tuple):
            kind = type(default[0]) if default else float
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=_parse_list(kind), default=default)
        else:
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=type(default), default=default)
    return cls(**vars(parser.parse_args(argv)))


def write_outputs(out_dir, name, rows, summary, config):
    """Write rows to <name>.csv and config plus summary to <name>.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if rows:
        with open(out / f"{name}.csv", "w", newline="") as fh:
            header = list(dict.fromkeys(k for r in rows for k in r))
            w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    doc = {"config": dataclasses.asdict(config), "summary": summary}
    (out / f"{name}.json").write_text(dumps(doc, indent=2) + "\n")
    print(json.dumps(summary, indent=2, default=str))


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0

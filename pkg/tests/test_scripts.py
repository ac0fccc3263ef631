import json
import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"

CASES = [
    ("scan_families.py", ["--dims", "3", "--lams", "2.0", "--families", "ring,squeeze", "--eps-steps", "3"], "scan"),
    ("verify_sweep.py", ["--dims", "3", "--lams", "2.0", "--trials", "2", "--eps-steps", "2"], "verify"),
    ("consistency.py", ["--lams", "2.0", "--eps", "0.05", "--samples", "200000"], "consistency"),
    ("surgery_sweep.py", ["--inputs", "3"], "surgery"),
]


@pytest.mark.parametrize("script,args,name", CASES)
def test_script_runs(tmp_path, script, args, name):
    proc = subprocess.run(
        [sys.executable, str(SCRIPTS / script), *args, "--out-dir", str(tmp_path)],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0, proc.stderr
    doc = json.loads((tmp_path / f"{name}.json").read_text())
    assert set(doc) == {"config", "summary"}
    assert (tmp_path / f"{name}.csv").read_text().count("\n") >= 2

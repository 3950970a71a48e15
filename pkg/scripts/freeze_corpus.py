"""Regenerate corpus/expected/ and corpus/manifest.json from corpus/tasks/.

Run only after reviewing a deliberate change in engine output; the test
suite compares fresh runs against the frozen files byte for byte.
"""

from __future__ import annotations

import contextlib
import io
import json
import sys
from pathlib import Path

from lipdouble.cli import main

ROOT = Path(__file__).resolve().parents[1] / "corpus"


def freeze() -> dict:
    manifest = {}
    for task in sorted((ROOT / "tasks").glob("*.json")):
        name = task.stem
        out = ROOT / "expected" / name
        err = io.StringIO()
        with contextlib.redirect_stderr(err):
            code = main(["run", str(task), "--out", str(out)])
        entry = {"task": f"tasks/{task.name}", "exit": code}
        if (out / "report.json").exists():
            entry["report"] = f"expected/{name}/report.json"
            entry["status"] = json.loads((out / "report.json").read_text())["status"]
        if code:
            entry["stderr"] = err.getvalue().splitlines()[0]
        manifest[name] = entry
        print(f"{name}: exit {code}")
    (ROOT / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return manifest


if __name__ == "__main__":
    freeze()
    sys.exit(0)

"""Run manifests and deterministic JSON / CSV / container output.

Floats are written with 17 significant digits and keys are sorted, so the same
payload always produces the same bytes.  Non-finite floats become null.
"""

import csv
import hashlib
import io
import json
import math
import os
import platform
from dataclasses import dataclass, field

import numpy as np
import scipy

from .container import dumps_field


def _float(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = ",\n".join(f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in items)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        body = ",\n".join(pad + _encode(v, indent, level + 1) for v in obj)
        return "[\n" + body + "\n" + end + "]"
    if hasattr(obj, "to_dict"):
        return _encode(obj.to_dict(), indent, level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj, indent=2) -> str:
    return _encode(obj, indent, 0) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def versions():
    from . import __version__

    return {"pmns": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def run_id_for(command, config_echo, extra=None) -> str:
    """Deterministic id from the command and its canonical configuration."""
    blob = dumps_json({"command": command, "config": config_echo, "extra": extra or {}})
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunManifest:
    command: str
    config: dict
    run_id: str
    input_hashes: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    versions: dict = field(default_factory=versions)

    def to_dict(self):
        return {
            "command": self.command,
            "config": self.config,
            "run_id": self.run_id,
            "input_hashes": self.input_hashes,
            "outputs": sorted(self.outputs),
            "wall_time": self.wall_time,
            "versions": self.versions,
        }


def emit_report(run: RunManifest, payload, out_dir, csv_curves=None, fields=None):
    """Write ``<out_dir>/<run_id>/`` with report.json, CSV curves, field containers
    and manifest.json; returns the list of written paths.

    ``csv_curves`` maps a file stem to (header, rows); ``fields`` maps a file
    stem to a SpectralVectorField.  Rewriting the same run is idempotent.
    """
    target = os.path.join(out_dir, run.run_id)
    os.makedirs(target, exist_ok=True)
    files = {"report.json": dumps_json({"run_id": run.run_id, "command": run.command, "result": payload}).encode()}
    for stem, (header, rows) in (csv_curves or {}).items():
        files[f"{stem}.csv"] = csv_text(header, rows).encode()
    for stem, f in (fields or {}).items():
        files[f"{stem}.pmns"] = dumps_field(f)
    run.outputs = sorted(files) + ["manifest.json"]
    files["manifest.json"] = dumps_json(run).encode()
    written = []
    for name, data in files.items():
        path = os.path.join(target, name)
        with open(path, "wb") as fh:
            fh.write(data)
        written.append(path)
    return written

"""CSV/JSON writers that stamp every file with the tool version and a config hash."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not serializable: {type(o).__name__}")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:16]


def provenance(cfg: dict) -> dict:
    return {"tool": "spinpipe", "version": __version__, "config_hash": config_hash(cfg),
            "config": cfg}


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], cfg: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# spinpipe {__version__} config_hash={config_hash(cfg)}\n")
    buf.write(f"# config={canonical_json(cfg)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def json_text(payload: dict, cfg: dict) -> str:
    return json.dumps({"provenance": provenance(cfg), **payload}, sort_keys=True,
                      indent=2, default=_default) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def read_csv_body(path: str | Path) -> list[list[str]]:
    """Rows of a stamped CSV with comment lines removed (header row first)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))

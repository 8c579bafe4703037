"""Run manifests: a JSON sidecar per CLI invocation recording the resolved
configuration and sha256 digests of every file read or written, so any
fitted constant can be traced back to its inputs."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import LdlabError


def file_digest(path) -> str:
    hsh = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            hsh.update(chunk)
    return hsh.hexdigest()


@dataclass
class RunManifest:
    version: str
    command: list
    config: dict
    kernel: dict  # {"n": int, "alpha": float}
    grid: dict  # {"h": float, "box": ...}
    seed: int
    inputs: dict = field(default_factory=dict)  # path -> sha256
    outputs: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)  # fitted constants etc.
    wall_time_s: float = 0.0

    def add_input(self, path) -> None:
        self.inputs[str(path)] = file_digest(path)

    def add_output(self, path) -> None:
        self.outputs[str(path)] = file_digest(path)


def write_manifest(man: RunManifest, path) -> Path:
    """Serialize to JSON. Manifests are never overwritten: if the path is
    taken, a numbered sibling is used, and the chosen path returned."""
    p = Path(path)
    k = 1
    while p.exists():
        k += 1
        p = p.with_name(f"{Path(path).stem}-{k}{Path(path).suffix}")
    payload = asdict(man)
    p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                 encoding="utf-8")
    return p


def load_manifest(path) -> RunManifest:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return RunManifest(**data)


def verify_manifest(path) -> dict:
    """Check that every referenced output exists and matches its digest.
    Returns {"ok": bool, "missing": [...], "changed": [...]}."""
    man = load_manifest(path)
    missing, changed = [], []
    base = Path(path).parent
    for rel, digest in {**man.inputs, **man.outputs}.items():
        p = Path(rel)
        if not p.is_absolute():
            p = base / rel
        if not p.exists():
            missing.append(rel)
        elif file_digest(p) != digest:
            changed.append(rel)
    return {"ok": not missing and not changed,
            "missing": missing, "changed": changed}


class Stopwatch:
    """Context manager filling man.wall_time_s."""

    def __init__(self, man: RunManifest):
        self.man = man

    def __enter__(self):
        self._t0 = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.man.wall_time_s = time.monotonic() - self._t0
        return False

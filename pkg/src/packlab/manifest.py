"""Run manifests: a parameter and digest record emitted next to every output.

A manifest captures enough to re-run a command and check that it reproduces
the same bytes: the argv tail, the resolved seed, package version, digests
of all inputs and outputs, worker count, and wall-clock time (informational
only; everything else is deterministic).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


def file_digest(path: str | Path) -> str:
    hsh = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            hsh.update(block)
    return hsh.hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    argv: list
    seed: int
    version: str
    workers: int
    exit_code: int
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"


def write_manifest(m: RunManifest, path: str | Path) -> None:
    Path(path).write_text(m.to_json(), encoding="utf-8")


def read_manifest(path: str | Path) -> RunManifest:
    return RunManifest(**json.loads(Path(path).read_text(encoding="utf-8")))


def replay(manifest_path: str | Path) -> dict:
    """Re-run the recorded command; compare fresh outputs against the record.

    Returns per-path match flags plus an overall verdict. The command writes
    to its original output locations.
    """
    from . import cli

    m = read_manifest(manifest_path)
    code = cli.run(list(m.argv))
    match = {}
    for path, digest in sorted(m.outputs.items()):
        fresh = file_digest(path) if Path(path).exists() else None
        match[path] = fresh == digest
    all_match = all(match.values()) and code == m.exit_code
    return {"exit_code": code, "exit_code_expected": m.exit_code,
            "match": match, "all_match": all_match}

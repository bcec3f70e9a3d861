"""Run manifests and CSV/JSON emission.

Every CLI run resolves its parameters into a RunManifest that is written
into the JSON sidecar next to the data; re-feeding the manifest's
parameters through the library reproduces the numbers.  Nothing
time-dependent (timestamps, hostnames) enters the outputs, so reruns with
an identical manifest are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

TOOL_NAME = "zenoreg"


def _tool_version() -> str:
    from . import __version__

    return __version__


def format_number(x) -> str:
    """CSV number format: 12 significant digits, '.' decimal."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return f"{float(x):.12g}"


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    """Comma-delimited, LF endings, 12 significant digits."""
    if len(header) != len(columns):
        raise ValueError("header and column counts differ")
    lengths = {len(c) for c in columns}
    if len(lengths) != 1:
        raise ValueError("columns must share one length")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(format_number(v) for v in row) + "\n")


@dataclass
class RunManifest:
    """Everything needed to reproduce one CLI run."""

    subcommand: str
    parameters: dict
    seed: int | None = None
    outputs: list = field(default_factory=list)
    tool: str = TOOL_NAME
    version: str = field(default_factory=_tool_version)

    @property
    def provenance(self) -> str:
        digest = hashlib.sha256(
            json.dumps(self.parameters, sort_keys=True, default=str).encode()
        ).hexdigest()[:12]
        return f"{self.tool}-{self.version}+params.{digest}"

    def as_dict(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "subcommand": self.subcommand,
            "seed": self.seed,
            "parameters": self.parameters,
            "outputs": list(self.outputs),
            "provenance": self.provenance,
        }


def write_sidecar(path, manifest: RunManifest, extra: dict | None = None) -> None:
    payload = dict(extra or {})
    payload["manifest"] = manifest.as_dict()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")

"""File formats and run manifests.

Graph JSON: ``{"vertices": n, "edges": [[u, v, weight], ...]}`` with the
weight defaulting to 1 on input and always written explicitly, edges in
canonical sorted order, so parse(emit(g)) == g.

Matrices: CSV (one row per line) or a JSON 2-D array, emitted as CSV.

Every CLI run writes a manifest next to its outputs recording the command,
input hashes, seed, and flags; re-running an identical manifest reproduces
the outputs byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .exact import DistributionTable
from .graphs import Graph

__all__ = [
    "ARTIFACT_VERSION",
    "FORMAT_VERSION",
    "load_graph",
    "dump_graph",
    "parse_graph_json",
    "graph_to_json",
    "load_matrix",
    "dump_matrix",
    "table_to_json",
    "atomic_write_text",
    "sha256_file",
    "build_manifest",
    "write_manifest",
]

ARTIFACT_VERSION = "0.1.0"
FORMAT_VERSION = "1"


def parse_graph_json(obj: dict) -> Graph:
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise ValueError('graph JSON must be {"vertices": n, "edges": [[u,v,w?],...]}')
    weights = {}
    for item in obj.get("edges", []):
        if len(item) == 2:
            u, v = item
            w = 1.0
        elif len(item) == 3:
            u, v, w = item
        else:
            raise ValueError(f"edge entry {item!r} must be [u, v] or [u, v, weight]")
        weights[(int(u), int(v))] = float(w)
    return Graph(int(obj["vertices"]), weights)


def graph_to_json(g: Graph) -> dict:
    return {
        "vertices": g.vertex_count,
        "edges": [[u, v, g.weights[(u, v)]] for u, v in g.edges],
    }


def load_graph(path: "str | Path") -> Graph:
    with open(path) as f:
        return parse_graph_json(json.load(f))


def dump_graph(g: Graph, path: "str | Path") -> None:
    atomic_write_text(path, json.dumps(graph_to_json(g), indent=2) + "\n")


def load_matrix(path: "str | Path") -> np.ndarray:
    """Matrix from CSV (default) or a JSON 2-D array (.json suffix)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as f:
            data = json.load(f)
        arr = np.asarray(data, dtype=float)
    else:
        arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix in {path}")
    return arr


def dump_matrix(a: np.ndarray, path: "str | Path") -> None:
    lines = [",".join(repr(float(x)) for x in row) for row in np.asarray(a, dtype=float)]
    atomic_write_text(path, "\n".join(lines) + "\n")


def table_to_json(table: DistributionTable) -> dict:
    return {
        "outcomes": [{"key": list(k), "p": table.entries[k]} for k in table.support()],
        "normalizer": table.normalizer,
    }


def atomic_write_text(path: "str | Path", text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: "str | Path") -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command: str, inputs: dict[str, str], seed: int, config: dict) -> dict:
    return {
        "command": command,
        "inputs": {name: sha256_file(p) for name, p in inputs.items()},
        "seed": seed,
        "config": {k: config[k] for k in sorted(config)},
        "versions": {"artifact": ARTIFACT_VERSION, "format": FORMAT_VERSION},
    }


def write_manifest(manifest: dict, out_path: "str | Path") -> Path:
    """Write ``<out>.manifest.json`` next to an output file."""
    out_path = Path(out_path)
    target = out_path.with_name(out_path.name + ".manifest.json")
    atomic_write_text(target, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return target

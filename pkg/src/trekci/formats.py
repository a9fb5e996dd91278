"""JSON and CSV formats shared by the CLI and the witness bundle."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, List, Union

import numpy as np

from .graph_core import BidirectedGraph, DirectedGraph

PathLike = Union[str, Path]


class FormatError(ValueError):
    """Malformed input file or object."""


def load_json(path: PathLike) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc


def dump_json(obj: Any, path: PathLike = None) -> str:
    text = json.dumps(obj, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FormatError(f"{what} must be an integer, got {x!r}")
    return x


def graph_from_json(obj) -> DirectedGraph:
    """``{"n": 4, "edges": [[1, 2], ...]}``; self-loops are dropped,
    repeated edges are an error."""
    if not isinstance(obj, dict) or "n" not in obj:
        raise FormatError('graph must be an object with "n" and "edges"')
    n = _int(obj["n"], "n")
    if n < 0:
        raise FormatError("n must be nonnegative")
    edges = obj.get("edges", [])
    if not isinstance(edges, list):
        raise FormatError("edges must be a list")
    seen = set()
    for e in edges:
        if not isinstance(e, list) or len(e) != 2:
            raise FormatError(f"edge {e!r} is not a pair")
        a, b = _int(e[0], "vertex"), _int(e[1], "vertex")
        if not (1 <= a <= n and 1 <= b <= n):
            raise FormatError(f"edge {e!r} has a vertex outside 1..{n}")
        if (a, b) in seen:
            raise FormatError(f"duplicate edge {a}->{b}")
        seen.add((a, b))
    return DirectedGraph.from_edges(n, seen)


def graph_to_json(g: DirectedGraph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in sorted(g.edges)]}


def read_graph(path: PathLike) -> DirectedGraph:
    return graph_from_json(load_json(path))


def bidirected_to_json(bg: BidirectedGraph) -> dict:
    return {
        "n": bg.n,
        "edges": [list(p) for p in bg.pairs()],
        "adjacency": {str(v): list(bg.neighbors(v)) for v in bg.vertices},
    }


def matrix_to_csv(A) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.atleast_2d(np.asarray(A, float)), fmt="%.17g", delimiter=",")
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if rows and len({len(r) for r in rows}) != 1:
        raise FormatError("ragged matrix rows")
    try:
        A = np.array([[float(x) for x in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise FormatError(f"bad matrix entry: {exc}") from exc
    return A.reshape(len(rows), -1) if rows else np.zeros((0, 0))


def matrix_to_json(A) -> dict:
    A = np.asarray(A, float)
    return {"rows": A.shape[0], "cols": A.shape[1], "data": matrix_to_csv(A)}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, list):
        A = np.array(obj, dtype=float)
    elif isinstance(obj, dict) and {"rows", "cols", "data"} <= set(obj):
        A = matrix_from_csv(obj["data"])
        if A.shape != (obj["rows"], obj["cols"]):
            raise FormatError(f"matrix data has shape {A.shape}, declared "
                              f"({obj['rows']}, {obj['cols']})")
    else:
        raise FormatError('matrix must be {"rows", "cols", "data"} or a nested list')
    if A.ndim != 2:
        raise FormatError("matrix must be 2-d")
    return A


def write_samples(X, path: PathLike) -> None:
    Path(path).write_text(matrix_to_csv(X))


def parse_vertex_list(text: str) -> List[int]:
    """``"1,3"`` or ``"1 3"``; empty means the empty set."""
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return [int(p) for p in parts]
    except ValueError as exc:
        raise FormatError(f"bad vertex list {text!r}") from exc

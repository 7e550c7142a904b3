"""JSON, CSV and Matrix Market serialization."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np
import scipy.io

from .cochains import Cochain
from .complex import Triangulation, build
from .operators import OperatorMatrix


class SchemaError(ValueError):
    pass


def complex_to_json(cx: Triangulation) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "vertices": [{"id": v, "c": float(c)} for v, c in zip(cx.vertices, cx.c)],
        "edges": [{"tail": t, "head": h, "r": float(r)}
                  for (t, h), r in zip(cx.edge_keys(), cx.r)],
        "faces": [{"v": list(cx.face_vertices(k)), "s": float(s)}
                  for k, s in enumerate(cx.s)],
    }
    if cx.meta:
        doc["meta"] = _plain(dict(cx.meta))
    return doc


def _plain(obj):
    """Copy nested mappings/sequences into JSON-native dicts and lists."""
    if isinstance(obj, dict) or hasattr(obj, "items"):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def complex_from_json(doc: Any) -> Triangulation:
    """Validate a complex document; raises :class:`SchemaError` on bad shape
    and :class:`~trilap.complex.ComplexError` on invalid simplices."""
    if not isinstance(doc, dict):
        raise SchemaError("complex document must be a JSON object")
    try:
        vertices = [(int(v["id"]), float(v["c"])) for v in doc["vertices"]]
        edges = [(int(e["tail"]), int(e["head"]), float(e["r"]))
                 for e in doc.get("edges", [])]
        faces = []
        for f in doc.get("faces", []):
            tri = tuple(int(x) for x in f["v"])
            faces.append((tri, float(f["s"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed complex document: {exc!r}") from exc
    meta = doc.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise SchemaError("meta must be an object")
    return build(vertices, edges, faces, meta)


def dumps_complex(cx: Triangulation) -> str:
    return json.dumps(complex_to_json(cx), indent=1) + "\n"


def loads_complex(text: str) -> Triangulation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return complex_from_json(doc)


def save_complex(cx: Triangulation, path: str | Path) -> None:
    Path(path).write_text(dumps_complex(cx))


def load_complex(path: str | Path) -> Triangulation:
    return loads_complex(Path(path).read_text())


def cochain_to_json(a: Cochain) -> dict[str, Any]:
    simp = a.complex.simplices(a.degree)
    return {"k": a.degree,
            "entries": [{"simplex": list(s), "re": float(v.real),
                         "im": float(v.imag)}
                        for s, v in zip(simp, a.values)]}


def cochain_from_json(cx: Triangulation, doc: Any) -> Cochain:
    try:
        k = int(doc["k"])
        entries = {tuple(int(x) for x in e["simplex"]):
                   complex(float(e["re"]), float(e.get("im", 0.0)))
                   for e in doc["entries"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed cochain document: {exc!r}") from exc
    if k == 0:
        entries = {s[0]: v for s, v in entries.items()}
    return Cochain.from_dict(cx, k, entries)


def write_matrix_market(opm: OperatorMatrix, path: str | Path) -> None:
    scipy.io.mmwrite(str(path), opm.matrix.astype(complex).tocoo(),
                     comment=f"{opm.name}: degree {opm.source} -> {opm.target}",
                     field="complex", precision=17, symmetry="general")


def read_matrix_market(path: str | Path):
    return scipy.io.mmread(str(path)).tocsr()


def fmt(x: float) -> str:
    return "%.17g" % x


def spectrum_csv(values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "eigenvalue"])
    for i, v in enumerate(values):
        w.writerow([i, fmt(float(v))])
    return buf.getvalue()


def read_spectrum_csv(text: str) -> np.ndarray:
    rows = list(csv.DictReader(io.StringIO(text)))
    return np.array([float(r["eigenvalue"]) for r in rows])


def coefficients_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "abs_coefficient"])
    for n, v in rows:
        w.writerow([n, fmt(v)])
    return buf.getvalue()

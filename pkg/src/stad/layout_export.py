"""Weighted node-link output: annotation, layout, file exports and SVG."""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from . import __version__
from .data_io import DistanceMatrix
from .graph_core import UnitGraph
from .objective import CorrelationTrace

FORMATS = ("json", "graphml", "dot", "svg")

# tab10
PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


@dataclass
class StadNetwork:
    n: int
    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    labels: list[str]
    attributes: dict[str, list] = field(default_factory=dict)
    correlation: Optional[float] = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def edge_count(self) -> int:
        return self.u.shape[0]

    def pairs(self) -> set[tuple[int, int]]:
        return set(zip(self.u.tolist(), self.v.tolist()))

    def weights(self) -> dict[tuple[int, int], float]:
        return dict(zip(zip(self.u.tolist(), self.v.tolist()), self.weight.tolist()))


def annotate(
    g: UnitGraph,
    d: DistanceMatrix,
    meta: Optional[dict] = None,
    labels: Optional[list[str]] = None,
    attributes: Optional[dict[str, list]] = None,
    correlation: Optional[float] = None,
) -> StadNetwork:
    """Attach the original distance to each edge of ``g``."""
    u, v = np.minimum(g.u, g.v), np.maximum(g.u, g.v)
    order = np.lexsort((v, u))
    u, v = u[order].astype(np.int64), v[order].astype(np.int64)
    n = d.n
    w = d.condensed[n * u - u * (u + 1) // 2 + (v - u - 1)]
    labels = list(labels) if labels is not None else [str(k) for k in range(n)]
    attrs = {k: list(vals) for k, vals in (attributes or {}).items()}
    for k, vals in attrs.items():
        if len(vals) != n:
            raise ValueError(f"attribute {k!r} has {len(vals)} values for {n} nodes")
    meta = dict(meta or {})
    meta.setdefault("version", __version__)
    return StadNetwork(n, u, v, np.array(w, dtype=float), labels, attrs, correlation, meta)


# ---------------------------------------------------------------- layout


@dataclass(frozen=True)
class LayoutResult:
    coords: np.ndarray
    stress: list[float]


def geodesic_distances(net: StadNetwork) -> np.ndarray:
    w = net.weight.astype(float)
    top = float(w.max()) if w.size else 0.0
    # csgraph drops explicit zeros, so coincident points get a tiny length
    w = np.full_like(w, 1.0) if top == 0 else np.maximum(w, 1e-9 * top)
    m = coo_matrix((w, (net.u, net.v)), shape=(net.n, net.n)).tocsr()
    return shortest_path(m, method="D", directed=False)


def _stress(x, delta, wts, iu):
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    return float((wts[iu] * (dist[iu] - delta[iu]) ** 2).sum()), dist


def _smacof(x, delta, wts, lap_pinv, iterations, tol):
    n = x.shape[0]
    iu = np.triu_indices(n, k=1)
    s, dist = _stress(x, delta, wts, iu)
    history = [s]
    for _ in range(iterations):
        with np.errstate(divide="ignore", invalid="ignore"):
            b = np.where(dist > 0, -wts * delta / dist, 0.0)
        b[np.diag_indices(n)] = 0.0
        b[np.diag_indices(n)] = -b.sum(axis=1)
        x = lap_pinv @ (b @ x)
        s_new, dist = _stress(x, delta, wts, iu)
        history.append(s_new)
        if s - s_new <= tol * max(s, 1e-300):
            break
        s = s_new
    return x, history


def _classical_mds(delta):
    n = delta.shape[0]
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (delta**2) @ j
    vals, vecs = np.linalg.eigh(b)
    top = np.argsort(vals)[::-1][:2]
    x = vecs[:, top] * np.sqrt(np.maximum(vals[top], 0.0))
    # fix the eigenvector signs so the start is reproducible
    for k in range(x.shape[1]):
        col = x[:, k]
        pivot = np.argmax(np.abs(col))
        if col[pivot] < 0:
            x[:, k] = -col
    return x


def layout(net: StadNetwork, seed: int = 0, iterations: int = 300, tol: float = 1e-9) -> LayoutResult:
    """Stress majorization (SMACOF) on weighted geodesic distances.

    Two starts are descended: the vertices on a circle in seeded random
    order, and classical MDS of the geodesics. The lower-stress result wins,
    which avoids most folded local minima of the circle start.
    """
    n = net.n
    delta = geodesic_distances(net)
    if not np.all(np.isfinite(delta)):
        raise ValueError("layout needs a connected network")
    off = ~np.eye(n, dtype=bool)
    positive = delta[off][delta[off] > 0]
    floor = positive.min() * 1e-6 if positive.size else 1.0
    delta = np.where(off, np.maximum(delta, floor), 0.0)
    wts = np.divide(1.0, delta**2, out=np.zeros_like(delta), where=off)

    rng = np.random.default_rng(seed)
    angle = rng.permutation(n) * (2 * math.pi / n)
    radius = delta.max() / 2
    circle = radius * np.column_stack([np.cos(angle), np.sin(angle)])

    lap = -wts.copy()
    lap[np.diag_indices(n)] = wts.sum(axis=1)
    lap_pinv = np.linalg.inv(lap + 1.0 / n) - 1.0 / n

    runs = [_smacof(start, delta, wts, lap_pinv, iterations, tol) for start in (circle, _classical_mds(delta))]
    x, history = min(runs, key=lambda run: run[1][-1])
    x = x - x.mean(axis=0)
    return LayoutResult(x, history)


# ---------------------------------------------------------------- exports


def to_dict(net: StadNetwork) -> dict:
    return {
        "nodes": [
            {"id": k, "label": net.labels[k], "attrs": {a: _plain(vals[k]) for a, vals in sorted(net.attributes.items())}}
            for k in range(net.n)
        ],
        "links": [
            {"source": int(a), "target": int(b), "weight": float(w)}
            for a, b, w in zip(net.u.tolist(), net.v.tolist(), net.weight.tolist())
        ],
        "meta": {"correlation": net.correlation, **net.meta},
    }


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def from_dict(doc: dict) -> StadNetwork:
    nodes = sorted(doc["nodes"], key=lambda nd: nd["id"])
    n = len(nodes)
    names = sorted({k for nd in nodes for k in nd.get("attrs", {})})
    attrs = {k: [nd.get("attrs", {}).get(k) for nd in nodes] for k in names}
    links = doc["links"]
    u = np.array([min(e["source"], e["target"]) for e in links], dtype=np.int64)
    v = np.array([max(e["source"], e["target"]) for e in links], dtype=np.int64)
    w = np.array([e["weight"] for e in links], dtype=float)
    meta = dict(doc.get("meta", {}))
    corr = meta.pop("correlation", None)
    return StadNetwork(n, u, v, w, [nd["label"] for nd in nodes], attrs, corr, meta)


def read_json(source) -> StadNetwork:
    if isinstance(source, (bytes, bytearray)):
        return from_dict(json.loads(source))
    return from_dict(json.loads(Path(source).read_text(encoding="utf-8")))


def _json_bytes(net: StadNetwork) -> bytes:
    return (json.dumps(to_dict(net), sort_keys=True, indent=1) + "\n").encode("utf-8")


def _attr_type(values) -> str:
    if all(isinstance(_plain(x), (int, float)) and not isinstance(_plain(x), bool) for x in values):
        return "double"
    return "string"


def _graphml_bytes(net: StadNetwork) -> bytes:
    ns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", {"xmlns": ns})
    ET.SubElement(root, "key", {"id": "weight", "for": "edge", "attr.name": "weight", "attr.type": "double"})
    ET.SubElement(root, "key", {"id": "label", "for": "node", "attr.name": "label", "attr.type": "string"})
    types = {}
    for k, (name, vals) in enumerate(sorted(net.attributes.items())):
        types[name] = (f"a{k}", _attr_type(vals))
        ET.SubElement(root, "key", {"id": f"a{k}", "for": "node", "attr.name": name, "attr.type": types[name][1]})
    ET.SubElement(root, "key", {"id": "correlation", "for": "graph", "attr.name": "correlation", "attr.type": "double"})
    ET.SubElement(root, "key", {"id": "provenance", "for": "graph", "attr.name": "provenance", "attr.type": "string"})
    graph = ET.SubElement(root, "graph", {"id": "stad", "edgedefault": "undirected"})
    if net.correlation is not None:
        ET.SubElement(graph, "data", {"key": "correlation"}).text = repr(float(net.correlation))
    ET.SubElement(graph, "data", {"key": "provenance"}).text = json.dumps(net.meta, sort_keys=True)
    for k in range(net.n):
        node = ET.SubElement(graph, "node", {"id": f"n{k}"})
        ET.SubElement(node, "data", {"key": "label"}).text = net.labels[k]
        for name, vals in sorted(net.attributes.items()):
            key, kind = types[name]
            value = _plain(vals[k])
            text = repr(float(value)) if kind == "double" else str(value)
            ET.SubElement(node, "data", {"key": key}).text = text
    for e, (a, b, w) in enumerate(zip(net.u.tolist(), net.v.tolist(), net.weight.tolist())):
        edge = ET.SubElement(graph, "edge", {"id": f"e{e}", "source": f"n{a}", "target": f"n{b}"})
        ET.SubElement(edge, "data", {"key": "weight"}).text = repr(float(w))
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def _dot_quote(value) -> str:
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_bytes(net: StadNetwork) -> bytes:
    lines = ["graph stad {"]
    if net.correlation is not None:
        lines.append(f"  correlation={_dot_quote(repr(float(net.correlation)))};")
    lines.append(f"  provenance={_dot_quote(json.dumps(net.meta, sort_keys=True))};")
    for k in range(net.n):
        attrs = [f"label={_dot_quote(net.labels[k])}"]
        for name, vals in sorted(net.attributes.items()):
            value = _plain(vals[k])
            attrs.append(f"{_dot_quote(name)}={_dot_quote(repr(value) if isinstance(value, float) else value)}")
        lines.append(f"  {k} [{', '.join(attrs)}];")
    for a, b, w in zip(net.u.tolist(), net.v.tolist(), net.weight.tolist()):
        lines.append(f'  {a} -- {b} [weight="{float(w)!r}"];')
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_graph(net: StadNetwork, fmt: str = "json") -> bytes:
    if fmt == "json":
        return _json_bytes(net)
    if fmt == "graphml":
        return _graphml_bytes(net)
    if fmt == "dot":
        return _dot_bytes(net)
    raise ValueError(f"unknown graph format {fmt!r}")


def write_graph(net: StadNetwork, dest, fmt: Optional[str] = None) -> Path:
    dest = Path(dest)
    fmt = fmt or dest.suffix.lstrip(".")
    data = export_graph(net, fmt)
    try:
        dest.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {dest}: {exc.strerror}") from exc
    return dest


# ---------------------------------------------------------------- SVG


@dataclass(frozen=True)
class NodeStyle:
    size_attr: Optional[str] = None
    color_attr: Optional[str] = None
    r_min: float = 3.0
    r_max: float = 12.0
    categorical: Optional[bool] = None
    canvas: float = 800.0
    margin: float = 40.0


def _is_categorical(values) -> bool:
    vals = [_plain(x) for x in values]
    if any(isinstance(x, str) for x in vals):
        return True
    return all(float(x).is_integer() for x in vals) and len(set(vals)) <= len(PALETTE)


def _mix(c0: str, c1: str, t: float) -> str:
    a = [int(c0[k:k + 2], 16) for k in (1, 3, 5)]
    b = [int(c1[k:k + 2], 16) for k in (1, 3, 5)]
    return "#" + "".join(f"{round(x + (y - x) * t):02x}" for x, y in zip(a, b))


def node_radii(net: StadNetwork, style: NodeStyle) -> np.ndarray:
    if style.size_attr is None:
        return np.full(net.n, (style.r_min + style.r_max) / 2)
    if style.size_attr not in net.attributes:
        raise KeyError(f"style references missing attribute {style.size_attr!r}")
    vals = np.array([float(_plain(x)) for x in net.attributes[style.size_attr]])
    span = vals.max() - vals.min()
    t = (vals - vals.min()) / span if span > 0 else np.full(net.n, 0.5)
    return style.r_min + t * (style.r_max - style.r_min)


def node_fills(net: StadNetwork, style: NodeStyle) -> list[str]:
    if style.color_attr is None:
        return [PALETTE[0]] * net.n
    if style.color_attr not in net.attributes:
        raise KeyError(f"style references missing attribute {style.color_attr!r}")
    vals = [_plain(x) for x in net.attributes[style.color_attr]]
    categorical = style.categorical if style.categorical is not None else _is_categorical(vals)
    if categorical:
        cats = sorted(set(vals), key=lambda x: (isinstance(x, str), x))
        pos = {c: k for k, c in enumerate(cats)}
        return [PALETTE[pos[x] % len(PALETTE)] for x in vals]
    arr = np.array(vals, dtype=float)
    span = arr.max() - arr.min()
    t = (arr - arr.min()) / span if span > 0 else np.full(net.n, 0.5)
    return [_mix("#3b4cc0", "#b40426", x) for x in t]


def render_svg(net: StadNetwork, lay: LayoutResult, style: NodeStyle = NodeStyle()) -> bytes:
    if lay.coords.shape != (net.n, 2):
        raise ValueError("layout does not cover every vertex")
    radii = node_radii(net, style)
    fills = node_fills(net, style)
    xy = lay.coords - lay.coords.min(axis=0)
    extent = xy.max() if xy.max() > 0 else 1.0
    inner = style.canvas - 2 * style.margin
    xy = style.margin + xy * (inner / extent)
    size = style.canvas
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size:g}" height="{size + 30:g}" '
        f'viewBox="0 0 {size:g} {size + 30:g}">',
        f'<desc>{_xml_escape(json.dumps(net.meta, sort_keys=True))}</desc>',
        '<rect width="100%" height="100%" fill="white"/>',
        '<g stroke="#999999" stroke-width="1">',
    ]
    for a, b in zip(net.u.tolist(), net.v.tolist()):
        out.append(f'<line x1="{xy[a, 0]:.2f}" y1="{xy[a, 1]:.2f}" x2="{xy[b, 0]:.2f}" y2="{xy[b, 1]:.2f}"/>')
    out.append('</g>')
    out.append('<g stroke="#333333" stroke-width="0.5">')
    for k in range(net.n):
        out.append(
            f'<circle cx="{xy[k, 0]:.2f}" cy="{xy[k, 1]:.2f}" r="{radii[k]:.3f}" fill="{fills[k]}">'
            f'<title>{_xml_escape(net.labels[k])}</title></circle>'
        )
    out.append('</g>')
    caption = f"n = {net.n}, edges = {net.edge_count}"
    if net.correlation is not None:
        caption = f"r = {net.correlation:.4f}, " + caption
    out.append(f'<text x="{style.margin:g}" y="{size + 15:g}" font-family="sans-serif" font-size="14">{caption}</text>')
    out.append('</svg>')
    return ("\n".join(out) + "\n").encode("utf-8")


def _xml_escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_trace_svg(trace: CorrelationTrace, width: float = 640, height: float = 400,
                     note: str = "") -> bytes:
    """Correlation against number of added edges, with the maximum marked.
    ``note`` goes into the SVG description element."""
    pad = 50.0
    xs = trace.i.astype(float)
    ys = trace.r
    x_span = xs.max() - xs.min() or 1.0
    y_lo, y_hi = min(0.0, float(ys.min())), max(1.0, float(ys.max()))
    px = pad + (xs - xs.min()) / x_span * (width - 2 * pad)
    py = height - pad - (ys - y_lo) / (y_hi - y_lo) * (height - 2 * pad)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    k = trace.argmax
    return "\n".join([
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:g}" height="{height:g}">',
        f'<desc>{_xml_escape(note)}</desc>',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points="{pts}"/>',
        f'<circle cx="{px[k]:.2f}" cy="{py[k]:.2f}" r="4" fill="#d62728"/>',
        f'<text x="{width / 2:g}" y="{height - 12:g}" text-anchor="middle" font-family="sans-serif" '
        'font-size="12">edges added to the MST</text>',
        f'<text x="14" y="{height / 2:g}" font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {height / 2:g})" text-anchor="middle">correlation</text>',
        f'<text x="{px[k]:.2f}" y="{py[k] - 8:.2f}" font-family="sans-serif" font-size="11" '
        f'text-anchor="middle">i={int(xs[k])}, r={ys[k]:.4f}</text>',
        '</svg>',
        "",
    ]).encode("utf-8")

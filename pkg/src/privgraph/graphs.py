"""Random connection model: Poisson vertex processes with attributes and
conditionally independent Bernoulli edges.

A graph is sampled by drawing a Poisson number of vertices, giving each an
attribute (iid from an empirical dataset or a discrete probability measure)
and a uniform identifier, then connecting each unordered pair independently
with probability kernel(x_i, x_j).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .measures import ProbabilityMeasure
from .space import AttributeDataset, pairwise_distances

CHUNG_LU = "chung_lu"
CONSTANT = "constant"
INVERSE_DISTANCE = "inverse_distance"


@dataclass(frozen=True)
class Kernel:
    """Symmetric edge connection function on [0,1]^d x [0,1]^d -> [0,1].

    ``lipschitz_constant`` is with respect to the sup-norm on the cube:
    d for the coordinate-product kernel, 0 for constants, 1/scale for the
    exponential-decay kernel exp(-dist/scale).
    """

    kind: str
    p: float = 0.0
    scale: float = 1.0
    d: int = 1
    metric: str = "sup"

    def __post_init__(self):
        if self.kind == CONSTANT and not 0.0 <= self.p <= 1.0:
            raise ValueError("constant kernel needs p in [0,1]")
        if self.kind == INVERSE_DISTANCE and self.scale <= 0:
            raise ValueError("inverse_distance kernel needs scale > 0")
        if self.kind not in (CHUNG_LU, CONSTANT, INVERSE_DISTANCE):
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @property
    def lipschitz_constant(self) -> float:
        if self.kind == CHUNG_LU:
            return float(self.d)
        if self.kind == CONSTANT:
            return 0.0
        return 1.0 / self.scale


def chung_lu(d: int = 1) -> Kernel:
    """kappa(x, y) = prod_j x_j y_j; vertices with large attributes connect more."""
    return Kernel(kind=CHUNG_LU, d=d)


def constant_kernel(p: float) -> Kernel:
    return Kernel(kind=CONSTANT, p=p)


def inverse_distance(scale: float, metric: str = "sup") -> Kernel:
    """kappa(x, y) = exp(-dist(x, y)/scale); equals 1 at zero distance."""
    return Kernel(kind=INVERSE_DISTANCE, scale=scale, metric=metric)


def kernel_matrix(kernel: Kernel, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """(n, d) x (m, d) -> (n, m) matrix of connection probabilities."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if kernel.kind == CHUNG_LU:
        return np.outer(xs.prod(axis=1), ys.prod(axis=1))
    if kernel.kind == CONSTANT:
        return np.full((xs.shape[0], ys.shape[0]), kernel.p)
    dist = pairwise_distances(xs, ys, metric=kernel.metric)
    return np.exp(-dist / kernel.scale)


def kernel_eval(kernel: Kernel, x, y) -> float:
    """Single-pair connection probability."""
    return float(kernel_matrix(kernel, np.atleast_2d(x), np.atleast_2d(y))[0, 0])


@dataclass(frozen=True)
class AttributedGraph:
    """Vertices = (attribute, identifier) pairs; undirected simple edges.

    ``adjacency`` is a symmetric boolean matrix with zero diagonal; the edge
    list view enumerates index pairs i < j.
    """

    attributes: np.ndarray
    identifiers: np.ndarray
    adjacency: np.ndarray = field(repr=False)

    def __post_init__(self):
        attrs = np.atleast_2d(np.asarray(self.attributes, dtype=float))
        ids = np.asarray(self.identifiers, dtype=float).ravel()
        adj = np.asarray(self.adjacency, dtype=bool)
        n = ids.size
        if attrs.shape[0] != n or adj.shape != (n, n):
            raise ValueError("inconsistent vertex arrays")
        if n and (np.any(np.diag(adj)) or not np.array_equal(adj, adj.T)):
            raise ValueError("adjacency must be symmetric with no self-loops")
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "identifiers", ids)
        object.__setattr__(self, "adjacency", adj)

    @property
    def n_vertices(self) -> int:
        return self.identifiers.size

    @property
    def n_edges(self) -> int:
        return int(np.triu(self.adjacency, 1).sum())

    def edge_list(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(np.int64)


def empty_graph(d: int) -> AttributedGraph:
    return AttributedGraph(
        attributes=np.zeros((0, d)),
        identifiers=np.zeros(0),
        adjacency=np.zeros((0, 0), dtype=bool),
    )


def _distinct_uniform_ids(n: int, rng: np.random.Generator) -> np.ndarray:
    ids = rng.random(n)
    # duplicates have probability zero but rejection keeps the invariant exact
    while np.unique(ids).size < n:
        _, first = np.unique(ids, return_index=True)
        dup = np.setdiff1d(np.arange(n), first)
        ids[dup] = rng.random(dup.size)
    return ids


def sample_edges(
    kernel: Kernel, attrs: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Independent Bernoulli edges on unordered pairs given the attributes."""
    n = attrs.shape[0]
    probs = kernel_matrix(kernel, attrs, attrs)
    u = rng.random((n, n))
    upper = np.triu(u < probs, 1)
    return upper | upper.T


def sample_graph(
    attr_measure: AttributeDataset | ProbabilityMeasure | np.ndarray,
    intensity: float,
    kernel: Kernel,
    rng: np.random.Generator,
) -> AttributedGraph:
    """One draw from the random connection model.

    Vertex count ~ Poisson(intensity); attributes iid from ``attr_measure``
    (uniform over a dataset's points, or per-weight over a measure's support);
    identifiers iid uniform on [0,1]; each pair carries an edge independently
    with probability kernel(x_i, x_j).
    """
    if intensity <= 0:
        raise ValueError("intensity must be > 0")
    n = int(rng.poisson(intensity))
    if isinstance(attr_measure, ProbabilityMeasure):
        support = attr_measure.support
        idx = rng.choice(support.shape[0], size=n, p=attr_measure.weights / attr_measure.weights.sum())
        attrs = support[idx]
    else:
        pts = attr_measure.points if isinstance(attr_measure, AttributeDataset) else np.atleast_2d(attr_measure)
        attrs = pts[rng.integers(0, pts.shape[0], size=n)]
    if n == 0:
        return empty_graph(attrs.shape[1] if attrs.ndim == 2 else 1)
    ids = _distinct_uniform_ids(n, rng)
    adj = sample_edges(kernel, attrs, rng)
    return AttributedGraph(attributes=attrs, identifiers=ids, adjacency=adj)


# -- serialization -----------------------------------------------------------


def graph_to_dict(g: AttributedGraph) -> dict:
    return {
        "vertices": [
            {"attr": g.attributes[i].tolist(), "id": float(g.identifiers[i])}
            for i in range(g.n_vertices)
        ],
        "edges": [[int(i), int(j)] for i, j in g.edge_list()],
    }


def graph_from_dict(obj: dict) -> AttributedGraph:
    verts = obj.get("vertices", [])
    n = len(verts)
    if n == 0:
        return empty_graph(1)
    attrs = np.array([v["attr"] for v in verts], dtype=float)
    ids = np.array([v["id"] for v in verts], dtype=float)
    adj = np.zeros((n, n), dtype=bool)
    for i, j in obj.get("edges", []):
        adj[i, j] = adj[j, i] = True
    np.fill_diagonal(adj, False)
    return AttributedGraph(attributes=attrs, identifiers=ids, adjacency=adj)


def graph_to_json(g: AttributedGraph) -> str:
    return json.dumps(graph_to_dict(g))


def graph_from_json(text: str) -> AttributedGraph:
    return graph_from_dict(json.loads(text))


def graph_to_dot(g: AttributedGraph, name: str = "G") -> str:
    """DOT export with grayscale vertices; small attributes render dark."""
    lines = [f"graph {name} {{", "  node [shape=circle style=filled label=\"\"];"]
    for i in range(g.n_vertices):
        shade = float(np.mean(g.attributes[i]))
        shade = min(max(shade, 0.0), 1.0)
        lines.append(f'  {i} [fillcolor="0.000 0.000 {shade:.3f}"];')
    for i, j in g.edge_list():
        lines.append(f"  {i} -- {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_edge_list_text(g: AttributedGraph) -> str:
    return "".join(f"{i} {j}\n" for i, j in g.edge_list())

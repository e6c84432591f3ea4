"""Shared graph builders for the test suite."""

from __future__ import annotations

import numpy as np

from graphvortex import WeightedGraph


def two_vertex(mu=(1.0, 1.0), w=1.0) -> WeightedGraph:
    return WeightedGraph(["x0", "x1"], mu, [("x0", "x1", w)])


def path3() -> WeightedGraph:
    return WeightedGraph(
        ["x0", "x1", "x2"], [1.0, 1.0, 1.0], [("x0", "x1", 1.0), ("x1", "x2", 1.0)]
    )


def random_connected(rng: np.random.Generator, n_max: int = 50) -> WeightedGraph:
    """Random connected graph: a random tree plus extra random edges.

    Vertex measures and edge weights are drawn from (0.5, 2.0].
    """
    n = int(rng.integers(2, n_max + 1))
    ids = [f"v{k}" for k in range(n)]
    mu = 2.0 - rng.uniform(0.0, 1.5, size=n)
    edges = []
    present = set()
    for k in range(1, n):
        j = int(rng.integers(0, k))
        edges.append((ids[j], ids[k], 2.0 - rng.uniform(0.0, 1.5)))
        present.add((j, k))
    p_extra = min(1.0, 2.0 / n)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in present and rng.uniform() < p_extra:
                edges.append((ids[i], ids[j], 2.0 - rng.uniform(0.0, 1.5)))
    return WeightedGraph(ids, mu, edges)


def naive_laplacian(g: WeightedGraph, u) -> np.ndarray:
    """Straightforward edge-loop evaluation of the weighted Laplacian."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(len(g))
    for a, b, w in g.edges():
        i, j = g.index[a], g.index[b]
        out[i] += w * (u[j] - u[i])
        out[j] += w * (u[i] - u[j])
    return out / g.mu


def naive_gradient_form(g: WeightedGraph, u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = np.zeros(len(g))
    for a, b, w in g.edges():
        i, j = g.index[a], g.index[b]
        t = w * (u[j] - u[i]) * (v[j] - v[i])
        out[i] += t
        out[j] += t
    return out / (2.0 * g.mu)

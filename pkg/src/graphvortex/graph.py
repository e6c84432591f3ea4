"""Finite weighted graphs and their discrete differential operators.

A graph carries a positive vertex measure ``mu`` and symmetric positive
edge weights ``w``.  These induce the weighted Laplacian

    (lap u)(x) = (1/mu(x)) * sum_{y ~ x} w_xy * (u(y) - u(x)),

the gradient form

    grad(u, v)(x) = (1/(2 mu(x))) * sum_{y ~ x} w_xy * (u(y)-u(x)) * (v(y)-v(x)),

the vertex integral ``sum_x mu(x) u(x)`` and the Sobolev norm built from
them.  Vertex functions are plain numpy arrays aligned with the graph's
fixed vertex ordering.

Key identities (used heavily by the solvers and enforced by the tests):

* summation by parts: integral of v * lap(u) equals minus the integral of
  grad(u, v), so lap is self-adjoint in the mu-weighted inner product;
* the integral of lap(u) vanishes for every u;
* on a connected graph the kernel of lap is exactly the constants.
"""

from __future__ import annotations

from pathlib import Path
from typing import Hashable, Iterable, Iterator, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import fileio

VertexId = Hashable


class DisconnectedGraphError(ValueError):
    """Raised when a graph (or graph file) is not connected."""


class WeightedGraph:
    """Immutable connected weighted graph with a positive vertex measure.

    Parameters
    ----------
    ids : sequence of hashable vertex identifiers (order is significant
        and fixed; every vertex function is an array in this order).
    mu : positive vertex measure, one entry per id.
    edges : iterable of ``(a, b, w)`` with distinct endpoints, positive
        weight ``w`` and at most one entry per unordered pair.
    """

    def __init__(
        self,
        ids: Sequence[VertexId],
        mu: Sequence[float],
        edges: Iterable[tuple[VertexId, VertexId, float]],
    ):
        ids = list(ids)
        if not ids:
            raise ValueError("graph requires at least one vertex")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate vertex ids")
        self.ids: tuple[VertexId, ...] = tuple(ids)
        self.index: dict[VertexId, int] = {v: i for i, v in enumerate(ids)}

        mu_arr = np.array(mu, dtype=float)
        if mu_arr.shape != (len(ids),):
            raise ValueError(
                f"measure has shape {mu_arr.shape}, expected ({len(ids)},)"
            )
        if not np.all(np.isfinite(mu_arr)) or np.any(mu_arr <= 0.0):
            raise ValueError("vertex measure must be finite and positive")
        mu_arr.setflags(write=False)
        self.mu: np.ndarray = mu_arr

        ei: list[int] = []
        ej: list[int] = []
        ew: list[float] = []
        seen: set[tuple[int, int]] = set()
        for a, b, w in edges:
            try:
                i, j = self.index[a], self.index[b]
            except KeyError as exc:
                raise ValueError(f"edge endpoint {exc.args[0]!r} is not a vertex")
            if i == j:
                raise ValueError(f"self-loop at vertex {a!r}")
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise ValueError(f"duplicate edge between {a!r} and {b!r}")
            seen.add(key)
            w = float(w)
            if not np.isfinite(w) or w <= 0.0:
                raise ValueError(f"edge weight on ({a!r}, {b!r}) must be positive")
            ei.append(i)
            ej.append(j)
            ew.append(w)

        self._ei = np.array(ei, dtype=np.intp)
        self._ej = np.array(ej, dtype=np.intp)
        self._ew = np.array(ew, dtype=float)
        for arr in (self._ei, self._ej, self._ew):
            arr.setflags(write=False)

        n = len(ids)
        self._adj = sparse.csr_matrix(
            (
                np.concatenate([self._ew, self._ew]),
                (
                    np.concatenate([self._ei, self._ej]),
                    np.concatenate([self._ej, self._ei]),
                ),
            ),
            shape=(n, n),
        )
        self._deg = np.asarray(self._adj.sum(axis=1)).ravel()
        self._lap_matrix = None

        if not self.is_connected():
            raise DisconnectedGraphError("graph is not connected")

    # -- basic structure ------------------------------------------------

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_vertices(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self._ew)

    def edges(self) -> Iterator[tuple[VertexId, VertexId, float]]:
        """Yield each undirected edge once as ``(id_a, id_b, weight)``."""
        for i, j, w in zip(self._ei, self._ej, self._ew):
            yield self.ids[i], self.ids[j], float(w)

    @property
    def volume(self) -> float:
        """Total measure of the vertex set."""
        return float(self.mu.sum())

    def is_connected(self) -> bool:
        if len(self.ids) == 1:
            return True
        ncomp, _ = connected_components(self._adj, directed=False)
        return int(ncomp) == 1

    def vertex_values(self, values) -> np.ndarray:
        """Coerce to a float array aligned with the vertex ordering."""
        arr = np.asarray(values, dtype=float)
        if arr.shape != (len(self.ids),):
            raise ValueError(
                f"vertex function has shape {arr.shape}, expected ({len(self.ids)},)"
            )
        return arr

    # -- operators -------------------------------------------------------

    def laplacian_matrix(self) -> sparse.csr_matrix:
        """Positive semidefinite matrix C with (C u)(x) = -mu(x) * lap(u)(x)."""
        if self._lap_matrix is None:
            self._lap_matrix = (sparse.diags(self._deg) - self._adj).tocsr()
        return self._lap_matrix

    def laplacian(self, u) -> np.ndarray:
        """Apply the mu-weighted graph Laplacian to a vertex function."""
        u = self.vertex_values(u)
        return (self._adj @ u - self._deg * u) / self.mu

    def gradient_form(self, u, v) -> np.ndarray:
        """Pointwise bilinear gradient form of two vertex functions."""
        u = self.vertex_values(u)
        v = self.vertex_values(v)
        t = self._ew * (u[self._ej] - u[self._ei]) * (v[self._ej] - v[self._ei])
        out = np.zeros(len(self.ids))
        # each edge contributes the same product at both endpoints
        np.add.at(out, self._ei, t)
        np.add.at(out, self._ej, t)
        return out / (2.0 * self.mu)

    def grad_norm(self, u) -> np.ndarray:
        """Pointwise length of the discrete gradient, sqrt(grad(u, u))."""
        return np.sqrt(self.gradient_form(u, u))

    def integrate(self, u) -> float:
        """Integral of a vertex function against the vertex measure."""
        return float(np.dot(self.mu, self.vertex_values(u)))

    def sobolev_norm(self, u) -> float:
        """Norm combining the gradient energy and the L2 mass of u."""
        u = self.vertex_values(u)
        return float(np.sqrt(self.integrate(self.gradient_form(u, u) + u * u)))

    def dirac(self, p: VertexId) -> np.ndarray:
        """Unit-mass point source at vertex p: 1/mu(p) at p, zero elsewhere.

        Normalized so that ``integrate(dirac(p)) == 1``.
        """
        try:
            i = self.index[p]
        except KeyError:
            raise ValueError(f"unknown vertex {p!r}")
        out = np.zeros(len(self.ids))
        out[i] = 1.0 / self.mu[i]
        return out


# -- file format ---------------------------------------------------------


def load_graph(path: str | Path) -> WeightedGraph:
    """Read a graph from JSON: {"vertices": [{"id", "mu"}], "edges": [{"a", "b", "w"}]}.

    Rejects non-positive measures or weights, duplicate or dangling edges
    and disconnected graphs.
    """
    doc = fileio.load(path)
    if not isinstance(doc, dict) or "vertices" not in doc or "edges" not in doc:
        raise ValueError(f"{path}: expected an object with 'vertices' and 'edges'")
    ids = [str(v["id"]) for v in doc["vertices"]]
    mu = [float(v["mu"]) for v in doc["vertices"]]
    edges = [(str(e["a"]), str(e["b"]), float(e["w"])) for e in doc["edges"]]
    return WeightedGraph(ids, mu, edges)


def save_graph(g: WeightedGraph, path: str | Path) -> None:
    doc = {
        "vertices": [
            {"id": str(v), "mu": float(m)} for v, m in zip(g.ids, g.mu)
        ],
        "edges": [{"a": str(a), "b": str(b), "w": w} for a, b, w in g.edges()],
    }
    fileio.dump(doc, path)


# -- generators ------------------------------------------------------------


def _draw_unit_interval(rng: np.random.Generator, size: int) -> np.ndarray:
    # values in (0.5, 2.0]
    return 2.0 - rng.uniform(0.0, 1.5, size=size)


def _build(
    ids: list[str],
    pairs: list[tuple[str, str]],
    rng: np.random.Generator | None,
    random_mu: bool,
    random_w: bool,
) -> WeightedGraph:
    if (random_mu or random_w) and rng is None:
        rng = np.random.default_rng()
    mu = _draw_unit_interval(rng, len(ids)) if random_mu else np.ones(len(ids))
    if random_w:
        ws = _draw_unit_interval(rng, len(pairs))
    else:
        ws = np.ones(len(pairs))
    return WeightedGraph(ids, mu, [(a, b, w) for (a, b), w in zip(pairs, ws)])


def _grid_pairs(rows: int, cols: int, wrap: bool) -> tuple[list[str], list[tuple[str, str]]]:
    ids = [f"{r},{c}" for r in range(rows) for c in range(cols)]
    pairs: set[tuple[str, str]] = set()

    def add(a: str, b: str) -> None:
        if a != b:
            pairs.add((a, b) if a < b else (b, a))

    for r in range(rows):
        for c in range(cols):
            here = f"{r},{c}"
            if c + 1 < cols:
                add(here, f"{r},{c + 1}")
            elif wrap:
                add(here, f"{r},0")
            if r + 1 < rows:
                add(here, f"{r + 1},{c}")
            elif wrap:
                add(here, f"0,{c}")
    return ids, sorted(pairs)


def lattice_graph(rows: int, cols: int, *, rng=None, random_mu=False, random_w=False) -> WeightedGraph:
    """Planar grid graph with rows*cols vertices labelled "r,c"."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("lattice requires at least two vertices")
    ids, pairs = _grid_pairs(rows, cols, wrap=False)
    return _build(ids, pairs, rng, random_mu, random_w)


def torus_graph(rows: int, cols: int, *, rng=None, random_mu=False, random_w=False) -> WeightedGraph:
    """Grid graph with periodic wrap-around in both directions.

    For side lengths below three the wrap edges that would duplicate an
    existing edge are collapsed.
    """
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("torus requires at least two vertices")
    ids, pairs = _grid_pairs(rows, cols, wrap=True)
    return _build(ids, pairs, rng, random_mu, random_w)


def complete_graph(n: int, *, rng=None, random_mu=False, random_w=False) -> WeightedGraph:
    if n < 2:
        raise ValueError("complete graph requires n >= 2")
    ids = [f"v{k}" for k in range(n)]
    pairs = [(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n)]
    return _build(ids, pairs, rng, random_mu, random_w)


def random_graph(
    n: int,
    p: float,
    rng: np.random.Generator | int | None = None,
    *,
    random_mu: bool = False,
    random_w: bool = False,
    max_tries: int = 100,
) -> WeightedGraph:
    """Erdos-Renyi graph G(n, p), resampled until connected.

    Raises after ``max_tries`` failed attempts (small n with small p can
    make connected samples rare).
    """
    if n < 2:
        raise ValueError("random graph requires n >= 2")
    if not (0.0 <= p <= 1.0):
        raise ValueError("edge probability must lie in [0, 1]")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    ids = [f"v{k}" for k in range(n)]
    for _ in range(max_tries):
        mask = rng.uniform(size=(n * (n - 1)) // 2) < p
        pairs = [
            (ids[i], ids[j])
            for k, (i, j) in enumerate(
                (i, j) for i in range(n) for j in range(i + 1, n)
            )
            if mask[k]
        ]
        try:
            return _build(ids, pairs, rng, random_mu, random_w)
        except DisconnectedGraphError:
            continue
    raise DisconnectedGraphError(
        f"no connected sample within {max_tries} tries (n={n}, p={p})"
    )

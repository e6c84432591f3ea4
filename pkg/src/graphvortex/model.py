"""Model data: coupling parameters, vortex sets and nonlinearities.

The two-component vortex system couples unknowns (u, v) through the
exponential nonlinearities

    f1(u, v) = a(b-a) e^u - b(b-a) e^v + a^2 e^{2u} - ab e^{2v} + b(b-a) e^{u+v}
    f2(u, v) = f1(v, u)
             = -b(b-a) e^u + a(b-a) e^v - ab e^{2u} + a^2 e^{2v} + b(b-a) e^{u+v}

with coupling constants b > a > 0 and interaction strength lam > 0.  On
the diagonal both collapse to (a-b)^2 (e^{2u} - e^u), whose unit-constant
version e^w (e^w - 1) is the scalar-equation nonlinearity.

Vortex data is a multiset of vertices with positive multiplicities; each
vortex of multiplicity m contributes a point source 4*pi*m*dirac(p) and
the compensating constant -4*pi*m/volume, so the combined source always
integrates to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from . import fileio
from .graph import VertexId, WeightedGraph

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class ModelParams:
    """Coupling constants of the two-component system; requires b > a > 0, lam > 0."""

    a: float
    b: float
    lam: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and np.isfinite(self.lam)):
            raise ValueError("model parameters must be finite")
        if not (self.b > self.a > 0.0):
            raise ValueError(f"need b > a > 0, got a={self.a}, b={self.b}")
        if self.lam <= 0.0:
            raise ValueError(f"need lam > 0, got {self.lam}")

    def with_lam(self, lam: float) -> "ModelParams":
        return replace(self, lam=lam)


class VortexSet:
    """Vertices with positive multiplicities; duplicates are merged by summing."""

    def __init__(self, pairs: Iterable[tuple[VertexId, float]] = ()):
        merged: dict[VertexId, float] = {}
        for vertex, mult in pairs:
            mult = float(mult)
            if not np.isfinite(mult) or mult <= 0.0:
                raise ValueError(f"multiplicity at {vertex!r} must be positive")
            merged[vertex] = merged.get(vertex, 0.0) + mult
        self._items: tuple[tuple[VertexId, float], ...] = tuple(merged.items())

    @property
    def total(self) -> float:
        """Sum of multiplicities (the total vortex number)."""
        return float(sum(m for _, m in self._items))

    def __iter__(self) -> Iterator[tuple[VertexId, float]]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __repr__(self) -> str:
        return f"VortexSet({list(self._items)!r})"

    def mass_vector(self, graph: WeightedGraph) -> np.ndarray:
        """Multiplicity carried by each vertex, as an array over the graph."""
        out = np.zeros(len(graph))
        for vertex, mult in self._items:
            if vertex not in graph.index:
                raise ValueError(f"vortex vertex {vertex!r} is not in the graph")
            out[graph.index[vertex]] += mult
        return out


# scalar problems reuse the same container
ScalarVortexSet = VortexSet


def f1(params: ModelParams, u, v) -> np.ndarray:
    """First-component nonlinearity (vectorized over vertex arrays)."""
    a, b = params.a, params.b
    eu = np.exp(np.asarray(u, dtype=float))
    ev = np.exp(np.asarray(v, dtype=float))
    return (
        a * (b - a) * eu
        - b * (b - a) * ev
        + a * a * eu * eu
        - a * b * ev * ev
        + b * (b - a) * eu * ev
    )


def f2(params: ModelParams, u, v) -> np.ndarray:
    """Second-component nonlinearity; equals f1 with the arguments swapped."""
    a, b = params.a, params.b
    eu = np.exp(np.asarray(u, dtype=float))
    ev = np.exp(np.asarray(v, dtype=float))
    return (
        -b * (b - a) * eu
        + a * (b - a) * ev
        - a * b * eu * eu
        + a * a * ev * ev
        + b * (b - a) * eu * ev
    )


def scalar_f(w) -> np.ndarray:
    """Scalar-equation nonlinearity e^w (e^w - 1)."""
    ew = np.exp(np.asarray(w, dtype=float))
    return ew * (ew - 1.0)


def lipschitz_shift(params: ModelParams, margin: float = 0.1) -> float:
    """Damping shift dominating the nonlinearity's Lipschitz constant.

    On the relevant (nonpositive) range the partial derivatives of
    lam*f1 and lam*f2 are bounded by lam*((a+b)(b-a) + 2a^2); the
    monotone scheme needs a shift strictly above twice the bound, so the
    margin must be positive.
    """
    if not (margin > 0.0):
        raise ValueError("margin must be positive")
    a, b = params.a, params.b
    return 2.0 * params.lam * ((a + b) * (b - a) + 2.0 * a * a) * (1.0 + margin)


def vortex_rhs(graph: WeightedGraph, vortices: VortexSet) -> tuple[float, np.ndarray]:
    """Source data for a background problem.

    Returns ``(constant, point_part)`` where ``constant`` is
    ``-4*pi*N/volume`` (N the total multiplicity) and ``point_part`` is
    ``4*pi * sum_j m_j * dirac(p_j)``; their sum integrates to zero,
    which is exactly the solvability condition of the Poisson problem.
    """
    point = FOUR_PI * vortices.mass_vector(graph) / graph.mu
    constant = -FOUR_PI * vortices.total / graph.volume
    return constant, point


# -- vortex file format ----------------------------------------------------


def _parse_entries(entries, path, key) -> VortexSet:
    pairs = []
    for item in entries:
        if "vertex" not in item or "mult" not in item:
            raise ValueError(f"{path}: entries under {key!r} need 'vertex' and 'mult'")
        pairs.append((str(item["vertex"]), float(item["mult"])))
    return VortexSet(pairs)


def load_system_vortices(
    path: str | Path, graph: WeightedGraph | None = None
) -> tuple[VortexSet, VortexSet]:
    """Read {"m": [{"vertex", "mult"}...], "n": [...]} describing both components."""
    doc = fileio.load(path)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object")
    vm = _parse_entries(doc.get("m", []), path, "m")
    vn = _parse_entries(doc.get("n", []), path, "n")
    if graph is not None:
        vm.mass_vector(graph)
        vn.mass_vector(graph)
    return vm, vn


def load_scalar_vortices(
    path: str | Path, graph: WeightedGraph | None = None
) -> VortexSet:
    """Read {"p": [{"vertex", "mult"}...]} for the scalar equation."""
    doc = fileio.load(path)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object")
    vp = _parse_entries(doc.get("p", []), path, "p")
    if graph is not None:
        vp.mass_vector(graph)
    return vp

"""Linear solves against the graph Laplacian.

Two problems appear throughout the package:

* the shifted problem  lap(u) - K u = rhs  with K > 0, which has a unique
  solution for any right hand side;
* the singular Poisson problem  lap(u) = rhs, solvable exactly when the
  integral of rhs vanishes, with the mean-zero representative returned.

Both are solved through the measure-symmetrized matrix form: with
C = diag(deg) - W (so that C u = -mu * lap(u)) the shifted problem reads

    (C + K diag(mu)) u = -mu * rhs,

a symmetric positive definite system.  Systems with at most
``DENSE_LIMIT`` vertices go through a dense Cholesky factorization;
larger ones use Jacobi-preconditioned conjugate gradients on the sparse
matrix.  Every solve verifies its defect and raises ``SolverFailure``
when the advertised tolerance is not met.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import LinearOperator, cg

from .graph import WeightedGraph

DENSE_LIMIT = 2000
RESIDUAL_REL = 1e-10  # defect sup-norm bound, relative to 1 + |rhs|_inf
MEAN_ZERO_REL = 1e-12
CG_RTOL = 1e-13


class SolverFailure(RuntimeError):
    """A linear solve did not reach its residual tolerance."""


def _spd_solver(A: sparse.csr_matrix):
    """Return a solve(b) closure for a sparse SPD matrix."""
    n = A.shape[0]
    if n <= DENSE_LIMIT:
        factor = cho_factor(A.toarray())

        def solve(b: np.ndarray) -> np.ndarray:
            return cho_solve(factor, b)

    else:
        inv_diag = 1.0 / A.diagonal()
        precond = LinearOperator(A.shape, matvec=lambda x: inv_diag * x)

        def solve(b: np.ndarray) -> np.ndarray:
            x, info = cg(A, b, rtol=CG_RTOL, atol=0.0, M=precond)
            if info != 0:
                raise SolverFailure(f"conjugate gradient did not converge (info={info})")
            return x

    return solve


class ShiftedSystem:
    """Reusable factorization of  lap(u) - shift * u = rhs.

    Assembling the system once and calling :meth:`solve` repeatedly is
    the intended usage inside iteration loops; the object is immutable
    after construction and safe to share between threads.
    """

    def __init__(self, graph: WeightedGraph, shift: float):
        shift = float(shift)
        if not np.isfinite(shift) or shift <= 0.0:
            raise ValueError(f"shift must be positive, got {shift}")
        self.graph = graph
        self.shift = shift
        A = (graph.laplacian_matrix() + shift * sparse.diags(graph.mu)).tocsr()
        self._solve = _spd_solver(A)

    def solve(self, rhs) -> np.ndarray:
        """Solve lap(u) - shift*u = rhs; defect sup-norm <= 1e-10*(1+|rhs|_inf)."""
        g = self.graph
        rhs = g.vertex_values(rhs)
        u = self._solve(-(g.mu * rhs))
        tol = RESIDUAL_REL * (1.0 + np.abs(rhs).max(initial=0.0))
        defect = np.abs(g.laplacian(u) - self.shift * u - rhs).max()
        if defect > tol:
            raise SolverFailure(
                f"shifted solve defect {defect:.3e} exceeds tolerance {tol:.3e}"
            )
        return u


def solve_shifted(graph: WeightedGraph, shift: float, rhs) -> np.ndarray:
    """One-shot convenience wrapper around :class:`ShiftedSystem`.

    The resolvent is monotone: a pointwise nonnegative rhs yields a
    pointwise nonpositive solution.
    """
    return ShiftedSystem(graph, shift).solve(rhs)


def solve_poisson(graph: WeightedGraph, rhs) -> np.ndarray:
    """Solve lap(u) = rhs on a connected graph, returning the mean-zero u.

    Requires the compatibility condition |integral of rhs| <= 1e-10 *
    |rhs|_inf; otherwise no solution exists and a ValueError is raised.
    The result satisfies integrate(u) == 0 to 1e-12 * |u|_inf and the
    defect bound of the shifted solver.
    """
    g = graph
    rhs = g.vertex_values(rhs)
    scale = float(np.abs(rhs).max(initial=0.0))
    total = g.integrate(rhs)
    if abs(total) > RESIDUAL_REL * scale:
        raise ValueError(
            f"incompatible source: integral {total:.3e} exceeds {RESIDUAL_REL * scale:.3e}"
        )

    n = len(g)
    if n == 1:
        return np.zeros(1)

    # project out the (numerically tiny) mean, then pin the first vertex
    rhs0 = rhs - total / g.volume
    b = -(g.mu * rhs0)
    C = graph.laplacian_matrix()
    reduced = C[1:, 1:].tocsr()
    u = np.empty(n)
    u[0] = 0.0
    u[1:] = _spd_solver(reduced)(b[1:])
    u -= g.integrate(u) / g.volume

    tol = RESIDUAL_REL * (1.0 + scale)
    defect = np.abs(g.laplacian(u) - rhs).max()
    if defect > tol:
        raise SolverFailure(
            f"poisson solve defect {defect:.3e} exceeds tolerance {tol:.3e}"
        )
    mean = abs(g.integrate(u))
    if mean > MEAN_ZERO_REL * max(1.0, np.abs(u).max()):
        raise SolverFailure(f"poisson solution mean {mean:.3e} not zero")
    return u

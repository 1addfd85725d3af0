"""Linear solvers for the reduced saddle system."""

import time
from abc import ABC, abstractmethod

import numpy as np
import numpy.typing as npt
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from app.solver.entities.entity import LinearSolution
from pkg.errors.exceptions import SolverError

Array = npt.NDArray[np.float64]


class SingularFactorError(SolverError):
    """The sparse factorization met a pivot below tolerance"""

    def __init__(self, detail: str = "zero pivot in sparse factorization") -> None:
        super().__init__(detail=detail)


class ILinearSolver(ABC):
    @abstractmethod
    def solve(self, matrix: sp.spmatrix, rhs: Array) -> LinearSolution:
        pass


def matrix_norm(matrix: sp.spmatrix) -> float:
    return float(spla.norm(matrix, 1)) if matrix.nnz else 0.0


def equilibration(matrix: sp.spmatrix) -> Array:
    """Symmetric scaling 1 / sqrt(max_j |a_ij|); empty rows keep scale 1."""
    row_max = abs(sp.csr_matrix(matrix)).max(axis=1).toarray().ravel()
    scale = np.ones_like(row_max)
    nonzero = row_max > 0.0
    scale[nonzero] = 1.0 / np.sqrt(row_max[nonzero])
    return scale


class SparseLUSolver(ILinearSolver):
    """SuperLU on the symmetrically equilibrated matrix, with a zero-pivot check and iterative refinement.

    With s_i = |A_i|_inf^(-1/2) every entry of S A S lies in [-1, 1].
    """

    def __init__(self, pivot_tolerance: float = 1e-12, refinement_steps: int = 2, estimate_condition: bool = True) -> None:
        self.pivot_tolerance = pivot_tolerance
        self.refinement_steps = refinement_steps
        self.estimate_condition = estimate_condition

    def solve(self, matrix: sp.spmatrix, rhs: Array) -> LinearSolution:
        a = sp.csc_matrix(matrix, dtype=np.float64)
        b = np.asarray(rhs, dtype=np.float64)
        scale = equilibration(a)
        scaling = sp.diags(scale)
        scaled = sp.csc_matrix(scaling @ a @ scaling)
        start = time.perf_counter()
        try:
            lu = spla.splu(scaled, permc_spec="COLAMD")
        except RuntimeError as e:
            raise SingularFactorError(f"sparse factorization failed: {e!s}") from e
        pivots = np.abs(lu.U.diagonal())
        threshold = self.pivot_tolerance * max(matrix_norm(scaled), 1.0)
        small = int(np.count_nonzero(pivots <= threshold))
        if small:
            raise SingularFactorError(f"{small} pivots below {threshold:.3e}")

        def apply_inverse(v: Array) -> Array:
            return scale * lu.solve(scale * v)

        x = apply_inverse(b)
        for _ in range(self.refinement_steps):
            x = x + apply_inverse(b - a @ x)
        elapsed = time.perf_counter() - start

        condition = None
        if self.estimate_condition and a.shape[0] > 0:
            inverse = spla.LinearOperator(
                a.shape,
                matvec=lambda v: apply_inverse(np.ravel(v)),
                rmatvec=lambda v: scale * lu.solve(scale * np.ravel(v), trans="T"),
                dtype=np.float64,
            )
            condition = float(matrix_norm(a) * spla.onenormest(inverse))
        return LinearSolution(x=x, rank_deficiency=0, factor_time=elapsed, method="splu", condition_estimate=condition)


class DenseMinNormSolver(ILinearSolver):
    """SVD minimum-norm solve that counts and returns the numerical null space"""

    def __init__(self, pivot_tolerance: float = 1e-12) -> None:
        self.pivot_tolerance = pivot_tolerance

    def solve(self, matrix: sp.spmatrix, rhs: Array) -> LinearSolution:
        dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=np.float64)
        start = time.perf_counter()
        u, s, vt = la.svd(dense, lapack_driver="gesvd")
        if s.size == 0:
            return LinearSolution(x=np.zeros(0), rank_deficiency=0, factor_time=0.0, method="dense-min-norm")
        rank = int(np.count_nonzero(s > self.pivot_tolerance * s[0]))
        coeffs = (u[:, :rank].T @ np.asarray(rhs, dtype=np.float64)) / s[:rank]
        x = vt[:rank].T @ coeffs
        elapsed = time.perf_counter() - start
        condition = float(s[0] / s[rank - 1]) if rank else None
        return LinearSolution(
            x=x,
            rank_deficiency=dense.shape[0] - rank,
            factor_time=elapsed,
            method="dense-min-norm",
            condition_estimate=condition,
            null_space=vt[rank:].T,
        )


class MinresSolver(ILinearSolver):
    """MINRES for large sweeps; consistent singular systems converge to a solution"""

    def __init__(self, tolerance: float = 1e-13, max_iterations: int = 20000) -> None:
        self.tolerance = tolerance
        self.max_iterations = max_iterations

    def solve(self, matrix: sp.spmatrix, rhs: Array) -> LinearSolution:
        a = sp.csr_matrix(matrix)
        b = np.asarray(rhs, dtype=np.float64)
        count = {"n": 0}

        def _count(_: Array) -> None:
            count["n"] += 1

        start = time.perf_counter()
        x, info = spla.minres(a, b, rtol=self.tolerance, maxiter=self.max_iterations, callback=_count)
        elapsed = time.perf_counter() - start
        if info > 0:
            raise SolverError(f"MINRES stopped after {count['n']} iterations without converging")
        if info < 0:
            raise SolverError(f"MINRES rejected the system (info={info})")
        return LinearSolution(
            x=x, rank_deficiency=None, factor_time=elapsed, method="minres", iterations=count["n"]
        )

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from app.assembly.entities.entity import SaddleSystem
from app.solver.entities.entity import LinearSolution, SolveReport, SolverMethod, SolverStats
from app.solver.service.linear import (
    DenseMinNormSolver,
    ILinearSolver,
    MinresSolver,
    SingularFactorError,
    SparseLUSolver,
)
from pkg.errors.exceptions import SolverError
from pkg.log.logger import Logger

Array = npt.NDArray[np.float64]

NULL_SPACE_TOLERANCE = 1e-8
ORDERING_TOLERANCE = 1e-8
ORDERING_SEED = 20240917


def constraint_residual(traction: Array, body_force: Array, incidence: sp.spmatrix) -> float:
    """max |D T + F| with the integer incidence matrix; no quadrature involved."""
    traction = np.asarray(traction, dtype=np.float64)
    body_force = np.asarray(body_force, dtype=np.float64)
    if incidence.shape != (body_force.size, traction.size):
        raise SolverError(
            f"incidence {incidence.shape} does not match {body_force.size} cells and {traction.size} tractions"
        )
    if body_force.size == 0:
        return 0.0
    return float(np.max(np.abs(incidence @ traction + body_force)))


class SolverService:
    def __init__(
        self,
        logger: Logger,
        method: str = "direct",
        pivot_tolerance: float = 1e-12,
        dense_limit: int = 6000,
        krylov_tolerance: float = 1e-13,
        krylov_max_iterations: int = 20000,
        verify_ordering: bool = True,
        refinement_steps: int = 2,
    ) -> None:
        self.logger = logger
        self.method = SolverMethod(method)
        self.dense_limit = dense_limit
        self.verify_ordering = verify_ordering
        self.pivot_tolerance = pivot_tolerance
        self.direct: ILinearSolver = SparseLUSolver(pivot_tolerance, refinement_steps)
        self.dense: ILinearSolver = DenseMinNormSolver(pivot_tolerance)
        self.krylov: ILinearSolver = MinresSolver(krylov_tolerance, krylov_max_iterations)

    def solve(self, system: SaddleSystem) -> SolveReport:
        """Solve the reduced system, then expand and split into traction, displacement and rotation."""
        matrix = system.reduced_matrix
        rhs = system.reduced_rhs
        try:
            if self.method is SolverMethod.KRYLOV:
                result = self.krylov.solve(matrix, rhs)
            else:
                result = self._solve_direct(system)
        except SolverError as e:
            self.logger.error(f"Error solving saddle system: {e!s}")
            raise

        full = system.expand(result.x)
        traction, displacement, rotation = system.split(full)
        residual = float(np.linalg.norm(matrix @ result.x - rhs)) / max(float(np.linalg.norm(rhs)), 1.0)
        equilibrium = constraint_residual(traction, system.body_force, system.incidence)
        layout = system.layout
        stats = SolverStats(
            method=result.method,
            n_traction=layout.n_traction,
            n_displacement=layout.n_displacement,
            n_rotation=layout.n_rotation,
            n_fixed=int(system.fixed_dofs.size),
            n_free=int(system.free_dofs.size),
            nnz=int(matrix.nnz),
            factor_time=result.factor_time,
            condition_estimate=result.condition_estimate,
            iterations=result.iterations,
        )
        self.logger.info(
            "Solved saddle system",
            extra={
                "method": result.method,
                "dofs": stats.n_free,
                "nnz": stats.nnz,
                "deficiency": result.rank_deficiency,
                "residual": residual,
                "equilibrium": equilibrium,
                "seconds": result.factor_time,
            },
        )
        if residual > 1e-8:
            self.logger.warning("Algebraic residual above 1e-8", extra={"residual": residual})
        return SolveReport(
            traction=traction,
            displacement=displacement,
            rotation=rotation,
            residual_norm=residual,
            rank_deficiency=result.rank_deficiency,
            equilibrium_residual=equilibrium,
            stats=stats,
        )

    def constraint_residual(self, traction: Array, body_force: Array, incidence: sp.spmatrix) -> float:
        return constraint_residual(traction, body_force, incidence)

    def _solve_direct(self, system: SaddleSystem) -> LinearSolution:
        matrix = system.reduced_matrix
        rhs = system.reduced_rhs
        try:
            return self.direct.solve(matrix, rhs)
        except SingularFactorError as e:
            self.logger.warning(f"Sparse factorization singular, falling back: {e.detail}")

        if matrix.shape[0] > self.dense_limit:
            result = self.krylov.solve(matrix, rhs)
            self.logger.warning(
                "Rank deficiency not counted on the Krylov path", extra={"dofs": matrix.shape[0]}
            )
            return result

        result = self.dense.solve(matrix, rhs)
        self._check_null_space(system, result)
        if self.verify_ordering:
            self._check_ordering(system, result)
        return result

    def _block_of(self, system: SaddleSystem) -> npt.NDArray[np.str_]:
        _, u0, w0 = system.block_offsets
        blocks = np.where(system.free_dofs < u0, "traction", np.where(system.free_dofs < w0, "displacement", "rotation"))
        return blocks

    def _check_null_space(self, system: SaddleSystem, result: LinearSolution) -> None:
        """Deficient directions may only move rotation multipliers."""
        if result.null_space is None or result.null_space.shape[1] == 0:
            return
        blocks = self._block_of(system)
        for name in ("traction", "displacement"):
            mask = blocks == name
            if not np.any(mask):
                continue
            weight = float(np.max(np.abs(result.null_space[mask])))
            if weight > NULL_SPACE_TOLERANCE:
                raise SolverError(
                    f"system is singular beyond the rotation multipliers (null-vector weight {weight:.3e})",
                    block=name,
                )

    def _check_ordering(self, system: SaddleSystem, result: LinearSolution) -> None:
        """Re-solve under a random symmetric permutation; stress and displacement must not move."""
        matrix = sp.csr_matrix(system.reduced_matrix)
        perm = np.random.default_rng(ORDERING_SEED).permutation(matrix.shape[0])
        permuted = matrix[perm][:, perm]
        again = self.dense.solve(permuted, system.reduced_rhs[perm])
        x = np.empty_like(again.x)
        x[perm] = again.x

        blocks = self._block_of(system)
        mask = blocks != "rotation"
        if not np.any(mask):
            return
        scale = max(float(np.max(np.abs(result.x[mask]))), 1.0)
        drift = float(np.max(np.abs(x[mask] - result.x[mask]))) / scale
        if drift > ORDERING_TOLERANCE:
            raise SolverError(f"solution depends on the unknown ordering (drift {drift:.3e})", block="traction/displacement")
        self.logger.debug("Ordering check passed", extra={"drift": drift})

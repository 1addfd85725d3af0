import time
from dataclasses import dataclass

import numpy as np

from app.assembly.entities.entity import SaddleSystem
from app.assembly.service.saddle import build_saddle_system
from app.baseline_fem.entities.entity import FemSolution
from app.baseline_fem.service.fem_service import FemService
from app.cases.entities.entity import Problem
from app.mesh.entities.entity import RotationGrid
from app.postproc.entities.entity import SampledFields, SampleGrid
from app.postproc.service.energy import complementary_energy
from app.postproc.service.errors import error_norms
from app.postproc.service.reconstruction import (
    FieldSampler,
    equilibrium_residual_field,
    interface_traction_jump,
    stress_asymmetry,
)
from app.runner.api.dto import PointResult
from app.solver.entities.entity import SolveReport
from app.solver.service.solver_service import SolverService
from pkg.log.logger import Logger


@dataclass(frozen=True, eq=False)
class EquilibriumRun:
    problem: Problem
    order: int
    rotation_grid: RotationGrid
    system: SaddleSystem
    report: SolveReport
    assembly_time: float


def _mesh_label(problem: Problem) -> str:
    return f"{problem.mesh.nx}x{problem.mesh.ny}"


class EquilibriumService:
    def __init__(
        self,
        solver_service: SolverService,
        logger: Logger,
        over_integration: int = 2,
        traction_points: int = 12,
        energy_points: int = 32,
    ) -> None:
        self.solver_service = solver_service
        self.logger = logger
        self.over_integration = over_integration
        self.traction_points = traction_points
        self.energy_points = energy_points

    def solve(self, problem: Problem, order: int, rotation_grid: RotationGrid | str = RotationGrid.GL) -> EquilibriumRun:
        """Assemble and solve one problem at degree N."""
        grid = RotationGrid(rotation_grid)
        log = self.logger.bind(case=problem.name.value, N=order, mesh=_mesh_label(problem), rotation=grid.value)
        start = time.perf_counter()
        try:
            system = build_saddle_system(
                problem.mesh,
                problem.maps,
                problem.material,
                order,
                grid,
                problem.boundary,
                f=problem.body_force,
                particular=problem.particular,
                over_integration=self.over_integration,
                traction_points=self.traction_points,
            )
        except Exception as e:
            log.error(f"Error assembling saddle system: {e!s}")
            raise
        assembly_time = time.perf_counter() - start
        log.debug("Assembled saddle system", extra={"dofs": system.layout.n_total, "seconds": assembly_time})
        report = self.solver_service.solve(system)
        return EquilibriumRun(problem, order, grid, system, report, assembly_time)

    def sample(self, run: EquilibriumRun, samples: int) -> SampledFields:
        problem = run.problem
        sampler = FieldSampler(problem.mesh, problem.maps, run.order, run.rotation_grid, problem.material, run.system.layout)
        return sampler.sample(run.report, run.system.body_force, SampleGrid.equispaced(samples), problem.particular)

    def evaluate(self, run: EquilibriumRun, samples: int, c: float = 0.0) -> tuple[PointResult, SampledFields]:
        """Residual, energy, symmetry and error metrics of a solved run."""
        problem, report, system = run.problem, run.report, run.system
        fields = self.sample(run, samples)
        grid = fields.grid
        residual = equilibrium_residual_field(
            report.traction, system.body_force, problem.mesh, problem.maps, run.order, grid, system.incidence
        )
        energy = complementary_energy(
            report.traction,
            problem.mesh,
            problem.maps,
            problem.material,
            run.order,
            system.layout,
            particular=problem.particular,
            energy_points=self.energy_points,
        )
        sampler = FieldSampler(problem.mesh, problem.maps, run.order, run.rotation_grid, problem.material, system.layout)
        jump = interface_traction_jump(sampler.stress_at(report.traction, problem.particular), problem.mesh, problem.maps)
        errors = {}
        if problem.exact is not None:
            errors = error_norms(fields, problem.exact, run.order, problem.h).errors
        stats = report.stats
        result = PointResult(
            case=problem.name.value,
            method="equilibrium",
            order=run.order,
            rotation=run.rotation_grid.value,
            mesh=_mesh_label(problem),
            h=problem.h,
            c=c,
            n_elements=problem.n_elements,
            n_dofs=system.layout.n_total,
            n_traction=stats.n_traction,
            n_displacement=stats.n_displacement,
            n_rotation=stats.n_rotation,
            rank_deficiency=report.rank_deficiency,
            residual_norm=report.residual_norm,
            constraint_residual=report.equilibrium_residual,
            max_residual=float(np.max(residual)),
            asymmetry=stress_asymmetry(fields),
            traction_jump=jump,
            energy=energy,
            exact_energy=problem.exact.energy if problem.exact is not None else None,
            errors=errors,
            solve_time=stats.factor_time + run.assembly_time,
            condition_estimate=stats.condition_estimate,
        )
        self.logger.info(
            "Evaluated equilibrium run",
            extra={"case": result.case, "N": run.order, "energy": energy, "residual": result.max_residual},
        )
        return result, fields

    def run_point(
        self, problem: Problem, order: int, rotation_grid: RotationGrid | str, samples: int, c: float = 0.0
    ) -> tuple[PointResult, SampledFields]:
        return self.evaluate(self.solve(problem, order, rotation_grid), samples, c)


def fem_point(
    fem_service: FemService, problem: Problem, order: int, samples: int
) -> tuple[PointResult, SampledFields, FemSolution]:
    """Displacement baseline evaluated with the same metrics as the equilibrium method."""
    solution = fem_service.solve(problem, order)
    grid = SampleGrid.equispaced(samples)
    fields = fem_service.sample(solution, grid)
    residual = fem_service.residual(solution, grid)
    errors = {}
    if problem.exact is not None:
        errors = error_norms(fields, problem.exact, order, problem.h).errors
    result = PointResult(
        case=problem.name.value,
        method="fem",
        order=order,
        mesh=_mesh_label(problem),
        h=problem.h,
        n_elements=problem.n_elements,
        n_dofs=solution.n_free,
        max_residual=residual.max_interior_residual,
        traction_jump=residual.max_traction_jump,
        energy=solution.energy,
        errors=errors,
        solve_time=solution.solve_time,
    )
    return result, fields, solution

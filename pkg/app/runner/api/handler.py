from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from app.baseline_fem.service.fem_service import FemService
from app.cases.service.registry import CaseRegistry
from app.postproc.entities.entity import SampledFields
from app.postproc.service.errors import fit_convergence
from app.runner.api.dto import FEM_CASES, BracketVerdict, Method, PointResult, RateDTO, RunConfig
from app.runner.repository.result_writer import ResultWriter, build_id
from app.runner.service.equilibrium_service import EquilibriumService, fem_point
from pkg.errors.exceptions import ConfigError, ConvergenceRateError
from pkg.log.logger import Logger

CONVERGENCE_COLUMNS = ["h", "N", "field", "Linf_error", "energy", "residual"]
RATE_COLUMNS = ["N", "field", "slope", "points_used"]
COMPARISON_COLUMNS = [
    "h", "method", "order", "energy", "max_residual", "max_traction_jump", "n_dofs", "solve_time",
]


def _nondecreasing(values: list[float]) -> bool:
    return all(b >= a - 1e-12 * max(abs(a), 1.0) for a, b in zip(values, values[1:]))


class RunHandler:
    def __init__(
        self,
        registry: CaseRegistry,
        equilibrium_service: EquilibriumService,
        fem_service: FemService,
        writer: ResultWriter,
        logger: Logger,
        threads: int = 1,
        resolved_config: dict[str, Any] | None = None,
    ) -> None:
        self.registry = registry
        self.equilibrium_service = equilibrium_service
        self.fem_service = fem_service
        self.writer = writer
        self.logger = logger
        self.threads = max(int(threads), 1)
        self.resolved_config = resolved_config or {}

    def _point(
        self, config: RunConfig, order: int, mesh: tuple[int, int] | None, size: float | None, method: Method
    ) -> tuple[PointResult, SampledFields]:
        problem = self.registry.build(config.case, mesh=mesh, c=config.c, element_size=size)
        if method is Method.FEM:
            result, fields, _ = fem_point(self.fem_service, problem, config.fem_order, config.samples)
            return result, fields
        return self.equilibrium_service.run_point(problem, order, config.rotation.grid, config.samples, config.c)

    def _summary(self, command: str, config: RunConfig, **payload: Any) -> dict[str, Any]:
        return {
            "command": command,
            "build": build_id(),
            "request": config.model_dump(mode="json"),
            "config": self.resolved_config,
            **payload,
        }

    def run_case(self, config: RunConfig) -> dict[str, Path]:
        """Solve the first order/resolution of the request; write summary.json and fields.csv."""
        try:
            mesh, size = config.resolutions[0]
            result, fields = self._point(config, config.orders[0], mesh, size, config.method)
            out = Path(config.output_dir)
            files = {
                "summary": self.writer.write_json(
                    out / "summary.json", self._summary("run", config, result=result.model_dump(mode="json"))
                ),
                "fields": self.writer.write_fields(out / "fields.csv", fields),
            }
            return files
        except Exception as e:
            self.logger.error(f"Error running case {config.case.value}: {e!s}")
            raise

    def _sweep_points(self, config: RunConfig, method: Method, orders: list[int]) -> list[PointResult]:
        tasks = [(n, mesh, size) for n in orders for mesh, size in config.resolutions]

        def work(task: tuple[int, tuple[int, int] | None, float | None]) -> PointResult:
            n, mesh, size = task
            return self._point(config, n, mesh, size, method)[0]

        if self.threads == 1 or len(tasks) == 1:
            return [work(t) for t in tasks]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(work, tasks))

    def sweep(self, config: RunConfig) -> dict[str, Path]:
        """Every (N, resolution) pair; convergence table and fitted slopes per (N, field)."""
        if len(config.orders) * len(config.resolutions) < 2:
            raise ConfigError("a sweep needs at least two points")
        try:
            orders = config.orders if config.method is Method.EQUILIBRIUM else [config.fem_order]
            points = self._sweep_points(config, config.method, orders)
            rows = []
            series: dict[tuple[int, str], tuple[list[float], list[float]]] = defaultdict(lambda: ([], []))
            for p in points:
                metrics = dict(p.errors)
                if p.asymmetry is not None:
                    metrics["asymmetry"] = p.asymmetry
                for name, err in sorted(metrics.items()):
                    rows.append([p.h, p.order, name, err, p.energy, p.max_residual])
                    if p.h is not None:
                        series[(p.order, name)][0].append(p.h)
                        series[(p.order, name)][1].append(err)
                if not metrics:
                    rows.append([p.h, p.order, "", None, p.energy, p.max_residual])

            rates: list[RateDTO] = []
            for (n, name), (hs, errs) in sorted(series.items()):
                try:
                    fit = fit_convergence(hs, errs)
                except ConvergenceRateError as e:
                    self.logger.warning(f"No rate for N={n} {name}: {e.detail}")
                    continue
                rates.append(RateDTO(order=n, field=name, slope=fit.slope, points_used=fit.points_used))

            out = Path(config.output_dir)
            return {
                "convergence": self.writer.write_csv(out / "convergence.csv", CONVERGENCE_COLUMNS, rows),
                "rates": self.writer.write_csv(
                    out / "rates.csv", RATE_COLUMNS, [[r.order, r.field, r.slope, r.points_used] for r in rates]
                ),
                "summary": self.writer.write_json(
                    out / "summary.json",
                    self._summary(
                        "sweep",
                        config,
                        points=[p.model_dump(mode="json") for p in points],
                        rates=[r.model_dump(mode="json") for r in rates],
                    ),
                ),
            }
        except Exception as e:
            self.logger.error(f"Error in sweep of {config.case.value}: {e!s}")
            raise

    def compare(self, config: RunConfig) -> tuple[dict[str, Path], BracketVerdict]:
        """Equilibrium (first N) against the displacement baseline over the same resolutions."""
        if config.case not in FEM_CASES or config.c != 0.0:
            raise ConfigError(f"compare needs an undeformed case among {sorted(c.value for c in FEM_CASES)}")
        try:
            equilibrium = self._sweep_points(config, Method.EQUILIBRIUM, [config.orders[0]])
            fem = self._sweep_points(config, Method.FEM, [config.fem_order])
            rows = []
            for eq, fe in zip(equilibrium, fem):
                for p in (eq, fe):
                    rows.append([p.h, p.method, p.order, p.energy, p.max_residual, p.traction_jump, p.n_dofs, p.solve_time])
            eq_energy = [p.energy for p in equilibrium]
            fem_energy = [p.energy for p in fem]
            verdict = BracketVerdict(
                fem_nondecreasing=_nondecreasing(fem_energy),
                equilibrium_nonincreasing=_nondecreasing([-e for e in eq_energy]),
                fem_below_equilibrium=all(f <= e for f, e in zip(fem_energy, eq_energy)),
            )
            self.logger.info("Energy bracketing", extra=verdict.model_dump())
            out = Path(config.output_dir)
            files = {
                "comparison": self.writer.write_csv(out / "comparison.csv", COMPARISON_COLUMNS, rows),
                "summary": self.writer.write_json(
                    out / "summary.json",
                    self._summary(
                        "compare",
                        config,
                        equilibrium=[p.model_dump(mode="json") for p in equilibrium],
                        fem=[p.model_dump(mode="json") for p in fem],
                        verdict=verdict.model_dump(),
                    ),
                ),
            }
            return files, verdict
        except Exception as e:
            self.logger.error(f"Error comparing methods on {config.case.value}: {e!s}")
            raise

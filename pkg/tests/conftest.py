import pytest

from app.assembly.entities.entity import Material
from app.baseline_fem.service.fem_service import FemService
from app.cases.service.registry import CaseRegistry
from app.runner.service.equilibrium_service import EquilibriumService
from app.solver.service.solver_service import SolverService
from pkg.log.logger import Logger


@pytest.fixture(scope="session")
def logger() -> Logger:
    return Logger(level="WARNING", colorize=False)


@pytest.fixture
def material() -> Material:
    return Material(E=1.0, nu=0.3)


@pytest.fixture
def solver_service(logger: Logger) -> SolverService:
    return SolverService(logger)


@pytest.fixture
def equilibrium_service(solver_service: SolverService, logger: Logger) -> EquilibriumService:
    return EquilibriumService(solver_service, logger)


@pytest.fixture
def fem_service(logger: Logger) -> FemService:
    return FemService(logger)


@pytest.fixture
def registry(logger: Logger, material: Material) -> CaseRegistry:
    return CaseRegistry(logger, material)

from pathlib import Path
from typing import Any

from dependency_injector import containers, providers
from omegaconf import DictConfig, OmegaConf
from omegaconf.errors import OmegaConfBaseException

from app.assembly.entities.entity import Material
from app.baseline_fem.service.fem_service import FemService
from app.cases.service.registry import CaseRegistry
from app.runner.api.handler import RunHandler
from app.runner.repository.result_writer import ResultWriter
from app.runner.service.equilibrium_service import EquilibriumService
from app.solver.service.solver_service import SolverService
from conf.config import AppConfig
from pkg.errors.exceptions import ConfigError
from pkg.log.logger import Logger

DEFAULT_CONFIG = Path(__file__).resolve().parents[1] / "conf" / "config.yaml"


class Container(containers.DeclarativeContainer):
    """Application container."""

    config = providers.Configuration()

    logger = providers.Singleton(Logger, level=config.logging.level, colorize=config.logging.colorize)

    material = providers.Singleton(Material, E=config.material.E, nu=config.material.nu)

    # Services
    solver_service = providers.Singleton(
        SolverService,
        logger=logger,
        method=config.solver.method,
        pivot_tolerance=config.solver.pivot_tolerance,
        dense_limit=config.solver.dense_limit,
        krylov_tolerance=config.solver.krylov_tolerance,
        krylov_max_iterations=config.solver.krylov_max_iterations,
        verify_ordering=config.solver.verify_ordering,
        refinement_steps=config.solver.refinement_steps,
    )
    equilibrium_service = providers.Singleton(
        EquilibriumService,
        solver_service=solver_service,
        logger=logger,
        over_integration=config.quadrature.over_integration,
        traction_points=config.quadrature.traction_points,
        energy_points=config.quadrature.energy_points,
    )
    fem_service = providers.Singleton(FemService, logger=logger)
    case_registry = providers.Singleton(CaseRegistry, logger=logger, material=material)

    # Repositories
    result_writer = providers.Singleton(ResultWriter, logger=logger)

    # Handlers
    run_handler = providers.Singleton(
        RunHandler,
        registry=case_registry,
        equilibrium_service=equilibrium_service,
        fem_service=fem_service,
        writer=result_writer,
        logger=logger,
        threads=config.runtime.threads,
        resolved_config=config,
    )


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> DictConfig:
    """Schema, then conf/config.yaml, then the user file, then command-line overrides."""
    try:
        layers = [OmegaConf.structured(AppConfig), OmegaConf.load(DEFAULT_CONFIG)]
        if path is not None:
            layers.append(OmegaConf.load(path))
        if overrides:
            layers.append(OmegaConf.create(overrides))
        return OmegaConf.merge(*layers)
    except (OmegaConfBaseException, OSError) as e:
        raise ConfigError(f"cannot load configuration: {e!s}") from e


def create_container(cfg: DictConfig) -> Container:
    """Create and configure the dependency injection container."""
    container_obj = Container()

    try:
        schema = OmegaConf.structured(AppConfig)
        config = OmegaConf.merge(schema, cfg)
        config_dict = OmegaConf.to_container(config, resolve=True)
    except OmegaConfBaseException as e:
        raise ConfigError(f"invalid configuration: {e!s}") from e
    container_obj.config.from_dict(config_dict)

    return container_obj

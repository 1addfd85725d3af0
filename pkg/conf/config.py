# conf/config.py

from dataclasses import dataclass, field


@dataclass
class LoggingConfig:
    level: str = "INFO"
    colorize: bool = True


@dataclass
class SolverConfig:
    method: str = "direct"
    pivot_tolerance: float = 1e-12
    dense_limit: int = 6000
    krylov_tolerance: float = 1e-13
    krylov_max_iterations: int = 20000
    verify_ordering: bool = True
    refinement_steps: int = 2


@dataclass
class QuadratureConfig:
    over_integration: int = 2
    energy_points: int = 32
    traction_points: int = 12


@dataclass
class SamplingConfig:
    points_per_direction: int = 100


@dataclass
class MaterialConfig:
    E: float = 1.0
    nu: float = 0.3


@dataclass
class RuntimeConfig:
    threads: int = 1
    output_dir: str = "results"


@dataclass
class AppConfig:
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    material: MaterialConfig = field(default_factory=MaterialConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

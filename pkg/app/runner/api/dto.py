import math
from enum import Enum

from pydantic import BaseModel, Field, field_validator, model_validator

from app.cases.entities.entity import CaseId
from app.mesh.entities.entity import RotationGrid
from pkg.spectral.quadrature import MAX_ORDER

LEG_WIDTH = 0.1


class RotationChoice(str, Enum):
    GAUSS = "gauss"
    GAUSS_LOBATTO = "gauss-lobatto"

    @property
    def grid(self) -> RotationGrid:
        return RotationGrid.GL if self is RotationChoice.GAUSS else RotationGrid.GLL


class Method(str, Enum):
    EQUILIBRIUM = "equilibrium"
    FEM = "fem"


FEM_CASES = {CaseId.RESULTS1, CaseId.LSHAPE, CaseId.PATCH}
SQUARE_CASES = {CaseId.RESULTS1, CaseId.ENERGY, CaseId.PATCH}


def parse_mesh(text: str) -> tuple[int, int]:
    """'4x4' -> (4, 4)"""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"mesh '{text}' is not of the form NxM")
    try:
        nx, ny = int(parts[0]), int(parts[1])
    except ValueError as e:
        raise ValueError(f"mesh '{text}' is not of the form NxM") from e
    if nx < 1 or ny < 1:
        raise ValueError(f"mesh '{text}' needs at least one element per direction")
    return nx, ny


class RunConfig(BaseModel):
    """Validated request for one run, sweep or comparison"""
    case: CaseId = Field(..., description="Case identifier")
    orders: list[int] = Field(default_factory=lambda: [2], description="Polynomial degrees N")
    meshes: list[tuple[int, int]] = Field(default_factory=list, description="Element counts per direction")
    element_sizes: list[float] = Field(default_factory=list, description="Square element sizes (L-shape)")
    c: float = Field(0.0, description="Sine deformation of the square grid")
    rotation: RotationChoice = Field(RotationChoice.GAUSS, description="Nodes carrying the rotation multiplier")
    method: Method = Field(Method.EQUILIBRIUM)
    fem_order: int = Field(1, description="1 for Q4, 2 for Q9")
    output_dir: str = Field("results")
    samples: int = Field(100, ge=2, description="Equispaced sample points per element direction")
    over_integration: int = Field(2, ge=1)

    @field_validator("meshes", mode="before")
    @classmethod
    def parse_meshes(cls, value):
        if value is None:
            return []
        if isinstance(value, str):
            value = [value]
        return [parse_mesh(v) if isinstance(v, str) else tuple(v) for v in value]

    @field_validator("orders")
    @classmethod
    def check_orders(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("at least one polynomial degree is required")
        for n in value:
            if not 1 <= n <= MAX_ORDER:
                raise ValueError(f"polynomial degree {n} outside 1..{MAX_ORDER}")
        return value

    @field_validator("meshes")
    @classmethod
    def check_meshes(cls, value: list[tuple[int, int]]) -> list[tuple[int, int]]:
        for nx, ny in value:
            if nx < 1 or ny < 1:
                raise ValueError(f"mesh {nx}x{ny} needs at least one element per direction")
        return value

    @field_validator("element_sizes")
    @classmethod
    def check_sizes(cls, value: list[float]) -> list[float]:
        for h in value:
            ratio = LEG_WIDTH / h if h > 0 else 0.0
            if h <= 0 or abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
                raise ValueError(f"element size {h} does not divide the leg width {LEG_WIDTH}")
        return value

    @field_validator("c")
    @classmethod
    def check_c(cls, value: float) -> float:
        if not 0.0 <= value < 1.0 / math.pi:
            raise ValueError(f"deformation c={value} must lie in [0, 1/pi)")
        return value

    @field_validator("fem_order")
    @classmethod
    def check_fem_order(cls, value: int) -> int:
        if value not in (1, 2):
            raise ValueError("fem order must be 1 (Q4) or 2 (Q9)")
        return value

    @model_validator(mode="after")
    def check_combination(self) -> "RunConfig":
        if self.case in SQUARE_CASES and not self.meshes:
            raise ValueError(f"case {self.case.value} needs --mesh NxM")
        if self.case is CaseId.LSHAPE and not self.element_sizes:
            raise ValueError("case lshape needs --element-size")
        if self.method is Method.FEM:
            if self.case not in FEM_CASES:
                raise ValueError(f"method fem is not available for case {self.case.value}")
            if self.c != 0.0:
                raise ValueError("method fem runs on undeformed grids only")
        return self

    @property
    def resolutions(self) -> list[tuple[tuple[int, int] | None, float | None]]:
        """(mesh, element size) per sweep point"""
        if self.case is CaseId.LSHAPE:
            return [(None, h) for h in self.element_sizes]
        if self.case is CaseId.PLATE_HOLE:
            return [(None, None)]
        return [(m, None) for m in self.meshes]


class PointResult(BaseModel):
    """Scalar outcome of one (case, method, N, resolution) solve"""
    case: str
    method: str
    order: int
    rotation: str | None = None
    mesh: str | None = None
    h: float | None = None
    c: float = 0.0
    n_elements: int
    n_dofs: int
    n_traction: int | None = None
    n_displacement: int | None = None
    n_rotation: int | None = None
    rank_deficiency: int | None = None
    residual_norm: float | None = None
    constraint_residual: float | None = None
    max_residual: float | None = Field(None, description="max |div sigma + f| over the samples")
    asymmetry: float | None = None
    traction_jump: float | None = None
    energy: float
    exact_energy: float | None = None
    errors: dict[str, float] = Field(default_factory=dict)
    solve_time: float = 0.0
    condition_estimate: float | None = None


class RateDTO(BaseModel):
    order: int
    field: str
    slope: float
    points_used: int


class BracketVerdict(BaseModel):
    fem_nondecreasing: bool
    equilibrium_nonincreasing: bool
    fem_below_equilibrium: bool

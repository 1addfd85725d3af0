class EquilibriumSolverError(Exception):
    """
    Base exception for solver, geometry and configuration failures
    """

    def __init__(self, detail: str, error_code: str = "SOLVER_PACKAGE_ERROR", exit_code: int = 1) -> None:
        super().__init__(detail)
        self.detail = detail
        self.error_code = error_code
        self.exit_code = exit_code

    def __str__(self) -> str:
        return f"{self.error_code}: {self.detail} (exit code {self.exit_code})"


class DomainValueError(EquilibriumSolverError):
    """Raised for out-of-range orders, indices or mismatched lengths"""

    def __init__(self, detail: str = "Value outside the supported domain") -> None:
        super().__init__(detail=detail, error_code="DOMAIN_ERROR")


class GeometryError(EquilibriumSolverError):
    """Raised when an element map degenerates or curves do not close"""

    def __init__(self, detail: str = "Invalid element geometry") -> None:
        super().__init__(detail=detail, error_code="GEOMETRY_ERROR")


class BoundaryError(EquilibriumSolverError):
    """Raised when the boundary partition is inconsistent"""

    def __init__(self, detail: str = "Invalid boundary specification") -> None:
        super().__init__(detail=detail, error_code="BOUNDARY_ERROR")


class ConfigError(EquilibriumSolverError):
    """Raised for invalid run configurations"""

    def __init__(self, detail: str = "Invalid configuration") -> None:
        super().__init__(detail=detail, error_code="CONFIG_ERROR", exit_code=2)


class SolverError(EquilibriumSolverError):
    """Raised when the linear system cannot be solved consistently"""

    def __init__(self, detail: str = "Linear solve failed", block: str | None = None) -> None:
        if block:
            detail = f"{detail} [block: {block}]"
        super().__init__(detail=detail, error_code="SOLVER_ERROR", exit_code=3)
        self.block = block


class ConvergenceRateError(EquilibriumSolverError):
    """Raised when too few points remain to fit a convergence slope"""

    def __init__(self, detail: str = "Insufficient usable points for a rate fit") -> None:
        super().__init__(detail=detail, error_code="RATE_ERROR")

from app.assembly.entities.entity import Material
from app.cases.entities.entity import CaseId, ManufacturedCase, Problem
from app.cases.service.manufactured import case_energy, case_patch, case_results_I
from app.cases.service.problems import l_shape, plate_with_hole, square_problem
from pkg.errors.exceptions import ConfigError
from pkg.log.logger import Logger

_MANUFACTURED = {
    CaseId.RESULTS1: case_results_I,
    CaseId.ENERGY: case_energy,
    CaseId.PATCH: case_patch,
}


class CaseRegistry:
    """Resolves case identifiers to problems for one mesh"""

    def __init__(self, logger: Logger, material: Material | None = None) -> None:
        self.logger = logger
        self.material = material or Material()

    @staticmethod
    def ids() -> list[str]:
        return [c.value for c in CaseId]

    def manufactured(self, case_id: CaseId | str) -> ManufacturedCase:
        case = CaseId(case_id)
        if case not in _MANUFACTURED:
            raise ConfigError(f"case {case.value} has no closed-form manufactured solution")
        return _MANUFACTURED[case](self.material)

    def build(
        self,
        case_id: CaseId | str,
        mesh: tuple[int, int] | None = None,
        c: float = 0.0,
        element_size: float | None = None,
    ) -> Problem:
        try:
            case = CaseId(case_id)
        except ValueError as e:
            raise ConfigError(f"unknown case '{case_id}', expected one of {self.ids()}") from e

        if case is CaseId.PLATE_HOLE:
            problem = plate_with_hole(self.material)
        elif case is CaseId.LSHAPE:
            if element_size is None:
                raise ConfigError("the lshape case needs an element size")
            problem = l_shape(element_size, self.material)
        else:
            if mesh is None:
                raise ConfigError(f"case {case.value} needs a mesh NxM")
            nx, ny = mesh
            problem = square_problem(self.manufactured(case), nx, ny, c=c, straight=case is CaseId.PATCH)
        self.logger.debug(
            "Built problem", extra={"case": case.value, "elements": problem.n_elements, "c": c}
        )
        return problem

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from app.cases.entities.entity import ExactSolution
from app.postproc.entities.entity import STRESS_NAMES, ErrorReport, RateFit, SampledFields
from pkg.errors.exceptions import ConvergenceRateError

Array = npt.NDArray[np.float64]

ROUND_OFF_FLOOR = 1e-12


def error_norms(fields: SampledFields, exact: ExactSolution, order: int, h: float | None = None) -> ErrorReport:
    """L-infinity errors of u, sigma and (when known) omega at the sample points."""
    x = fields.flat("x")
    errors: dict[str, float] = {}
    du = np.abs(fields.flat("displacement") - exact.displacement(x))
    errors["u1"], errors["u2"] = (float(v) for v in np.max(du, axis=0))
    ds = np.max(np.abs(fields.flat("stress") - exact.stress(x)), axis=0)
    for name, value in zip(STRESS_NAMES, ds):
        errors[name] = float(value)
    if exact.rotation is not None:
        errors["omega"] = float(np.max(np.abs(fields.flat("rotation") - exact.rotation(x))))
    return ErrorReport(errors=errors, h=h, order=order)


def fit_convergence(
    h: Sequence[float], errors: Sequence[float], floor: float = ROUND_OFF_FLOOR, min_points: int = 3
) -> RateFit:
    """Least-squares fit of log(error) = slope log(h) + intercept, dropping points at the round-off floor."""
    h_arr = np.asarray(h, dtype=np.float64)
    e_arr = np.asarray(errors, dtype=np.float64)
    if h_arr.shape != e_arr.shape:
        raise ConvergenceRateError(f"{h_arr.size} element sizes but {e_arr.size} errors")
    usable = np.isfinite(e_arr) & (e_arr > floor) & (h_arr > 0.0)
    count = int(np.count_nonzero(usable))
    if count < max(min_points, 2):
        raise ConvergenceRateError(f"only {count} points above {floor:g}, need {min_points}")
    slope, intercept = np.polyfit(np.log(h_arr[usable]), np.log(e_arr[usable]), 1)
    return RateFit(slope=float(slope), intercept=float(intercept), points_used=count)


def convergence_rate(
    h: Sequence[float], errors: Sequence[float], floor: float = ROUND_OFF_FLOOR, min_points: int = 3
) -> float:
    return fit_convergence(h, errors, floor, min_points).slope

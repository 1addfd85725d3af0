"""Command-line driver: ``python -m main_cli.main run|sweep|compare ...``"""

import argparse
import sys
from typing import Any

from pydantic import ValidationError

from app.cases.entities.entity import CaseId
from app.runner.api.dto import Method, RotationChoice, RunConfig
from main_cli.container import create_container, load_config
from pkg.errors.exceptions import ConfigError, EquilibriumSolverError
from pkg.log.logger import get_logger


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--case", required=True, choices=[c.value for c in CaseId])
    common.add_argument("--n", type=int, nargs="+", default=[2], help="polynomial degree(s) N")
    common.add_argument("--mesh", nargs="+", default=[], help="element counts NxM (square cases)")
    common.add_argument("--element-size", type=float, nargs="+", default=[], help="element size(s) (lshape)")
    common.add_argument("--c", type=float, default=0.0, help="sine deformation of the square grid")
    common.add_argument("--rotation-grid", choices=[r.value for r in RotationChoice], default=RotationChoice.GAUSS.value)
    common.add_argument("--method", choices=[m.value for m in Method], default=Method.EQUILIBRIUM.value)
    common.add_argument("--fem-order", type=int, default=1, help="1 for Q4, 2 for Q9")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--samples", type=int, default=None, help="sample points per element direction")
    common.add_argument("--over-integration", type=int, default=None)
    common.add_argument("--solver", choices=["direct", "krylov"], default=None)
    common.add_argument("--config", default=None, help="YAML file merged over conf/config.yaml")
    common.add_argument("--log-level", default=None)

    parser = argparse.ArgumentParser(prog="equilibrium-sem", description="Higher-order equilibrium solver for plane stress")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="solve one case and write summary.json and fields.csv")
    sub.add_parser("sweep", parents=[common], help="convergence sweep over N and resolutions")
    sub.add_parser("compare", parents=[common], help="equilibrium method against the displacement baseline")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    pairs = [
        (args.log_level, "logging", "level"),
        (args.solver, "solver", "method"),
        (args.over_integration, "quadrature", "over_integration"),
        (args.samples, "sampling", "points_per_direction"),
        (args.out, "runtime", "output_dir"),
    ]
    for value, section, key in pairs:
        if value is not None:
            overrides.setdefault(section, {})[key] = value
    return overrides


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logger = get_logger("cli")
    try:
        container = create_container(load_config(args.config, _overrides(args)))
        logger = container.logger()
        cfg = container.config
        try:
            request = RunConfig(
                case=args.case,
                orders=args.n,
                meshes=args.mesh,
                element_sizes=args.element_size,
                c=args.c,
                rotation=args.rotation_grid,
                method=args.method,
                fem_order=args.fem_order,
                output_dir=cfg.runtime.output_dir(),
                samples=cfg.sampling.points_per_direction(),
                over_integration=cfg.quadrature.over_integration(),
            )
        except ValidationError as e:
            raise ConfigError(f"invalid run configuration: {e.errors()[0]['msg']}") from e

        handler = container.run_handler()
        if args.command == "run":
            files = handler.run_case(request)
        elif args.command == "sweep":
            files = handler.sweep(request)
        else:
            files, verdict = handler.compare(request)
            logger.info("Comparison verdict", extra=verdict.model_dump())
        for name, path in files.items():
            print(f"{name}: {path}")
        return 0
    except EquilibriumSolverError as e:
        logger.error(str(e))
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected failure: {e!s}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())

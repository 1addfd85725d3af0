import csv
import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from app.runner.api.dto import Method, RotationChoice, RunConfig, parse_mesh
from app.runner.repository.result_writer import FIELD_COLUMNS, ResultWriter, build_id, format_value
from main_cli.container import create_container, load_config
from main_cli.main import main
from pkg.errors.exceptions import ConfigError


def _args(command: str, out: Path, *extra: str) -> list[str]:
    return [command, *extra, "--out", str(out), "--samples", "5", "--log-level", "WARNING"]


def _rows(path: Path) -> list[dict[str, str]]:
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def test_run_writes_summary_and_fields(tmp_path: Path) -> None:
    code = main(_args("run", tmp_path, "--case", "results1", "--n", "2", "--mesh", "2x2"))
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["command"] == "run"
    assert summary["result"]["case"] == "results1"
    assert summary["result"]["n_elements"] == 4
    assert summary["result"]["rank_deficiency"] == 0
    assert summary["config"]["solver"]["method"] == "direct"
    assert summary["build"]
    rows = _rows(tmp_path / "fields.csv")
    assert list(rows[0]) == FIELD_COLUMNS
    assert len(rows) == 4 * 25
    assert not list(tmp_path.glob("*.tmp"))


def test_fem_run(tmp_path: Path) -> None:
    code = main(_args("run", tmp_path, "--case", "patch", "--mesh", "2x2", "--method", "fem", "--fem-order", "2"))
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["result"]["method"] == "fem"
    assert summary["result"]["energy"] == pytest.approx(2.0)


def test_identical_runs_write_identical_fields(tmp_path: Path) -> None:
    for name in ("a", "b"):
        assert main(_args("run", tmp_path / name, "--case", "patch", "--n", "2", "--mesh", "1x1")) == 0
    assert (tmp_path / "a" / "fields.csv").read_bytes() == (tmp_path / "b" / "fields.csv").read_bytes()


@pytest.mark.parametrize(
    "extra",
    [
        ("--case", "results1", "--mesh", "0x0"),
        ("--case", "results1"),
        ("--case", "lshape", "--element-size", "0.03"),
        ("--case", "plate-hole", "--method", "fem"),
        ("--case", "results1", "--mesh", "2x2", "--c", "0.4"),
        ("--case", "results1", "--mesh", "2x2", "--n", "0"),
    ],
)
def test_invalid_requests_exit_with_config_code(tmp_path: Path, extra: tuple[str, ...]) -> None:
    assert main(_args("run", tmp_path, *extra)) == 2
    assert not (tmp_path / "summary.json").exists()


def test_missing_config_file(tmp_path: Path) -> None:
    args = _args("run", tmp_path, "--case", "patch", "--mesh", "1x1", "--config", str(tmp_path / "missing.yaml"))
    assert main(args) == 2


def test_sweep_writes_tables(tmp_path: Path) -> None:
    code = main(_args("sweep", tmp_path, "--case", "results1", "--n", "2", "3", "--mesh", "1x1", "2x2"))
    assert code == 0
    rows = _rows(tmp_path / "convergence.csv")
    assert {row["field"] for row in rows} >= {"u1", "s11", "omega", "asymmetry"}
    assert {row["N"] for row in rows} == {"2", "3"}
    assert (tmp_path / "rates.csv").read_text().startswith("N,field,slope,points_used")
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["points"]) == 4


def test_sweep_needs_two_points(tmp_path: Path) -> None:
    assert main(_args("sweep", tmp_path, "--case", "patch", "--mesh", "1x1")) == 2


def test_compare_writes_both_methods(tmp_path: Path) -> None:
    code = main(_args("compare", tmp_path, "--case", "results1", "--n", "3", "--mesh", "2x2", "4x4"))
    assert code == 0
    rows = _rows(tmp_path / "comparison.csv")
    assert [row["method"] for row in rows] == ["equilibrium", "fem", "equilibrium", "fem"]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary["verdict"]) == {"fem_nondecreasing", "equilibrium_nonincreasing", "fem_below_equilibrium"}


def test_compare_rejects_deformed_grids(tmp_path: Path) -> None:
    assert main(_args("compare", tmp_path, "--case", "results1", "--mesh", "1x1", "2x2", "--c", "0.1")) == 2


def test_run_config_validation() -> None:
    config = RunConfig(case="results1", meshes=["2x3"], rotation="gauss-lobatto")
    assert config.meshes == [(2, 3)]
    assert config.rotation is RotationChoice.GAUSS_LOBATTO
    assert config.resolutions == [((2, 3), None)]
    assert RunConfig(case="plate-hole").resolutions == [(None, None)]
    assert RunConfig(case="lshape", element_sizes=[0.05, 0.025]).resolutions == [(None, 0.05), (None, 0.025)]
    with pytest.raises(ValidationError):
        RunConfig(case="energy", meshes=["2x2"], method=Method.FEM)
    with pytest.raises(ValidationError):
        RunConfig(case="patch", meshes=["2x2"], fem_order=3)
    with pytest.raises(ValidationError):
        RunConfig(case="patch", meshes=["2x2"], samples=1)


@pytest.mark.parametrize("text", ["2", "axb", "2x0", "1x2x3"])
def test_parse_mesh_rejects(text: str) -> None:
    with pytest.raises(ValueError):
        parse_mesh(text)


def test_format_value() -> None:
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(np.float64(2.0)) == "2"
    assert format_value(np.int64(3)) == "3"
    assert format_value(None) == ""
    assert format_value(True) == "true"


def test_writer_replaces_non_finite_values(logger, tmp_path: Path) -> None:
    path = ResultWriter(logger).write_json(tmp_path / "out" / "s.json", {"a": float("nan"), "b": [np.float64(1.5)]})
    assert json.loads(path.read_text()) == {"a": None, "b": [1.5]}


def test_build_id() -> None:
    assert build_id().startswith(("git-", "equilibrium-sem-"))


def test_config_layers(tmp_path: Path) -> None:
    user = tmp_path / "user.yaml"
    user.write_text("material:\n  nu: 0.25\nsolver:\n  dense_limit: 10\n")
    cfg = load_config(user, {"solver": {"method": "krylov"}})
    container = create_container(cfg)
    assert container.material().nu == 0.25
    assert container.solver_service().dense_limit == 10
    assert container.solver_service().method.value == "krylov"
    assert container.equilibrium_service().energy_points == 32
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")

"""
End-to-end tests of the zerod command line
"""
import csv
import json
import logging

import pytest

from zerod_rom.cli import EXIT_COMPARISON, EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_VALIDATION, main
from zerod_rom.logging_config import get_logger, resolve_level, setup_logging
from zerod_rom.model_file import read_model, write_model
from zerod_rom.network import NetworkBuilder, validate_network
from zerod_rom.parameters import ElementKind, FlowBCParams, PressureBCParams, VesselParams
from zerod_rom.results_io import read_manifest, read_results_csv

RCR_BC = {"bc_type": "RCR", "bc_values": {"Rp": 100.0, "C": 1e-4, "Rd": 900.0, "Pd": 0.0}}


def _write_tree(tmp_path, branches, junctions=(), outlets=None):
    tree = {
        "branches": {str(b): [[0.5 * k, a] for k, a in enumerate(areas)] for b, areas in branches.items()},
        "junctions": list(junctions),
        "inlet": {"branch": 0, "t": [0.0, 1.0], "Q": [5.0, 5.0]},
        "outlets": outlets if outlets is not None else {"0": RCR_BC},
    }
    path = tmp_path / "tree.json"
    path.write_text(json.dumps(tree))
    return path


def test_build_single_stenosis(tmp_path, capsys):
    tree = _write_tree(tmp_path, {0: [3.9, 4.0, 3.5, 1.2, 3.4, 4.1, 4.0]})
    output = tmp_path / "model.json"
    assert main(["build", str(tree), "-o", str(output)]) == EXIT_OK
    model = read_model(output)
    assert validate_network(model.network) == []
    vessels = [e for e in model.network.elements if e.kind == ElementKind.VESSEL]
    assert len(vessels) == 3
    assert "stenosis at" in capsys.readouterr().out


def test_build_missing_outlet_bc(tmp_path, capsys):
    tree = _write_tree(
        tmp_path,
        {0: [1.0, 1.0, 1.0], 1: [1.0, 1.0, 1.0], 2: [0.5, 0.5, 0.5]},
        junctions=[{"id": 1, "inlet_branches": [0], "outlet_branches": [1, 2]}],
        outlets={"1": RCR_BC},
    )
    assert main(["build", str(tree), "-o", str(tmp_path / "model.json")]) == EXIT_VALIDATION
    assert "cap '2'" in capsys.readouterr().err
    assert not (tmp_path / "model.json").exists()


def test_build_fixed_mode(tmp_path):
    tree = _write_tree(tmp_path, {0: [2.0 + 0.1 * ((-1) ** k) * k for k in range(15)]})
    output = tmp_path / "model.json"
    assert main(["build", str(tree), "--mode", "fixed:10", "-o", str(output)]) == EXIT_OK
    vessels = [e for e in read_model(output).network.elements if e.kind == ElementKind.VESSEL]
    assert len(vessels) == 10


def test_build_bad_mode(tmp_path):
    tree = _write_tree(tmp_path, {0: [1.0, 1.0, 1.0]})
    assert main(["build", str(tree), "--mode", "fixed:x", "-o", str(tmp_path / "m.json")]) == EXIT_PARSE


def test_run_writes_results_and_manifest(tmp_path, resistor_network):
    model = tmp_path / "model.json"
    write_model(model, resistor_network)
    out = tmp_path / "out"
    code = main(["run", str(model), "-o", str(out), "--cycles", "2", "--steps-per-cycle", "20"])
    assert code == EXIT_OK

    table = read_results_csv(out / "results.csv")
    assert table.n_t == 41
    assert table.labels == ["in_v", "v_out"]
    with open(out / "results.csv") as f:
        assert len(next(csv.reader(f))) == 5

    manifest = read_manifest(out / "manifest.json")
    assert manifest["converged"] is True
    assert manifest["n_cycles"] == 2
    assert manifest["dt"] == pytest.approx(0.05)
    assert manifest["outlet_mean_pressure"]["v_out"] == pytest.approx(0.0, abs=1e-9)
    assert table.pressure["in_v"][-1] == pytest.approx(50.0)


def test_run_periodicity_report(tmp_path, rcr_network):
    model = tmp_path / "model.json"
    write_model(model, rcr_network(C=1.0e-3))
    out = tmp_path / "out"
    args = ["run", str(model), "-o", str(out), "--cycles", "6", "--steps-per-cycle", "100",
            "--check-periodicity", "0.01", "--report-units", "mmHg"]
    assert main(args) == EXIT_OK
    manifest = read_manifest(out / "manifest.json")
    periodicity = manifest["periodicity"]
    assert periodicity["tol"] == 0.01
    assert len(periodicity["history"]) == 5
    assert set(periodicity["deltas"]) == {"in_out"}
    assert manifest["units"] == "mmHg"


def test_run_last_cycle_only_without_enough_cycles(tmp_path, rcr_network):
    model = tmp_path / "model.json"
    write_model(model, rcr_network())
    out = tmp_path / "out"
    args = ["run", str(model), "-o", str(out), "--cycles", "3", "--steps-per-cycle", "20",
            "--last-cycle-only", "--check-periodicity", "0.01"]
    assert main(args) == EXIT_OK
    assert read_results_csv(out / "results.csv").n_t == 21
    assert "error" in read_manifest(out / "manifest.json")["periodicity"]


def test_run_missing_model(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json"), "-o", str(tmp_path / "out")]) == EXIT_PARSE
    assert "error:" in capsys.readouterr().err


def test_run_invalid_network(tmp_path):
    model = tmp_path / "model.json"
    model.write_text(json.dumps({
        "boundary_conditions": [
            {"bc_name": "in", "bc_type": "FLOW", "wire": 1, "location": "inlet",
             "bc_values": {"t": [0.0, 1.0], "Q": [1.0, 1.0]}},
        ],
        "vessels": [{"vessel_id": 0, "inlet_wire": 1, "outlet_wire": 2}],
    }))
    assert main(["run", str(model), "-o", str(tmp_path / "out")]) == EXIT_VALIDATION


def test_bad_arguments():
    assert main(["run"]) == EXIT_PARSE
    assert main(["unknown-command"]) == EXIT_PARSE


def _pulsatile_model(tmp_path, inflow):
    builder = NetworkBuilder()
    builder.add("in", FlowBCParams(Q=inflow))
    builder.add("v", VesselParams(R_poiseuille=100.0, C=1.0e-6, L=1.0))
    builder.add("out", PressureBCParams(P=1000.0))
    builder.chain("in", "v", "out")
    path = tmp_path / "pulsatile.json"
    write_model(path, builder.build())
    return path


def _run(tmp_path, model, name, steps):
    out = tmp_path / name
    args = ["run", str(model), "-o", str(out), "--cycles", "1", "--steps-per-cycle", str(steps)]
    assert main(args) == EXIT_OK
    return out / "results.csv"


@pytest.fixture
def cap_map(tmp_path):
    path = tmp_path / "caps.json"
    path.write_text(json.dumps({"inlet": "in", "caps": {"in": "in_v", "out": "v_out"}}))
    return path


def test_compare_against_itself(tmp_path, pulsatile_inflow, cap_map):
    results = _run(tmp_path, _pulsatile_model(tmp_path, pulsatile_inflow), "a", 40)
    report_path = tmp_path / "report.json"
    assert main(["compare", str(results), str(results), str(cap_map), "-o", str(report_path)]) == EXIT_OK
    report = json.loads(report_path.read_text())
    for key in ("pressure_avg", "flow_avg", "pressure_max", "flow_max", "pressure_sys", "flow_sys"):
        assert report[key] == 0.0


def test_compare_different_grids(tmp_path, pulsatile_inflow, cap_map):
    model = _pulsatile_model(tmp_path, pulsatile_inflow)
    coarse = _run(tmp_path, model, "coarse", 40)
    fine = _run(tmp_path, model, "fine", 80)
    report_path = tmp_path / "report.json"
    args = ["compare", str(coarse), str(fine), str(cap_map), "-o", str(report_path)]
    assert main(args) == EXIT_COMPARISON
    assert main(args + ["--resample", "linear"]) == EXIT_OK
    report = json.loads(report_path.read_text())
    assert report["pressure_avg"] < 0.05


def test_compare_unknown_column(tmp_path, pulsatile_inflow):
    results = _run(tmp_path, _pulsatile_model(tmp_path, pulsatile_inflow), "a", 40)
    caps = tmp_path / "caps.json"
    caps.write_text(json.dumps({"inlet": "in", "caps": {"in": "in_v", "out": "nowhere"}}))
    assert main(["compare", str(results), str(results), str(caps), "-o", str(tmp_path / "r.json")]) == EXIT_COMPARISON


def _sweep_inputs(tmp_path, rcr_network, values):
    model = tmp_path / "model.json"
    write_model(model, rcr_network(Q=5.0, R_p=100.0, C=1.0e-5, P_d=0.0))
    spec = tmp_path / "sweep.yaml"
    spec.write_text(f"parameter: out.R_distal\nvalues: {json.dumps(values)}\n")
    return model, spec


def _summary_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_sweep_outlet_means(tmp_path, rcr_network):
    model, spec = _sweep_inputs(tmp_path, rcr_network, [900.0, 1800.0])
    out = tmp_path / "sweep"
    args = ["sweep", str(model), str(spec), "-o", str(out), "--cycles", "2", "--steps-per-cycle", "50"]
    assert main(args) == EXIT_OK
    rows = _summary_rows(out / "summary.csv")
    assert [r["converged"] for r in rows] == ["true", "true"]
    means = [float(r["in_out:mean_pressure"]) for r in rows]
    assert means == pytest.approx([5000.0, 9500.0], rel=1e-6)
    assert (out / "row_0000.csv").exists()
    assert (out / "row_0001.csv").exists()


def test_sweep_parallel_matches_serial(tmp_path, rcr_network):
    model, spec = _sweep_inputs(tmp_path, rcr_network, [900.0, 1200.0, 1500.0, 1800.0])
    summaries = []
    for parallelism in ("1", "4"):
        out = tmp_path / f"sweep{parallelism}"
        args = ["sweep", str(model), str(spec), "-o", str(out), "--cycles", "2",
                "--steps-per-cycle", "20", "--parallelism", parallelism]
        assert main(args) == EXIT_OK
        summaries.append((out / "summary.csv").read_bytes())
    assert summaries[0] == summaries[1]


def test_sweep_empty_values(tmp_path, rcr_network):
    model, spec = _sweep_inputs(tmp_path, rcr_network, [])
    assert main(["sweep", str(model), str(spec), "-o", str(tmp_path / "sweep")]) == EXIT_PARSE


def test_sweep_unknown_parameter(tmp_path, rcr_network):
    model = tmp_path / "model.json"
    write_model(model, rcr_network())
    spec = tmp_path / "sweep.yaml"
    spec.write_text("parameter: out.R_missing\nvalues: [1.0]\n")
    out = tmp_path / "sweep"
    args = ["sweep", str(model), str(spec), "-o", str(out), "--cycles", "1", "--steps-per-cycle", "10"]
    assert main(args) == EXIT_SOLVER
    row = _summary_rows(out / "summary.csv")[0]
    assert row["converged"] == "false"
    assert "R_missing" in row["error"]


def test_logging_setup(monkeypatch):
    monkeypatch.setenv("ZEROD_LOG_LEVEL", "DEBUG")
    setup_logging(include_timestamp=False)
    assert logging.getLogger("zerod_rom").level == logging.DEBUG
    setup_logging("error")
    assert logging.getLogger("zerod_rom").level == logging.ERROR
    assert get_logger("sweep").name == "zerod_rom.sweep"
    assert resolve_level("info") == logging.INFO
    with pytest.raises(ValueError):
        resolve_level("chatty")


def test_bad_log_level(tmp_path, capsys):
    assert main(["--log-level", "chatty", "run", str(tmp_path / "model.json")]) == EXIT_PARSE
    assert "chatty" in capsys.readouterr().err.lower()

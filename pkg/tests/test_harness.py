import csv
import subprocess
import sys

import numpy as np
import pytest

from efcm.cli import main, read_config
from efcm.errors import InvalidArgumentError, StructureAbsentError
from efcm.harness import (
    DRIFT_COLUMNS,
    PRESETS,
    WORK_COLUMNS,
    ExperimentSpec,
    MethodId,
    energy_drift,
    iteration_table,
    observed_orders,
    parse_method,
    run_preset,
    work_precision,
    write_gnuplot,
)
from efcm.problems import henon_heiles, oscillator
from efcm.solver import IterationPolicy


def read_rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# method ids -------------------------------------------------------------------

@pytest.mark.parametrize("text,expected", [
    ("efcm:2,2", MethodId("efcm", 2, 2)),
    ("HBVM:3,2", MethodId("hbvm", 3, 2)),
    ("efcm:3,3,radau", MethodId("efcm", 3, 3, "radau")),
    ("gauss:2", MethodId("gauss", 2, 2, "gauss")),
    ("radau:3", MethodId("radau", 3, 3, "radau")),
])
def test_parse_method(text, expected):
    assert parse_method(text) == expected
    assert parse_method(str(expected)) == expected


@pytest.mark.parametrize("text", ["efcm:2", "efcm:2,3", "rk4:1", "gauss:0", "efcm:2,2,lobatto", "efcm"])
def test_parse_method_rejects(text):
    with pytest.raises(InvalidArgumentError):
        parse_method(text)


def test_spec_validation():
    base = dict(problem="henon-heiles", methods=["efcm:2,2"], t_end=1.0)
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(stepsizes=[0.1, 0.1], **base).validate()
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(stepsizes=[-0.1], **base).validate()
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(stepsizes=[0.3], **base).validate()
    assert ExperimentSpec(stepsizes=[0.25, 0.125], **base).validate() == [MethodId("efcm", 2, 2)]


# work-precision -----------------------------------------------------------------

def test_work_precision_henon_heiles(tmp_path):
    out = tmp_path / "work.csv"
    spec = ExperimentSpec("henon-heiles", ["efcm:2,2"], [1 / 4, 1 / 8, 1 / 16, 1 / 32], 10.0,
                          policy=IterationPolicy.tolerance(1e-14), output=str(out), serial=True)
    records = work_precision(spec)
    errs = [r.global_error for r in records]
    orders = observed_orders([r.h for r in records], errs)
    assert np.all((orders > 3.6) & (orders < 4.4))
    rows = read_rows(out)
    assert rows[0] == WORK_COLUMNS
    assert len(rows) == 5
    assert all(float(r[3]) > 0 for r in rows[1:])


def test_work_precision_heat_decreases():
    spec = ExperimentSpec("heat", ["efcm:2,2"], [1 / 4, 1 / 8, 1 / 16, 1 / 32], 1.0,
                          policy=IterationPolicy.tolerance(1e-12), problem_params={"N": 200})
    errs = [r.global_error for r in work_precision(spec)]
    assert all(a > b for a, b in zip(errs, errs[1:]))


def test_work_precision_empty_methods(tmp_path):
    out = tmp_path / "empty.csv"
    spec = ExperimentSpec("henon-heiles", [], [0.5], 1.0, output=str(out))
    assert work_precision(spec) == []
    assert out.read_text() == ",".join(WORK_COLUMNS) + "\n"


def test_work_precision_records_divergence(tmp_path):
    out = tmp_path / "div.csv"
    spec = ExperimentSpec("heat", ["hbvm:2,2", "efcm:2,2"], [0.25], 1.0,
                          policy=IterationPolicy.tolerance(1e-8), problem_params={"N": 50},
                          output=str(out))
    records = work_precision(spec)
    assert records[0].diverged and not records[1].diverged
    rows = read_rows(out)
    assert rows[1][2] == "inf"
    assert np.isfinite(float(rows[2][2]))


def test_parallel_and_serial_agree():
    args = dict(problem="henon-heiles", methods=["efcm:2,2", "gauss:2"], stepsizes=[0.5, 0.25],
                t_end=5.0, policy=IterationPolicy.fixed(1))
    a = work_precision(ExperimentSpec(serial=True, **args))
    b = work_precision(ExperimentSpec(serial=False, **args))
    assert [(r.method, r.h, r.global_error, r.total_iterations) for r in a] == \
           [(r.method, r.h, r.global_error, r.total_iterations) for r in b]


# energy drift --------------------------------------------------------------------

def test_drift_pure_rotation(tmp_path):
    out = tmp_path / "drift.csv"
    spec = ExperimentSpec("oscillator", ["efcm:2,2"], [0.1], 50.0, output=str(out),
                          problem_params={"omega": 3.0, "amplitude": 0.0})
    (record,) = energy_drift(spec)
    assert np.max(record.drift[:, 1]) <= 1e-11
    rows = read_rows(out)
    assert rows[0] == DRIFT_COLUMNS
    assert len(rows) == 502


def test_drift_requires_hamiltonian():
    with pytest.raises(StructureAbsentError):
        energy_drift(ExperimentSpec("heat", ["efcm:2,2"], [0.5], 1.0, problem_params={"N": 10}))


def test_drift_fpu_bounded():
    spec = ExperimentSpec("fpu", ["efcm:2,2"], [0.1], 100.0, policy=IterationPolicy.tolerance(1e-12))
    (record,) = energy_drift(spec)
    geh = record.drift[1:, 1]
    assert np.isfinite(geh).all()
    windows = geh.reshape(10, -1).mean(axis=1)
    assert windows[-1] <= 3 * windows[0]
    assert 1 <= int(np.sum(np.diff(windows) > 0)) <= 8


def test_csv_byte_stable(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        spec = ExperimentSpec("henon-heiles", ["efcm:2,2", "hbvm:2,2"], [0.5, 0.25], 20.0,
                              policy=IterationPolicy.tolerance(1e-10), output=str(p), serial=True)
        energy_drift(spec)
    assert paths[0].read_bytes() == paths[1].read_bytes()


# iteration tables -----------------------------------------------------------------

def test_iteration_table_henon_heiles(tmp_path):
    out = tmp_path / "tab.csv"
    table = iteration_table(henon_heiles(), 0.01, 10.0, [1e-6, 1e-8, 1e-10, 1e-12], output=str(out))
    efcm, hbvm = table["efcm:2,2"], table["hbvm:2,2"]
    assert all(e <= h for e, h in zip(efcm, hbvm))
    assert efcm == sorted(efcm) and hbvm == sorted(hbvm)
    rows = read_rows(out)
    assert rows[0] == ["method", "tol=1e-06", "tol=1e-08", "tol=1e-10", "tol=1e-12"]


def test_iteration_table_single_tolerance():
    table = iteration_table("henon-heiles", 0.5, 5.0, [1e-8])
    assert all(len(row) == 1 for row in table.values())


def test_iteration_table_divergence_sentinel():
    from efcm.problems import semilinear_heat
    table = iteration_table(semilinear_heat(50), 0.1, 0.5, [1e-8])
    assert table["hbvm:2,2"] == ["div"]
    assert isinstance(table["efcm:2,2"][0], int)


def test_iteration_table_rejects_increasing():
    with pytest.raises(InvalidArgumentError):
        iteration_table("henon-heiles", 0.5, 5.0, [1e-10, 1e-6])


# gnuplot and presets ----------------------------------------------------------------

def test_gnuplot_script(tmp_path):
    out = tmp_path / "w.csv"
    work_precision(ExperimentSpec("henon-heiles", ["efcm:2,2", "gauss:2"], [0.5], 5.0, output=str(out)))
    gp = write_gnuplot(out, "work")
    text = gp.read_text()
    assert "efcm:2,2" in text and "gauss:2" in text and text.startswith("set datafile separator")


def test_preset_names():
    assert set(PRESETS) == {"fig1", "fig2", "fig3", "tab1", "tab2", "tab3"}


def test_preset_tab3(tmp_path):
    results = run_preset("tab3", tmp_path)
    assert (tmp_path / "tab3_iterations.csv").exists()
    assert results["iterations"]["hbvm:2,2"] == ["div"] * 4


# command line ---------------------------------------------------------------------------

def test_cli_run(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code = main(["run", "--problem", "henon-heiles", "--method", "efcm:2,2", "--h", "1/4,1/8",
                 "--t-end", "5", "--policy", "tol:1e-10", "--out", str(out), "--gnuplot"])
    assert code == 0
    assert len(read_rows(out)) == 3
    assert out.with_suffix(".gp").exists()
    assert "efcm:2,2" in capsys.readouterr().out


def test_cli_config_and_override(tmp_path):
    cfg = tmp_path / "exp.cfg"
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg.write_text(f"# experiment\nproblem = henon-heiles\nmethod = efcm:2,2 gauss:2\nh = 0.5\n"
                   f"t-end = 5\nout = {out1}\n")
    assert read_config(cfg)["method"] == ["efcm:2,2", "gauss:2"]
    assert main(["run", "--config", str(cfg)]) == 0
    assert len(read_rows(out1)) == 3
    assert main(["run", "--config", str(cfg), "--method", "radau:2", "--out", str(out2)]) == 0
    rows = read_rows(out2)
    assert [r[0] for r in rows[1:]] == ["radau:2"]


def test_cli_drift_and_iterations(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["run", "--problem", "henon-heiles", "--kind", "drift", "--h", "0.5",
                 "--t-end", "10", "--out", str(out)]) == 0
    assert read_rows(out)[0] == DRIFT_COLUMNS
    out = tmp_path / "i.csv"
    assert main(["run", "--problem", "henon-heiles", "--kind", "iterations", "--h", "0.5",
                 "--t-end", "5", "--tols", "1e-6,1e-8", "--method", "efcm:2,2",
                 "--out", str(out)]) == 0
    assert len(read_rows(out)) == 2


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["run", "--problem", "nope", "--h", "0.1", "--t-end", "1"]) == 2
    assert main(["run", "--problem", "henon-heiles", "--h", "0.3", "--t-end", "1"]) == 2
    assert main(["run", "--problem", "henon-heiles", "--t-end", "1"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    out = tmp_path / "div.csv"
    code = main(["run", "--problem", "heat", "--param", "N=50", "--method", "hbvm:2,2",
                 "--h", "0.25", "--t-end", "1", "--policy", "tol:1e-8", "--out", str(out)])
    assert code == 3
    assert read_rows(out)[1][2] == "inf"
    assert "error" in capsys.readouterr().err


def test_cli_tableau(capsys):
    assert main(["tableau", "radau:2"]) == 0
    text = capsys.readouterr().out
    assert "0.4166666666666667" in text and "-0.083333333333333" in text
    assert main(["tableau", "hbvm:3,2"]) == 0
    assert main(["tableau", "lobatto:3"]) == 2


def test_cli_bound(capsys):
    assert main(["bound", "--L", "1", "--omega", "0", "--rule", "gauss:2", "--n", "2"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(3 / (3 + 3 ** 0.5), rel=1e-14)
    assert main(["bound", "--L", "0"]) == 2


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "efcm.cli", "tableau", "gauss:2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("gauss:2")


@pytest.mark.slow
@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3", "tab1", "tab2", "tab3"])
def test_every_preset_runs(name, tmp_path):
    import time
    start = time.perf_counter()
    code = main(["preset", name, "--out-dir", str(tmp_path), "--gnuplot"])
    assert code in (0, 3)  # 3 flags comparator runs that diverged; files are still written
    assert time.perf_counter() - start < 300
    produced = sorted(p.name for p in tmp_path.glob(f"{name}_*.csv"))
    assert produced
    for path in tmp_path.glob(f"{name}_*.csv"):
        assert len(read_rows(path)) > 1

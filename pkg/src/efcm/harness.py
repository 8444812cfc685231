"""Experiment engine: work-precision runs, energy drift and iteration tables.

Every experiment writes plain CSV so results can be plotted with any tool.
Independent (method, h) runs may execute on a thread pool; records are
always assembled in input order so the files do not depend on scheduling.
"""
import csv
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DivergenceError, EvaluationError, InvalidArgumentError, StructureAbsentError
from .problems import energy, get_problem
from .quadrature import gauss_legendre, rule_from_id
from .scheme import build_efcm, gauss_tableau, hbvm_tableau, radau_iia_tableau
from .solver import (
    IterationPolicy,
    efcm_kernel,
    integrate,
    irk_kernel,
    reference_solution,
    step_count,
)

__all__ = [
    "MethodId",
    "ExperimentSpec",
    "RunRecord",
    "parse_method",
    "make_kernel",
    "work_precision",
    "energy_drift",
    "iteration_table",
    "observed_orders",
    "PRESETS",
    "run_preset",
    "WORK_COLUMNS",
    "DRIFT_COLUMNS",
]

log = logging.getLogger(__name__)

WORK_COLUMNS = ["method", "h", "global_error", "wall_time_s", "total_iterations",
                "wall_time_with_assembly_s"]
DRIFT_COLUMNS = ["method", "t", "geh"]


@dataclass(frozen=True)
class MethodId:
    """Parsed method identifier such as ``efcm:2,2`` or ``radau:3``."""

    family: str
    k: int
    n: int
    rule: str = "gauss"

    def __str__(self):
        if self.family in ("efcm", "hbvm"):
            suffix = "" if self.rule == "gauss" else f",{self.rule}"
            return f"{self.family}:{self.k},{self.n}{suffix}"
        return f"{self.family}:{self.k}"


def parse_method(text):
    """Parse ``efcm:k,n[,radau]``, ``hbvm:k,n[,radau]``, ``gauss:k`` or ``radau:k``."""
    try:
        family, args = text.strip().lower().split(":")
        parts = [a.strip() for a in args.split(",")]
        if family in ("efcm", "hbvm"):
            rule = parts[2] if len(parts) == 3 else "gauss"
            if len(parts) not in (2, 3) or rule not in ("gauss", "radau"):
                raise ValueError
            method = MethodId(family, int(parts[0]), int(parts[1]), rule)
            if not 2 <= method.n <= method.k:
                raise ValueError
            return method
        if family in ("gauss", "radau") and len(parts) == 1:
            k = int(parts[0])
            if k < 1:
                raise ValueError
            return MethodId(family, k, k, family)
    except ValueError:
        pass
    raise InvalidArgumentError(f"cannot parse method id {text!r}")


def _rule(method):
    return rule_from_id(f"{method.rule}:{method.k}")


def make_kernel(method, problem, h):
    """Build a step kernel for ``method`` on ``problem`` with stepsize ``h``."""
    if isinstance(method, str):
        method = parse_method(method)
    if method.family == "efcm":
        scheme = build_efcm(problem.A, h, method.k, method.n, _rule(method))
        return efcm_kernel(scheme, problem.g)
    if method.family == "hbvm":
        tableau = hbvm_tableau(method.k, method.n, _rule(method))
    elif method.family == "gauss":
        tableau = gauss_tableau(method.k)
    else:
        tableau = radau_iia_tableau(method.k)
    return irk_kernel(tableau, problem.rhs, h)


@dataclass
class ExperimentSpec:
    """Description of one experiment over methods and stepsizes."""

    problem: str
    methods: list
    stepsizes: list
    t_end: float
    policy: IterationPolicy = field(default_factory=IterationPolicy)
    output: str = None
    seed: int = 0
    problem_params: dict = field(default_factory=dict)
    reference_tol: float = 1e-13
    sampling: str = None
    serial: bool = False

    def validate(self):
        methods = [m if isinstance(m, MethodId) else parse_method(m) for m in self.methods]
        if any(not h > 0 for h in self.stepsizes):
            raise InvalidArgumentError("stepsizes must be positive")
        if len(set(self.stepsizes)) != len(self.stepsizes):
            raise InvalidArgumentError("stepsizes must be distinct")
        for h in self.stepsizes:
            step_count(self.t_end, h)
        if self.sampling not in (None, "end", "grid"):
            raise InvalidArgumentError(f"unknown error sampling {self.sampling!r}")
        return methods

    def build_problem(self):
        return get_problem(self.problem, **self.problem_params)


@dataclass
class RunRecord:
    """Outcome of one (method, h) run."""

    method: str
    h: float
    global_error: float
    wall_time: float
    total_iterations: int
    wall_time_with_assembly: float = 0.0
    drift: np.ndarray = None
    diverged: bool = False
    message: str = ""

    def row(self):
        error = "inf" if self.diverged or not math.isfinite(self.global_error) else repr(self.global_error)
        return [self.method, repr(self.h), error, f"{self.wall_time:.6f}", str(self.total_iterations),
                f"{self.wall_time_with_assembly:.6f}"]


def _sample_times(spec, problem):
    """Common sample grid shared by every stepsize, or ``None`` when only the end time is used."""
    sampling = spec.sampling or ("end" if problem.exact is not None and problem.name == "heat" else "grid")
    if sampling == "end":
        return None
    coarse = max(spec.stepsizes)
    if all(abs(coarse / h - round(coarse / h)) < 1e-9 for h in spec.stepsizes):
        n_coarse = step_count(spec.t_end, coarse)
        stride = max(1, math.ceil(n_coarse / 100))
        idx = np.arange(0, n_coarse + 1, stride)
        if idx[-1] != n_coarse:
            idx = np.append(idx, n_coarse)
        return coarse * idx
    return "per-run"


def _sample_error(traj, times, reference):
    idx = np.rint(times / traj.times[1]).astype(int) if traj.steps else np.zeros(1, dtype=int)
    return float(np.max(np.abs(traj.states[idx] - reference)))


def _run_pool(func, items, serial):
    if serial or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=os.cpu_count() or 1) as pool:
        return list(pool.map(func, items))


def _integrate_timed(method, problem, h, t_end, policy):
    start = time.perf_counter()
    kernel = make_kernel(method, problem, h)
    assembled = time.perf_counter()
    try:
        traj = integrate(kernel, problem, t_end, h, policy)
        err = None
    except (DivergenceError, EvaluationError) as exc:
        traj = exc.trajectory
        err = exc
    done = time.perf_counter()
    return traj, err, max(done - assembled, 1e-9), max(done - start, 1e-9)


def work_precision(spec):
    """Run every (method, h) pair and measure the global error against a reference.

    Returns a list of :class:`RunRecord` in ``methods x stepsizes`` order and
    writes a CSV with :data:`WORK_COLUMNS` when ``spec.output`` is set.
    """
    methods = spec.validate()
    problem = spec.build_problem()
    times = _sample_times(spec, problem)
    shared_ref = None
    if isinstance(times, np.ndarray):
        shared_ref = reference_solution(problem, spec.t_end, spec.reference_tol, times=times)
    end_ref = None
    if times is None:
        end_ref = reference_solution(problem, spec.t_end, spec.reference_tol)

    def one(pair):
        method, h = pair
        traj, err, wall, wall_total = _integrate_timed(method, problem, h, spec.t_end, spec.policy)
        if err is not None:
            log.warning("%s with h=%g diverged: %s", method, h, err)
            return RunRecord(str(method), h, math.inf, wall, traj.total_iterations, wall_total,
                             diverged=True, message=str(err))
        if times is None:
            ge = float(np.max(np.abs(traj.final - end_ref)))
        elif shared_ref is not None:
            ge = _sample_error(traj, times, shared_ref)
        else:
            n = traj.steps
            idx = np.unique(np.rint(np.linspace(0, n, 101)).astype(int))
            ref = reference_solution(problem, spec.t_end, spec.reference_tol, times=traj.times[idx])
            ge = float(np.max(np.abs(traj.states[idx] - ref)))
        diverged = not math.isfinite(ge)
        return RunRecord(str(method), h, ge, wall, traj.total_iterations, wall_total,
                         diverged=diverged)

    pairs = [(m, h) for m in methods for h in spec.stepsizes]
    records = _run_pool(one, pairs, spec.serial)
    if spec.output:
        _write_csv(spec.output, WORK_COLUMNS, [r.row() for r in records])
    return records


def energy_drift(spec):
    """Record ``|H_n - H_0|`` along every (method, h) run.

    Diverged runs keep the part of the series computed before the failure.
    The CSV has :data:`DRIFT_COLUMNS`; with several stepsizes the method
    label carries an ``@h`` suffix.
    """
    methods = spec.validate()
    problem = spec.build_problem()
    if problem.hamiltonian is None:
        raise StructureAbsentError(f"problem {problem.name!r} has no Hamiltonian")
    H0 = energy(problem, problem.u0)

    def one(pair):
        method, h = pair
        traj, err, wall, wall_total = _integrate_timed(method, problem, h, spec.t_end, spec.policy)
        geh = np.array([abs(energy(problem, u) - H0) for u in traj.states])
        label = str(method) if len(spec.stepsizes) == 1 else f"{method}@{h!r}"
        return RunRecord(label, h, math.inf if err else float(np.max(geh)), wall,
                         traj.total_iterations, wall_total,
                         drift=np.column_stack([traj.times, geh]), diverged=err is not None,
                         message=str(err) if err else "")

    pairs = [(m, h) for m in methods for h in spec.stepsizes]
    records = _run_pool(one, pairs, spec.serial)
    if spec.output:
        rows = [[r.method, f"{t:.12g}", repr(float(e))] for r in records for t, e in r.drift]
        _write_csv(spec.output, DRIFT_COLUMNS, rows)
    return records


def iteration_table(problem, h, T, tolerances, methods=("efcm:2,2", "hbvm:2,2"),
                    output=None, max_iter=100, serial=False):
    """Total fixed-point iterations per method (rows) and tolerance (columns).

    Cells hold integer totals or the string ``"div"`` for diverged runs.
    ``problem`` may be a :class:`~efcm.problems.Problem` or a registry name.
    """
    tolerances = [float(t) for t in tolerances]
    if not tolerances or any(a <= b for a, b in zip(tolerances, tolerances[1:])):
        raise InvalidArgumentError("tolerance list must be nonempty and strictly decreasing")
    if isinstance(problem, str):
        problem = get_problem(problem)
    parsed = [parse_method(m) if isinstance(m, str) else m for m in methods]
    step_count(T, h)

    def one(pair):
        method, tol = pair
        policy = IterationPolicy.tolerance(tol, max_iter=max_iter)
        try:
            return integrate(make_kernel(method, problem, h), problem, T, h, policy).total_iterations
        except DivergenceError:
            return "div"

    pairs = [(m, t) for m in parsed for t in tolerances]
    cells = _run_pool(one, pairs, serial)
    table = {str(m): cells[i * len(tolerances):(i + 1) * len(tolerances)]
             for i, m in enumerate(parsed)}
    if output:
        header = ["method"] + [f"tol={t:.0e}" for t in tolerances]
        _write_csv(output, header, [[m] + [str(c) for c in row] for m, row in table.items()])
    return table


def observed_orders(stepsizes, errors):
    """``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` for consecutive pairs."""
    h = np.asarray(stepsizes, dtype=float)
    e = np.asarray(errors, dtype=float)
    return np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:])


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_gnuplot(csv_path, kind):
    """Write ``<csv>.gp`` plotting the CSV; ``kind`` is ``work`` or ``drift``."""
    csv_path = Path(csv_path)
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    labels = list(dict.fromkeys(r["method"] for r in rows))
    lines = ["set datafile separator ','", "set key left bottom", "set logscale y"]
    if kind == "work":
        lines += ["set logscale x", "set xlabel 'execution time (s)'", "set ylabel 'global error'"]
        x, y = 4, 3
    else:
        lines += ["set xlabel 't'", "set ylabel '|H_n - H_0|'"]
        x, y = 2, 3
    plots = [f"'{csv_path.name}' using (strcol(1) eq '{m}' ? ${x} : NaN):{y} "
             f"with linespoints title '{m}'" for m in labels]
    lines.append("plot " + ", \\\n     ".join(plots) if plots else "# no data")
    gp = csv_path.with_suffix(".gp")
    gp.write_text("\n".join(lines) + "\n")
    return gp


def _dyadic(first, last):
    return [1.0 / 2 ** i for i in range(first, last + 1)]


TOLERANCES = [1e-6, 1e-8, 1e-10, 1e-12]

PRESETS = {
    "fig1": dict(
        kind="figure",
        work=dict(problem="henon-heiles", methods=["efcm:2,2", "hbvm:2,2"], stepsizes=_dyadic(2, 5),
                  t_end=100.0, policy=IterationPolicy.fixed(1)),
        drift=dict(problem="henon-heiles", methods=["efcm:2,2", "hbvm:2,2"], stepsizes=[1.5],
                   t_end=3000.0, policy=IterationPolicy.tolerance(1e-12)),
    ),
    "fig2": dict(
        kind="figure",
        work=dict(problem="fpu", methods=["efcm:2,2", "hbvm:2,2"], stepsizes=_dyadic(3, 6),
                  t_end=10.0, policy=IterationPolicy.fixed(1)),
        drift=dict(problem="fpu", methods=["efcm:2,2", "hbvm:2,2"], stepsizes=[0.1],
                   t_end=100.0, policy=IterationPolicy.tolerance(1e-12)),
    ),
    "fig3": dict(
        kind="figure",
        work=dict(problem="heat", methods=["efcm:2,2", "hbvm:2,2"], stepsizes=_dyadic(2, 5),
                  t_end=1.0, policy=IterationPolicy.fixed(1), problem_params={"N": 200}),
    ),
    "tab1": dict(kind="table", problem="henon-heiles", h=0.01, t_end=10.0),
    "tab2": dict(kind="table", problem="fpu", h=0.01, t_end=10.0),
    "tab3": dict(kind="table", problem="heat", h=0.1, t_end=1.0, problem_params={"N": 200}),
}


def run_preset(name, out_dir, gnuplot=False, serial=False):
    """Run a named preset and return ``{artifact name: result}``.

    Figures produce ``<name>_work.csv`` (and ``<name>_drift.csv`` when the
    preset has a Hamiltonian); tables produce ``<name>_iterations.csv``.
    """
    try:
        preset = PRESETS[name]
    except KeyError:
        raise InvalidArgumentError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    out_dir = Path(out_dir)
    results = {}
    if preset["kind"] == "table":
        problem = get_problem(preset["problem"], **preset.get("problem_params", {}))
        path = out_dir / f"{name}_iterations.csv"
        results["iterations"] = iteration_table(problem, preset["h"], preset["t_end"], TOLERANCES,
                                                output=path, serial=serial)
        return results
    for part, func, kind in (("work", work_precision, "work"), ("drift", energy_drift, "drift")):
        if part not in preset:
            continue
        path = out_dir / f"{name}_{part}.csv"
        spec = ExperimentSpec(output=str(path), serial=serial, **preset[part])
        results[part] = func(spec)
        if gnuplot:
            write_gnuplot(path, kind)
    return results

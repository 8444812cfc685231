"""End-to-end acceptance checks, one test per criterion.

Each test measures its own wall time against the budget for that criterion
and appends a PASS/FAIL line that is printed in the terminal summary.
"""
import math
import time

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from conftest import ACCEPTANCE_LINES
from efcm.harness import run_preset
from efcm.matfun import i_weight, phi_set
from efcm.problems import (
    Problem,
    energy,
    henon_heiles,
    oscillator,
    quadratic_invariant,
    semilinear_heat,
)
from efcm.quadrature import gauss_legendre, measured_exactness, radau_right
from efcm.scheme import build_efcm, gauss_tableau, hbvm_tableau, radau_iia_tableau, w_transformation
from efcm.solver import (
    DivergenceError,
    IterationPolicy,
    efcm_kernel,
    efcm_step,
    integrate,
    irk_kernel,
    irk_step,
    reference_solution,
)
from efcm import legendre as leg


class Criterion:
    def __init__(self, number, title, limit):
        self.number, self.title, self.limit = number, title, limit

    def __enter__(self):
        self.start = time.perf_counter()
        self.detail = ""
        self.ok = False
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        within = elapsed < self.limit
        passed = self.ok and within and exc_type is None
        if exc_type is not None:
            self.detail = f"{exc_type.__name__}: {exc}"
        line = (f"[{'PASS' if passed else 'FAIL'}] {self.number}. {self.title}: "
                f"{self.detail} ({elapsed:.2f}s, limit {self.limit:g}s)")
        ACCEPTANCE_LINES.append(line)
        print(line)
        if exc_type is None:
            assert self.ok, line
            assert within, line
        return False


def orders(hs, errs):
    hs, errs = np.asarray(hs, dtype=float), np.asarray(errs, dtype=float)
    return np.log(errs[:-1] / errs[1:]) / np.log(hs[:-1] / hs[1:])


def fmt(values):
    return "[" + ", ".join(f"{v:.3g}" for v in values) + "]"


def step_error(problem, functional, h):
    scheme = build_efcm(problem.A, h, 2, 2)
    out, _ = efcm_step(scheme, problem.g, 0.0, problem.u0, IterationPolicy.tolerance(1e-15))
    return abs(functional(problem, out) - functional(problem, problem.u0))


def test_criterion_1_global_order_henon_heiles():
    with Criterion(1, "global order, Henon-Heiles", 10) as c:
        p = henon_heiles()
        ts = np.linspace(0.0, 10.0, 41)
        ref = reference_solution(p, 10.0, 1e-13, times=ts)
        hs = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
        errs = []
        for h in hs:
            tr = integrate(efcm_kernel(build_efcm(p.A, h, 2, 2), p.g), p, 10.0, h,
                           IterationPolicy.tolerance(1e-14))
            errs.append(np.max(np.abs(tr.states[np.rint(ts / h).astype(int)] - ref)))
        q = orders(hs, errs)
        c.detail = f"orders {fmt(q)} (want [3.6, 4.4])"
        c.ok = bool(np.all((q >= 3.6) & (q <= 4.4)))


def test_criterion_2_heat_convergence():
    with Criterion(2, "end-time order, semilinear heat N=200", 60) as c:
        p = semilinear_heat(200)
        hs = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
        exact = p.exact(1.0)
        errs = []
        for h in hs:
            tr = integrate(efcm_kernel(build_efcm(p.A, h, 2, 2), p.g), p, 1.0, h,
                           IterationPolicy.tolerance(1e-13))
            errs.append(np.max(np.abs(tr.final - exact)))
        q = orders(hs, errs)
        c.detail = f"errors {fmt(errs)}, orders {fmt(q)} (want >= 3.6)"
        c.ok = bool(np.all(q >= 3.6))


def test_criterion_3_energy_step_order():
    with Criterion(3, "per-step energy order, Henon-Heiles", 1) as c:
        p = henon_heiles()
        hs = [0.2, 0.1, 0.05]
        q = orders(hs, [step_error(p, energy, h) for h in hs])
        c.detail = f"orders {fmt(q)} (want [4.5, 5.5])"
        c.ok = bool(np.all((q >= 4.5) & (q <= 5.5)))


def test_criterion_4_quadratic_invariant_order():
    with Criterion(4, "per-step quadratic-invariant order", 1) as c:
        p = oscillator()
        hs = [0.2, 0.1, 0.05]
        q = orders(hs, [step_error(p, quadratic_invariant, h) for h in hs])
        c.detail = f"orders {fmt(q)} (want >= 4.5)"
        c.ok = bool(np.all(q >= 4.5))


def test_criterion_5_long_time_energy():
    with Criterion(5, "long-time energy drift, Henon-Heiles h=1.5 T=3000", 30) as c:
        p = henon_heiles()
        h = 1.5
        tr = integrate(efcm_kernel(build_efcm(p.A, h, 2, 2), p.g), p, 3000.0, h,
                       IterationPolicy.tolerance(1e-12))
        H0 = energy(p, p.u0)
        geh = np.array([abs(energy(p, u) - H0) for u in tr.states[1:]])
        w = len(geh) // 10
        first, last = geh[:w].mean(), geh[-w:].mean()
        c.detail = f"max {geh.max():.3g}, window means {first:.3g} -> {last:.3g}"
        c.ok = bool(np.isfinite(geh).all() and last <= 3 * first)


def test_criterion_6_classical_limits():
    with Criterion(6, "classical limits (Gauss, Radau IIA, WQ = I)", 1) as c:
        f = lambda t, u: np.cos(t) - u ** 2 + np.sin(u)  # noqa: E731
        h, u0 = 0.3, np.array([0.7])
        policy = IterationPolicy.tolerance(1e-15)
        efcm = efcm_step(build_efcm(np.zeros((1, 1)), h, 2, 2), f, 0.0, u0, policy)
        gauss = irk_step(gauss_tableau(2), f, 0.0, u0, h, policy)
        dev_a = max(np.max(np.abs(efcm.stages - gauss.stages)), np.max(np.abs(efcm[0] - gauss[0])))

        nodes = radau_right(2).nodes
        oracle = np.empty((2, 2))
        for j in range(2):
            lj = Polynomial.fromroots(np.delete(nodes, j)) / np.prod(nodes[j] - np.delete(nodes, j))
            oracle[:, j] = lj.integ()(nodes) - lj.integ()(0.0)
        closed = np.array([[5 / 12, -1 / 12], [3 / 4, 1 / 4]])
        tab = radau_iia_tableau(2).matrix
        dev_b = max(np.max(np.abs(tab - oracle)), np.max(np.abs(tab - closed)))

        dev_c = 0.0
        for k in (2, 3):
            W, _, Q = w_transformation(k)
            dev_c = max(dev_c, np.max(np.abs(W @ Q - np.eye(k))))
        c.detail = f"stage dev {dev_a:.1e}, Radau dev {dev_b:.1e}, WQ dev {dev_c:.1e}"
        c.ok = dev_a <= 1e-12 and dev_b <= 1e-13 and dev_c <= 1e-12


def test_criterion_7_stiffness_independent_iterations():
    with Criterion(7, "iterations independent of stiffness, heat N=50/100/200", 120) as c:
        policy = IterationPolicy.tolerance(1e-10)
        h = 0.1
        means = []
        for N in (50, 100, 200):
            p = semilinear_heat(N)
            tr = integrate(efcm_kernel(build_efcm(p.A, h, 2, 2), p.g), p, 1.0, h, policy)
            means.append(tr.total_iterations / tr.steps)
        try:
            tr = integrate(irk_kernel(hbvm_tableau(2, 2), p.rhs, h), p, 1.0, h, policy)
            hbvm = tr.total_iterations / tr.steps
        except DivergenceError:
            hbvm = math.inf
        spread = max(means) / min(means)
        c.detail = f"EFCM mean iterations {fmt(means)}, HBVM at N=200: {hbvm:.3g}"
        c.ok = spread < 2 and (hbvm == math.inf or hbvm > 5 * means[-1])


def test_criterion_8_iteration_ordering(tmp_path):
    with Criterion(8, "iteration totals, presets tab1 and tab2", 120) as c:
        tab1 = run_preset("tab1", tmp_path)["iterations"]
        tab2 = run_preset("tab2", tmp_path)["iterations"]
        ok = True
        for table in (tab1, tab2):
            e, hb = table["efcm:2,2"], table["hbvm:2,2"]
            ok &= all(hv == "div" or ev <= hv for ev, hv in zip(e, hb))
        e10, h10 = tab2["efcm:2,2"][2], tab2["hbvm:2,2"][2]
        gap = math.inf if h10 == "div" else h10 / e10
        c.detail = f"tab1 {tab1}, tab2 {tab2}, FPU gap at 1e-10: {gap:.2f}x"
        c.ok = bool(ok and gap > 2)


def test_criterion_9_kernel_identities(rng):
    with Criterion(9, "kernel identities", 5) as c:
        worst_rec = 0.0
        for _ in range(5):
            s = phi_set(rng.standard_normal((5, 5)), 5)
            for k in range(5):
                worst_rec = max(worst_rec, s.recurrence_residual(k) / (1 + np.abs(s[k]).max()))

        x, w = np.polynomial.legendre.leggauss(8)
        edges = np.linspace(0, 1, 401)
        a, b = edges[:-1, None], edges[1:, None]
        z = (a + 0.5 * (b - a) * (x + 1)).ravel()
        wz = (0.5 * (b - a) * w).ravel()
        worst_i = 0.0
        for _ in range(3):
            V = rng.standard_normal((5, 5))
            lam, X = np.linalg.eig(V)
            Xi = np.linalg.inv(X)
            for j in range(5):
                vals = wz[:, None] * leg.eval(j, z)[:, None] * np.exp(-(1 - z)[:, None] * lam[None, :])
                oracle = ((X * vals.sum(axis=0)) @ Xi).real
                worst_i = max(worst_i, np.max(np.abs(i_weight(j, V) - oracle)))

        sharp = all(measured_exactness(gauss_legendre(k)) == 2 * k - 1
                    and measured_exactness(radau_right(k)) == 2 * k - 2 for k in range(1, 9))

        A = rng.standard_normal((6, 6))
        u0 = rng.standard_normal(6)
        hom = Problem("linear", build_efcm(A, 0.2, 2, 2).A, lambda t, u: np.zeros_like(u), u0, 1.0)
        tr = integrate(efcm_kernel(build_efcm(A, 0.2, 2, 2), hom.g), hom, 1.0, 0.2)
        expected = np.linalg.matrix_power(phi_set(-0.2 * A, 0)[0], 5) @ u0
        dev_h = float(np.max(np.abs(tr.final - expected)))
        c.detail = (f"phi residual {worst_rec:.1e}, I_j dev {worst_i:.1e}, "
                    f"exactness sharp {sharp}, homogeneous dev {dev_h:.1e}")
        c.ok = worst_rec <= 1e-10 and worst_i <= 1e-10 and sharp and dev_h <= 1e-12

"""Fixed-point stage solvers, trajectory integration and step-size advice."""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45

from .errors import (
    BudgetError,
    DegenerateRuleError,
    DivergenceError,
    EvaluationError,
    InvalidArgumentError,
)

__all__ = [
    "IterationPolicy",
    "StepResult",
    "Trajectory",
    "efcm_step",
    "irk_step",
    "efcm_kernel",
    "irk_kernel",
    "integrate",
    "step_count",
    "max_convergent_stepsize",
    "hbvm_max_stepsize",
    "reference_solution",
]

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 1e8
REFERENCE_BUDGET = 10 ** 7


@dataclass(frozen=True)
class IterationPolicy:
    """How the implicit stage equations are iterated.

    ``mode`` is ``"fixed"`` (exactly ``count`` sweeps) or ``"tol"`` (sweep until
    the max-norm change of every stage is at most ``tol``, capped at
    ``max_iter``).  ``guess`` selects the starting stages: ``"exp"`` uses
    ``phi_0(-c_i V) u0`` and ``"u0"`` repeats ``u0``.
    """

    mode: str = "tol"
    count: int = 1
    tol: float = 1e-12
    max_iter: int = 100
    guess: str = "exp"

    def __post_init__(self):
        if self.mode not in ("fixed", "tol"):
            raise InvalidArgumentError(f"unknown iteration mode {self.mode!r}")
        if self.mode == "fixed" and (int(self.count) != self.count or self.count < 1):
            raise InvalidArgumentError("fixed-count mode needs count >= 1")
        if self.mode == "tol" and not (self.tol > 0 and self.max_iter >= 1):
            raise InvalidArgumentError("tolerance mode needs tol > 0 and max_iter >= 1")
        if self.guess not in ("exp", "u0"):
            raise InvalidArgumentError(f"unknown initial guess {self.guess!r}")

    @classmethod
    def fixed(cls, count=1, guess="exp"):
        return cls(mode="fixed", count=int(count), guess=guess)

    @classmethod
    def tolerance(cls, tol, max_iter=100, guess="exp"):
        return cls(mode="tol", tol=float(tol), max_iter=int(max_iter), guess=guess)

    @classmethod
    def parse(cls, text):
        """Parse ``"tol:1e-10"``, ``"tol:1e-10:50"`` or ``"fixed:1"``."""
        parts = text.strip().split(":")
        try:
            if parts[0] == "tol" and len(parts) in (2, 3):
                return cls.tolerance(float(parts[1]), *(int(p) for p in parts[2:]))
            if parts[0] == "fixed" and len(parts) == 2:
                return cls.fixed(int(parts[1]))
        except ValueError:
            pass
        raise InvalidArgumentError(f"cannot parse iteration policy {text!r}")

    def __str__(self):
        return f"fixed:{self.count}" if self.mode == "fixed" else f"tol:{self.tol:g}"


class StepResult(tuple):
    """``(state, iterations)`` pair.

    ``converged`` is False if ``max_iter`` was hit; ``stages`` holds the
    final stage values, shape ``(k, d)``.
    """

    def __new__(cls, state, iterations, converged=True, stages=None):
        obj = super().__new__(cls, (state, iterations))
        obj.converged = converged
        obj.stages = stages
        return obj

    @property
    def state(self):
        return self[0]

    @property
    def iterations(self):
        return self[1]


def _eval_g(g, times, V):
    with np.errstate(over="ignore", invalid="ignore"):
        G = np.array([g(t, v) for t, v in zip(times, V)], dtype=float)
    if not np.all(np.isfinite(G)):
        raise EvaluationError("nonlinearity returned non-finite values")
    return G


def _fixed_point(sweep, g, times, V, policy, limit):
    """Iterate ``V <- sweep(G(V))``; returns final stages, their g values, count, converged."""
    iterations = 0
    converged = True
    while True:
        G = _eval_g(g, times, V)
        V_new = sweep(G)
        iterations += 1
        if not np.all(np.isfinite(V_new)) or np.max(np.abs(V_new)) > limit:
            raise DivergenceError(
                f"stage iteration diverged after {iterations} sweeps")
        change = np.max(np.abs(V_new - V))
        V = V_new
        if policy.mode == "fixed":
            if iterations >= policy.count:
                break
        elif change <= policy.tol:
            break
        elif iterations >= policy.max_iter:
            converged = False
            break
    return V, _eval_g(g, times, V), iterations, converged


def efcm_step(scheme, g, t0, u0, policy=IterationPolicy()):
    """Advance one EFCM step from ``(t0, u0)`` to ``t0 + h``.

    Returns
    -------
    StepResult
        ``(state, iterations)``; ``result.converged`` is False when the
        tolerance was not met within ``max_iter`` sweeps.
    """
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (scheme.dim,):
        raise InvalidArgumentError(f"state has shape {u0.shape}, scheme dimension is {scheme.dim}")
    offsets = scheme.stage_offsets(u0)
    V = offsets if policy.guess == "exp" else np.tile(u0, (scheme.k, 1))
    times = t0 + scheme.nodes * scheme.h
    limit = DIVERGENCE_FACTOR * (1.0 + np.max(np.abs(u0)))
    V, G, iterations, converged = _fixed_point(
        lambda G: offsets + scheme.stage_increments(G), g, times, V, policy, limit)
    return StepResult(scheme.output(u0, G), iterations, converged, V)


def irk_step(tableau, f, t0, u0, h, policy=IterationPolicy()):
    """One implicit Runge-Kutta step for ``u' = f(t, u)`` with fixed-point stages.

    The starting stages are always ``u0``.
    """
    u0 = np.asarray(u0, dtype=float)
    times = t0 + tableau.nodes * h
    hA = h * tableau.matrix
    limit = DIVERGENCE_FACTOR * (1.0 + np.max(np.abs(u0)))
    V = np.tile(u0, (tableau.k, 1))
    V, F, iterations, converged = _fixed_point(
        lambda F: u0 + hA @ F, f, times, V, policy, limit)
    return StepResult(u0 + h * (tableau.weights @ F), iterations, converged, V)


def efcm_kernel(scheme, g):
    """Bind a scheme and nonlinearity into a ``kernel(t0, u0, policy)`` callable."""
    def kernel(t0, u0, policy):
        return efcm_step(scheme, g, t0, u0, policy)
    kernel.h = scheme.h
    return kernel


def irk_kernel(tableau, f, h):
    """Bind a tableau, full right-hand side and stepsize into a kernel."""
    def kernel(t0, u0, policy):
        return irk_step(tableau, f, t0, u0, h, policy)
    kernel.h = h
    return kernel


@dataclass
class Trajectory:
    """States on a uniform grid plus per-step iteration counts."""

    times: np.ndarray
    states: np.ndarray
    iterations: np.ndarray
    unconverged: int = 0

    @property
    def steps(self):
        return len(self.iterations)

    @property
    def total_iterations(self):
        return int(np.sum(self.iterations))

    @property
    def final(self):
        return self.states[-1]


def step_count(T, h):
    """Number of steps ``T / h``, which must be an integer to within rounding."""
    if not (h > 0 and T >= 0):
        raise InvalidArgumentError(f"need h > 0 and T >= 0, got h={h!r}, T={T!r}")
    N = int(round(T / h))
    if abs(N * h - T) > 4 * np.spacing(max(abs(T), 1.0)):
        raise InvalidArgumentError(f"end time {T} is not a multiple of the stepsize {h}")
    return N


def integrate(kernel, problem, T, h, policy=IterationPolicy()):
    """Apply ``kernel`` ``T / h`` times starting from ``problem.u0``.

    Errors raised by a step get a ``step`` attribute with the failing index.
    """
    N = step_count(T, h)
    d = problem.dim
    states = np.empty((N + 1, d))
    states[0] = problem.u0
    iterations = np.zeros(N, dtype=int)
    unconverged = 0
    u = np.array(problem.u0, dtype=float)
    for n in range(N):
        try:
            result = kernel(n * h, u, policy)
        except (DivergenceError, EvaluationError) as err:
            err.step = n
            err.trajectory = Trajectory(h * np.arange(n + 1), states[:n + 1],
                                        iterations[:n], unconverged)
            err.args = (f"{err.args[0]} (step {n}, t={n * h:g})",)
            raise
        u = result[0]
        iterations[n] = result[1]
        unconverged += not getattr(result, "converged", True)
        states[n + 1] = u
    if unconverged:
        log.debug("%d of %d steps hit the iteration cap", unconverged, N)
    return Trajectory(h * np.arange(N + 1), states, iterations, unconverged)


def max_convergent_stepsize(L, Cs, omega, rule, n):
    """Largest stepsize for which EFCM fixed-point iteration provably contracts.

    ``1 / (L Cs n^2 chi(omega) max_ij c_i |b_j|)`` with
    ``chi(omega) = (e^omega - 1) / omega`` and ``chi(0) = 1``; ``Cs`` and
    ``omega`` are the constants of ``||exp(-tA)|| <= Cs e^{omega t}``.
    """
    if not L > 0:
        raise InvalidArgumentError(f"Lipschitz constant must be positive, got {L!r}")
    if not Cs >= 1:
        raise InvalidArgumentError(f"semigroup constant must be >= 1, got {Cs!r}")
    if not omega >= 0:
        raise InvalidArgumentError(f"semigroup exponent must be >= 0, got {omega!r}")
    chi = math.expm1(omega) / omega if omega > 0 else 1.0
    spread = float(np.max(np.outer(rule.nodes, np.abs(rule.weights))))
    if spread == 0:
        raise DegenerateRuleError("max c_i |b_j| vanishes for this rule")
    return 1.0 / (L * Cs * n * n * chi * spread)


def hbvm_max_stepsize(L, norm_A, tableau):
    """Contraction bound ``1 / ((L + ||A||) max |a_ij|)`` for fixed-point HBVM stages."""
    return 1.0 / ((L + norm_A) * float(np.max(np.abs(tableau.matrix))))


def reference_solution(problem, T, tol=1e-12, times=None):
    """Accurate solution at ``T`` (or at each of ``times``).

    Uses the exact solution when the problem has one, otherwise an
    adaptive Dormand-Prince 5(4) integration of ``g - A u`` with
    ``rtol = atol = tol``.
    """
    if not 1e-13 <= tol <= 1e-6:
        raise InvalidArgumentError(f"reference tolerance must lie in [1e-13, 1e-6], got {tol!r}")
    wanted = np.atleast_1d(np.asarray(T if times is None else times, dtype=float))
    if problem.exact is not None:
        out = np.array([problem.exact(t) for t in wanted])
    else:
        out = _rk45(problem, wanted, tol)
    return out[0] if times is None else out


def _rk45(problem, wanted, tol):
    t_end = float(np.max(wanted))
    out = np.empty((wanted.size, problem.dim))
    pending = list(np.argsort(wanted))
    while pending and wanted[pending[0]] <= 0.0:
        out[pending.pop(0)] = problem.u0
    if not pending:
        return out
    solver = RK45(problem.rhs, 0.0, np.array(problem.u0, dtype=float), t_end,
                  rtol=tol, atol=tol)
    steps = 0
    while pending:
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            raise EvaluationError(f"reference integration failed: {message}")
        if steps > REFERENCE_BUDGET:
            raise BudgetError(f"reference integration exceeded {REFERENCE_BUDGET} steps")
        if pending and wanted[pending[0]] <= solver.t:
            dense = solver.dense_output()
            while pending and wanted[pending[0]] <= solver.t:
                i = pending.pop(0)
                out[i] = solver.y if wanted[i] == solver.t else dense(wanted[i])
    return out

"""Benchmark problems written as ``u' + A u = g(t, u)``.

Each constructor returns an immutable :class:`Problem`.  Hamiltonian
problems carry ``H`` and the skew matrix ``J`` with ``J grad H(u) = g - A u``.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, StructureAbsentError
from .matfun import LinearOperator

__all__ = [
    "Problem",
    "henon_heiles",
    "fpu",
    "fpu_potential",
    "semilinear_heat",
    "heat_source",
    "oscillator",
    "energy",
    "quadratic_invariant",
    "hamiltonian_residual",
    "invariant_residual",
    "get_problem",
    "PROBLEMS",
]


@dataclass(frozen=True, eq=False)
class Problem:
    """Semilinear initial value problem ``u' + A u = g(t, u)``, ``u(0) = u0``."""

    name: str
    A: LinearOperator
    g: Callable[[float, np.ndarray], np.ndarray]
    u0: np.ndarray
    t_end: float
    exact: Optional[Callable[[float], np.ndarray]] = None
    hamiltonian: Optional[Callable[[np.ndarray], float]] = None
    grad_hamiltonian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    J: Optional[np.ndarray] = None
    C: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.u0.size

    def rhs(self, t, u):
        """Full right-hand side ``g(t, u) - A u``."""
        return self.g(t, u) - self.A.matvec(u)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _canonical_J(half):
    J = np.zeros((2 * half, 2 * half))
    J[:half, half:] = np.eye(half)
    J[half:, :half] = -np.eye(half)
    return _frozen(J)


def henon_heiles():
    """Henon-Heiles model, state ``(q1, q2, p1, p2)``."""
    A = np.array([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)

    def g(t, u):
        q1, q2 = u[0], u[1]
        return np.array([0.0, 0.0, -2.0 * q1 * q2, -q1 * q1 + q2 * q2])

    def H(u):
        q1, q2, p1, p2 = u
        return 0.5 * (p1 ** 2 + p2 ** 2) + 0.5 * (q1 ** 2 + q2 ** 2) + q1 ** 2 * q2 - q2 ** 3 / 3.0

    def grad_H(u):
        q1, q2, p1, p2 = u
        return np.array([q1 + 2 * q1 * q2, q2 + q1 ** 2 - q2 ** 2, p1, p2])

    u0 = _frozen([np.sqrt(11.0 / 96.0), 0.0, 0.0, 0.25])
    return Problem("henon-heiles", LinearOperator.dense(A), g, u0, 1000.0,
                   hamiltonian=H, grad_hamiltonian=grad_H, J=_canonical_J(2))


def _fpu_coupling(m):
    # rows a_t with U(x) = 1/4 sum_t (a_t . x)^4; indices follow the printed potential
    rows = []
    r = np.zeros(2 * m)
    r[0], r[m] = 1.0, -1.0
    rows.append(r)
    for i in range(1, m):
        r = np.zeros(2 * m)
        r[i] += 1.0          # x_{i+1}
        r[m + i - 2] -= 1.0  # x_{m+i-1}
        r[i - 1] -= 1.0      # x_i
        r[m + i - 1] -= 1.0  # x_{m+i}
        rows.append(r)
    r = np.zeros(2 * m)
    r[m - 1] += 1.0
    r[2 * m - 1] += 1.0
    rows.append(r)
    return np.array(rows)


def fpu_potential(m):
    """Return ``(U, grad_U)`` for the quartic Fermi-Pasta-Ulam coupling."""
    T = _fpu_coupling(m)

    def U(x):
        return 0.25 * float(np.sum((T @ x) ** 4))

    def grad_U(x):
        return T.T @ (T @ x) ** 3

    return U, grad_U


def fpu(m=3, omega=50.0):
    """Fermi-Pasta-Ulam chain with ``m`` stiff/soft spring pairs, ``d = 4m``."""
    if int(m) != m or m < 1:
        raise InvalidArgumentError(f"m must be a positive integer, got {m!r}")
    if not omega > 0:
        raise InvalidArgumentError(f"omega must be positive, got {omega!r}")
    m = int(m)
    omega = float(omega)
    n2 = 2 * m
    M = np.zeros((n2, n2))
    M[m:, m:] = omega ** 2 * np.eye(m)
    A = np.zeros((2 * n2, 2 * n2))
    A[:n2, n2:] = -np.eye(n2)
    A[n2:, :n2] = M
    U, grad_U = fpu_potential(m)
    stiff = np.diag(M)

    def g(t, u):
        out = np.zeros(2 * n2)
        out[n2:] = -grad_U(u[:n2])
        return out

    def H(u):
        x, y = u[:n2], u[n2:]
        return 0.5 * float(y @ y) + 0.5 * float(stiff @ (x * x)) + U(x)

    def grad_H(u):
        x, y = u[:n2], u[n2:]
        return np.concatenate([stiff * x + grad_U(x), y])

    u0 = np.zeros(2 * n2)
    u0[0] = 1.0               # x_1
    u0[n2] = 1.0              # y_1
    u0[m] = 1.0 / omega       # x_{m+1}
    u0[n2 + m] = 1.0          # y_{m+1}
    return Problem("fpu", LinearOperator.dense(A), g, _frozen(u0), 10.0,
                   hamiltonian=H, grad_hamiltonian=grad_H, J=_canonical_J(n2),
                   params={"m": m, "omega": omega})


def heat_source(x, t):
    """Source making ``x (1 - x) e^t`` solve ``u_t = u_xx + 1/(1+u^2) + source``."""
    u = x * (1.0 - x) * np.exp(t)
    return u + 2.0 * np.exp(t) - 1.0 / (1.0 + u * u)


def semilinear_heat(N=200):
    """Semilinear heat equation on N interior points with homogeneous Dirichlet data."""
    if int(N) != N or N < 3:
        raise InvalidArgumentError(f"need at least 3 interior points, got {N!r}")
    N = int(N)
    dx = 1.0 / (N + 1)
    x = _frozen(dx * np.arange(1, N + 1))
    A = LinearOperator.tridiagonal(np.full(N, 2.0 / dx ** 2), np.full(N - 1, -1.0 / dx ** 2))

    def g(t, u):
        return 1.0 / (1.0 + u * u) + heat_source(x, t)

    def exact(t):
        return x * (1.0 - x) * np.exp(t)

    return Problem("heat", A, g, _frozen(x * (1.0 - x)), 1.0, exact=exact,
                   params={"N": N, "grid": x})


def oscillator(omega=1.0, amplitude=1.0, u0=(1.0, 0.3)):
    """Harmonic oscillator with a modulated frequency.

    ``u = (q, p)``, ``A = [[0, -omega], [omega, 0]]`` and
    ``g(t, u) = amplitude cos(t) (p, -q)``, so ``Q(u) = (q^2 + p^2) / 2`` is
    conserved and the flow is a rotation by ``omega t + amplitude sin t``.
    With ``amplitude = 0`` the problem is the plain harmonic oscillator and
    also carries its Hamiltonian.
    """
    omega = float(omega)
    amplitude = float(amplitude)
    u0 = _frozen(u0)
    A = np.array([[0.0, -omega], [omega, 0.0]])

    def g(t, u):
        return amplitude * np.cos(t) * np.array([u[1], -u[0]])

    def exact(t):
        angle = omega * t + amplitude * np.sin(t)
        cs, sn = np.cos(angle), np.sin(angle)
        return np.array([u0[0] * cs + u0[1] * sn, u0[1] * cs - u0[0] * sn])

    extra = {}
    if amplitude == 0.0:
        extra = dict(hamiltonian=lambda u: 0.5 * omega * float(np.dot(u, u)),
                     grad_hamiltonian=lambda u: omega * np.asarray(u, dtype=float),
                     J=_canonical_J(1))
    return Problem("oscillator", LinearOperator.dense(A), g, u0, 10.0, exact=exact,
                   C=_frozen(0.5 * np.eye(2)), params={"omega": omega, "amplitude": amplitude},
                   **extra)


def energy(problem, u):
    """Hamiltonian ``H(u)``."""
    if problem.hamiltonian is None:
        raise StructureAbsentError(f"problem {problem.name!r} has no Hamiltonian")
    return float(problem.hamiltonian(np.asarray(u, dtype=float)))


def quadratic_invariant(problem, u):
    """``u^T C u``."""
    if problem.C is None:
        raise StructureAbsentError(f"problem {problem.name!r} has no quadratic invariant")
    u = np.asarray(u, dtype=float)
    return float(u @ problem.C @ u)


def hamiltonian_residual(problem, u, t=0.0):
    """``max |J grad H(u) - (g(t, u) - A u)|``."""
    if problem.J is None or problem.grad_hamiltonian is None:
        raise StructureAbsentError(f"problem {problem.name!r} has no Hamiltonian structure")
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(problem.J @ problem.grad_hamiltonian(u) - problem.rhs(t, u))))


def invariant_residual(problem, u, t=0.0):
    """``u^T C (g(t, u) - A u)``, zero when ``Q`` is conserved."""
    if problem.C is None:
        raise StructureAbsentError(f"problem {problem.name!r} has no quadratic invariant")
    u = np.asarray(u, dtype=float)
    return float(u @ problem.C @ problem.rhs(t, u))


PROBLEMS = {
    "henon-heiles": henon_heiles,
    "fpu": fpu,
    "heat": semilinear_heat,
    "oscillator": oscillator,
}


def get_problem(name, **params):
    """Look up a problem constructor by registry name and call it."""
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**params)

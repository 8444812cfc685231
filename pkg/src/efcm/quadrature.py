"""Interpolatory quadrature rules on [0, 1].

Gauss-Legendre nodes come from the Golub-Welsch eigenproblem; right Radau
nodes from Newton iteration with deflation on ``L_k - L_{k-1}`` where ``L_j``
is the shifted Legendre polynomial normalised by ``L_j(1) = 1``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InvalidArgumentError

__all__ = [
    "QuadratureRule",
    "gauss_legendre",
    "radau_right",
    "measured_exactness",
    "rule_from_id",
]

MAX_GAUSS = 16
MAX_RADAU = 8


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes ``c`` and weights ``b`` on [0, 1], exact up to degree ``m - 1``."""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    name: str = field(default="custom")

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1 or nodes.size == 0:
            raise InvalidArgumentError("nodes and weights must be matching nonempty vectors")
        if np.any(nodes < 0) or np.any(nodes > 1) or np.any(np.diff(nodes) < 0):
            raise InvalidArgumentError("nodes must be sorted inside [0, 1]")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def k(self):
        """Number of nodes."""
        return self.nodes.size

    @property
    def m(self):
        """One more than the exactness degree."""
        return self.degree + 1

    def __call__(self, f):
        """Apply the rule to a callable sampled at the nodes."""
        return sum(b * f(c) for b, c in zip(self.weights, self.nodes))

    def __repr__(self):
        return f"QuadratureRule({self.name}, k={self.k}, degree={self.degree})"


def _check_count(k, upper, what):
    if int(k) != k or not 1 <= k <= upper:
        raise InvalidArgumentError(f"{what} rules support 1 <= k <= {upper}, got {k!r}")
    return int(k)


def gauss_legendre(k):
    """k-point Gauss-Legendre rule on [0, 1], exact to degree ``2k - 1``."""
    k = _check_count(k, MAX_GAUSS, "Gauss-Legendre")
    # Jacobi matrix of the monic Legendre recurrence on [-1, 1]
    i = np.arange(1, k)
    off = i / np.sqrt(4.0 * i * i - 1.0)
    x, vecs = eigh_tridiagonal(np.zeros(k), off)
    w = 2.0 * vecs[0, :] ** 2
    order = np.argsort(x)
    nodes = 0.5 * (x[order] + 1.0)
    weights = 0.5 * w[order]
    # symmetrise to remove eigen-solver asymmetry
    nodes = 0.5 * (nodes + (1.0 - nodes[::-1]))
    weights = 0.5 * (weights + weights[::-1])
    return QuadratureRule(nodes, weights, 2 * k - 1, name=f"gauss:{k}")


def _radau_poly(k, x):
    """``L_k(x) - L_{k-1}(x)`` and its derivative, with ``L_j(1) = 1``.

    Uses the three-term recurrence in ``y = 2x - 1``; the monomial form loses
    several digits near the nodes for k around 8.
    """
    y = 2.0 * x - 1.0
    p_prev, p = 1.0, y
    d_prev, d = 0.0, 1.0
    if k == 1:
        return p - p_prev, 2.0 * (d - d_prev)
    for j in range(1, k):
        p_next = ((2 * j + 1) * y * p - j * p_prev) / (j + 1)
        d_next = d_prev + (2 * j + 1) * p
        p_prev, p = p, p_next
        d_prev, d = d, d_next
    return p - p_prev, 2.0 * (d - d_prev)


def _legendre_value(n, y):
    p_prev, p = 1.0, y
    if n == 0:
        return 1.0
    for j in range(1, n):
        p_prev, p = p, ((2 * j + 1) * y * p - j * p_prev) / (j + 1)
    return p


def _radau_interior_nodes(k, tol=1e-14, max_iter=50):
    roots = [1.0]
    # Chebyshev-Gauss-Radau style guesses; interior roots lie in (0, 1)
    j = np.arange(1, k)
    guesses = 0.5 * (1.0 - np.cos(2.0 * np.pi * j / (2.0 * k - 1.0)))
    for x in guesses:
        for _ in range(max_iter):
            f, df = _radau_poly(k, x)
            # Maehly deflation against roots already found
            correction = f / (df - f * sum(1.0 / (x - r) for r in roots))
            x -= correction
            if abs(correction) < tol:
                break
        roots.append(float(x))
    interior = np.sort(np.array(roots[1:]))
    return interior


def radau_right(k):
    """k-point right Radau rule on [0, 1] (last node at 1), exact to degree ``2k - 2``."""
    k = _check_count(k, MAX_RADAU, "Radau")
    nodes = np.append(_radau_interior_nodes(k), 1.0)
    if np.any(np.diff(nodes) <= 0) or nodes[0] <= 0:
        raise RuntimeError(f"Radau node iteration failed for k={k}")
    # closed form (1 + y) / (k^2 L_{k-1}(y)^2) on [-1, 1], halved for [0, 1]
    weights = np.empty(k)
    for i, c in enumerate(nodes[:-1]):
        weights[i] = 0.5 * (2.0 * c) / (k * k * _legendre_value(k - 1, 2.0 * c - 1.0) ** 2)
    weights[-1] = 1.0 / (k * k)
    return QuadratureRule(nodes, weights, 2 * k - 2, name=f"radau:{k}")


def measured_exactness(rule, tol=1e-10, max_degree=None):
    """Largest ``p`` such that every monomial of degree ``<= p`` is integrated within ``tol``.

    Returns -1 if even constants fail.
    """
    if max_degree is None:
        max_degree = 2 * rule.k + 4
    p = -1
    for q in range(max_degree + 1):
        approx = float(np.dot(rule.weights, rule.nodes ** q))
        if abs(approx - 1.0 / (q + 1)) > tol:
            break
        p = q
    return p


def rule_from_id(text):
    """Parse ``"gauss:3"`` or ``"radau:2"`` into a rule."""
    try:
        family, count = text.split(":")
        count = int(count)
    except ValueError:
        raise InvalidArgumentError(f"cannot parse quadrature rule id {text!r}") from None
    family = family.strip().lower()
    if family in ("gauss", "gl", "gauss-legendre"):
        return gauss_legendre(count)
    if family in ("radau", "radau-right"):
        return radau_right(count)
    raise InvalidArgumentError(f"unknown quadrature family {family!r}")

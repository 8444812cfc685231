"""Orthonormal shifted Legendre polynomials on [0, 1].

``P_j(x) = (-1)^j sqrt(2j+1) sum_k C(j,k) C(j+k,k) (-x)^k`` so that
``int_0^1 P_i P_j = delta_ij``.  Coefficients are generated in exact integer
arithmetic and only the final scale factor is applied in floating point.
"""
from dataclasses import dataclass
from functools import lru_cache
from math import comb, lcm, sqrt

import numpy as np

__all__ = [
    "LegendrePoly",
    "legendre",
    "eval",
    "antiderivative_at",
    "xi",
    "beta",
    "vandermonde",
]


@dataclass(frozen=True)
class LegendrePoly:
    """Shifted, orthonormal Legendre polynomial of a given degree.

    Attributes
    ----------
    degree : int
    coefficients : tuple of float
        Monomial coefficients in increasing powers, length ``degree + 1``.
    """

    degree: int
    coefficients: tuple

    def __call__(self, x):
        return eval(self.degree, x)

    def antiderivative(self, x):
        """Return ``int_0^x P(t) dt``."""
        return antiderivative_at(self.degree, x)


_SPLIT = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    z = s - a
    return s, (a - (s - z)) + (b - z)


def _two_prod(a, b):
    p = a * b
    ah = _SPLIT * a
    ah = ah - (ah - a)
    bh = _SPLIT * b
    bh = bh - (bh - b)
    al, bl = a - ah, b - bh
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _horner(coefficients, x):
    # compensated Horner: roughly twice working precision, which keeps the
    # degree-12 cancellation (coefficients ~1e7) below 1e-13 relative
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x) + float(coefficients[-1])
    err = np.zeros_like(x)
    for c in coefficients[-2::-1]:
        p, pe = _two_prod(out, x)
        out, se = _two_sum(p, float(c))
        err = err * x + (pe + se)
    out = out + err
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _integer_coefficients(j):
    # (-1)^j * C(j,k) C(j+k,k) (-1)^k, exact
    return tuple((-1) ** (j + k) * comb(j, k) * comb(j + k, k) for k in range(j + 1))


@lru_cache(maxsize=None)
def _integrated_coefficients(j):
    # int_0^x P_j / x has coefficients c_k/(k+1); scaled by lcm(1..j+1) they
    # stay integers (exact in float for j <= 15)
    denom = lcm(*range(1, j + 2))
    return tuple(c * denom // (k + 1) for k, c in enumerate(_integer_coefficients(j))), denom


@lru_cache(maxsize=None)
def legendre(j):
    """Return the degree-``j`` shifted orthonormal Legendre polynomial."""
    if j < 0 or int(j) != j:
        raise ValueError(f"degree must be a nonnegative integer, got {j!r}")
    j = int(j)
    scale = sqrt(2 * j + 1)
    return LegendrePoly(j, tuple(scale * c for c in _integer_coefficients(j)))


def _scaled(values, j):
    return values * sqrt(2 * j + 1)


def eval(j, x):
    """Evaluate ``P_j(x)``; ``x`` may be a scalar or an array."""
    j = legendre(j).degree
    return _scaled(_horner(_integer_coefficients(j), x), j)


def antiderivative_at(j, x):
    """Return ``int_0^x P_j(t) dt`` by exact termwise integration."""
    j = legendre(j).degree
    coefficients, denom = _integrated_coefficients(j)
    x = np.asarray(x, dtype=float)
    out = x * _scaled(_horner(coefficients, x), j) / denom
    return out if np.ndim(out) else float(out)


def xi(m):
    """Recurrence coefficient ``1 / (2 sqrt(4 m^2 - 1))``."""
    return 1.0 / (2.0 * sqrt(4 * m * m - 1))


def beta(k):
    """Corner entry ``1 / (4k - 2)`` of the Radau W-transformation matrix."""
    return 1.0 / (4 * k - 2)


def vandermonde(nodes, n):
    """Matrix ``W[i, j] = P_j(nodes[i])`` for ``j < n``."""
    nodes = np.asarray(nodes, dtype=float)
    return np.column_stack([eval(j, nodes) for j in range(n)]) if n else np.zeros((len(nodes), 0))

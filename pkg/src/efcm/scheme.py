"""Step operators of the exponential Fourier collocation family and their classical limits.

An :class:`EfcmScheme` freezes every matrix function needed for one
``(A, h, k, n, rule)`` combination.  The stage and output maps are then only
matrix-vector products, so a scheme can be shared by any number of runs.
"""
from dataclasses import dataclass

import numpy as np

from . import legendre as leg
from .errors import ExactnessError, InvalidArgumentError
from .matfun import (
    as_operator,
    i_weight_at_node_terms,
    i_weight_terms,
    phi_set,
)
from .quadrature import gauss_legendre, measured_exactness, radau_right

__all__ = [
    "ButcherTableau",
    "EfcmScheme",
    "build_efcm",
    "hbvm_tableau",
    "gauss_tableau",
    "radau_iia_tableau",
    "w_transformation",
]


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    """Implicit Runge-Kutta coefficients ``(c, A, b)``."""

    nodes: np.ndarray
    matrix: np.ndarray
    weights: np.ndarray
    name: str = "irk"

    @property
    def k(self):
        return self.nodes.size

    def __str__(self):
        rows = [
            f"{c: .16f} | " + "  ".join(f"{a: .16f}" for a in row)
            for c, row in zip(self.nodes, self.matrix)
        ]
        width = max(len(r) for r in rows)
        rows.append("-" * width)
        rows.append(" " * 19 + " | " + "  ".join(f"{b: .16f}" for b in self.weights))
        return f"{self.name}\n" + "\n".join(rows)


def _check_kn(k, n, rule):
    if int(n) != n or not 2 <= n <= k:
        raise InvalidArgumentError(f"truncation must satisfy 2 <= n <= k, got n={n}, k={k}")
    if rule.k != k:
        raise InvalidArgumentError(f"rule has {rule.k} nodes but k={k}")


def _stage_coefficients(rule, n):
    """Coefficients of ``phi_{q+1}(-c_i V)`` in ``a_il`` and of ``phi_{q+1}(-V)`` in ``B_l``.

    Returns ``alpha`` with shape ``(k, k, n)`` and ``beta`` with shape ``(k, n)``.
    """
    c, b = rule.nodes, rule.weights
    k = rule.k
    P = leg.vandermonde(c, n)  # P[l, j] = P_j(c_l)
    alpha = np.zeros((k, k, n))
    beta = np.zeros((k, n))
    for j in range(n):
        w_out = i_weight_terms(j)
        for q, w in enumerate(w_out):
            beta[:, q] += b * P[:, j] * w
        for i in range(k):
            for q, w in enumerate(i_weight_at_node_terms(j, c[i])):
                alpha[i, :, q] += c[i] * b * P[:, j] * w
    return alpha, beta


class EfcmScheme:
    """Precomputed EFCM(k, n) coefficient operators for fixed ``A`` and ``h``.

    ``stage_matrix[i][l]`` is ``a_il(V)``, the operator multiplying
    ``h g(c_l h, v_l)`` in the equation for stage ``i``; ``weight_matrix[l]``
    is ``B_l(V)``.  Structured operators keep every block as a vector of
    eigenvalue multipliers and only expand on request.
    """

    def __init__(self, A, h, k, n, rule, alpha, beta, stage_exp, full_exp,
                 a_blocks, b_blocks, basis, spectral, m):
        self.A = A
        self.h = h
        self.k = k
        self.n = n
        self.rule = rule
        self.alpha = alpha
        self.beta = beta
        self.m = m
        self._stage_exp = stage_exp
        self._full_exp = full_exp
        self._a = a_blocks
        self._b = b_blocks
        self._basis = basis
        self.spectral = spectral

    @property
    def dim(self):
        return self.A.dim

    @property
    def nodes(self):
        return self.rule.nodes

    # dense views -----------------------------------------------------------

    def _expand(self, block):
        if not self.spectral:
            return np.array(block)
        if self._basis is None:
            return np.diag(block)
        return (self._basis * block) @ self._basis.T

    def stage_propagator(self, i):
        """``phi_0(-c_i V)`` as a dense matrix."""
        return self._expand(self._stage_exp[i])

    def propagator(self):
        """``phi_0(-V)`` as a dense matrix."""
        return self._expand(self._full_exp)

    def a_block(self, i, l):
        """``a_il(V)`` as a dense matrix."""
        return self._expand(self._a[i, l])

    def b_block(self, l):
        """``B_l(V)`` as a dense matrix."""
        return self._expand(self._b[l])

    # maps used by the steppers ---------------------------------------------

    def _to_coords(self, x):
        if not self.spectral or self._basis is None:
            return x
        return x @ self._basis

    def _from_coords(self, x):
        if not self.spectral or self._basis is None:
            return x
        return x @ self._basis.T

    def stage_offsets(self, u0):
        """``phi_0(-c_i V) u0`` for every stage, shape ``(k, d)``."""
        if self.spectral:
            return self._from_coords(self._stage_exp * self._to_coords(u0))
        return np.einsum("iab,b->ia", self._stage_exp, u0)

    def stage_increments(self, G):
        """``h sum_l a_il(V) G_l`` for ``G`` of shape ``(k, d)``."""
        if self.spectral:
            Gc = self._to_coords(G)
            return self.h * self._from_coords(np.einsum("ila,la->ia", self._a, Gc))
        return self.h * np.einsum("ilab,lb->ia", self._a, G)

    def output(self, u0, G):
        """``phi_0(-V) u0 + h sum_l B_l(V) G_l``."""
        if self.spectral:
            xc = self._full_exp * self._to_coords(u0)
            xc = xc + self.h * np.einsum("la,la->a", self._b, self._to_coords(G))
            return self._from_coords(xc)
        return self._full_exp @ u0 + self.h * np.einsum("lab,lb->a", self._b, G)

    def __repr__(self):
        return (f"EfcmScheme(k={self.k}, n={self.n}, rule={self.rule.name}, "
                f"h={self.h}, d={self.dim}, spectral={self.spectral})")


def build_efcm(A, h, k, n, rule=None):
    """Assemble EFCM(k, n) for ``u' + A u = g`` with stepsize ``h``.

    Parameters
    ----------
    A : LinearOperator, array_like or float
    h : float
        Stepsize, strictly positive.
    k, n : int
        Stage count and Fourier truncation, ``2 <= n <= k``.
    rule : QuadratureRule, optional
        Defaults to the k-point Gauss-Legendre rule.

    Raises
    ------
    InvalidArgumentError
        Bad ``h``, ``n`` or node count.
    ExactnessError
        The rule is exact only below degree ``n - 1``.
    """
    if not h > 0 or not np.isfinite(h):
        raise InvalidArgumentError(f"stepsize must be positive, got {h!r}")
    if rule is None:
        rule = gauss_legendre(k)
    _check_kn(k, n, rule)
    m = measured_exactness(rule) + 1
    if m < n:
        raise ExactnessError(f"{rule.name} is exact to degree {m - 1}; need at least {n - 1}")
    A = as_operator(A)
    V = A.scaled(h)
    alpha, beta = _stage_coefficients(rule, n)

    stage_sets = [phi_set(V.scaled(-ci), n) for ci in rule.nodes]
    full_set = phi_set(V.scaled(-1.0), n)
    spectral = A.spectral
    if spectral:
        stage_exp = np.array([s.spectral_values[0] for s in stage_sets])
        full_exp = full_set.spectral_values[0]
        stage_phi = np.array([s.spectral_values[1:] for s in stage_sets])  # (k, n, d)
        a_blocks = np.einsum("ilq,iqa->ila", alpha, stage_phi)
        b_blocks = np.einsum("lq,qa->la", beta, full_set.spectral_values[1:])
        basis = full_set.basis
    else:
        stage_exp = np.array([s[0] for s in stage_sets])
        full_exp = full_set[0]
        stage_phi = np.array([[s[q] for q in range(1, n + 1)] for s in stage_sets])
        a_blocks = np.einsum("ilq,iqab->ilab", alpha, stage_phi)
        b_blocks = np.einsum("lq,qab->lab", beta, np.array([full_set[q] for q in range(1, n + 1)]))
        basis = None
    return EfcmScheme(A, float(h), k, n, rule, alpha, beta, stage_exp, full_exp,
                      a_blocks, b_blocks, basis, spectral, m)


def hbvm_tableau(k, n, rule=None):
    """HBVM(k, n) tableau: ``A_ij = b_j sum_{l<n} P_l(c_j) int_0^{c_i} P_l``."""
    if rule is None:
        rule = gauss_legendre(k)
    _check_kn(k, n, rule)
    c, b = rule.nodes, rule.weights
    P = leg.vandermonde(c, n)
    integrals = np.column_stack([leg.antiderivative_at(j, c) for j in range(n)])
    matrix = integrals @ (P * b[:, None]).T
    return ButcherTableau(np.array(c), matrix, np.array(b), name=f"hbvm:{k},{n}")


def gauss_tableau(k):
    """k-stage Gauss collocation tableau."""
    if k == 1:
        return ButcherTableau(np.array([0.5]), np.array([[0.5]]), np.array([1.0]), name="gauss:1")
    tab = hbvm_tableau(k, k, gauss_legendre(k))
    return ButcherTableau(tab.nodes, tab.matrix, tab.weights, name=f"gauss:{k}")


def w_transformation(k, rule=None):
    """Return ``(W, X_k, Q)`` for the Radau W-transformation.

    ``W[i, j] = P_j(c_i)``, ``Q[i, j] = b_j P_i(c_j)``, and ``X_k`` is the
    tridiagonal matrix of the integration recurrence with corner ``beta_k``.
    """
    if rule is None:
        rule = radau_right(k)
    c, b = rule.nodes, rule.weights
    W = leg.vandermonde(c, k)
    Q = (W * b[:, None]).T
    X = np.zeros((k, k))
    if k == 1:
        # first and last recurrences coincide: 1/2 + xi_1 P_1(1)/P_0(1) = 1/2 + beta_1
        X[0, 0] = 0.5 + leg.beta(1)
    else:
        X[0, 0] = 0.5
        for m in range(1, k):
            X[m, m - 1] = leg.xi(m)
            X[m - 1, m] = -leg.xi(m)
        X[k - 1, k - 1] = leg.beta(k)
    return W, X, Q


def radau_iia_tableau(k):
    """k-stage Radau IIA tableau built as ``W X_k W^{-1}``."""
    rule = radau_right(k)
    W, X, _ = w_transformation(k, rule)
    # A = W X W^{-1}  <=>  A^T = W^{-T} X^T W^T
    matrix = np.linalg.solve(W.T, (W @ X).T).T
    return ButcherTableau(np.array(rule.nodes), matrix, np.array(rule.weights), name=f"radau:{k}")

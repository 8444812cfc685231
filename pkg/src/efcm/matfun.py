"""Matrix exponential, phi-functions and Legendre-weighted exponential integrals.

Two evaluation paths are provided.  Dense operators go through one
exponential of an augmented block matrix per argument.  Diagonal and
symmetric tridiagonal operators are diagonalised once and every matrix
function is applied to the eigenvalues, which keeps ``d = 1000`` affordable.
"""
from math import factorial, sqrt

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError

__all__ = [
    "LinearOperator",
    "PhiBlockSet",
    "as_operator",
    "expm",
    "phi_scalar",
    "phi_set",
    "i_weight",
    "i_weight_at_node",
    "i_weight_terms",
    "i_weight_at_node_terms",
]

DENSE, DIAGONAL, TRIDIAGONAL = "dense", "diagonal", "tridiagonal"

_TAYLOR_RADIUS = 0.5
_TAYLOR_TERMS = 20


class LinearOperator:
    """A real linear operator stored as dense, diagonal or symmetric tridiagonal data.

    Use the :meth:`dense`, :meth:`diagonal` and :meth:`tridiagonal`
    constructors rather than calling ``__init__`` directly.
    """

    def __init__(self, kind, diag=None, off=None, matrix=None, _eig=None):
        self.kind = kind
        self._diag = diag
        self._off = off
        self._matrix = matrix
        self._eig = _eig

    @classmethod
    def dense(cls, matrix):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidArgumentError(f"operator must be square, got shape {matrix.shape}")
        _check_finite(matrix)
        matrix.setflags(write=False)
        return cls(DENSE, matrix=matrix)

    @classmethod
    def diagonal(cls, values):
        values = np.array(values, dtype=float).ravel()
        _check_finite(values)
        values.setflags(write=False)
        return cls(DIAGONAL, diag=values)

    @classmethod
    def tridiagonal(cls, diag, off):
        """Symmetric tridiagonal operator with main diagonal ``diag`` and off-diagonal ``off``."""
        diag = np.array(diag, dtype=float).ravel()
        off = np.array(off, dtype=float).ravel()
        if off.size != max(diag.size - 1, 0):
            raise InvalidArgumentError("off-diagonal must have length d - 1")
        _check_finite(diag)
        _check_finite(off)
        diag.setflags(write=False)
        off.setflags(write=False)
        return cls(TRIDIAGONAL, diag=diag, off=off)

    @property
    def dim(self):
        return self._matrix.shape[0] if self.kind == DENSE else self._diag.size

    @property
    def spectral(self):
        """True when matrix functions are evaluated through an eigendecomposition."""
        return self.kind != DENSE

    def to_dense(self):
        if self.kind == DENSE:
            return np.array(self._matrix)
        out = np.diag(self._diag)
        if self.kind == TRIDIAGONAL and self.dim > 1:
            out += np.diag(self._off, 1) + np.diag(self._off, -1)
        return out

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == DENSE:
            return self._matrix @ x
        # trailing axes of x (several right-hand sides) broadcast through
        shape = (-1,) + (1,) * (x.ndim - 1)
        out = self._diag.reshape(shape) * x
        if self.kind == TRIDIAGONAL and self.dim > 1:
            off = self._off.reshape(shape)
            out[:-1] += off * x[1:]
            out[1:] += off * x[:-1]
        return out

    __matmul__ = matvec

    def scaled(self, factor):
        """Return ``factor * self``, reusing any cached eigendecomposition."""
        factor = float(factor)
        eig = None
        if self._eig is not None:
            eig = (self._eig[0] * factor, self._eig[1])
        if self.kind == DENSE:
            m = self._matrix * factor
            m.setflags(write=False)
            return LinearOperator(DENSE, matrix=m)
        off = None if self._off is None else self._off * factor
        return LinearOperator(self.kind, diag=self._diag * factor, off=off, _eig=eig)

    def eigh(self):
        """Eigenvalues and orthonormal eigenvectors (``None`` for diagonal operators)."""
        if self.kind == DENSE:
            raise InvalidArgumentError("dense operators have no cached spectral form")
        if self._eig is None:
            if self.kind == DIAGONAL:
                self._eig = (np.array(self._diag), None)
            else:
                w, q = scipy.linalg.eigh_tridiagonal(self._diag, self._off)
                self._eig = (w, q)
        return self._eig

    def norm(self):
        """Spectral norm."""
        if self.kind == DENSE:
            return float(np.linalg.norm(self._matrix, 2))
        return float(np.max(np.abs(self.eigh()[0]))) if self.dim else 0.0

    def __repr__(self):
        return f"LinearOperator({self.kind}, d={self.dim})"


def _check_finite(a):
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("operator entries must be finite")


def as_operator(Z):
    """Coerce a scalar, array or :class:`LinearOperator` into an operator."""
    if isinstance(Z, LinearOperator):
        return Z
    if np.ndim(Z) == 0:
        return LinearOperator.diagonal([float(Z)])
    return LinearOperator.dense(Z)


def _from_spectral(values, basis):
    if basis is None:
        return np.diag(values)
    return (basis * values) @ basis.T


def expm(Z):
    """Matrix exponential ``e^Z`` as a dense array.

    Dense input uses Pade scaling and squaring; structured operators use
    their eigendecomposition.
    """
    if not isinstance(Z, LinearOperator):
        Z = np.asarray(Z, dtype=float)
        if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
            raise InvalidArgumentError(f"expm needs a square matrix, got shape {Z.shape}")
        _check_finite(Z)
        return scipy.linalg.expm(Z)
    if Z.kind == DENSE:
        return scipy.linalg.expm(Z.to_dense())
    w, q = Z.eigh()
    return _from_spectral(np.exp(w), q)


def phi_scalar(z, K):
    """``phi_0 .. phi_K`` evaluated elementwise on ``z``; returns shape ``(K+1,) + z.shape``."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        return phi_scalar(z.reshape(1), K)[:, 0]
    out = np.empty((K + 1,) + z.shape)
    small = np.abs(z) < _TAYLOR_RADIUS
    zs = z[small]
    for k in range(K + 1):
        # phi_k(z) = sum_i z^i / (i + k)!
        acc = np.zeros_like(zs)
        for i in range(_TAYLOR_TERMS - 1, -1, -1):
            acc = acc * zs / (i + k + 1) + 1.0
        out[k][small] = acc / factorial(k)
    zl = z[~small]
    cur = np.exp(zl)
    out[0][~small] = cur
    for k in range(K):
        cur = (cur - 1.0 / factorial(k)) / zl
        out[k + 1][~small] = cur
    return out


class PhiBlockSet:
    """``phi_0(Z) .. phi_K(Z)`` for one operator argument.

    For structured arguments the blocks are held as eigenvalue vectors and
    expanded on access; ``spectral_values`` exposes them directly.
    """

    def __init__(self, Z, K, blocks=None, spectral_values=None, basis=None):
        self.Z = Z
        self.K = K
        self._blocks = blocks
        self.spectral_values = spectral_values
        self.basis = basis

    @property
    def spectral(self):
        return self.spectral_values is not None

    def __len__(self):
        return self.K + 1

    def __getitem__(self, k):
        if not 0 <= k <= self.K:
            raise IndexError(k)
        if self._blocks is not None:
            return self._blocks[k]
        return _from_spectral(self.spectral_values[k], self.basis)

    def __iter__(self):
        return (self[k] for k in range(self.K + 1))

    def recurrence_residual(self, k):
        """Max entry of ``Z phi_{k+1}(Z) + I/k! - phi_k(Z)``."""
        Zd = self.Z.to_dense()
        r = Zd @ self[k + 1] + np.eye(Zd.shape[0]) / factorial(k) - self[k]
        return float(np.max(np.abs(r)))


def phi_set(Z, K):
    """Compute ``phi_0(Z) .. phi_K(Z)``.

    Parameters
    ----------
    Z : LinearOperator, array_like or float
        The argument, typically ``-c h A``.
    K : int
        Largest phi index, ``K >= 0``.
    """
    if int(K) != K or K < 0:
        raise InvalidArgumentError(f"K must be a nonnegative integer, got {K!r}")
    K = int(K)
    Z = as_operator(Z)
    if Z.spectral:
        w, q = Z.eigh()
        return PhiBlockSet(Z, K, spectral_values=phi_scalar(w, K), basis=q)
    d = Z.dim
    big = np.zeros(((K + 1) * d, (K + 1) * d))
    big[:d, :d] = Z.to_dense()
    for k in range(K):
        big[k * d:(k + 1) * d, (k + 1) * d:(k + 2) * d] = np.eye(d)
    E = scipy.linalg.expm(big)
    blocks = [E[:d, k * d:(k + 1) * d] for k in range(K + 1)]
    return PhiBlockSet(Z, K, blocks=blocks)


def i_weight_terms(j):
    """Coefficients ``w_k`` with ``I_j(V) = sum_k w_k phi_{k+1}(-V)``."""
    s = sqrt(2 * j + 1)
    return [s * (-1) ** (j + k) * factorial(j + k) / (factorial(k) * factorial(j - k))
            for k in range(j + 1)]


def i_weight_at_node_terms(j, c):
    """Coefficients ``w_k`` with ``I_{j,c}(V) = sum_k w_k phi_{k+1}(-cV)``."""
    s = sqrt(2 * j + 1) * (-1) ** j
    return [s * (-c) ** k * factorial(j + k) / (factorial(k) * factorial(j - k))
            for k in range(j + 1)]


def _combine(phis, terms):
    if phis.spectral:
        vals = sum(w * phis.spectral_values[k + 1] for k, w in enumerate(terms))
        return _from_spectral(vals, phis.basis)
    return sum(w * phis[k + 1] for k, w in enumerate(terms))


def _maybe_scalar(V, out):
    return float(out[0, 0]) if np.ndim(V) == 0 and not isinstance(V, LinearOperator) else out


def i_weight(j, V):
    """``I_j(V) = int_0^1 P_j(z) exp(-(1-z) V) dz`` as a dense matrix (float for scalar ``V``)."""
    if int(j) != j or j < 0:
        raise InvalidArgumentError(f"Legendre index must be a nonnegative integer, got {j!r}")
    op = as_operator(V)
    phis = phi_set(op.scaled(-1.0), j + 1)
    return _maybe_scalar(V, _combine(phis, i_weight_terms(j)))


def i_weight_at_node(j, c, V):
    """``I_{j,c}(V) = int_0^1 P_j(c z) exp(-(1-z) c V) dz``."""
    if int(j) != j or j < 0:
        raise InvalidArgumentError(f"Legendre index must be a nonnegative integer, got {j!r}")
    if not 0.0 <= c <= 1.0:
        raise InvalidArgumentError(f"node must lie in [0, 1], got {c!r}")
    op = as_operator(V)
    phis = phi_set(op.scaled(-c), j + 1)
    return _maybe_scalar(V, _combine(phis, i_weight_at_node_terms(j, c)))

###########
#
# The building blocks: phi-functions, the Legendre-weighted integrals I_j and
# the quadrature rules whose nodes carry the collocation stages.
#
###########
import numpy as np

from efcm import gauss_legendre, i_weight, phi_set, radau_right
from efcm.matfun import LinearOperator
from efcm.quadrature import measured_exactness

###########
# phi_0 .. phi_K of a dense matrix come out of a single exponential of an
# augmented block matrix. The recurrence Z phi_{k+1} + I/k! = phi_k holds to
# rounding, even when Z is singular.
###########
Z = np.array([[0.0, 1.0], [0.0, 0.0]])
phis = phi_set(Z, 3)
for k in range(4):
    print(f"phi_{k}(Z) =\n{phis[k]}")
print("recurrence residuals:", [phis.recurrence_residual(k) for k in range(3)])

###########
# Symmetric tridiagonal operators (the discrete Laplacian) take a spectral
# route instead: eigendecompose once, then apply scalar phi-functions.
###########
N = 1000
dx = 1.0 / (N + 1)
lap = LinearOperator.tridiagonal(np.full(N, 2 / dx**2), np.full(N - 1, -1 / dx**2))
stiff = phi_set(lap.scaled(-0.1), 2)
print("spectral path:", stiff.spectral, " largest eigenvalue of A:", lap.eigh()[0].max())

###########
# I_j(V) is the j-th Legendre moment of exp(-(1-z)V). At V = 0 the moments
# collapse to (1, 0, 0, ...), which is how the classical limits appear later.
###########
print("I_j(0):", [round(i_weight(j, 0.0), 15) for j in range(5)])
print("I_j(0.7):", [i_weight(j, 0.7) for j in range(5)])

###########
# Gauss and right Radau rules on [0, 1], with their measured exactness.
###########
for rule in (gauss_legendre(3), radau_right(3)):
    print(rule.name, rule.nodes, rule.weights, "exact to degree", measured_exactness(rule))

###########
#
# As A -> 0 the exponential scheme turns into an ordinary implicit
# Runge-Kutta method: HBVM(k,n) in general, Gauss for n = k on Gauss nodes,
# Radau IIA on right Radau nodes.
#
###########
import numpy as np

from efcm import build_efcm, gauss_tableau, hbvm_tableau, radau_iia_tableau, radau_right
from efcm.quadrature import gauss_legendre
from efcm.scheme import w_transformation
from efcm.solver import max_convergent_stepsize


def limit_matrix(k, n, rule):
    scheme = build_efcm(np.zeros((1, 1)), 1.0, k, n, rule)
    return np.array([[scheme.a_block(i, l)[0, 0] for l in range(k)] for i in range(k)])


print(gauss_tableau(2))
print("EFCM(2,2) at A=0 minus Gauss:", np.abs(limit_matrix(2, 2, gauss_legendre(2)) - gauss_tableau(2).matrix).max())
print("EFCM(3,2) at A=0 minus HBVM(3,2):",
      np.abs(limit_matrix(3, 2, gauss_legendre(3)) - hbvm_tableau(3, 2).matrix).max())

###########
# Radau IIA through the W-transformation: A = W X W^{-1}, with W the
# Legendre Vandermonde matrix at the Radau nodes.
###########
print(radau_iia_tableau(3))
W, X, Q = w_transformation(3)
print("X_3 =\n", X)
print("|WQ - I| =", np.abs(W @ Q - np.eye(3)).max())
print("EFCM(3,3) on Radau nodes at A=0 minus Radau IIA:",
      np.abs(limit_matrix(3, 3, radau_right(3)) - radau_iia_tableau(3).matrix).max())

###########
# Step-size bound for the EFCM fixed-point iteration. It depends on the
# Lipschitz constant of g and the semigroup bound of A, not on ||A||.
###########
for n in (2, 3):
    print(f"n={n}: h < {max_convergent_stepsize(1.0, 1.0, 0.0, gauss_legendre(3), n):.6f} (L=1, Gauss-3)")

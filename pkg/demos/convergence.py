###########
#
# Global convergence of EFCM(2,2) on the Henon-Heiles model and on the
# semilinear heat equation, including the order reduction seen on the latter.
#
###########
import numpy as np

from efcm import IterationPolicy, build_efcm, henon_heiles, integrate, reference_solution, semilinear_heat
from efcm.harness import observed_orders
from efcm.problems import Problem
from efcm.solver import efcm_kernel

policy = IterationPolicy.tolerance(1e-14)
hs = [1 / 4, 1 / 8, 1 / 16, 1 / 32]


def run(problem, h, T):
    scheme = build_efcm(problem.A, h, 2, 2)
    return integrate(efcm_kernel(scheme, problem.g), problem, T, h, policy)


###########
# Henon-Heiles has no closed-form solution, so a tight Dormand-Prince run
# provides the reference on a grid of sample times shared by every h.
###########
hh = henon_heiles()
ts = np.linspace(0, 10, 41)
ref = reference_solution(hh, 10.0, 1e-13, times=ts)
errs = []
for h in hs:
    traj = run(hh, h, 10.0)
    errs.append(np.max(np.abs(traj.states[np.rint(ts / h).astype(int)] - ref)))
print("Henon-Heiles errors:", np.array(errs))
print("observed orders:   ", observed_orders(hs, errs))

###########
# The heat problem with exact solution x(1-x)e^t. Its source term does not
# vanish at the boundary, the stages only have order two, and the observed
# order drops to three instead of four.
###########
heat = semilinear_heat(200)
errs = [np.max(np.abs(run(heat, h, 1.0).final - heat.exact(1.0))) for h in hs]
print("heat errors:       ", np.array(errs))
print("observed orders:   ", observed_orders(hs, errs))

###########
# Same operator, but manufactured so that the solution is sin(pi x)e^t. Now
# the forcing is compatible with the boundary conditions and order four
# comes back.
###########
x = heat.params["grid"]


def smooth(t):
    return np.sin(np.pi * x) * np.exp(t)


def g(t, u):
    e = smooth(t)
    return 1 / (1 + u * u) + e + heat.A @ e - 1 / (1 + e * e)


compatible = Problem("heat-sin", heat.A, g, smooth(0.0), 1.0, exact=smooth)
errs = [np.max(np.abs(run(compatible, h, 1.0).final - smooth(1.0))) for h in hs]
print("compatible errors: ", np.array(errs))
print("observed orders:   ", observed_orders(hs, errs))

###########
#
# Long-time energy behaviour on the Henon-Heiles model with a large step.
#
###########
import numpy as np

from efcm import IterationPolicy
from efcm.harness import ExperimentSpec, energy_drift

###########
# h = 1.5 over [0, 3000]. With a single fixed-point sweep per step the
# iteration is not accurate enough at this step and the run blows up, so the
# stages are iterated to 1e-12.
###########
spec = ExperimentSpec("henon-heiles", ["efcm:2,2", "hbvm:2,2"], [1.5], 3000.0,
                      policy=IterationPolicy.tolerance(1e-12))
for record in energy_drift(spec):
    geh = record.drift[1:, 1]
    w = len(geh) // 10
    print(f"{record.method}: max |H_n - H_0| = {geh.max():.3e}, "
          f"first/last 10% means = {geh[:w].mean():.3e} / {geh[-w:].mean():.3e}, "
          f"iterations = {record.total_iterations}")

###########
# The one-sweep variant, for contrast: the failure is reported with the
# step where it happened rather than being dropped.
###########
spec = ExperimentSpec("henon-heiles", ["efcm:2,2"], [1.5], 3000.0, policy=IterationPolicy.fixed(1))
(record,) = energy_drift(spec)
print("fixed:1 ->", "diverged: " + record.message if record.diverged else "bounded")

"""Exponential Fourier collocation integrators for ``u' + A u = g(t, u)``."""
from .errors import (
    BudgetError,
    DegenerateRuleError,
    DivergenceError,
    EfcmError,
    EvaluationError,
    ExactnessError,
    InvalidArgumentError,
    StructureAbsentError,
)
from .matfun import LinearOperator, expm, i_weight, i_weight_at_node, phi_set
from .problems import Problem, fpu, henon_heiles, oscillator, semilinear_heat
from .quadrature import QuadratureRule, gauss_legendre, radau_right
from .scheme import ButcherTableau, EfcmScheme, build_efcm, gauss_tableau, hbvm_tableau, radau_iia_tableau
from .solver import IterationPolicy, Trajectory, efcm_step, integrate, irk_step, reference_solution

__version__ = "0.1.0"

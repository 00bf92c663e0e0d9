"""geozeta: indefinite binary quadratic forms, closed geodesics on the modular
surface, holomorphic lifts of the Eisenstein series, hyperbolic periods and
partial zeta functions of real quadratic ideal classes."""

from .quadexact import QuadExact
from .forms import (ClassTable, Cycle, Form, FormError, ReductionGuardError, UnimodularMatrix,
                    cycle_of, enumerate_reduced, fundamental_unit, is_reduced, narrow_classes,
                    pell_fundamental, reduce, stabilizer_generator, transform, wide_class_table)
from .geodesics import arc_points, period_length, point_at, shift_matrix
from .analytic import (BranchCutError, DomainError, PartialSum, TruncationParams, c_of_s,
                       eisenstein, lift_series, principal_power, riemann_zeta)
from .periods import (Kernel, QuadratureParams, cusp_decomposition, hyperbolic_period,
                      period_via_eisenstein, period_via_lift, phi_regularized,
                      unit_product_identity)
from .heckezeta import (IdealBasis, ZetaRequest, hecke_theorem_check, ideal_of_form,
                        partial_class_zeta, phi_beta, wide_grouping)

__version__ = "0.1.0"

__all__ = [
    "BranchCutError", "ClassTable", "Cycle", "DomainError", "Form", "FormError", "IdealBasis",
    "Kernel", "PartialSum", "QuadExact", "QuadratureParams", "ReductionGuardError",
    "TruncationParams", "UnimodularMatrix", "ZetaRequest", "arc_points", "c_of_s",
    "cusp_decomposition", "cycle_of", "eisenstein", "enumerate_reduced", "fundamental_unit",
    "hecke_theorem_check", "hyperbolic_period", "ideal_of_form", "is_reduced", "lift_series",
    "narrow_classes", "partial_class_zeta", "pell_fundamental", "period_length",
    "period_via_eisenstein", "period_via_lift", "phi_beta", "phi_regularized", "point_at",
    "principal_power", "reduce", "riemann_zeta", "shift_matrix", "stabilizer_generator",
    "transform", "unit_product_identity", "wide_class_table", "wide_grouping",
]

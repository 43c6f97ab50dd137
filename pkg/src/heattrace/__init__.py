"""Small-time expansion coefficients for a regularized two-particle heat trace.

The package computes the coefficients a_n (equivalently b_n) of the expansion
of tr(e^{-t H_rho} - e^{-t H_0}) in powers of sqrt(t), for a one-dimensional
two-particle contact interaction modulated by a smooth compactly supported
profile rho, and cross-checks them against direct quadrature of the
regularized resolvent trace at large spectral parameter.
"""

from .coefficients import (CoefficientCell, CoefficientTable, MultiIndex,
                           SignAssignment, a_n, b_m, b_nl, c_coefficient,
                           closed_form_b0_b1, compute_table, multi_indices,
                           phi_inverse, rho_ns, rho_ns_axis_derivative,
                           sign_assignments)
from .potentials import (ConfigError, Potential, bump, eval, fd_derivative,
                         from_dict, integrate_power, max_abs, poly_bump,
                         scaled, shifted, support, sum_of, to_dict)

__all__ = [
    "CoefficientCell", "CoefficientTable", "MultiIndex", "SignAssignment",
    "a_n", "b_m", "b_nl", "c_coefficient", "closed_form_b0_b1",
    "compute_table", "multi_indices", "phi_inverse", "rho_ns",
    "rho_ns_axis_derivative", "sign_assignments",
    "ConfigError", "Potential", "bump", "eval", "fd_derivative", "from_dict",
    "integrate_power", "max_abs", "poly_bump", "scaled", "shifted", "support",
    "sum_of", "to_dict",
]

__version__ = "0.1.0"

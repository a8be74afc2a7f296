"""Anisotropic mixed-norm Sobolev machinery and first Dirichlet eigenvalues on boxes.

Submodules:

``exponents``   exponent vectors and the critical-exponent conditions
``grid``        tensor grids, zero-extended grid functions, field files
``norms``       mixed norms, gradient norms, directional fractional seminorms
``variations``  first variations (duality map, anisotropic and fractional Laplacians)
``eigensolver`` Rayleigh-quotient minimization and the s -> 1 sweep
``cli``         the ``anisoeig`` command-line front end
"""

from .exponents import (ConditionError, ExponentVector, FractionalVector, ValidityReport,
                        conjugate, critical_exponent, fractional_critical_exponent,
                        harmonic_mean, validate, vec_product)
from .grid import (BoxDomain, FieldFormatError, GridFunction, TensorGrid, build_grid,
                   forward_diff, forward_diff_adjoint, parse_field, read_field, sample,
                   shift_diff, write_field, zeros)
from .norms import (FractionalKernel, FractionalTerms, PartialNormStack, bbm_weights,
                    directional_norms, fractional_directional, fractional_kernel,
                    fractional_seminorm, fractional_terms, gradient_norm, mixed_norm,
                    partials)
from .variations import (F_p, GateauxReport, H_prime_apply, H_prime_residual,
                         Hs_prime_apply, Hs_prime_residual, gateaux_check, pairing)
from .eigensolver import (SolveConfig, SolveReport, SweepRow, SweepTable, minimize_fractional,
                          minimize_local, rayleigh_fractional, rayleigh_local, s_sweep)

__version__ = "0.1.0"

"""
Numerical core of MuskatLab.

This package contains the grids and spectral operators, the 1-D and 2-D
interface right-hand sides, the time integrators and the diagnostics.
"""

from .fields import (
    DomainKind, Regime, GridSpec1D, GridSpec2D, ScalarField1D, ScalarField2D, PhysParams,
    Spectrum1D, Spectrum2D, FieldNorms, make_grid, make_grid_2d, make_field,
    field_from_function, transform, inverse_transform, derivative, gradient, lambda_op,
    riesz, linear_evolve, norms, grid_mean, shift, reflect, refine, interpolate
)
from .muskat1d import (
    NodeOffset, SingularRule1D, Quadrature1DConfig, SlopeDecomposition, ExtremumValue,
    periodized_kernel, periodized_height_kernel, image_sum_kernel, rhs_periodic, rhs_line,
    rhs_1d, rhs_at_extremum, i2_residual, slope_rhs, n2_at, arctan_form_rhs,
    equivalent_form_rhs
)
from .muskat2d import (
    SingularRule2D, Quadrature2DConfig, VelocitySample, VelocityProbe, ExtremumValue2D,
    rhs_2d, rhs_2d_at_extremum, reduce_consistency, velocity_field, velocity_at_extremum,
    parse_points, format_samples
)
from .diagnostics import (
    BoundKind, DecayModel, TimeSeriesRecord, Verdict, BoundConstants, DecayFit, observe,
    bound_constants, check_max_principle, check_exponential_bound, check_algebraic_bound,
    check_l1_conservation, check_slope_bound, check_growth_rate, check_extremum_rate,
    check_threshold, fit_decay, mode_amplitude, parse_report_line
)
from .timestepping import (
    AUTO, Scheme, RhsKind, Termination, StepControl, Trajectory, Integrator, step_rk4,
    step_integrating_factor, integrate, measure_order
)

__all__ = [
    # Fields
    'DomainKind', 'Regime', 'GridSpec1D', 'GridSpec2D', 'ScalarField1D', 'ScalarField2D',
    'PhysParams', 'Spectrum1D', 'Spectrum2D', 'FieldNorms', 'make_grid', 'make_grid_2d',
    'make_field', 'field_from_function', 'transform', 'inverse_transform', 'derivative',
    'gradient', 'lambda_op', 'riesz', 'linear_evolve', 'norms', 'grid_mean', 'shift',
    'reflect', 'refine', 'interpolate',

    # 1-D
    'NodeOffset', 'SingularRule1D', 'Quadrature1DConfig', 'SlopeDecomposition',
    'ExtremumValue', 'periodized_kernel', 'periodized_height_kernel', 'image_sum_kernel',
    'rhs_periodic', 'rhs_line', 'rhs_1d', 'rhs_at_extremum', 'i2_residual', 'slope_rhs',
    'n2_at', 'arctan_form_rhs', 'equivalent_form_rhs',

    # 2-D
    'SingularRule2D', 'Quadrature2DConfig', 'VelocitySample', 'VelocityProbe',
    'ExtremumValue2D', 'rhs_2d', 'rhs_2d_at_extremum', 'reduce_consistency',
    'velocity_field', 'velocity_at_extremum', 'parse_points', 'format_samples',

    # Diagnostics
    'BoundKind', 'DecayModel', 'TimeSeriesRecord', 'Verdict', 'BoundConstants', 'DecayFit',
    'observe', 'bound_constants', 'check_max_principle', 'check_exponential_bound',
    'check_algebraic_bound', 'check_l1_conservation', 'check_slope_bound',
    'check_growth_rate', 'check_extremum_rate', 'check_threshold', 'fit_decay',
    'mode_amplitude', 'parse_report_line',

    # Time stepping
    'AUTO', 'Scheme', 'RhsKind', 'Termination', 'StepControl', 'Trajectory', 'Integrator',
    'step_rk4', 'step_integrating_factor', 'integrate', 'measure_order'
]

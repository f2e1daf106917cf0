"""Fourier-multiplier numerics for fractional Gagliardo energies.

Modules, bottom up: ``quadrature`` (adaptive Gauss-Kronrod and oscillatory
tails), ``symbols`` (radial multipliers), ``fields`` (periodic grids and
test profiles), ``energies``, ``operators``, ``flows`` and ``cli``.
"""
from .quadrature import DEFAULT_CONFIG, IntegralResult, QuadratureConfig, QuadratureError
from .symbols import (
    LIMIT,
    Constants,
    PrecisionError,
    SymbolTable,
    L_symbol,
    build_table,
    check_m_bounds,
    cos_tail,
    defect_multiplier,
    frac_constant,
    limit_symbol,
    m_multiplier,
    phi_s,
    rate_symbol,
    sigma_factor,
    tail_T,
    unit_ball_volume,
)
from .fields import Field, GridSpec, Profile, Spectrum, default_grid, gaussian, sample, smooth_bump, spectral_decay
from .energies import (
    EnergyBreakdown,
    DomainVerdict,
    decompose_rate,
    domain_membership,
    gagliardo_direct,
    gagliardo_fourier,
    limit_functional,
    rate_functional,
)
from .operators import OperatorSpec, apply_L_realspace, apply_spectral, first_variation_check, frac_laplacian, limit_operator, rate_operator
from .flows import FlowSpec, Trajectory, convergence_study, dissipation_audit, evolve, trajectory_distance

__version__ = "0.1.0"

"""Stability and Hopf bifurcation analysis of a delayed blood-cell
production model: equilibria, transcendental characteristic equation,
center-manifold normal form with first Lyapunov coefficient, and direct
method-of-steps simulation."""

from .model import (
    ModelParameters,
    EquilibriumReport,
    TaylorCoefficients,
    derive_k,
    gamma_from_k,
    beta_derivatives,
    equilibria,
    taylor_coefficients,
)
from .linstab import (
    CharacteristicTriple,
    StabilityVerdict,
    characteristic_triple,
    char_value,
    T_eval,
    T_inv,
    omega0,
    classify_x1,
    classify_x2,
    g_of_r,
    char_root_newton,
    rightmost_root_estimate,
)
from .hopf import (
    HopfPoint,
    NormalFormData,
    hopf_from_pqk,
    find_hopf_r,
    transversality,
    psi1_zero,
    bilinear_pairing,
    f_coefficients,
    w_boundary_values,
    w20_closed_form,
    w11_closed_form,
    lyapunov_l1,
    criticality_report,
)
from .ddesim import (
    HistoryFunction,
    Trajectory,
    OrbitMetrics,
    default_history,
    constant_history,
    integrate,
    orbit_metrics,
    amplitude_scaling,
    write_trajectory_csv,
)

__version__ = "0.1.0"

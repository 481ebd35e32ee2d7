"""Infinite Atlas model and its Stefan hydrodynamic limit."""

from ._core import (
    ParameterError,
    StefanSolution,
    dstar,
    fd_solve,
    g,
    integrated_profile,
    phi_cdf,
    sample_ppp_half_line,
    simulate,
    solve_kappa,
    u_star,
    y_star,
)

__version__ = "0.1.0"

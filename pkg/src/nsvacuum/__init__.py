"""Symmetrized 1D compressible Navier-Stokes with degenerate viscosity and vacuum."""

from .grid import FD2, FD4, SPECTRAL, DiffOp, Grid, NormSpec, deriv, norm
from .model import PhysParams, PrimState, SymState, to_primitive, to_symmetric, validate_params
from .solvers import SimConfig, Trajectory, cfl_dt, run, solve_linearized

__version__ = "0.1.0"

"""Numerical laboratory for U(1)-invariant peakon equations."""

from .grid import BlownUpStateError, ComplexPair, Grid, GridFunction, InvalidParameterError, lp_norm
from .helmholtz import HelmholtzKernel, kernel_sum_u, kernel_sum_ux, kernel_sums, u_from_m, ux_from_m
from .fields import FieldBundle, assemble_fields
from .spectral import MomentumState, SpectralOptions
from .particles import ParticleEnsemble, init_particles
from .thresholds import BlowupThresholds

__all__ = [
    "BlowupThresholds",
    "BlownUpStateError",
    "ComplexPair",
    "FieldBundle",
    "Grid",
    "GridFunction",
    "HelmholtzKernel",
    "InvalidParameterError",
    "MomentumState",
    "ParticleEnsemble",
    "SpectralOptions",
    "assemble_fields",
    "init_particles",
    "kernel_sum_u",
    "kernel_sum_ux",
    "kernel_sums",
    "lp_norm",
    "u_from_m",
    "ux_from_m",
]

"""Sphere-valued lattice spin fields: exact unit-vector decomposition, sparse
average correction and numerical homogenization of finite-range energies."""
from .average_correction import CorrectionParams, CorrectionReport, correct_average
from .energy import EnergyBreakdown, bond_count, delta_energy, energy_density, total_energy
from .kernels import (
    InteractionKernel,
    dirac_alignment,
    ferromagnetic_xy,
    kernel_from_config,
    orientational_toy,
    periodic_mixture,
)
from .lattice import LatticeDomain, SpinField, discrete_average, interaction_pairs
from .sphere_geom import decompose_into_unit_sum, random_unit, unit_pair_summing_to

__version__ = "0.1.0"

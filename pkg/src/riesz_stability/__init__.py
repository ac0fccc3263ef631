"""Numerical checks of quantitative stability for the Riesz energy of the ball."""

from .families import FAMILIES, make_family, perturbed_ball
from .functionals import DeficitReport, deficit, first_variation, second_variation, spherical_V, spherical_W, toy_bound
from .funk_hecke import beta_direct, beta_table, radial_multipliers
from .mc import mc_energy, mc_second_variation
from .riesz_kernel import KernelParams, ball_energy, ball_potential, riesz_constant
from .sphere_math import ZonalFn, angular_grid, unit_ball_volume, unit_sphere_area
from .star_sets import RaySet, asymmetry, mass_profiles, median_center, scale_to_unit
from .surgery import SurgeryReport, surgery_reduce

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "DeficitReport",
    "KernelParams",
    "RaySet",
    "SurgeryReport",
    "ZonalFn",
    "angular_grid",
    "asymmetry",
    "ball_energy",
    "ball_potential",
    "beta_direct",
    "beta_table",
    "deficit",
    "first_variation",
    "make_family",
    "mass_profiles",
    "mc_energy",
    "mc_second_variation",
    "median_center",
    "perturbed_ball",
    "radial_multipliers",
    "riesz_constant",
    "scale_to_unit",
    "second_variation",
    "spherical_V",
    "spherical_W",
    "surgery_reduce",
    "toy_bound",
    "unit_ball_volume",
    "unit_sphere_area",
]

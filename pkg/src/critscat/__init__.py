"""Low-energy spectral and scattering asymptotics for radial operators with critical inverse-square decay."""

from .potentials import PotentialSpec, assemble_sector_potential, preset
from .scattering import fit_threshold_asymptotics, phase_shift, phase_shift_curve, theoretical_constants
from .sectors import Sector, classify_threshold, reduce

__version__ = "0.1.0"

__all__ = [
    "PotentialSpec",
    "Sector",
    "assemble_sector_potential",
    "classify_threshold",
    "fit_threshold_asymptotics",
    "phase_shift",
    "phase_shift_curve",
    "preset",
    "reduce",
    "theoretical_constants",
]

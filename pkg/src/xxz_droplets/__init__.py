"""Droplet and kink band expansions for the Ising-like XXZ chain.

Fixed-point expansions build the lowest band of the m-down-spin sector
(kink states on the open chain, droplet states on the ring) and every
output can be cross-checked against a built-in exact-diagonalization
oracle.
"""

from .chain import (ChainGeometry, OPEN, PERIODIC, block_mask, boundary_bonds,
                    flip_neighbors, lambda_open, mask_to_sites, sites_to_mask,
                    sym_diff, translate, wall_count)
from .config_space import ConfigEntry, ConfigSpace, enumerate_space
from .droplet import (DispersionResult, DropletCoefficients, DropletParams,
                      DropletResult, apply_F_droplet, assemble_eigenvector,
                      certify_contraction_droplet, dispersion, droplet_norm,
                      one_magnon_dispersion, solve_droplet)
from .errors import ComplexLeak, DegenerateFit, NonConvergence, SectorTooLarge
from .kink import (KinkCoefficients, KinkParams, KinkResult, apply_F_kink,
                   certify_contraction_kink, kink_norm, solve_kink)
from .oracle import (DEFAULT_SECTOR_CAP, BandSummary, SectorBasis, SpectrumBlock,
                     build_open_hamiltonian, build_periodic_blocks,
                     build_periodic_dense, lowest_band, sector_basis)
from .verification import (ComparisonReport, ComparisonRow, KinkCheck,
                           ResidualSweep, ScalingFit, StabilityResult,
                           bandwidth_scaling, check_kink_ground_energy,
                           compare_droplet_band, comparison_tolerance,
                           fourier_stability, residual_sweep)

__version__ = "0.1.0"

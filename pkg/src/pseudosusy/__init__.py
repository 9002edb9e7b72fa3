"""Non-Hermitian 1D Dirac couplings: partner-operator factorization,
complex spectra, and machine-checked operator identities."""

from .discretize import BandedMatrix, Grid, build_grid, dirac_matrix, \
    first_order_ops, parity_matrix, schrodinger_matrix
from .eigen import EigenPair, Spectrum, eigen_dense, filter_physical, match_spectra
from .models import ModelSpec, analytic_eigenfunction, analytic_levels, \
    custom_sampled, dirac_levels, partner_potential, pt_oscillator, \
    pt_residual_partner, pt_residual_potential, scalar_tanh, scarf2, \
    superpotential_value
from .spectra import dirac_spectrum, sector_spectrum
from .verify import VerificationReport, run_checks

__version__ = "0.1.0"

"""Exact Bethe-ansatz treatment of spin-changing collisions and the active interferometers built on them."""
from .bethe import BetheSpectrum, BetheState, Rapidities, bethe_energy, richardson_residual, solve_rapidities
from .eigenbasis import SpectralBasis, alpha_coefficients, basis_from_diagonalisation, build_spectral_basis
from .errors import (BasisQualityError, CalibrationError, ConfigError, ConvergenceError, DivergenceError,
                     ModelError, NoDominantPeakError, NormalizationError, PoleError, SCCError)
from .interferometer import (OutputState, PhaseCalibration, SequenceConfig, calibrate, estimate_fringe_frequency,
                             fock_probabilities, observable_moments, output_state, output_state_free,
                             output_state_quasifree, seeded_pair_number)
from .kernels import BACKEND
from .metrology import (IdealReference, SensitivityPoint, fisher_information, hellinger_distance,
                        hellinger_sensitivity_proxy, ideal_su11_sensitivity, phase_sensitivity_error_propagation,
                        sensitivity_sweep)
from .model import (FockNormTable, ModelParams, SectorMatrix, build_conserved_charges, build_hamiltonian,
                    exact_spectrum, fock_norms)

__version__ = "0.1.0"

"""Localization phenomenology of 1D non-Hermitian quasiperiodic lattices."""

from .models import (TAU, BoundaryCondition, FibonacciApprox, Kind,
                     LatticeMatrix, ModelSpec, build_matrix, clean_model,
                     fibonacci_approx, fibonacci_index, h1_amplitude, h1_spec,
                     h2_bond, h2_spec, hatano_nelson, hopping, save_triplets,
                     uniform_chain)
from .spectral import (EigenSet, EigenSolverError, SpectralMatch, eig,
                       fractal_dimension, match_spectra, nearest_eigenpair)
from .transfer import (LyapunovSpectrum, Scenario, SingularTransferError,
                       TransferMatrix, bloch_roots, classify_pattern,
                       lyapunov_exponents, lyapunov_spectrum, shift_check,
                       supercell_transfer, transfer_matrix)
from .duality import (DualityReport, DualPair, DualTransform, UnitarityError,
                      Verdict, dual_matrix, duality_report, dualize)
from .analysis import (DegenerateFitError, LocalizationFit, ScalingCurve,
                       localization_fit, scaling_sweep)

__version__ = "0.1.0"

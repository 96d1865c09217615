"""Eigenvalues of 1-D two-channel Schrodinger systems with a level crossing.

Three independent routes to the spectrum in an energy window above the
crossing, cross-validated: semiclassical predictions (Bohr-Sommerfeld roots
and the h^(3/2) splitting law), exact ODE shooting on the coupled system,
and a banded-matrix grid eigensolver.
"""

from .model import (CouplingSpec, CrossingModel, Mirror, Polynomial,
                    PotentialSpec, ShiftedHarmonic, ValidationReport,
                    eval_potential, eval_potential_with_derivative, load_model,
                    model_from_dict, reference_model, truncation_half_width,
                    validate_model)
from .actions import (ActionSet, TurningPoints, action, action_derivative,
                      action_set, b_action, partial_actions, phase,
                      turning_points)
from .predict import (BsRoot, SplittingPrediction, Tau0, bohr_sommerfeld_roots,
                      predicted_pairs, quantization_residual,
                      splitting_amplitude, tau0)
from .monodromy import (CrossingData, TransferData, WkbAmplitudes,
                        crossing_matrices, kappa_leading, lambda_matrix,
                        monodromy_roots, schrodinger_crossing_data,
                        transport_amplitude, turning_factor, wkb_leading)
from .shooting import (StateVec, WronskianResult, decaying_init, integrate,
                       rhs, shooting_roots, wronskian)
from .grid_eig import (BandedSymmetric, EigenReport, Grid, assemble,
                       converged_window, eigen_window)
from .harness import (FitResult, MatchReport, SplitRecord, fit_scaling,
                      match_spectra, measure_splittings, run_sweep)

__version__ = "0.1.0"

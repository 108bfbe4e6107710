"""Two-mode photon-number fluctuation matrices and nonclassicality criteria
in a truncated Fock space."""

from .errors import (CutoffTooSmall, DecompositionMismatch, DimensionMismatch,
                     IdentityMismatch, ImaginaryResidue, NonclassError,
                     NonUnitaryInput, OutOfRange, VacuumMode)
from .fock import (FockSpace, MatrixOperator, State, annihilator,
                   coherent_state, expect, kerr_evolve, make_space,
                   number_state, pair_coherent, squeeze_unitary,
                   squeezed_thermal, squeezed_vacuum, thermal_state)
from .moments import (ORDERING, CovarianceMatrix, MomentMatrix,
                      OrderingTensors, QMatrix, StokesVector,
                      commutator_check, covariance_matrices,
                      factorial_moments, gamma_moment_matrix, photon_dist,
                      q_matrix, stokes_vector)
from .su2 import (ModeVector, U2Element, XiVector, single_mode_number_ops,
                  transform_gamma, u2_unitary, wigner_d, xi_vector)
from .classify import (FluctuationMatrix, LeeReport, Verdict, VerdictConfig,
                       a_matrix, factorial_inequality_report, lee_report,
                       least_eigenvalue, local_pn_scan, local_pn_value,
                       mandel_q, min_projection, phase_insensitive_submatrix,
                       projection_value, verdict)
from .oracles import (OracleResult, a_matrix_squeezed_thermal,
                      a_matrix_squeezed_vacuum, reference_q, squeezing_onset,
                      subpoissonian_onset)

__version__ = "0.1.0"

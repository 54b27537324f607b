"""Topological amplification toolkit for dissipative bosonic chains.

Builds non-Hermitian coupling matrices for driven-dissipative cavity
arrays, finds their edge singular modes and steady states, classifies
the underlying Bloch topology, certifies dynamical stability, solves
the second-moment Lyapunov problem, maps a two-array parametric
platform onto the effective chain, and scripts the edge-profile,
phase-diagram, and disorder experiments behind the `topamp` CLI.
"""

from ._version import __version__
from .errors import (DivergenceError, EigenConvergenceError, GaplessError,
                     IllConditionedError, NoEdgeModeError, NumericalError,
                     ParityError, SingularFloorError, TopampError,
                     UnstableError, ValidationError, WindingIntegralityError)
from .experiments import (DisorderStats, EdgeProfile, PhaseDiagram,
                          PhasePoint, disorder_experiment,
                          edge_profile_experiment, phase_diagram,
                          realization_count, realization_seed)
from .floquet import (EliminationSeries, FloquetParams, FullChainModel,
                      HierarchyReport, build_full_chain, check_hierarchy,
                      eliminate_auxiliary, map_params,
                      steady_state_agreement, validate_elimination)
from .model import (ChainParams, CouplingMatrix, Drive, LatticeModel,
                    add_diagonal_disorder, as_drive, build_chain,
                    build_custom, coupling_matrix, drive_at_site,
                    is_parity_symmetric, parity_matrix, parity_reverse)
from .moments import (CoherenceTrajectory, CorrelationMatrix,
                      CorrelationTrajectory, evolve_coherences,
                      evolve_correlations, lyapunov_steady)
from .spectral import (SvdResult, effective_hamiltonian,
                       eigenpairs_from_svd, log10_smallest_singular,
                       singular_gap, svd)
from .stability import (SpectrumReport, spectrum_numeric,
                        spectrum_open_analytic, spectrum_periodic,
                        stability_threshold, stability_window_1d,
                        stable_topological_overlap)
from .steady import (SshAnalytics, SteadyState, edge_rank1, gain,
                     ssh_analytic_steady_state, ssh_analytics,
                     steady_state_direct, steady_state_svd)
from .topology import (BlochModel, SymmetryClass, bloch_from_chain,
                       classification_report, classify_symmetry,
                       gap_minimum, topological_window_1d, winding_number)

__all__ = [name for name in dir() if not name.startswith("_")]

"""Widom-Rowlinson lattice toolkit: uniqueness, phase transition and dynamical Gibbs checks."""
from .exceptions import (DegenerateConditioningError, DivergenceError, SizeError,
                         UnrepresentableError, UnsupportedVariantError, WRLabError)
from .lattice import Box, bonds_touching, neighbors, outer_boundary
from .model import (AprioriMeasure, ModelParams, SpinConfiguration, Variant,
                    alpha_from_lambda_h, alpha_to_lambda_h, hamiltonian_sc,
                    hardcore_indicator, single_site_kernel, spec_kernel)
from .dobrushin import (DobrushinReport, SimplexGrid, cij_hardcore_bruteforce, cij_softcore,
                        cij_softcore_bruteforce, comparison_matrix, dobrushin_report, g_function,
                        hardcore_uniqueness_classifier, region_scan, threshold_alpha)
from .peierls import (PeierlsCertificate, certify_phase_transition, find_critical_lambda,
                      peierls_constant, upper_bound_a)
from .dynamics import (alpha_tilde, checkerboard, evolve_config, first_layer_constrained_check,
                       gibbs_all_times, h_t, q_t, t0_softcore, t_G, transition_matrix,
                       transition_times)
from .cluster import (ClusterDecomposition, TwoLayerConfig, badness_probe, cluster_decompose,
                      kernel_finite_volume, kernel_gamma_f, kernel_gamma_inf,
                      two_layer_conditional_bruteforce)
from .sampler import (ChainSpec, OriginEstimate, estimate_percolation_probability,
                      heat_bath_sweep, percolation_probe, run_chain, run_chains)

__version__ = "0.1.0"

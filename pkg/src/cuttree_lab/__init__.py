"""Simulation laboratory for vertex-fragmentation of conditioned
Galton-Watson trees and their cut-trees."""

__version__ = "0.1.0"

from .errors import CutTreeLabError, DomainError, GuardError, InputError, \
    RetryExhaustedError
from .offspring import OffspringModel, make_custom_critical, \
    make_geometric_critical, make_power_tail_critical, model_from_config, \
    moments, scaling_sequence
from .trees import PlaneTree, TreeCodings, decode_lukasiewicz, \
    encode_codings, enumerate_plane_trees, point_decompose, reduced_shape, \
    symmetric_index
from .gw_sampler import exact_walk_pmf, forest_size_pmf, sample_conditioned, \
    sample_pointed_gwstar
from .fragmentation import FragmentationTrace, component_trajectories, \
    run_coupled_discrete, run_edge_variant, run_vertex_continuous, \
    run_vertex_discrete
from .cut_tree import CutTree, build_cut_tree, cut_distance, \
    naive_cut_distance_oracle
from .moddist import delta_prime, moddist_identity_stats, tail_mass_integral, \
    tail_mass_profile
from .stats import DistanceObservables, ExperimentReport, \
    check_coupling, check_cut_distance_oracle, check_cyclic_lemma, \
    check_emn_formula, check_gwstar_transform, energy_distance, \
    ks_permutation_pvalue, ks_two_sample, run_theorem1_experiment, \
    run_theorem2_experiment, sample_distance_observables

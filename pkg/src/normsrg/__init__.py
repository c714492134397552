"""Pairings, directional angles and sampled scaled relative graphs in R^n."""
from .case_studies import (A1, A_INF, BUILTIN_OPERATORS, Mdp, bellman_operator, bellman_study,
                           build_F_p, builtin_operator, monotonicity_panels, random_mdp,
                           value_iteration)
from .geometry import (cos_left, cos_right, facet_label, gain_phase_sup, induced_norm,
                       log_norm_closed_form, log_norm_lumer_estimate, phase_monotone_check,
                       symmetric_eigenvalues)
from .pairings import (PairingSpec, jmt_pair_numeric, norm, pair, parallelogram_defect,
                       peak_info)
from .persist import read_cloud, write_cloud
from .plotting import render_svg
from .sampling import IncrementSampler, unit_sphere_samples
from .srg import (FiniteGraph, MatrixOperator, PointwiseOperator, Property, SrgCloud,
                  boxplus_contains, certify, contraction_factor, diamond_contains,
                  estimate_sigma, sample_srg, srg_invert, srg_scale)

__version__ = "0.1.0"

__all__ = [
    "A1", "A_INF", "BUILTIN_OPERATORS", "Mdp", "bellman_operator", "bellman_study",
    "build_F_p", "builtin_operator", "monotonicity_panels", "random_mdp", "value_iteration",
    "cos_left", "cos_right", "facet_label", "gain_phase_sup", "induced_norm",
    "log_norm_closed_form", "log_norm_lumer_estimate", "phase_monotone_check",
    "symmetric_eigenvalues",
    "PairingSpec", "jmt_pair_numeric", "norm", "pair", "parallelogram_defect", "peak_info",
    "read_cloud", "write_cloud", "render_svg", "IncrementSampler", "unit_sphere_samples",
    "FiniteGraph", "MatrixOperator", "PointwiseOperator", "Property", "SrgCloud",
    "boxplus_contains", "certify", "contraction_factor", "diamond_contains",
    "estimate_sigma", "sample_srg", "srg_invert", "srg_scale",
]

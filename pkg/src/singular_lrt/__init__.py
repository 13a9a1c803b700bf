"""Likelihood ratio tests for three-taxon species tree models near singularities."""
from ._errors import DomainError
from .coalescent import (
    GeneTreeProbs,
    branch_length_from_phi,
    gene_tree_probabilities,
    phi_from_branch_length,
)
from .models import Model, MleResult, TrinomialCounts, constrained_mle, lr_statistic, unconstrained_mle
from .geometry import TransformParams, phi_from_mu, sample_lambda_tilde, transform_params
from .densities import DensitySpec, cdf, pdf, pvalue, struve_m0
from .calibration import mu_threshold, threshold_table, total_variation
from .simulation import EcdfSeries, ExperimentConfig, multinomial_sample, run_experiment, sup_uniform_deviation

__version__ = "0.1.0"

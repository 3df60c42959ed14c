"""Exact experiments on random symmetric integer matrices."""
__version__ = "0.1.0"

from .chain import (ChainStep, ChainTrace, SurveyRow, conditional_increment_means,
                    conditional_increment_stats, exhaustive_singularity, next_increment_law,
                    run_chain, run_chains, survey_singularity, x_decay_estimate)
from .concentration import (ConcentrationReport, Interval, LinearForm, MonteCarlo, PolyForm,
                            atom_linear_exact, atom_poly, decoupling_check, decoupling_sweep,
                            erdos_bound, lo_experiment, poly_lo_exponent, quad_lo_bound)
from .errors import CapabilityError, ContractViolation, DimensionError, GuardError
from .linalg import (QuadraticFormInt, RankCertificate, adjugate, augmented_det_form,
                     certify_rank, det_exact, nullspace_rational, rank_exact, rank_mod_p)
from .matrix import (BERNOULLI01, RADEMACHER, AugmentationVector, EntryDistribution, SymMatrix,
                     augment, rho_of, sample_symmetric)
from .report import parse_table, render_table
from .structure import (StructuralClass, StructureTag, classify, classify_nonsingular,
                        classify_singular, compute_N, count_01_points_in_span,
                        min_dependent_support, row_null_support)

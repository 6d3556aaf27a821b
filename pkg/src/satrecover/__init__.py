"""Sparse signal recovery from compressive measurements with Gaussian noise
and sensor saturation, via censored-Gaussian likelihood maximization."""

from .bounds import (BoundInputs, GradNormProbe, RscReport, bregman_divergence,
                     c1_estimate, grad_norm_probe, rec_estimate, rsc_check,
                     theorem3_magnitude, thm4_bound, thm4_bound_appendix)
from .estimators import (CrossValResult, EstimatorError, EstimatorSpec,
                         LikelihoodMaxEstimator, RecoveryResult,
                         SaturationConsistency, SaturationIgnorance,
                         SaturationRejection, SaturationSparsity,
                         crossval_lambda, effective_matrix, recover)
from .gauss import StdGaussEval, inverse_mills, log_norm_cdf, log_norm_sf, norm_pdf
from .harness import SweepRecord, SweepSpec, aggregate, run_sweep
from .model import (MeasurementSet, SensingMatrix, SparseSignal, calibrate_tau,
                    clip, dct_matrix, gen_sensing, gen_signal, measure, rrmse, zeta)
from .objective import ObjectiveEval, eval_grad, eval_loss, eval_loss_batch, eval_objective
from .solvers import (ResidualConstrainedResult, SolverConfig, SolverError,
                      SolveTrace, fista, lasso, soft_threshold,
                      solve_residual_constrained)

__version__ = "0.1.0"
